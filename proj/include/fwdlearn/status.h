#ifndef FWDLEARN_STATUS_H_
#define FWDLEARN_STATUS_H_

#include <stdexcept>
#include <string>

namespace fwdlearn {

// process exit codes used by the command line tool
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDataError = 3,
  kExitTrainingFault = 4,
};

// base of all library errors
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const = 0;
};

// bad configuration: unknown keys, unknown policy names, invalid counts
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return kExitConfigError; }
};

// malformed or unusable data: parse failures, shape mismatches, empty datasets
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return kExitDataError; }
};

// input outside an operation's numeric domain (non-finite state, out-of-bounds action)
class InputDomainError : public DataError {
 public:
  using DataError::DataError;
};

// no episode satisfies the length requirements of the caller
class EmptyDatasetError : public DataError {
 public:
  using DataError::DataError;
};

// non-finite loss, non-finite action from an agent
class TrainingFault : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return kExitTrainingFault; }
};

// API misuse, e.g. stepping an environment after its terminal step
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fwdlearn

#endif  // FWDLEARN_STATUS_H_
