#ifndef FWDLEARN_METRICS_H_
#define FWDLEARN_METRICS_H_

#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fwdlearn {

inline constexpr std::string_view kMetricsHeader =
    "round,critic_loss,actor_loss,alpha,supervised_mse,rmse_rollout,"
    "mean_rollout_reward,total_env_reward,wall_ms";

// One row per episode (RL) or round (SL). Unset fields are written empty.
struct MetricsRecord {
  int round = 0;
  std::optional<double> critic_loss;
  std::optional<double> actor_loss;
  std::optional<double> alpha;
  std::optional<double> supervised_mse;
  std::optional<double> rmse_rollout;
  std::optional<double> mean_rollout_reward;
  std::optional<double> total_env_reward;
  std::optional<double> wall_ms;

  bool operator==(const MetricsRecord&) const = default;
};

std::string FormatMetricsRow(const MetricsRecord& record);
// throws DataError naming the line
MetricsRecord ParseMetricsRow(std::string_view line, int line_no);

// Appends rows and flushes after each one.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void Append(const MetricsRecord& record);

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<MetricsRecord> ReadMetricsCsv(const std::string& path);

// %.17g, or empty for an absent value
std::string FormatOptional(const std::optional<double>& value);
std::optional<double> ParseOptional(std::string_view cell, std::string_view what);

}  // namespace fwdlearn

#endif  // FWDLEARN_METRICS_H_
