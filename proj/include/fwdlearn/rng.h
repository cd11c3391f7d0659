#ifndef FWDLEARN_RNG_H_
#define FWDLEARN_RNG_H_

#include <cstdint>
#include <random>

namespace fwdlearn {

using Rng = std::mt19937_64;

// independent stream for (seed, stream) so that parallel work is schedule independent
inline Rng MakeRng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
  return Rng(seq);
}

inline double Uniform(Rng& rng, double low, double high) {
  return std::uniform_real_distribution<double>(low, high)(rng);
}

inline double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

// uniform integer in [low, high]
inline int UniformInt(Rng& rng, int low, int high) {
  return std::uniform_int_distribution<int>(low, high)(rng);
}

}  // namespace fwdlearn

#endif  // FWDLEARN_RNG_H_
