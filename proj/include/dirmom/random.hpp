#pragma once

#include <cstdint>
#include <random>

namespace dirmom {

// Seedable generator with platform-independent variates: std::mt19937_64 is
// fully specified by the standard, while the std:: distributions are not, so
// uniform/normal/gamma draws are derived here directly from the raw bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, index) pairs, e.g. per-sample streams.
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  double standard_normal();

  /// log of a Gamma(shape, 1) variate. Working in log space keeps draws with
  /// tiny shapes representable.
  double log_gamma_variate(double shape);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace dirmom
