#include "dirmom/specfun.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dirmom::specfun {
namespace {

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(fn) + ": argument must be finite and > 0, got " +
                            std::to_string(x));
  }
}

// With six Bernoulli terms the first omitted term is ~1e-15 relative once x >= 10.
constexpr long double kShiftTarget = 10.0L;

// Bernoulli numbers B_2 .. B_12.
constexpr long double kB2 = 1.0L / 6.0L;
constexpr long double kB4 = -1.0L / 30.0L;
constexpr long double kB6 = 1.0L / 42.0L;
constexpr long double kB8 = -1.0L / 30.0L;
constexpr long double kB10 = 5.0L / 66.0L;
constexpr long double kB12 = -691.0L / 2730.0L;

long double digamma_asymptotic(long double x) {
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  // sum_{n=1..6} B_{2n} / (2n x^{2n}), Horner in x^-2
  const long double series =
      inv2 * (kB2 / 2 + inv2 * (kB4 / 4 + inv2 * (kB6 / 6 +
      inv2 * (kB8 / 8 + inv2 * (kB10 / 10 + inv2 * (kB12 / 12))))));
  return std::log(x) - 0.5L * inv - series;
}

long double trigamma_asymptotic(long double x) {
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_{n=1..6} B_{2n} / x^{2n+1}
  const long double series =
      inv2 * (kB2 + inv2 * (kB4 + inv2 * (kB6 + inv2 * (kB8 + inv2 * (kB10 + inv2 * kB12)))));
  return inv + 0.5L * inv2 + inv * series;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  // glibc's lgamma is up to 1 ulp off at integers. Up to x = 21, (x-1)! is an
  // exact uint64 and its long double log rounds correctly to double.
  if (x <= 21.0 && x == std::floor(x)) {
    std::uint64_t fact = 1;
    for (std::uint64_t n = 2; n < static_cast<std::uint64_t>(x); ++n) {
      fact *= n;
    }
    return static_cast<double>(std::log(static_cast<long double>(fact)));
  }
  // lgamma_r is the reentrant form; std::lgamma writes the global signgam.
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double digamma(double x) {
  require_positive(x, "digamma");
  long double z = x;
  // Shift terms are summed small-to-large so that -1/x for tiny x is the
  // last (single) rounding.
  long double shift = 0.0L;
  const long double first = 1.0L / z;
  long double w = z + 1.0L;
  if (z < kShiftTarget) {
    while (w < kShiftTarget) {
      shift += 1.0L / w;
      w += 1.0L;
    }
    return static_cast<double>((digamma_asymptotic(w) - shift) - first);
  }
  return static_cast<double>(digamma_asymptotic(z));
}

namespace detail {

double trigamma(double x) {
  require_positive(x, "trigamma");
  long double z = x;
  long double acc = 0.0L;
  while (z < kShiftTarget) {
    acc += 1.0L / (z * z);
    z += 1.0L;
  }
  return static_cast<double>(acc + trigamma_asymptotic(z));
}

}  // namespace detail

double inverse_digamma(double y) {
  if (!std::isfinite(y)) {
    throw std::domain_error("inverse_digamma: argument must be finite");
  }
  // psi(x) ~ ln(x - 1/2) for large x, so the root overflows past ln(DBL_MAX).
  if (y > std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error("inverse_digamma: solution exceeds double range");
  }

  // Initial guess from the large- and small-argument asymptotes of psi.
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + kEulerGamma);

  constexpr int kMinSteps = 5;
  constexpr int kMaxSteps = 100;
  for (int step = 0; step < kMaxSteps; ++step) {
    const double residual = digamma(x) - y;
    double next = x - residual / detail::trigamma(x);
    if (!(next > 0.0)) {
      next = 0.5 * x;
    }
    const double change = std::abs(next - x);
    x = next;
    if (step + 1 >= kMinSteps && change <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      break;
    }
  }
  return x;
}

double log_multivariate_beta(std::span<const double> alpha) {
  if (alpha.size() < 2) {
    throw std::invalid_argument("log_multivariate_beta: need at least two components");
  }
  double sum = 0.0;
  double acc = 0.0;
  for (double a : alpha) {
    require_positive(a, "log_multivariate_beta");
    acc += log_gamma(a);
    sum += a;
  }
  return acc - log_gamma(sum);
}

}  // namespace dirmom::specfun
