#include "dirmom/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dirmom/random.hpp"
#include "dirmom/specfun.hpp"

namespace dirmom {

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) {
    throw std::invalid_argument("ProbabilityVector: empty vector");
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("ProbabilityVector: component outside [0, 1]: " +
                                  std::to_string(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("ProbabilityVector: components sum to " + std::to_string(sum));
  }
}

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)), alpha0_(0.0) {
  if (alpha_.size() < 2) {
    throw std::invalid_argument("DirichletParams: need K >= 2");
  }
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("DirichletParams: concentration must be finite and > 0, got " +
                                  std::to_string(a));
    }
    alpha0_ += a;
  }
  if (!std::isfinite(alpha0_)) {
    throw std::invalid_argument("DirichletParams: alpha0 overflows");
  }
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("argmax: empty input");
  }
  // max_element returns the first of equal maxima.
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

ProbabilityVector predictive_mean(const DirichletParams& d) {
  std::vector<double> mean(d.size());
  const double a0 = d.alpha0();
  for (std::size_t k = 0; k < d.size(); ++k) {
    mean[k] = d[k] / a0;
  }
  return ProbabilityVector(std::move(mean));
}

double class_variance(const DirichletParams& d, std::size_t k) {
  if (k >= d.size()) {
    throw std::out_of_range("class_variance: class index " + std::to_string(k) +
                            " out of range for K=" + std::to_string(d.size()));
  }
  const double a0 = d.alpha0();
  const double ak = d[k];
  // alpha0 - alpha_k summed from the other components avoids cancellation when
  // alpha_k dominates.
  double rest = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j != k) {
      rest += d[j];
    }
  }
  return (ak / a0) * (rest / a0) / (a0 + 1.0);
}

double total_variance(const DirichletParams& d) {
  double total = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    total += class_variance(d, k);
  }
  return total;
}

double log_density(const DirichletParams& d, const ProbabilityVector& p) {
  if (p.size() != d.size()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  double acc = -specfun::log_multivariate_beta(d.alpha());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!(p[k] > 0.0)) {
      throw std::domain_error("log_density: probability vector must be strictly interior");
    }
    acc += (d[k] - 1.0) * std::log(p[k]);
  }
  return acc;
}

double kl_to_uniform(const DirichletParams& d) {
  const double a0 = d.alpha0();
  const double k = static_cast<double>(d.size());
  const double psi0 = specfun::digamma(a0);
  double kl = specfun::log_gamma(a0) - specfun::log_gamma(k);
  for (double a : d.alpha()) {
    kl -= specfun::log_gamma(a);
    kl += (a - 1.0) * (specfun::digamma(a) - psi0);
  }
  // Rounding can leave values like -1e-17 at alpha = 1.
  return std::max(kl, 0.0);
}

std::vector<double> kl_to_uniform_gradient(const DirichletParams& d) {
  const double a0 = d.alpha0();
  const double k = static_cast<double>(d.size());
  const double common = (a0 - k) * specfun::detail::trigamma(a0);
  std::vector<double> grad(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) {
    grad[j] = (d[j] - 1.0) * specfun::detail::trigamma(d[j]) - common;
  }
  return grad;
}

ProbabilityVector sample_one(const DirichletParams& d, Rng& rng) {
  std::vector<double> p(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    p[k] = rng.log_gamma_variate(d[k]);
  }
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) {
    v /= sum;
  }
  return ProbabilityVector(std::move(p));
}

std::vector<ProbabilityVector> sample(const DirichletParams& d, std::uint64_t seed, std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("sample: need n >= 1");
  }
  Rng rng(seed);
  std::vector<ProbabilityVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sample_one(d, rng));
  }
  return out;
}

double log_likelihood_from_stats(std::span<const double> alpha, std::span<const double> mean_log_p,
                                 std::size_t count) {
  if (alpha.size() != mean_log_p.size()) {
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  }
  const double m = static_cast<double>(count);
  double per_sample = -specfun::log_multivariate_beta(alpha);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    per_sample += (alpha[k] - 1.0) * mean_log_p[k];
  }
  return m * per_sample;
}

double log_likelihood(std::span<const double> alpha, std::span<const ProbabilityVector> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("log_likelihood: no samples");
  }
  std::vector<double> mean_log(alpha.size(), 0.0);
  for (const auto& p : samples) {
    if (p.size() != alpha.size()) {
      throw std::invalid_argument("log_likelihood: dimension mismatch");
    }
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (!(p[k] > 0.0)) {
        throw std::domain_error("log_likelihood: samples must be strictly interior");
      }
      mean_log[k] += std::log(p[k]);
    }
  }
  for (double& v : mean_log) {
    v /= static_cast<double>(samples.size());
  }
  return log_likelihood_from_stats(alpha, mean_log, samples.size());
}

}  // namespace dirmom
