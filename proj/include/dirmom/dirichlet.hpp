#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dirmom {

class Rng;

/// A point on the (K-1)-simplex: components in [0, 1] summing to one within
/// kSimplexTolerance. The constructor validates; it does not renormalize.
class ProbabilityVector {
 public:
  static constexpr double kSimplexTolerance = 1e-6;

  explicit ProbabilityVector(std::vector<double> p);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t k) const { return p_[k]; }
  std::span<const double> values() const { return p_; }
  const std::vector<double>& vector() const { return p_; }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::vector<double> p_;
};

/// Concentration parameters of a Dirichlet distribution: K >= 2 finite,
/// strictly positive components.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha);

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t k) const { return alpha_[k]; }
  std::span<const double> alpha() const { return alpha_; }
  double alpha0() const { return alpha0_; }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
  double alpha0_;
};

/// Index of the largest component; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// E[p_k] = alpha_k / alpha0.
ProbabilityVector predictive_mean(const DirichletParams& d);

/// Var[p_k] = alpha_k (alpha0 - alpha_k) / (alpha0^2 (alpha0 + 1)).
/// Throws std::out_of_range for k >= K.
double class_variance(const DirichletParams& d, std::size_t k);

/// Sum of the per-class variances.
double total_variance(const DirichletParams& d);

/// ln Dir(p | alpha). Throws std::domain_error unless every p_k > 0.
double log_density(const DirichletParams& d, const ProbabilityVector& p);

/// KL(Dir(alpha) || Dir(1, ..., 1)), evaluated through log-gamma differences
/// so that alpha0 in the 1e7 range stays finite.
double kl_to_uniform(const DirichletParams& d);

/// d KL / d alpha_j = (alpha_j - 1) psi'(alpha_j) - (alpha0 - K) psi'(alpha0).
std::vector<double> kl_to_uniform_gradient(const DirichletParams& d);

/// n i.i.d. draws from Dir(alpha) via normalized Gamma variates. Deterministic
/// for a given seed.
std::vector<ProbabilityVector> sample(const DirichletParams& d, std::uint64_t seed, std::size_t n);

/// One draw from Dir(alpha) using the caller's generator.
ProbabilityVector sample_one(const DirichletParams& d, Rng& rng);

/// Joint log-likelihood of alpha over the samples (sum of log densities).
/// Throws std::domain_error on samples with a zero component.
double log_likelihood(std::span<const double> alpha, std::span<const ProbabilityVector> samples);

/// The same likelihood from sufficient statistics: the per-class mean log
/// probability over `count` samples.
double log_likelihood_from_stats(std::span<const double> alpha,
                                 std::span<const double> mean_log_p, std::size_t count);

}  // namespace dirmom
