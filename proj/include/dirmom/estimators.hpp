#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dirmom/dirichlet.hpp"

// Per-input Dirichlet estimation from an ensemble of softmax vectors.
//
// fit_mom matches the ensemble's per-class mean and unbiased variance to the
// Dirichlet moments. Each class yields its own estimate of the total
// concentration, alpha0^(k) = mu_k (1 - mu_k) / sigma_k^2 - 1; only finite,
// positive estimates are averaged, and alpha_k = mu_k * alpha0 keeps the
// fitted mean equal to the ensemble mean.
//
// fit_mle refines a starting point with the fixed-point iteration
//   alpha_k <- psi^{-1}(psi(alpha0) + mean_m ln p_k^(m)),
// which never decreases the Dirichlet likelihood.
namespace dirmom::estimators {

/// M probability vectors of dimension K for one input, stored row-major.
class EnsembleSample {
 public:
  /// Every member must be a valid ProbabilityVector of the same dimension.
  explicit EnsembleSample(std::vector<ProbabilityVector> members);
  EnsembleSample(std::vector<double> row_major, std::size_t num_members, std::size_t num_classes);

  std::size_t num_members() const { return members_; }
  std::size_t num_classes() const { return classes_; }
  std::span<const double> member(std::size_t m) const {
    return {data_.data() + m * classes_, classes_};
  }

 private:
  std::vector<double> data_;
  std::size_t members_;
  std::size_t classes_;
};

struct MomentSummary {
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<double> class_alpha0;        // alpha0^(k); +inf where sigma2 == 0
  std::vector<std::size_t> valid_classes;  // k with 0 < alpha0^(k) < inf
};

struct FitResult {
  DirichletParams params;
  bool degenerate = false;
  std::size_t iterations_used = 0;  // fit_mle only
  bool converged = false;           // fit_mle only
  std::vector<double> log_likelihood_trace;  // filled when MleSettings::record_trace
};

/// Concentrations never drop below this, so classes with zero ensemble mean
/// still produce valid parameters.
inline constexpr double kMinConcentration = 1e-300;
inline constexpr double kDefaultAlpha0Cap = 1e6;

struct MleSettings {
  std::size_t max_iter = 20;
  double eps = 1e-8;
  double p_floor = 1e-12;
  bool record_trace = false;
};

/// Empirical mean and unbiased variance per class. Requires M >= 2.
MomentSummary moments(const EnsembleSample& s);

/// Method-of-moments fit. When no class gives a valid alpha0 estimate (for
/// example zero spread), returns a degenerate result with alpha0 = cap.
FitResult fit_mom(const EnsembleSample& s, double alpha0_cap = kDefaultAlpha0Cap);

/// Per-class mean of ln max(p, p_floor).
std::vector<double> mean_log_probabilities(const EnsembleSample& s, double p_floor);

/// Fixed-point maximum-likelihood refinement starting from `init`. Stops when
/// ||alpha_new - alpha_old|| < eps ||alpha_old|| or after max_iter updates.
FitResult fit_mle(const EnsembleSample& s, const DirichletParams& init,
                  const MleSettings& settings = {});

enum class FitMode { mom, mom_then_mle };

struct BatchSettings {
  double alpha0_cap = kDefaultAlpha0Cap;
  MleSettings mle;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

/// Fits every sample; output order matches input order and is identical for
/// any thread count. Degenerate MoM results are not refined. Throws
/// std::invalid_argument when samples disagree on K.
std::vector<FitResult> fit_batch(std::span<const EnsembleSample> samples, FitMode mode,
                                 const BatchSettings& settings = {});

}  // namespace dirmom::estimators
