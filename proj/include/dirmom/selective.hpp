#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirmom/calibration.hpp"
#include "dirmom/dirichlet.hpp"

// Selective classification with the Dirichlet total predictive variance as
// the abstention score: predict argmax E[p] when variance <= tau, otherwise
// abstain. tau is picked on a calibration set as the largest tie-closed
// variance prefix whose empirical risk does not exceed the target.
namespace dirmom::selective {

inline constexpr double kDefaultTargetRisk = 0.1;
inline constexpr double kAbstainAll = -std::numeric_limits<double>::infinity();
inline constexpr double kPredictAll = std::numeric_limits<double>::infinity();

struct ScoredSample {
  std::string sample_id;
  ProbabilityVector mean;
  double variance = 0.0;
  std::size_t label = 0;
};

/// Builds a scored sample from fitted parameters.
ScoredSample make_scored(std::string sample_id, const DirichletParams& d, std::size_t label);

struct ThresholdCalibration {
  double tau = kAbstainAll;
  double target_risk = kDefaultTargetRisk;
  double achieved_cal_risk = 0.0;
  double cal_coverage = 0.0;

  bool abstains_on_all() const { return tau == kAbstainAll; }
};

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
  double tau_at_point = 0.0;
};

/// Predicted class, or nullopt for abstention.
using Decision = std::optional<std::size_t>;

struct SelectiveReport {
  std::vector<Decision> decisions;
  std::size_t retained_n = 0;
  std::size_t abstained_n = 0;
  calibration::PredictiveMetrics full_metrics;
  std::optional<calibration::PredictiveMetrics> retained_metrics;  // absent when nothing retained
};

struct VarianceHistograms {
  std::vector<double> log10_edges;  // bins + 1 edges; empty when no positive variance
  std::vector<std::size_t> correct;
  std::vector<std::size_t> incorrect;
};

/// Total predictive variance.
double score(const DirichletParams& d);

/// Throws std::invalid_argument unless 0 < target_risk < 1 and cal is
/// nonempty. Returns tau = kAbstainAll with zero coverage when no prefix
/// qualifies.
ThresholdCalibration calibrate_threshold(std::span<const ScoredSample> cal, double target_risk);

/// Predicts argmax E[p] when variance <= tau, otherwise abstains.
Decision decide(const ScoredSample& s, double tau);

/// One point per distinct variance, in increasing order of coverage.
std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const ScoredSample> test);

/// Histograms over log10(variance) with equal-width bins between the smallest
/// and largest positive variance. Zero variances go to the lowest bin.
VarianceHistograms variance_histograms(std::span<const ScoredSample> test, std::size_t bins);

SelectiveReport selective_report(std::span<const ScoredSample> test, double tau);

}  // namespace dirmom::selective
