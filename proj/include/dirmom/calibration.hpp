#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dirmom/dirichlet.hpp"

namespace dirmom::calibration {

inline constexpr std::size_t kDefaultBins = 10;
inline constexpr double kDefaultConfidenceThreshold = 0.8;
inline constexpr double kNllFloor = 1e-12;

struct LabeledPrediction {
  ProbabilityVector mean;
  std::size_t label = 0;
  std::string sample_id;
};

/// Bin b (0-based) covers (b/B, (b+1)/B]; confidence 0 falls in bin 0. Empty
/// bins keep count 0 and are skipped by ece().
struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
  double confidence = 0.0;

  bool occupied() const { return count > 0; }
};

struct ConfidenceHistograms {
  std::vector<std::size_t> correct;
  std::vector<std::size_t> incorrect;
  double high_conf_error_rate = 0.0;
};

struct PredictiveMetrics {
  std::size_t n = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double nll = 0.0;
};

struct CalibrationReport {
  std::vector<ReliabilityBin> bins;
  double ece = 0.0;
  PredictiveMetrics metrics;
  ConfidenceHistograms histograms;
  double conf_threshold = kDefaultConfidenceThreshold;
};

/// max_k p_k.
double confidence(const ProbabilityVector& p);

/// argmax with lowest-index tie-breaking.
std::size_t predicted_class(const ProbabilityVector& p);

/// 1 iff predicted_class(p) == label.
int correctness(const ProbabilityVector& p, std::size_t label);

/// 0-based index of the equal-width bin containing `c` in [0, 1].
std::size_t bin_index(double c, std::size_t num_bins);

std::vector<ReliabilityBin> reliability_bins(std::span<const LabeledPrediction> preds,
                                             std::size_t num_bins = kDefaultBins);

/// Count-weighted mean |accuracy - confidence| over occupied bins.
double ece(std::span<const LabeledPrediction> preds, std::size_t num_bins = kDefaultBins);

/// Confidence counts per bin split by correctness, plus the share of incorrect
/// predictions whose confidence exceeds `threshold` (0 with no errors).
ConfidenceHistograms confidence_histograms(std::span<const LabeledPrediction> preds,
                                           std::size_t num_bins = kDefaultBins,
                                           double threshold = kDefaultConfidenceThreshold);

/// Accuracy, macro-F1 and mean negative log-likelihood. Classes absent from
/// both labels and predictions are left out of the macro average; classes with
/// support but no true positives count as F1 = 0.
PredictiveMetrics metrics(std::span<const LabeledPrediction> preds);

CalibrationReport calibration_report(std::span<const LabeledPrediction> preds,
                                     std::size_t num_bins = kDefaultBins,
                                     double threshold = kDefaultConfidenceThreshold);

}  // namespace dirmom::calibration
