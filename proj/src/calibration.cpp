#include "dirmom/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dirmom::calibration {
namespace {

void require_nonempty(std::span<const LabeledPrediction> preds, const char* fn) {
  if (preds.empty()) {
    throw std::invalid_argument(std::string(fn) + ": no predictions");
  }
}

void require_bins(std::size_t num_bins, const char* fn) {
  if (num_bins == 0) {
    throw std::invalid_argument(std::string(fn) + ": need at least one bin");
  }
}

double edge(std::size_t b, std::size_t num_bins) {
  return static_cast<double>(b) / static_cast<double>(num_bins);
}

}  // namespace

double confidence(const ProbabilityVector& p) {
  return *std::max_element(p.values().begin(), p.values().end());
}

std::size_t predicted_class(const ProbabilityVector& p) { return argmax(p.values()); }

int correctness(const ProbabilityVector& p, std::size_t label) {
  return predicted_class(p) == label ? 1 : 0;
}

std::size_t bin_index(double c, std::size_t num_bins) {
  require_bins(num_bins, "bin_index");
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("bin_index: confidence outside [0, 1]");
  }
  if (c == 0.0) {
    return 0;
  }
  // ceil(c B) - 1, then nudged so the result agrees with the edges exactly as
  // they are represented (e.g. 0.3 * 10 rounds above 3).
  auto b = static_cast<std::ptrdiff_t>(std::ceil(c * static_cast<double>(num_bins))) - 1;
  const auto last = static_cast<std::ptrdiff_t>(num_bins) - 1;
  b = std::clamp<std::ptrdiff_t>(b, 0, last);
  while (b > 0 && c <= edge(static_cast<std::size_t>(b), num_bins)) {
    --b;
  }
  while (b < last && c > edge(static_cast<std::size_t>(b) + 1, num_bins)) {
    ++b;
  }
  return static_cast<std::size_t>(b);
}

std::vector<ReliabilityBin> reliability_bins(std::span<const LabeledPrediction> preds,
                                             std::size_t num_bins) {
  require_bins(num_bins, "reliability_bins");
  require_nonempty(preds, "reliability_bins");
  std::vector<ReliabilityBin> bins(num_bins);
  std::vector<double> correct_sum(num_bins, 0.0);
  std::vector<double> conf_sum(num_bins, 0.0);
  for (std::size_t b = 0; b < num_bins; ++b) {
    bins[b].lower = edge(b, num_bins);
    bins[b].upper = edge(b + 1, num_bins);
  }
  for (const auto& pred : preds) {
    const double c = confidence(pred.mean);
    const std::size_t b = bin_index(c, num_bins);
    bins[b].count += 1;
    correct_sum[b] += correctness(pred.mean, pred.label);
    conf_sum[b] += c;
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (bins[b].count > 0) {
      const auto n = static_cast<double>(bins[b].count);
      bins[b].accuracy = correct_sum[b] / n;
      bins[b].confidence = conf_sum[b] / n;
    }
  }
  return bins;
}

double ece(std::span<const LabeledPrediction> preds, std::size_t num_bins) {
  const auto bins = reliability_bins(preds, num_bins);
  const auto n = static_cast<double>(preds.size());
  double total = 0.0;
  for (const auto& bin : bins) {
    if (bin.occupied()) {
      total += static_cast<double>(bin.count) / n * std::abs(bin.accuracy - bin.confidence);
    }
  }
  return total;
}

ConfidenceHistograms confidence_histograms(std::span<const LabeledPrediction> preds,
                                           std::size_t num_bins, double threshold) {
  require_bins(num_bins, "confidence_histograms");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("confidence_histograms: threshold must lie in [0, 1]");
  }
  ConfidenceHistograms out;
  out.correct.assign(num_bins, 0);
  out.incorrect.assign(num_bins, 0);
  std::size_t wrong = 0;
  std::size_t wrong_confident = 0;
  for (const auto& pred : preds) {
    const double c = confidence(pred.mean);
    const std::size_t b = bin_index(c, num_bins);
    if (correctness(pred.mean, pred.label) == 1) {
      out.correct[b] += 1;
    } else {
      out.incorrect[b] += 1;
      ++wrong;
      if (c > threshold) {
        ++wrong_confident;
      }
    }
  }
  out.high_conf_error_rate =
      wrong == 0 ? 0.0 : static_cast<double>(wrong_confident) / static_cast<double>(wrong);
  return out;
}

PredictiveMetrics metrics(std::span<const LabeledPrediction> preds) {
  require_nonempty(preds, "metrics");
  const std::size_t k_count = preds.front().mean.size();
  std::vector<std::size_t> tp(k_count, 0);
  std::vector<std::size_t> fp(k_count, 0);
  std::vector<std::size_t> fn(k_count, 0);
  std::size_t hits = 0;
  double nll = 0.0;
  for (const auto& pred : preds) {
    if (pred.mean.size() != k_count) {
      throw std::invalid_argument("metrics: predictions disagree on K");
    }
    if (pred.label >= k_count) {
      throw std::out_of_range("metrics: label " + std::to_string(pred.label) +
                              " out of range for K=" + std::to_string(k_count));
    }
    const std::size_t guess = predicted_class(pred.mean);
    if (guess == pred.label) {
      ++hits;
      ++tp[guess];
    } else {
      ++fp[guess];
      ++fn[pred.label];
    }
    nll -= std::log(std::max(pred.mean[pred.label], kNllFloor));
  }

  double f1_sum = 0.0;
  std::size_t f1_classes = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const std::size_t denom = 2 * tp[k] + fp[k] + fn[k];
    if (denom == 0) {
      continue;
    }
    f1_sum += 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
    ++f1_classes;
  }

  const auto n = static_cast<double>(preds.size());
  PredictiveMetrics out;
  out.n = preds.size();
  out.accuracy = static_cast<double>(hits) / n;
  out.macro_f1 = f1_classes == 0 ? 0.0 : f1_sum / static_cast<double>(f1_classes);
  out.nll = nll / n;
  return out;
}

CalibrationReport calibration_report(std::span<const LabeledPrediction> preds, std::size_t num_bins,
                                     double threshold) {
  CalibrationReport report;
  report.bins = reliability_bins(preds, num_bins);
  report.ece = ece(preds, num_bins);
  report.metrics = metrics(preds);
  report.histograms = confidence_histograms(preds, num_bins, threshold);
  report.conf_threshold = threshold;
  return report;
}

}  // namespace dirmom::calibration
