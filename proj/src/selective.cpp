#include "dirmom/selective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dirmom::selective {
namespace {

bool is_correct(const ScoredSample& s) { return calibration::correctness(s.mean, s.label) == 1; }

// Indices ordered by (variance, sample_id).
std::vector<std::size_t> sorted_order(std::span<const ScoredSample> samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (samples[a].variance != samples[b].variance) {
      return samples[a].variance < samples[b].variance;
    }
    return samples[a].sample_id < samples[b].sample_id;
  });
  return order;
}

void validate_variances(std::span<const ScoredSample> samples) {
  for (const auto& s : samples) {
    if (!(s.variance >= 0.0) || !std::isfinite(s.variance)) {
      throw std::invalid_argument("selective: variance of sample '" + s.sample_id +
                                  "' must be finite and >= 0");
    }
  }
}

// Walks tie groups in increasing variance; calls visit(end, errors, variance)
// after each group, where `end` is the retained count.
template <typename Visit>
void sweep_tie_groups(std::span<const ScoredSample> samples, Visit visit) {
  const auto order = sorted_order(samples);
  std::size_t errors = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = samples[order[i]].variance;
    while (i < order.size() && samples[order[i]].variance == v) {
      errors += is_correct(samples[order[i]]) ? 0 : 1;
      ++i;
    }
    visit(i, errors, v);
  }
}

}  // namespace

ScoredSample make_scored(std::string sample_id, const DirichletParams& d, std::size_t label) {
  if (label >= d.size()) {
    throw std::out_of_range("make_scored: label out of range");
  }
  return ScoredSample{std::move(sample_id), predictive_mean(d), score(d), label};
}

double score(const DirichletParams& d) { return total_variance(d); }

ThresholdCalibration calibrate_threshold(std::span<const ScoredSample> cal, double target_risk) {
  if (!(target_risk > 0.0 && target_risk < 1.0)) {
    throw std::invalid_argument("calibrate_threshold: target risk must lie in (0, 1)");
  }
  if (cal.empty()) {
    throw std::invalid_argument("calibrate_threshold: empty calibration set");
  }
  validate_variances(cal);
  ThresholdCalibration out;
  out.target_risk = target_risk;
  const auto n = static_cast<double>(cal.size());
  sweep_tie_groups(cal, [&](std::size_t retained, std::size_t errors, double v) {
    const double risk = static_cast<double>(errors) / static_cast<double>(retained);
    if (risk <= target_risk) {
      out.tau = v;
      out.achieved_cal_risk = risk;
      out.cal_coverage = static_cast<double>(retained) / n;
    }
  });
  return out;
}

Decision decide(const ScoredSample& s, double tau) {
  if (s.variance <= tau) {
    return calibration::predicted_class(s.mean);
  }
  return std::nullopt;
}

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const ScoredSample> test) {
  if (test.empty()) {
    throw std::invalid_argument("risk_coverage_curve: empty test set");
  }
  validate_variances(test);
  std::vector<RiskCoveragePoint> curve;
  const auto n = static_cast<double>(test.size());
  sweep_tie_groups(test, [&](std::size_t retained, std::size_t errors, double v) {
    curve.push_back({static_cast<double>(retained) / n,
                     static_cast<double>(errors) / static_cast<double>(retained), v});
  });
  return curve;
}

VarianceHistograms variance_histograms(std::span<const ScoredSample> test, std::size_t bins) {
  if (bins == 0) {
    throw std::invalid_argument("variance_histograms: need at least one bin");
  }
  validate_variances(test);
  VarianceHistograms out;
  out.correct.assign(bins, 0);
  out.incorrect.assign(bins, 0);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& s : test) {
    if (s.variance > 0.0) {
      lo = std::min(lo, s.variance);
      hi = std::max(hi, s.variance);
    }
  }
  const bool any_positive = hi > 0.0;
  double log_lo = 0.0;
  double log_hi = 0.0;
  if (any_positive) {
    log_lo = std::log10(lo);
    log_hi = std::log10(hi);
    out.log10_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
      out.log10_edges[b] =
          log_lo + (log_hi - log_lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
  }
  const double width = log_hi - log_lo;
  for (const auto& s : test) {
    std::size_t b = 0;
    if (s.variance > 0.0 && width > 0.0) {
      const double pos = (std::log10(s.variance) - log_lo) / width * static_cast<double>(bins);
      b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(pos))));
    }
    (is_correct(s) ? out.correct : out.incorrect)[b] += 1;
  }
  return out;
}

SelectiveReport selective_report(std::span<const ScoredSample> test, double tau) {
  if (std::isnan(tau)) {
    throw std::invalid_argument("selective_report: tau is NaN");
  }
  if (test.empty()) {
    throw std::invalid_argument("selective_report: empty test set");
  }
  SelectiveReport report;
  report.decisions.reserve(test.size());
  std::vector<calibration::LabeledPrediction> all;
  std::vector<calibration::LabeledPrediction> kept;
  all.reserve(test.size());
  for (const auto& s : test) {
    const Decision d = decide(s, tau);
    report.decisions.push_back(d);
    all.push_back({s.mean, s.label, s.sample_id});
    if (d) {
      kept.push_back(all.back());
    }
  }
  report.retained_n = kept.size();
  report.abstained_n = test.size() - kept.size();
  report.full_metrics = calibration::metrics(all);
  if (!kept.empty()) {
    report.retained_metrics = calibration::metrics(kept);
  }
  return report;
}

}  // namespace dirmom::selective
