#include "dirmom/app/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "dirmom/app/csv.hpp"
#include "dirmom/app/formats.hpp"
#include "dirmom/app/report.hpp"
#include "dirmom/calibration.hpp"
#include "dirmom/dirichlet.hpp"
#include "dirmom/evidential.hpp"
#include "dirmom/random.hpp"
#include "dirmom/selective.hpp"

namespace dirmom::app {
namespace {

struct Input {
  std::string text;
  InputDigest digest;
};

Input read_input(const fs::path& path) {
  Input in;
  in.text = read_file(path);
  in.digest = InputDigest{path.filename().string(), sha256_hex(in.text)};
  return in;
}

// Alphas joined with labels, in sample_id order.
struct ScoredInput {
  std::vector<selective::ScoredSample> samples;
  std::size_t num_classes = 0;
  std::vector<InputDigest> digests;
};

ScoredInput load_scored(const fs::path& alphas_path, const fs::path& labels_path) {
  const Input alphas_in = read_input(alphas_path);
  const Input labels_in = read_input(labels_path);
  const AlphasTable alphas = parse_alphas(alphas_in.text);
  const LabelsTable labels = parse_labels(labels_in.text, alphas.num_classes);

  std::vector<std::string> ids;
  ids.reserve(alphas.rows.size());
  for (const auto& row : alphas.rows) {
    ids.push_back(row.sample_id);
  }
  const std::vector<std::size_t> y = labels_for(labels, ids);

  ScoredInput out;
  out.num_classes = alphas.num_classes;
  out.digests = {alphas_in.digest, labels_in.digest};
  out.samples.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.samples.push_back(selective::make_scored(ids[i], DirichletParams(alphas.rows[i].alpha), y[i]));
  }
  return out;
}

std::vector<calibration::LabeledPrediction> as_labeled(
    const std::vector<selective::ScoredSample>& samples) {
  std::vector<calibration::LabeledPrediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.mean, s.label, s.sample_id});
  }
  return out;
}

std::string curve_csv(const std::vector<selective::RiskCoveragePoint>& curve) {
  std::ostringstream os;
  os << "coverage,risk,tau\n";
  for (const auto& p : curve) {
    os << format_double(p.coverage) << ',' << format_double(p.risk) << ','
       << format_double(p.tau_at_point) << '\n';
  }
  return os.str();
}

void require_risk(double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::invalid_argument("target risk must lie in (0, 1)");
  }
}

void require_bins(std::size_t bins, const char* what) {
  if (bins == 0) {
    throw std::invalid_argument(std::string(what) + " must be >= 1");
  }
}

// Stratified by label: within each label group a seeded Fisher-Yates shuffle
// sends round(fraction * group size) samples to calibration.
std::vector<char> stratified_split(const std::vector<selective::ScoredSample>& samples,
                                   double fraction, std::uint64_t seed) {
  std::map<std::size_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_label[samples[i].label].push_back(i);
  }
  Rng rng(seed);
  std::vector<char> is_cal(samples.size(), 0);
  for (auto& [label, idx] : by_label) {
    for (std::size_t j = idx.size(); j > 1; --j) {
      std::swap(idx[j - 1], idx[rng.uniform_index(j)]);
    }
    const auto n_cal = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    for (std::size_t j = 0; j < n_cal; ++j) {
      is_cal[idx[j]] = 1;
    }
  }
  return is_cal;
}

}  // namespace

std::size_t default_thread_count() {
  if (const char* env = std::getenv("DIRMOM_THREADS"); env != nullptr) {
    const std::string_view s(env);
    std::size_t n = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || n == 0) {
      throw std::invalid_argument("DIRMOM_THREADS must be a positive integer, got '" +
                                  std::string(s) + "'");
    }
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void cmd_simulate(const SimulateOptions& opts) {
  const SimulatedData data = simulate(opts.config);
  write_file_atomic(opts.predictions_out, format_predictions(data.predictions));
  write_file_atomic(opts.labels_out, format_labels(data.labels));
  if (opts.alphas_out) {
    write_file_atomic(*opts.alphas_out, format_alphas(data.truth));
  }
}

FitSummary cmd_fit(const FitOptions& opts) {
  const PredictionsTable table = parse_predictions(read_file(opts.predictions), opts.models_limit);
  if (table.sample_ids.empty()) {
    throw FormatError(FormatErrorKind::empty_file, 0, "predictions file has no data rows");
  }
  if (table.num_models() < 2) {
    throw FormatError(FormatErrorKind::too_few_models, 0,
                      "fitting needs at least 2 models per sample, found " +
                          std::to_string(table.num_models()));
  }

  std::vector<estimators::EnsembleSample> samples;
  samples.reserve(table.sample_ids.size());
  for (const auto& matrix : table.probabilities) {
    samples.emplace_back(matrix, table.num_models(), table.num_classes);
  }
  const auto fits = estimators::fit_batch(samples, opts.mode, opts.batch);

  FitSummary summary;
  summary.samples = fits.size();
  summary.models = table.num_models();
  summary.warnings = table.warnings;
  AlphasTable out;
  out.num_classes = table.num_classes;
  out.rows.reserve(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& fit = fits[i];
    summary.degenerate += fit.degenerate ? 1 : 0;
    if (opts.mode == estimators::FitMode::mom_then_mle && !fit.degenerate && !fit.converged) {
      ++summary.not_converged;
    }
    const auto a = fit.params.alpha();
    out.rows.push_back(AlphaRow{table.sample_ids[i], fit.degenerate, {a.begin(), a.end()}});
  }
  write_file_atomic(opts.out, format_alphas(out));
  return summary;
}

void cmd_evaluate(const EvaluateOptions& opts) {
  if (opts.alphas.has_value() == opts.predictions.has_value()) {
    throw std::invalid_argument("evaluate needs exactly one of an alphas file or a predictions file");
  }
  require_bins(opts.bins, "bin count");
  if (!(opts.conf_threshold >= 0.0 && opts.conf_threshold <= 1.0)) {
    throw std::invalid_argument("confidence threshold must lie in [0, 1]");
  }
  if (!(opts.temperature > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
  if (opts.alphas && opts.temperature != 1.0) {
    throw std::invalid_argument("temperature applies to predictions input only");
  }

  std::vector<InputDigest> digests;
  std::vector<std::string> ids;
  std::vector<ProbabilityVector> means;
  std::size_t num_classes = 0;
  if (opts.alphas) {
    const Input in = read_input(*opts.alphas);
    digests.push_back(in.digest);
    const AlphasTable table = parse_alphas(in.text);
    num_classes = table.num_classes;
    for (const auto& row : table.rows) {
      ids.push_back(row.sample_id);
      means.push_back(predictive_mean(DirichletParams(row.alpha)));
    }
  } else {
    const Input in = read_input(*opts.predictions);
    digests.push_back(in.digest);
    const PredictionsTable table = parse_predictions(in.text);
    if (table.num_models() > 1) {
      throw std::invalid_argument("evaluate expects one model per sample, found " +
                                  std::to_string(table.num_models()) +
                                  "; fit the ensemble and evaluate the alphas instead");
    }
    num_classes = table.num_classes;
    ids = table.sample_ids;
    for (const auto& row : table.probabilities) {
      if (opts.temperature == 1.0) {
        means.emplace_back(row);
        continue;
      }
      // Tempering probabilities is softmax(log p / T) on the original simplex.
      std::vector<double> logits(row.size());
      for (std::size_t k = 0; k < row.size(); ++k) {
        logits[k] = std::log(std::max(row[k], std::numeric_limits<double>::min()));
      }
      means.push_back(evidential::softmax(logits, opts.temperature));
    }
  }

  const Input labels_in = read_input(opts.labels);
  digests.push_back(labels_in.digest);
  const LabelsTable labels = parse_labels(labels_in.text, num_classes);
  const std::vector<std::size_t> y = labels_for(labels, ids);

  std::vector<calibration::LabeledPrediction> preds;
  preds.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    preds.push_back({means[i], y[i], ids[i]});
  }
  const auto report = calibration::calibration_report(preds, opts.bins, opts.conf_threshold);

  Json doc = calibration_sections(report);
  Json settings;
  settings["input"] = opts.alphas ? "alphas" : "predictions";
  settings["bins"] = opts.bins;
  settings["conf_threshold"] = json_number(opts.conf_threshold);
  settings["temperature"] = json_number(opts.temperature);
  doc["provenance"] = provenance(digests, std::move(settings), std::nullopt);
  write_file_atomic(opts.out, dump(doc));
}

void cmd_select(const SelectOptions& opts) {
  require_risk(opts.risk);
  require_bins(opts.bins, "bin count");
  require_bins(opts.variance_bins, "variance bin count");
  if (!opts.tau && !(opts.cal_split > 0.0 && opts.cal_split < 1.0)) {
    throw std::invalid_argument("calibration split must lie in (0, 1)");
  }
  if (opts.tau && std::isnan(*opts.tau)) {
    throw std::invalid_argument("tau must not be NaN");
  }

  const ScoredInput input = load_scored(opts.alphas, opts.labels);
  std::vector<selective::ScoredSample> cal;
  std::vector<selective::ScoredSample> test;
  std::vector<char> is_cal(input.samples.size(), 0);
  std::optional<selective::ThresholdCalibration> calibrated;
  if (opts.tau) {
    test = input.samples;
  } else {
    is_cal = stratified_split(input.samples, opts.cal_split, opts.seed);
    for (std::size_t i = 0; i < input.samples.size(); ++i) {
      (is_cal[i] ? cal : test).push_back(input.samples[i]);
    }
    if (cal.empty() || test.empty()) {
      throw std::invalid_argument(std::string(cal.empty() ? "calibration" : "test") +
                                  " split is empty; use more samples or another split fraction");
    }
    calibrated = selective::calibrate_threshold(cal, opts.risk);
  }
  if (test.empty()) {
    throw std::invalid_argument("no samples to evaluate");
  }
  const double tau = calibrated ? calibrated->tau : *opts.tau;

  const auto report = selective::selective_report(test, tau);
  const auto curve = selective::risk_coverage_curve(test);
  const auto var_hist = selective::variance_histograms(test, opts.variance_bins);
  const auto cal_report =
      calibration::calibration_report(as_labeled(test), opts.bins, opts.conf_threshold);

  Json doc = calibration_sections(cal_report);
  Json sel;
  sel["tau"] = json_number(tau);
  sel["tau_source"] = calibrated ? "calibrated" : "explicit";
  sel["target_risk"] = calibrated ? json_number(opts.risk) : Json(nullptr);
  if (calibrated) {
    sel["calibration"] = Json{{"n", cal.size()},
                              {"achieved_risk", json_number(calibrated->achieved_cal_risk)},
                              {"coverage", json_number(calibrated->cal_coverage)}};
  } else {
    sel["calibration"] = nullptr;
  }
  sel["test_n"] = test.size();
  sel["coverage"] =
      json_number(static_cast<double>(report.retained_n) / static_cast<double>(test.size()));
  sel["retained_n"] = report.retained_n;
  sel["abstained_n"] = report.abstained_n;
  sel["retained_risk"] =
      report.retained_metrics ? json_number(1.0 - report.retained_metrics->accuracy) : Json(nullptr);
  sel["retained"] = report.retained_metrics ? to_json(*report.retained_metrics) : Json(nullptr);
  sel["curve_points"] = curve.size();
  sel["single_point_curve"] = curve.size() == 1;
  sel["variance_histograms"] = to_json(var_hist);
  doc["selective"] = std::move(sel);

  Json settings;
  settings["target_risk"] = json_number(opts.risk);
  settings["cal_split"] = opts.tau ? Json(nullptr) : json_number(opts.cal_split);
  settings["tau"] = opts.tau ? json_number(*opts.tau) : Json(nullptr);
  settings["bins"] = opts.bins;
  settings["variance_bins"] = opts.variance_bins;
  settings["conf_threshold"] = json_number(opts.conf_threshold);
  doc["provenance"] = provenance(input.digests, std::move(settings),
                                 opts.tau ? std::nullopt : std::optional<std::uint64_t>(opts.seed));

  if (opts.curve_out) {
    write_file_atomic(*opts.curve_out, curve_csv(curve));
  }
  if (opts.decisions_out) {
    std::ostringstream os;
    os << "sample_id,split,variance,label,decision\n";
    for (std::size_t i = 0; i < input.samples.size(); ++i) {
      const auto& s = input.samples[i];
      os << csv_field(s.sample_id) << ',' << (is_cal[i] ? "cal" : "test") << ','
         << format_double(s.variance) << ',' << s.label << ',';
      if (!is_cal[i]) {
        const selective::Decision d = selective::decide(s, tau);
        if (d) {
          os << *d;
        } else {
          os << "abstain";
        }
      }
      os << '\n';
    }
    write_file_atomic(*opts.decisions_out, os.str());
  }
  write_file_atomic(opts.out, dump(doc));
}

void cmd_calibrate_threshold(const CalibrateThresholdOptions& opts) {
  require_risk(opts.risk);
  const ScoredInput input = load_scored(opts.alphas, opts.labels);
  if (input.samples.empty()) {
    throw std::invalid_argument("no samples to calibrate on");
  }
  const auto t = selective::calibrate_threshold(input.samples, opts.risk);
  Json doc = to_json(t);
  doc["n"] = input.samples.size();
  doc["provenance"] = provenance(input.digests, Json{{"target_risk", json_number(opts.risk)}},
                                 std::nullopt);
  write_file_atomic(opts.out, dump(doc));
}

void cmd_risk_coverage(const RiskCoverageOptions& opts) {
  const ScoredInput input = load_scored(opts.alphas, opts.labels);
  write_file_atomic(opts.out, curve_csv(selective::risk_coverage_curve(input.samples)));
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "digamma") return LossKind::digamma;
  if (name == "mse-kl") return LossKind::mse_kl;
  if (name == "log-ev") return LossKind::log_ev;
  throw std::invalid_argument("unknown loss '" + name + "' (expected mse, digamma, mse-kl, log-ev)");
}

LossesSummary cmd_losses(const LossesOptions& opts) {
  const bool scheduled = opts.epoch || opts.epochs || opts.schedule;
  if (scheduled && opts.loss != LossKind::mse_kl) {
    throw std::invalid_argument("schedule flags (--epoch, --epochs, --schedule) apply to mse-kl only");
  }
  if (scheduled && !(opts.epoch && opts.epochs)) {
    throw std::invalid_argument("--epoch and --epochs must be given together");
  }

  const AlphasTable alphas = parse_alphas(read_file(opts.alphas));
  const LabelsTable labels = parse_labels(read_file(opts.labels), alphas.num_classes);
  std::vector<std::string> ids;
  for (const auto& row : alphas.rows) {
    ids.push_back(row.sample_id);
  }
  const auto y = labels_for(labels, ids);
  const std::size_t k = alphas.num_classes;

  LossesSummary summary;
  switch (opts.loss) {
    case LossKind::mse_kl:
      if (opts.epoch) {
        summary.lambda = opts.schedule.value_or(KlSchedule::linear) == KlSchedule::linear
                             ? evidential::annealed_lambda(opts.lambda0, k, *opts.epoch, *opts.epochs)
                             : opts.lambda0 * evidential::warmup_lambda(*opts.epoch, *opts.epochs);
      } else {
        summary.lambda = opts.lambda_kl;
      }
      break;
    case LossKind::log_ev:
      summary.lambda = opts.lambda_ev;
      break;
    default:
      break;
  }

  std::ostringstream os;
  os << "sample_id,loss\n";
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const DirichletParams d(alphas.rows[i].alpha);
    double loss = 0.0;
    switch (opts.loss) {
      case LossKind::mse: loss = evidential::mse_loss(d, y[i]); break;
      case LossKind::digamma: loss = evidential::digamma_loss(d, y[i]); break;
      case LossKind::mse_kl: loss = evidential::mse_kl_loss(d, y[i], *summary.lambda); break;
      case LossKind::log_ev: loss = evidential::log_evidence_penalty(d, *summary.lambda); break;
    }
    total += loss;
    os << csv_field(ids[i]) << ',' << format_double(loss) << '\n';
  }
  summary.n = ids.size();
  summary.mean = ids.empty() ? 0.0 : total / static_cast<double>(ids.size());
  write_file_atomic(opts.out, os.str());
  return summary;
}

}  // namespace dirmom::app
