#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dirmom/app/simulate.hpp"
#include "dirmom/estimators.hpp"

// One function per CLI subcommand. Each reads its inputs, validates them,
// computes, and writes outputs atomically. Errors surface as FormatError
// (bad file contents), IoError (filesystem) or std::invalid_argument (bad
// settings); the CLI maps them to exit codes.
namespace dirmom::app {

namespace fs = std::filesystem;

/// DIRMOM_THREADS when set (must be a positive integer), otherwise the
/// hardware concurrency.
std::size_t default_thread_count();

struct SimulateOptions {
  SimulateConfig config;
  fs::path predictions_out;
  fs::path labels_out;
  std::optional<fs::path> alphas_out;  // ground-truth concentrations
};

void cmd_simulate(const SimulateOptions& opts);

struct FitOptions {
  fs::path predictions;
  fs::path out;
  estimators::FitMode mode = estimators::FitMode::mom;
  estimators::BatchSettings batch;
  std::optional<std::size_t> models_limit;
};

struct FitSummary {
  std::size_t samples = 0;
  std::size_t models = 0;
  std::size_t degenerate = 0;
  std::size_t not_converged = 0;  // mom_then_mle only
  std::vector<std::string> warnings;
};

FitSummary cmd_fit(const FitOptions& opts);

struct EvaluateOptions {
  // Exactly one of the two: Dirichlet means from an alphas file, or raw
  // softmax rows from a single-model predictions file.
  std::optional<fs::path> alphas;
  std::optional<fs::path> predictions;
  fs::path labels;
  fs::path out;
  std::size_t bins = 10;
  double conf_threshold = 0.8;
  double temperature = 1.0;  // predictions input only
};

void cmd_evaluate(const EvaluateOptions& opts);

struct SelectOptions {
  fs::path alphas;
  fs::path labels;
  fs::path out;
  std::optional<fs::path> curve_out;
  std::optional<fs::path> decisions_out;
  double risk = 0.1;
  double cal_split = 0.5;
  std::uint64_t seed = 0;
  std::optional<double> tau;  // skips calibration; every sample is tested
  std::size_t bins = 10;
  std::size_t variance_bins = 20;
  double conf_threshold = 0.8;
};

void cmd_select(const SelectOptions& opts);

struct CalibrateThresholdOptions {
  fs::path alphas;
  fs::path labels;
  fs::path out;
  double risk = 0.1;
};

/// Calibrates on every sample of the input and writes the threshold as JSON.
void cmd_calibrate_threshold(const CalibrateThresholdOptions& opts);

struct RiskCoverageOptions {
  fs::path alphas;
  fs::path labels;
  fs::path out;
};

/// Writes the risk-coverage curve of all input samples as CSV.
void cmd_risk_coverage(const RiskCoverageOptions& opts);

enum class LossKind { mse, digamma, mse_kl, log_ev };
enum class KlSchedule { linear, warmup };

LossKind parse_loss_kind(const std::string& name);

struct LossesOptions {
  fs::path alphas;
  fs::path labels;
  fs::path out;
  LossKind loss = LossKind::mse;
  double lambda0 = 1.0;
  double lambda_kl = 1.0;  // mse-kl without a schedule
  double lambda_ev = 1.0;
  std::optional<double> epoch;
  std::optional<double> epochs;
  std::optional<KlSchedule> schedule;
};

struct LossesSummary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> lambda;  // the weight applied, when the loss has one
};

LossesSummary cmd_losses(const LossesOptions& opts);

}  // namespace dirmom::app
