// dirmom: fit Dirichlet predictive distributions to ensemble softmax outputs,
// then run calibration diagnostics and variance-based selective prediction.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dirmom/app/commands.hpp"
#include "dirmom/app/csv.hpp"

namespace {

using namespace dirmom::app;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Accepts finite decimals plus inf / +inf / -inf.
double parse_extended(const std::string& text, const std::string& flag) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    return parse_double(text, 0, flag);
  } catch (const FormatError&) {
    throw std::invalid_argument(flag + ": '" + text + "' is not a number");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_extended(item, flag));
  }
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < warnings.size() && i < kShown; ++i) {
    std::cerr << "warning: " << warnings[i] << '\n';
  }
  if (warnings.size() > kShown) {
    std::cerr << "warning: " << warnings.size() - kShown << " more rows renormalized\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Dirichlet predictive distributions from ensemble softmax outputs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DIRMOM_VERSION);

  // simulate
  SimulateOptions sim;
  std::string scheme = "fixed";
  std::string label_mode = "uniform";
  std::vector<std::string> alpha_lists;
  std::string alphas_out;
  auto* c_sim = app.add_subcommand("simulate", "Draw synthetic ensembles from known Dirichlets");
  c_sim->add_option("-n,--samples", sim.config.num_samples, "Number of samples")->required();
  c_sim->add_option("-m,--models", sim.config.num_members, "Ensemble members per sample")->required();
  c_sim->add_option("-k,--classes", sim.config.num_classes, "Number of classes")->required();
  c_sim->add_option("--seed", sim.config.seed, "Random seed")->required();
  c_sim->add_option("--scheme", scheme, "Concentration scheme")
      ->check(CLI::IsMember({"fixed", "mixture", "collapse"}))
      ->capture_default_str();
  c_sim->add_option("--alpha", alpha_lists,
                    "Comma-separated concentration vector (fixed scheme; repeat to cycle)");
  c_sim->add_option("--label-mode", label_mode, "How labels are drawn")
      ->check(CLI::IsMember({"uniform", "balanced"}))
      ->capture_default_str();
  c_sim->add_option("--correct-fraction", sim.config.correct_fraction,
                    "Mixture: share of confident, correct samples")
      ->capture_default_str();
  c_sim->add_option("--alpha0-high", sim.config.alpha0_high, "Mixture: total concentration of correct samples")
      ->capture_default_str();
  c_sim->add_option("--alpha0-low", sim.config.alpha0_low, "Mixture: total concentration of incorrect samples")
      ->capture_default_str();
  c_sim->add_option("--peak", sim.config.peak, "Mixture: mean mass on the favoured class")
      ->capture_default_str();
  c_sim->add_option("--alpha0", sim.config.collapse_alpha0, "Collapse: total concentration")
      ->capture_default_str();
  c_sim->add_option("--out-preds", sim.predictions_out, "Predictions CSV to write")->required();
  c_sim->add_option("--out-labels", sim.labels_out, "Labels CSV to write")->required();
  c_sim->add_option("--out-alphas", alphas_out, "Ground-truth alphas CSV to write");

  // fit
  FitOptions fit;
  std::string fit_mode = "mom";
  std::optional<std::size_t> threads;
  std::size_t models_limit = 0;
  auto* c_fit = app.add_subcommand("fit", "Fit one Dirichlet per sample");
  c_fit->add_option("--preds", fit.predictions, "Predictions CSV")->required();
  c_fit->add_option("--mode", fit_mode, "Estimator")
      ->check(CLI::IsMember({"mom", "mom-mle"}))
      ->capture_default_str();
  c_fit->add_option("--out", fit.out, "Alphas CSV to write")->required();
  c_fit->add_option("--cap", fit.batch.alpha0_cap, "Total concentration for zero-variance inputs")
      ->capture_default_str();
  c_fit->add_option("--max-iter", fit.batch.mle.max_iter, "Fixed-point iteration limit")
      ->capture_default_str();
  c_fit->add_option("--eps", fit.batch.mle.eps, "Relative convergence tolerance")->capture_default_str();
  c_fit->add_option("--p-floor", fit.batch.mle.p_floor, "Floor applied before taking logs")
      ->capture_default_str();
  c_fit->add_option("--threads", threads, "Worker threads (default: DIRMOM_THREADS or all cores)");
  c_fit->add_option("--models-limit", models_limit, "Use only the first M model ids")
      ->check(CLI::PositiveNumber);

  // evaluate
  EvaluateOptions ev;
  std::string ev_alphas;
  std::string ev_preds;
  auto* c_ev = app.add_subcommand("evaluate", "Calibration diagnostics and predictive metrics");
  auto* ev_a = c_ev->add_option("--alphas", ev_alphas, "Alphas CSV (uses Dirichlet means)");
  auto* ev_p = c_ev->add_option("--preds", ev_preds, "Single-model predictions CSV");
  ev_a->excludes(ev_p);
  c_ev->add_option("--labels", ev.labels, "Labels CSV")->required();
  c_ev->add_option("--out", ev.out, "Report JSON to write")->required();
  c_ev->add_option("--bins", ev.bins, "Reliability bins")->capture_default_str();
  c_ev->add_option("--conf-threshold", ev.conf_threshold, "High-confidence threshold")
      ->capture_default_str();
  c_ev->add_option("--temperature", ev.temperature, "Temperature applied to predictions input")
      ->capture_default_str();

  // select
  SelectOptions sel;
  std::string sel_tau;
  std::string sel_curve;
  std::string sel_decisions;
  auto* c_sel = app.add_subcommand("select", "Calibrate a variance threshold and evaluate abstention");
  c_sel->add_option("--alphas", sel.alphas, "Alphas CSV")->required();
  c_sel->add_option("--labels", sel.labels, "Labels CSV")->required();
  c_sel->add_option("--out", sel.out, "Report JSON to write")->required();
  c_sel->add_option("--risk", sel.risk, "Target risk on the calibration split")->capture_default_str();
  auto* sel_split = c_sel->add_option("--cal-split", sel.cal_split, "Calibration fraction")
                        ->capture_default_str();
  auto* sel_seed = c_sel->add_option("--seed", sel.seed, "Split seed")->capture_default_str();
  auto* sel_tau_opt = c_sel->add_option("--tau", sel_tau, "Use this threshold instead of calibrating");
  sel_tau_opt->excludes(sel_split)->excludes(sel_seed);
  c_sel->add_option("--curve-out", sel_curve, "Risk-coverage CSV to write");
  c_sel->add_option("--decisions-out", sel_decisions, "Per-sample decisions CSV to write");
  c_sel->add_option("--bins", sel.bins, "Reliability bins")->capture_default_str();
  c_sel->add_option("--variance-bins", sel.variance_bins, "Log-variance histogram bins")
      ->capture_default_str();
  c_sel->add_option("--conf-threshold", sel.conf_threshold, "High-confidence threshold")
      ->capture_default_str();

  // calibrate-threshold
  CalibrateThresholdOptions cal;
  auto* c_cal = app.add_subcommand("calibrate-threshold", "Calibrate a variance threshold on a whole file");
  c_cal->add_option("--alphas", cal.alphas, "Alphas CSV")->required();
  c_cal->add_option("--labels", cal.labels, "Labels CSV")->required();
  c_cal->add_option("--risk", cal.risk, "Target risk")->capture_default_str();
  c_cal->add_option("--out", cal.out, "Threshold JSON to write")->required();

  // risk-coverage
  RiskCoverageOptions rc;
  auto* c_rc = app.add_subcommand("risk-coverage", "Risk-coverage curve of a whole file");
  c_rc->add_option("--alphas", rc.alphas, "Alphas CSV")->required();
  c_rc->add_option("--labels", rc.labels, "Labels CSV")->required();
  c_rc->add_option("--out", rc.out, "Curve CSV to write")->required();

  // losses
  LossesOptions lo;
  std::string loss_name;
  std::string schedule;
  auto* c_lo = app.add_subcommand("losses", "Closed-form evidential losses per sample");
  c_lo->add_option("--alphas", lo.alphas, "Alphas CSV")->required();
  c_lo->add_option("--labels", lo.labels, "Labels CSV")->required();
  c_lo->add_option("--loss", loss_name, "mse, digamma, mse-kl or log-ev")->required();
  c_lo->add_option("--out", lo.out, "Loss CSV to write")->required();
  c_lo->add_option("--lambda0", lo.lambda0, "Base KL weight for schedules")->capture_default_str();
  c_lo->add_option("--lambda-kl", lo.lambda_kl, "KL weight when no schedule is given")
      ->capture_default_str();
  c_lo->add_option("--lambda-ev", lo.lambda_ev, "Log-evidence weight")->capture_default_str();
  c_lo->add_option("--epoch", lo.epoch, "Current epoch t");
  c_lo->add_option("--epochs", lo.epochs, "Schedule length T");
  c_lo->add_option("--schedule", schedule, "KL schedule")->check(CLI::IsMember({"linear", "warmup"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (c_sim->parsed()) {
    sim.config.scheme = scheme == "fixed"     ? AlphaScheme::fixed
                        : scheme == "mixture" ? AlphaScheme::mixture
                                              : AlphaScheme::collapse;
    sim.config.labels = label_mode == "balanced" ? LabelMode::balanced : LabelMode::uniform;
    for (const auto& list : alpha_lists) {
      sim.config.fixed_alphas.push_back(parse_list(list, "--alpha"));
    }
    if (!alphas_out.empty()) {
      sim.alphas_out = alphas_out;
    }
    cmd_simulate(sim);
    std::cout << "simulated " << sim.config.num_samples << " samples x " << sim.config.num_members
              << " models x " << sim.config.num_classes << " classes\n";
  } else if (c_fit->parsed()) {
    fit.mode = fit_mode == "mom" ? dirmom::estimators::FitMode::mom
                                 : dirmom::estimators::FitMode::mom_then_mle;
    fit.batch.threads = threads ? *threads : default_thread_count();
    if (models_limit > 0) {
      fit.models_limit = models_limit;
    }
    const FitSummary s = cmd_fit(fit);
    print_warnings(s.warnings);
    std::cout << "fitted " << s.samples << " samples (" << s.models << " models); " << s.degenerate
              << " degenerate";
    if (fit.mode == dirmom::estimators::FitMode::mom_then_mle) {
      std::cout << ", " << s.not_converged << " hit the iteration limit";
    }
    std::cout << '\n';
  } else if (c_ev->parsed()) {
    if (!ev_alphas.empty()) ev.alphas = ev_alphas;
    if (!ev_preds.empty()) ev.predictions = ev_preds;
    cmd_evaluate(ev);
  } else if (c_sel->parsed()) {
    if (!sel_tau.empty()) sel.tau = parse_extended(sel_tau, "--tau");
    if (!sel_curve.empty()) sel.curve_out = sel_curve;
    if (!sel_decisions.empty()) sel.decisions_out = sel_decisions;
    cmd_select(sel);
  } else if (c_cal->parsed()) {
    cmd_calibrate_threshold(cal);
  } else if (c_rc->parsed()) {
    cmd_risk_coverage(rc);
  } else if (c_lo->parsed()) {
    lo.loss = parse_loss_kind(loss_name);
    if (!schedule.empty()) {
      lo.schedule = schedule == "linear" ? KlSchedule::linear : KlSchedule::warmup;
    }
    const LossesSummary s = cmd_losses(lo);
    std::cout << "n=" << s.n << " mean=" << format_double(s.mean);
    if (s.lambda) {
      std::cout << " lambda=" << format_double(*s.lambda);
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
