// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if any
// criterion fails. Every check runs at the full scale the criterion names.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dirmom/app/commands.hpp"
#include "dirmom/app/csv.hpp"
#include "dirmom/app/formats.hpp"
#include "dirmom/app/report.hpp"
#include "dirmom/app/simulate.hpp"
#include "dirmom/calibration.hpp"
#include "dirmom/dirichlet.hpp"
#include "dirmom/estimators.hpp"
#include "dirmom/evidential.hpp"
#include "dirmom/random.hpp"
#include "dirmom/selective.hpp"
#include "dirmom/specfun.hpp"

namespace {

using namespace dirmom;
namespace sf = dirmom::specfun;
namespace ev = dirmom::evidential;
namespace est = dirmom::estimators;
namespace cal = dirmom::calibration;
namespace sel = dirmom::selective;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects failed sub-checks; a criterion passes when none were recorded.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& n : notes_) os << "; " << n;
    for (const auto& f : failures_) os << "\n      failed: " << f;
    return os.str();
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Running mean and variance (Welford).
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double standard_error() const {
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

std::vector<double> random_alpha(Rng& rng, std::size_t k, double lo, double hi) {
  std::vector<double> a(k);
  for (auto& x : a) x = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform_open());
  return a;
}

// ---------------------------------------------------------------------------

void special_functions(Check& c) {
  double worst_rec = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = std::pow(10.0, -6.0 + 12.0 * i / 2000.0);
    const double lhs = sf::digamma(x + 1.0) - sf::digamma(x);
    const double err = std::abs(lhs - 1.0 / x) / std::max(1.0, 1.0 / x);
    worst_rec = std::max(worst_rec, err);
  }
  c.expect(worst_rec <= 1e-10, "digamma recurrence over [1e-6, 1e6], worst " + num(worst_rec));

  double worst_y = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double y = -20.0 + 40.0 * i / 4000.0;
    const double x = sf::inverse_digamma(y);
    worst_y = std::max(worst_y, std::abs(sf::digamma(x) - y) / std::max(1.0, std::abs(y)));
  }
  c.expect(worst_y <= 1e-10, "psi(psi^-1(y)) = y over [-20, 20], worst " + num(worst_y));

  double worst_x = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = std::pow(10.0, -3.0 + 9.0 * i / 2000.0);
    worst_x = std::max(worst_x, std::abs(sf::inverse_digamma(sf::digamma(x)) - x) / x);
  }
  c.expect(worst_x <= 1e-10, "psi^-1(psi(x)) = x over [1e-3, 1e6], worst " + num(worst_x));

  // Reference: log of the exact integer n!, evaluated in long double and
  // rounded once to double.
  std::uint64_t fact = 1;
  for (int n = 1; n <= 20; ++n) {
    fact *= static_cast<std::uint64_t>(n);
    const double want = static_cast<double>(std::log(static_cast<long double>(fact)));
    const double got = sf::log_gamma(n + 1.0);
    c.expect(got == want, "log_gamma(" + std::to_string(n + 1) + ") != log(" + std::to_string(n) + "!)");
  }
  c.note("recurrence " + num(worst_rec) + ", round trip " + num(std::max(worst_x, worst_y)));
}

void moment_identities(Check& c) {
  const DirichletParams d({2, 2});
  const auto mean = predictive_mean(d);
  c.expect(std::abs(mean[0] - 0.5) <= 1e-12 && std::abs(mean[1] - 0.5) <= 1e-12, "mean (2,2)");
  c.expect(std::abs(class_variance(d, 0) - 0.05) <= 1e-12, "class variance (2,2)");
  c.expect(std::abs(class_variance(d, 1) - 0.05) <= 1e-12, "class variance (2,2) k=1");
  c.expect(std::abs(total_variance(d) - 0.1) <= 1e-12, "total variance (2,2)");
  const DirichletParams e({3, 1});
  c.expect(std::abs(predictive_mean(e)[0] - 0.75) <= 1e-12, "mean (3,1)");
  c.expect(std::abs(class_variance(e, 0) - 3.0 / 80.0) <= 1e-12, "class variance (3,1)");
  c.expect(std::abs(total_variance(e) - 6.0 / 80.0) <= 1e-12, "total variance (3,1)");
}

void collapse_regime(Check& c) {
  constexpr std::size_t k = 100;
  constexpr double alpha0 = 1e7;
  const DirichletParams d(std::vector<double>(k, alpha0 / k));
  const double identity = (k - 1.0) / (static_cast<double>(k * k) * (alpha0 + 1.0));
  double worst = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    worst = std::max(worst, std::abs(class_variance(d, j) - identity) / identity);
  }
  c.expect(worst <= 1e-12, "class variance identity, worst relative " + num(worst));
  const double total = total_variance(d);
  c.expect(std::abs(total - 9.9e-8) <= 1e-12, "total variance " + num(total));

  app::SimulateConfig cfg;
  cfg.num_samples = 2000;
  cfg.num_members = 2;
  cfg.num_classes = k;
  cfg.seed = 31;
  cfg.scheme = app::AlphaScheme::collapse;
  cfg.collapse_alpha0 = alpha0;
  const auto data = app::simulate(cfg);
  const auto labels = app::labels_for(data.labels, data.predictions.sample_ids);
  std::vector<sel::ScoredSample> scored;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    scored.push_back(sel::make_scored(data.truth.rows[i].sample_id,
                                      DirichletParams(data.truth.rows[i].alpha), labels[i]));
  }
  std::vector<sel::ScoredSample> cal_set(scored.begin(), scored.begin() + 1000);
  std::vector<sel::ScoredSample> test_set(scored.begin() + 1000, scored.end());
  const auto curve = sel::risk_coverage_curve(test_set);
  c.expect(curve.size() == 1, "curve has " + std::to_string(curve.size()) + " points");
  const auto t = sel::calibrate_threshold(cal_set, 0.1);
  const auto rep = sel::selective_report(test_set, t.tau);
  c.expect(rep.retained_n == 0 || rep.retained_n == test_set.size(),
           "all-or-nothing selection, retained " + std::to_string(rep.retained_n));
  c.note("total variance " + num(total) + ", curve points " + std::to_string(curve.size()));
}

void loss_monte_carlo(Check& c) {
  constexpr std::size_t kCases = 50;
  constexpr std::size_t kDraws = 1'000'000;
  const std::size_t ks[] = {2, 3, 5};
  Rng pick(4242);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < kCases; ++i) {
    const std::size_t k = ks[i % 3];
    const DirichletParams d(random_alpha(pick, k, 0.5, 20.0));
    const std::size_t y = pick.uniform_index(k);
    Rng rng(777, i);
    Moments mse;
    Moments dig;
    for (std::size_t n = 0; n < kDraws; ++n) {
      const auto p = sample_one(d, rng);
      double sq = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double diff = (j == y ? 1.0 : 0.0) - p[j];
        sq += diff * diff;
      }
      mse.add(sq);
      dig.add(-std::log(p[y]));
    }
    const double z_mse = std::abs(ev::mse_loss(d, y) - mse.mean) / mse.standard_error();
    const double z_dig = std::abs(ev::digamma_loss(d, y) - dig.mean) / dig.standard_error();
    worst_z = std::max({worst_z, z_mse, z_dig});
    c.expect(z_mse <= 3.0, "case " + std::to_string(i) + " mse z=" + num(z_mse));
    c.expect(z_dig <= 3.0, "case " + std::to_string(i) + " digamma z=" + num(z_dig));
  }
  c.note("worst |z| " + num(worst_z));
}

void kl_correctness(Check& c) {
  c.expect(kl_to_uniform(DirichletParams({1, 1})) == 0.0, "KL(Dir(1,1)) == 0");
  c.expect(kl_to_uniform(DirichletParams(std::vector<double>(7, 1.0))) == 0.0, "KL(Dir(1^7)) == 0");

  // Dir(1, 1) has unit density on the 1-simplex, so KL = E[ln Dir(p | 2, 2)].
  const DirichletParams d({2, 2});
  Rng rng(99);
  Moments m;
  for (int n = 0; n < 1'000'000; ++n) m.add(log_density(d, sample_one(d, rng)));
  const double z = std::abs(kl_to_uniform(d) - m.mean) / m.standard_error();
  c.expect(z <= 3.0, "KL(2,2) Monte Carlo z=" + num(z));

  Rng pick(5);
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + pick.uniform_index(9);
    const double kl = kl_to_uniform(DirichletParams(random_alpha(pick, k, 1e-3, 1e4)));
    lowest = std::min(lowest, kl);
    c.expect(kl >= 0.0 && std::isfinite(kl), "KL nonnegative and finite, got " + num(kl));
  }
  c.note("MC z " + num(z) + ", min KL " + num(lowest));
}

void estimator_recovery(Check& c) {
  const auto t0 = Clock::now();
  const std::vector<double> truth = {3, 1, 0.5};
  const DirichletParams d(truth);
  double worst_mom = 0.0;
  double worst_mle = 0.0;
  double worst_drop = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const est::EnsembleSample s(sample(d, seed, 100'000));
    const auto mom = est::fit_mom(s);
    est::MleSettings settings;
    settings.record_trace = true;
    const auto mle = est::fit_mle(s, mom.params, settings);
    for (std::size_t j = 0; j < 3; ++j) {
      worst_mom = std::max(worst_mom, std::abs(mom.params[j] - truth[j]) / truth[j]);
      worst_mle = std::max(worst_mle, std::abs(mle.params[j] - truth[j]) / truth[j]);
    }
    const auto mean_log = est::mean_log_probabilities(s, settings.p_floor);
    const double ll_mom = log_likelihood_from_stats(mom.params.alpha(), mean_log, s.num_members());
    const double ll_mle = log_likelihood_from_stats(mle.params.alpha(), mean_log, s.num_members());
    c.expect(ll_mle >= ll_mom, "seed " + std::to_string(seed) + ": MLE LL below MoM LL");
    const auto& trace = mle.log_likelihood_trace;
    c.expect(trace.size() == mle.iterations_used + 1, "trace length");
    for (std::size_t i = 1; i < trace.size(); ++i) {
      worst_drop = std::max(worst_drop, trace[i - 1] - trace[i]);
      c.expect(trace[i] >= trace[i - 1] - 1e-9,
               "LL decreased by " + num(trace[i - 1] - trace[i]) + " at iteration " +
                   std::to_string(i));
    }
  }
  c.expect(worst_mom <= 0.10, "MoM worst relative error " + num(worst_mom));
  c.expect(worst_mle <= 0.05, "MLE worst relative error " + num(worst_mle));

  // LL >= MoM on sample sets that are not the headline one.
  Rng pick(8);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const std::size_t k = 2 + pick.uniform_index(6);
    const DirichletParams a(random_alpha(pick, k, 0.3, 30.0));
    const est::EnsembleSample s(sample(a, 100 + i, 5 + pick.uniform_index(200)));
    const auto mom = est::fit_mom(s);
    if (mom.degenerate) continue;
    const auto mle = est::fit_mle(s, mom.params);
    const auto ml = est::mean_log_probabilities(s, 1e-12);
    c.expect(log_likelihood_from_stats(mle.params.alpha(), ml, s.num_members()) >=
                 log_likelihood_from_stats(mom.params.alpha(), ml, s.num_members()),
             "random set " + std::to_string(i) + ": MLE LL below MoM LL");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, "runtime " + num(secs) + " s");
  c.note("MoM " + num(worst_mom) + ", MLE " + num(worst_mle) + ", " + num(secs) + " s");
}

void mom_structure(Check& c) {
  Rng pick(12);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + pick.uniform_index(9);
    const std::size_t m = 2 + pick.uniform_index(30);
    const est::EnsembleSample s(sample(DirichletParams(random_alpha(pick, k, 0.2, 50.0)), i, m));
    const auto fit = est::fit_mom(s);
    const auto mean = predictive_mean(fit.params);
    for (std::size_t j = 0; j < k; ++j) {
      double emp = 0.0;
      for (std::size_t r = 0; r < m; ++r) emp += s.member(r)[j];
      emp /= static_cast<double>(m);
      worst = std::max(worst, std::abs(mean[j] - emp));
    }
  }
  c.expect(worst <= 1e-12, "mean preservation worst " + num(worst));

  const std::vector<std::vector<double>> degenerate = {
      {0.9, 0.1, 0.9, 0.1, 0.9, 0.1},
      {1.0, 0.0, 1.0, 0.0},
      {0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25},
      {0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0},
  };
  const std::size_t classes[] = {2, 2, 4, 3};
  for (std::size_t i = 0; i < degenerate.size(); ++i) {
    try {
      const std::size_t k = classes[i];
      const est::EnsembleSample s(degenerate[i], degenerate[i].size() / k, k);
      const auto fit = est::fit_mom(s);
      const auto refined = est::fit_batch(std::vector{s}, est::FitMode::mom_then_mle);
      bool finite = true;
      for (double a : fit.params.alpha()) finite = finite && std::isfinite(a) && a > 0.0;
      c.expect(fit.degenerate && refined[0].degenerate, "degenerate flag, case " + std::to_string(i));
      c.expect(std::abs(fit.params.alpha0() - est::kDefaultAlpha0Cap) <= 1e-6 * est::kDefaultAlpha0Cap,
               "capped alpha0, case " + std::to_string(i));
      c.expect(finite, "finite positive alphas, case " + std::to_string(i));
    } catch (const std::exception& e) {
      c.expect(false, "degenerate case " + std::to_string(i) + " threw: " + e.what());
    }
  }
  c.note("mean preservation worst " + num(worst));
}

void hand_checks(Check& c) {
  const est::EnsembleSample s({0.6, 0.4, 0.8, 0.2}, 2, 2);
  const auto fit = est::fit_mom(s);
  c.expect(std::abs(fit.params[0] - 6.65) <= 1e-9 && std::abs(fit.params[1] - 2.85) <= 1e-9,
           "MoM hand case gave (" + num(fit.params[0]) + ", " + num(fit.params[1]) + ")");

  auto binary = [](double conf, bool correct) {
    return cal::LabeledPrediction{ProbabilityVector({conf, 1.0 - conf}), correct ? 0u : 1u, ""};
  };
  const std::vector<cal::LabeledPrediction> four = {binary(0.95, true), binary(0.85, true),
                                                    binary(0.65, true), binary(0.55, false)};
  const double e = cal::ece(four, 10);
  c.expect(std::abs(e - 0.275) <= 1e-15, "ECE hand case gave " + num(e));

  auto scored = [](const char* id, double v, bool correct) {
    return sel::ScoredSample{id, ProbabilityVector({0.7, 0.3}), v, correct ? 0u : 1u};
  };
  const std::vector<sel::ScoredSample> calset = {scored("a", 0.001, true), scored("b", 0.002, true),
                                                 scored("c", 0.01, false), scored("d", 0.05, true)};
  const auto t = sel::calibrate_threshold(calset, 0.1);
  c.expect(t.tau == 0.002, "threshold hand case tau " + num(t.tau));
  c.expect(t.cal_coverage == 0.5, "threshold hand case coverage " + num(t.cal_coverage));
  c.note("alpha (" + num(fit.params[0]) + ", " + num(fit.params[1]) + "), ECE " + num(e) +
         ", tau " + num(t.tau));
}

void ece_masking(Check& c) {
  app::SimulateConfig cfg;
  cfg.num_samples = 10000;
  cfg.num_members = 2;
  cfg.num_classes = 100;
  cfg.seed = 17;
  cfg.scheme = app::AlphaScheme::collapse;
  const auto data = app::simulate(cfg);
  const auto labels = app::labels_for(data.labels, data.predictions.sample_ids);
  std::vector<cal::LabeledPrediction> preds;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    preds.push_back({predictive_mean(DirichletParams(data.truth.rows[i].alpha)), labels[i], ""});
  }
  const auto m = cal::metrics(preds);
  const double e = cal::ece(preds, 10);
  c.expect(std::abs(m.accuracy - 0.01) <= 0.005, "accuracy " + num(m.accuracy));
  c.expect(e < 0.01, "ECE " + num(e));
  c.note("accuracy " + num(m.accuracy) + ", ECE " + num(e));
}

bool is_correct(const sel::ScoredSample& s) { return argmax(s.mean.values()) == s.label; }

void selective_soundness(Check& c) {
  constexpr int kTrials = 100;
  constexpr double kRisk = 0.1;
  int within = 0;
  double worst_test = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    app::SimulateConfig cfg;
    cfg.num_samples = 4000;
    cfg.num_members = 10;
    cfg.num_classes = 5;
    cfg.seed = 5000 + static_cast<std::uint64_t>(trial);
    cfg.scheme = app::AlphaScheme::mixture;
    const auto data = app::simulate(cfg);
    const auto labels = app::labels_for(data.labels, data.predictions.sample_ids);
    std::vector<est::EnsembleSample> ens;
    for (const auto& row : data.predictions.probabilities) {
      ens.emplace_back(row, cfg.num_members, cfg.num_classes);
    }
    const auto fits = est::fit_batch(ens, est::FitMode::mom_then_mle);
    std::vector<sel::ScoredSample> all;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      all.push_back(sel::make_scored(data.predictions.sample_ids[i], fits[i].params, labels[i]));
    }
    Rng shuffle(cfg.seed, 1);
    for (std::size_t i = all.size() - 1; i > 0; --i) {
      std::swap(all[i], all[shuffle.uniform_index(i + 1)]);
    }
    const std::vector<sel::ScoredSample> calset(all.begin(), all.begin() + 2000);
    const std::vector<sel::ScoredSample> test(all.begin() + 2000, all.end());

    const auto t = sel::calibrate_threshold(calset, kRisk);
    std::size_t kept = 0;
    std::size_t wrong = 0;
    for (const auto& s : calset) {
      if (s.variance <= t.tau) {
        ++kept;
        wrong += is_correct(s) ? 0 : 1;
      }
    }
    if (kept > 0) {
      c.expect(static_cast<double>(wrong) / kept <= kRisk,
               "trial " + std::to_string(trial) + ": calibration risk above target");
    }

    std::size_t tk = 0;
    std::size_t tw = 0;
    for (const auto& s : test) {
      const auto decision = sel::decide(s, t.tau);
      if (decision) {
        ++tk;
        tw += *decision == s.label ? 0 : 1;
      }
    }
    const double test_risk = tk ? static_cast<double>(tw) / tk : 0.0;
    worst_test = std::max(worst_test, test_risk);
    within += test_risk <= kRisk + 0.05 ? 1 : 0;

    const auto curve = sel::risk_coverage_curve(test);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (i > 0) {
        c.expect(curve[i].coverage > curve[i - 1].coverage,
                 "trial " + std::to_string(trial) + ": coverage not strictly increasing");
      }
      std::size_t n = 0;
      std::size_t w = 0;
      for (const auto& s : test) {
        if (s.variance <= curve[i].tau_at_point) {
          ++n;
          w += is_correct(s) ? 0 : 1;
        }
      }
      c.expect(curve[i].coverage == static_cast<double>(n) / test.size() &&
                   curve[i].risk == static_cast<double>(w) / n,
               "trial " + std::to_string(trial) + ": curve point " + std::to_string(i) +
                   " disagrees with recount");
    }
  }
  c.expect(within >= 90, std::to_string(within) + " of 100 trials within r + 0.05");
  c.note(std::to_string(within) + "/100 trials within r + 0.05, worst test risk " + num(worst_test));
}

void ce_gradient_identity(Check& c) {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + rng.uniform_index(9);
    std::vector<double> z(k);
    for (auto& x : z) x = 4.0 * rng.standard_normal();
    const std::size_t y = rng.uniform_index(k);
    const auto g = ev::ce_gradient(z, y);
    for (std::size_t j = 0; j < k; ++j) {
      constexpr double h = 1e-5;
      auto zp = z;
      auto zm = z;
      zp[j] += h;
      zm[j] -= h;
      const double fd = (ev::ce_loss(ev::softmax(zp), y) - ev::ce_loss(ev::softmax(zm), y)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[j]));
      c.expect(std::abs(fd - g[j]) <= 1e-6, "case " + std::to_string(i) + " FD mismatch " +
                                                num(std::abs(fd - g[j])));
      c.expect(g[j] >= -1.0 && g[j] <= 1.0, "case " + std::to_string(i) + " outside [-1, 1]");
    }
  }
  c.note("worst FD gap " + num(worst));
}

struct PipelineOutputs {
  std::vector<std::string> files;
  double seconds = 0.0;
};

PipelineOutputs run_pipeline(const fs::path& dir, std::size_t threads) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  app::SimulateOptions s;
  s.config.num_samples = 500;
  s.config.num_members = 50;
  s.config.num_classes = 7;
  s.config.seed = 12;
  s.config.scheme = app::AlphaScheme::mixture;
  s.predictions_out = dir / "preds.csv";
  s.labels_out = dir / "labels.csv";
  s.alphas_out = dir / "truth.csv";
  app::cmd_simulate(s);

  app::FitOptions f;
  f.predictions = s.predictions_out;
  f.out = dir / "alphas.csv";
  f.mode = est::FitMode::mom_then_mle;
  f.batch.threads = threads;
  app::cmd_fit(f);

  app::EvaluateOptions e;
  e.alphas = f.out;
  e.labels = s.labels_out;
  e.out = dir / "eval.json";
  app::cmd_evaluate(e);

  app::SelectOptions sel;
  sel.alphas = f.out;
  sel.labels = s.labels_out;
  sel.out = dir / "select.json";
  sel.curve_out = dir / "curve.csv";
  sel.decisions_out = dir / "decisions.csv";
  sel.seed = 3;
  app::cmd_select(sel);

  PipelineOutputs out;
  out.seconds = seconds_since(t0);
  for (const char* name : {"preds.csv", "labels.csv", "truth.csv", "alphas.csv", "eval.json",
                           "select.json", "curve.csv", "decisions.csv"}) {
    out.files.push_back(app::read_file(dir / name));
  }
  return out;
}

void determinism(Check& c) {
  const fs::path root = fs::temp_directory_path() / "dirmom_acceptance";
  const std::size_t many = std::max<std::size_t>(4, std::thread::hardware_concurrency());
  const auto a = run_pipeline(root / "a", 1);
  const auto b = run_pipeline(root / "b", 1);
  const auto m = run_pipeline(root / "c", many);
  fs::remove_all(root);
  const char* names[] = {"preds", "labels", "truth", "alphas", "eval", "select", "curve", "decisions"};
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    c.expect(!a.files[i].empty(), std::string(names[i]) + " is empty");
    c.expect(a.files[i] == b.files[i], std::string(names[i]) + " differs between runs");
    c.expect(a.files[i] == m.files[i],
             std::string(names[i]) + " differs at " + std::to_string(many) + " threads");
  }
  const double worst = std::max({a.seconds, b.seconds, m.seconds});
  c.expect(worst < 60.0, "pipeline took " + num(worst) + " s");
  c.note("1 vs " + std::to_string(many) + " threads, slowest run " + num(worst) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
      {"special-function accuracy", special_functions},
      {"moment identities", moment_identities},
      {"collapse regime", collapse_regime},
      {"closed-form losses vs Monte Carlo", loss_monte_carlo},
      {"KL to uniform", kl_correctness},
      {"estimator recovery", estimator_recovery},
      {"MoM structure", mom_structure},
      {"hand-check vectors", hand_checks},
      {"low ECE masks collapse", ece_masking},
      {"selective soundness", selective_soundness},
      {"CE gradient identity", ce_gradient_identity},
      {"pipeline determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = check.ok();
    failed += ok ? 0 : 1;
    std::printf("[%s] %2zu %s (%.1f s): %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                seconds_since(t0), check.summary().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
