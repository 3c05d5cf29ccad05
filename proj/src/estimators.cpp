#include "dirmom/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "dirmom/specfun.hpp"

namespace dirmom::estimators {

EnsembleSample::EnsembleSample(std::vector<ProbabilityVector> members)
    : members_(members.size()), classes_(members.empty() ? 0 : members.front().size()) {
  if (members.empty()) {
    throw std::invalid_argument("EnsembleSample: no members");
  }
  data_.reserve(members_ * classes_);
  for (const auto& p : members) {
    if (p.size() != classes_) {
      throw std::invalid_argument("EnsembleSample: members disagree on K");
    }
    data_.insert(data_.end(), p.values().begin(), p.values().end());
  }
}

EnsembleSample::EnsembleSample(std::vector<double> row_major, std::size_t num_members,
                               std::size_t num_classes)
    : data_(std::move(row_major)), members_(num_members), classes_(num_classes) {
  if (num_members == 0 || num_classes == 0 || data_.size() != num_members * num_classes) {
    throw std::invalid_argument("EnsembleSample: data size does not match M x K");
  }
  for (std::size_t m = 0; m < members_; ++m) {
    // Validates simplex membership.
    ProbabilityVector(std::vector<double>(member(m).begin(), member(m).end()));
  }
}

MomentSummary moments(const EnsembleSample& s) {
  const std::size_t m_count = s.num_members();
  const std::size_t k_count = s.num_classes();
  if (m_count < 2) {
    throw std::invalid_argument("moments: need at least two ensemble members, got " +
                                std::to_string(m_count));
  }
  MomentSummary out;
  // Two-pass moments on deviations from the first member. Identical members
  // then give sigma2 == 0 exactly, where a plain mean would leave a residue of
  // one rounding step.
  const auto first = s.member(0);
  std::vector<double> shift(k_count, 0.0);
  for (std::size_t m = 1; m < m_count; ++m) {
    const auto row = s.member(m);
    for (std::size_t k = 0; k < k_count; ++k) {
      shift[k] += row[k] - first[k];
    }
  }
  for (double& v : shift) {
    v /= static_cast<double>(m_count);
  }
  out.sigma2.assign(k_count, 0.0);
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto row = s.member(m);
    for (std::size_t k = 0; k < k_count; ++k) {
      const double dev = (row[k] - first[k]) - shift[k];
      out.sigma2[k] += dev * dev;
    }
  }
  for (double& v : out.sigma2) {
    v /= static_cast<double>(m_count - 1);
  }
  out.mu.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    out.mu[k] = first[k] + shift[k];
  }

  out.class_alpha0.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double num = out.mu[k] * (1.0 - out.mu[k]);
    double a0 = std::numeric_limits<double>::infinity();
    if (out.sigma2[k] > 0.0) {
      a0 = num / out.sigma2[k] - 1.0;
    } else if (num == 0.0) {
      a0 = std::numeric_limits<double>::quiet_NaN();
    }
    out.class_alpha0[k] = a0;
    if (a0 > 0.0 && std::isfinite(a0)) {
      out.valid_classes.push_back(k);
    }
  }
  return out;
}

FitResult fit_mom(const EnsembleSample& s, double alpha0_cap) {
  if (!(alpha0_cap > 0.0) || !std::isfinite(alpha0_cap)) {
    throw std::invalid_argument("fit_mom: alpha0 cap must be finite and > 0");
  }
  const MomentSummary mom = moments(s);
  const bool degenerate = mom.valid_classes.empty();
  double alpha0 = alpha0_cap;
  if (!degenerate) {
    double sum = 0.0;
    for (std::size_t k : mom.valid_classes) {
      sum += mom.class_alpha0[k];
    }
    alpha0 = sum / static_cast<double>(mom.valid_classes.size());
  }
  std::vector<double> alpha(mom.mu.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    alpha[k] = std::max(mom.mu[k] * alpha0, kMinConcentration);
  }
  return FitResult{DirichletParams(std::move(alpha)), degenerate, 0, false, {}};
}

std::vector<double> mean_log_probabilities(const EnsembleSample& s, double p_floor) {
  if (!(p_floor > 0.0)) {
    throw std::invalid_argument("mean_log_probabilities: p_floor must be > 0");
  }
  std::vector<double> out(s.num_classes(), 0.0);
  for (std::size_t m = 0; m < s.num_members(); ++m) {
    const auto row = s.member(m);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] += std::log(std::max(row[k], p_floor));
    }
  }
  for (double& v : out) {
    v /= static_cast<double>(s.num_members());
  }
  return out;
}

namespace {

double euclidean_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) {
    acc += x * x;
  }
  return std::sqrt(acc);
}

}  // namespace

FitResult fit_mle(const EnsembleSample& s, const DirichletParams& init, const MleSettings& settings) {
  if (s.num_members() == 0) {
    throw std::invalid_argument("fit_mle: empty sample");
  }
  if (init.size() != s.num_classes()) {
    throw std::invalid_argument("fit_mle: initial parameters do not match K");
  }
  if (settings.max_iter < 1) {
    throw std::invalid_argument("fit_mle: max_iter must be >= 1");
  }
  if (!(settings.eps > 0.0)) {
    throw std::invalid_argument("fit_mle: eps must be > 0");
  }
  const std::vector<double> mean_log = mean_log_probabilities(s, settings.p_floor);
  const std::size_t k_count = s.num_classes();

  std::vector<double> alpha(init.alpha().begin(), init.alpha().end());
  std::vector<double> next(k_count);
  std::vector<double> diff(k_count);

  FitResult result{init, false, 0, false, {}};
  if (settings.record_trace) {
    result.log_likelihood_trace.push_back(
        log_likelihood_from_stats(alpha, mean_log, s.num_members()));
  }

  for (std::size_t iter = 0; iter < settings.max_iter; ++iter) {
    double alpha0 = 0.0;
    for (double a : alpha) {
      alpha0 += a;
    }
    const double psi0 = specfun::digamma(alpha0);
    for (std::size_t k = 0; k < k_count; ++k) {
      next[k] = std::max(specfun::inverse_digamma(psi0 + mean_log[k]), kMinConcentration);
      diff[k] = next[k] - alpha[k];
    }
    const double step = euclidean_norm(diff);
    const double scale = euclidean_norm(alpha);
    alpha.swap(next);
    result.iterations_used = iter + 1;
    if (settings.record_trace) {
      result.log_likelihood_trace.push_back(
          log_likelihood_from_stats(alpha, mean_log, s.num_members()));
    }
    if (step < settings.eps * scale) {
      result.converged = true;
      break;
    }
  }
  result.params = DirichletParams(std::move(alpha));
  return result;
}

std::vector<FitResult> fit_batch(std::span<const EnsembleSample> samples, FitMode mode,
                                 const BatchSettings& settings) {
  if (samples.empty()) {
    return {};
  }
  const std::size_t k_count = samples.front().num_classes();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].num_classes() != k_count) {
      throw std::invalid_argument("fit_batch: sample " + std::to_string(i) + " has K=" +
                                  std::to_string(samples[i].num_classes()) + ", expected " +
                                  std::to_string(k_count));
    }
  }

  auto fit_one = [&](const EnsembleSample& s) {
    FitResult r = fit_mom(s, settings.alpha0_cap);
    if (mode == FitMode::mom_then_mle && !r.degenerate) {
      r = fit_mle(s, r.params, settings.mle);
    }
    return r;
  };

  std::size_t threads = settings.threads;
  if (threads == 0) {
    threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  threads = std::min(threads, samples.size());

  if (threads <= 1) {
    std::vector<FitResult> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
      out.push_back(fit_one(s));
    }
    return out;
  }

  // Each result lands in its own slot, so output is order-preserving and
  // independent of scheduling.
  std::vector<std::optional<FitResult>> slots(samples.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = cursor.fetch_add(1); i < samples.size() && !failed.load();
             i = cursor.fetch_add(1)) {
          try {
            slots[i].emplace(fit_one(samples[i]));
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
              failure = std::current_exception();
            }
            failed.store(true);
          }
        }
      });
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  std::vector<FitResult> out;
  out.reserve(samples.size());
  for (auto& slot : slots) {
    out.push_back(std::move(*slot));
  }
  return out;
}

}  // namespace dirmom::estimators
