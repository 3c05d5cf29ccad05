#include "dirmom/app/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dirmom/dirichlet.hpp"
#include "dirmom/random.hpp"

namespace dirmom::app {
namespace {

std::string padded_id(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int id_width(std::size_t count, int minimum) {
  int digits = 1;
  for (std::size_t v = count > 0 ? count - 1 : 0; v >= 10; v /= 10) {
    ++digits;
  }
  return std::max(digits, minimum);
}

std::vector<double> peaked_alpha(std::size_t k, std::size_t hot, double peak, double alpha0) {
  std::vector<double> alpha(k, alpha0 * (1.0 - peak) / static_cast<double>(k - 1));
  alpha[hot] = alpha0 * peak;
  return alpha;
}

}  // namespace

void SimulateConfig::validate() const {
  if (num_samples == 0) {
    throw std::invalid_argument("simulate: number of samples must be >= 1");
  }
  if (num_members == 0) {
    throw std::invalid_argument("simulate: number of models must be >= 1");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("simulate: number of classes must be >= 2");
  }
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  switch (scheme) {
    case AlphaScheme::fixed:
      if (fixed_alphas.empty()) {
        throw std::invalid_argument("simulate: fixed scheme needs at least one alpha vector");
      }
      for (const auto& a : fixed_alphas) {
        if (a.size() != num_classes) {
          throw std::invalid_argument("simulate: alpha vector has " + std::to_string(a.size()) +
                                      " entries, expected K = " + std::to_string(num_classes));
        }
        for (double v : a) {
          if (!positive(v)) {
            throw std::invalid_argument("simulate: alpha entries must be finite and > 0");
          }
        }
      }
      break;
    case AlphaScheme::mixture:
      if (!(correct_fraction >= 0.0 && correct_fraction <= 1.0)) {
        throw std::invalid_argument("simulate: correct fraction must lie in [0, 1]");
      }
      if (!positive(alpha0_high) || !positive(alpha0_low)) {
        throw std::invalid_argument("simulate: mixture concentrations must be finite and > 0");
      }
      if (!(peak > 0.0 && peak < 1.0)) {
        throw std::invalid_argument("simulate: peak must lie in (0, 1)");
      }
      break;
    case AlphaScheme::collapse:
      if (!positive(collapse_alpha0)) {
        throw std::invalid_argument("simulate: collapse alpha0 must be finite and > 0");
      }
      break;
  }
}

SimulatedData simulate(const SimulateConfig& config) {
  config.validate();
  const std::size_t n = config.num_samples;
  const std::size_t m = config.num_members;
  const std::size_t k = config.num_classes;

  SimulatedData out;
  out.predictions.num_classes = k;
  out.truth.num_classes = k;
  const int model_width = id_width(m, 3);
  for (std::size_t j = 0; j < m; ++j) {
    out.predictions.model_ids.push_back(padded_id('m', j, model_width));
  }

  const int sample_width = id_width(n, 6);
  out.predictions.sample_ids.reserve(n);
  out.predictions.probabilities.reserve(n);
  out.truth.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(config.seed, i);
    std::size_t label = config.labels == LabelMode::balanced ? i % k : rng.uniform_index(k);

    std::vector<double> alpha;
    switch (config.scheme) {
      case AlphaScheme::fixed:
        alpha = config.fixed_alphas[i % config.fixed_alphas.size()];
        break;
      case AlphaScheme::mixture:
        if (rng.uniform_open() < config.correct_fraction) {
          alpha = peaked_alpha(k, label, config.peak, config.alpha0_high);
        } else {
          std::size_t wrong = rng.uniform_index(k - 1);
          if (wrong >= label) {
            ++wrong;
          }
          alpha = peaked_alpha(k, wrong, config.peak, config.alpha0_low);
        }
        break;
      case AlphaScheme::collapse:
        alpha.assign(k, config.collapse_alpha0 / static_cast<double>(k));
        break;
    }

    const DirichletParams d(alpha);
    std::vector<double> matrix;
    matrix.reserve(m * k);
    for (std::size_t j = 0; j < m; ++j) {
      const ProbabilityVector p = sample_one(d, rng);
      matrix.insert(matrix.end(), p.values().begin(), p.values().end());
    }

    std::string id = padded_id('s', i, sample_width);
    out.labels.labels.emplace(id, label);
    out.truth.rows.push_back(AlphaRow{id, false, std::move(alpha)});
    out.predictions.sample_ids.push_back(std::move(id));
    out.predictions.probabilities.push_back(std::move(matrix));
  }
  return out;
}

}  // namespace dirmom::app
