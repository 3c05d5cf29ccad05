#include "dirmom/evidential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dirmom/specfun.hpp"

namespace dirmom::evidential {
namespace {

void check_label(std::size_t label, std::size_t k) {
  if (label >= k) {
    throw std::out_of_range("label " + std::to_string(label) + " out of range for K=" +
                            std::to_string(k));
  }
}

// log(e^a + e^b) without overflow.
double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

void EvidentialConfig::validate(std::size_t num_classes) const {
  if (delta != 0 && delta != 1) {
    throw std::invalid_argument("EvidentialConfig: delta must be 0 or 1");
  }
  const bool adaptive = activation == Activation::adaptive_softplus;
  if (adaptive) {
    if (adaptive_beta.size() != num_classes || adaptive_gamma.size() != num_classes) {
      throw std::invalid_argument("EvidentialConfig: adaptive softplus needs one beta and gamma per class");
    }
    for (double b : adaptive_beta) {
      if (!(b >= 1.0) || !std::isfinite(b)) {
        throw std::invalid_argument("EvidentialConfig: adaptive beta must be >= 1");
      }
    }
    for (double g : adaptive_gamma) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw std::invalid_argument("EvidentialConfig: adaptive gamma must be > 0");
      }
    }
  } else if (!adaptive_beta.empty() || !adaptive_gamma.empty()) {
    throw std::invalid_argument("EvidentialConfig: adaptive parameters given for a non-adaptive activation");
  }
  if (!(clamp_bound > 0.0)) {
    throw std::invalid_argument("EvidentialConfig: clamp_bound must be > 0");
  }
  if (!(lambda0 >= 0.0) || !(lambda_ev >= 0.0)) {
    throw std::invalid_argument("EvidentialConfig: regularizer weights must be >= 0");
  }
}

ProbabilityVector softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) {
    throw std::invalid_argument("softmax: empty logits");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("softmax: temperature must be > 0");
  }
  std::vector<double> scaled(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) {
      throw std::invalid_argument("softmax: non-finite logit");
    }
    scaled[k] = logits[k] / temperature;
  }
  const double top = *std::max_element(scaled.begin(), scaled.end());
  double sum = 0.0;
  for (double& v : scaled) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : scaled) {
    v /= sum;
  }
  return ProbabilityVector(std::move(scaled));
}

double ce_loss(const ProbabilityVector& p, std::size_t label) {
  check_label(label, p.size());
  if (!(p[label] > 0.0)) {
    throw std::domain_error("ce_loss: zero probability at the true class");
  }
  return -std::log(p[label]);
}

std::vector<double> ce_gradient(std::span<const double> logits, std::size_t label) {
  check_label(label, logits.size());
  const ProbabilityVector p = softmax(logits, 1.0);
  std::vector<double> grad(p.vector());
  grad[label] -= 1.0;
  return grad;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double adaptive_softplus(double z, double beta, double gamma) {
  return log_add_exp(std::log(beta), std::log(gamma) + z);
}

double clamped_exp(double z, double bound) { return std::exp(std::clamp(z, -bound, bound)); }

std::vector<double> evidence(std::span<const double> logits, const EvidentialConfig& cfg) {
  cfg.validate(logits.size());
  std::vector<double> e(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    switch (cfg.activation) {
      case Activation::softplus:
        e[k] = softplus(logits[k]);
        break;
      case Activation::adaptive_softplus:
        e[k] = adaptive_softplus(logits[k], cfg.adaptive_beta[k], cfg.adaptive_gamma[k]);
        break;
      case Activation::exponential:
        e[k] = clamped_exp(logits[k], cfg.clamp_bound);
        break;
    }
  }
  return e;
}

DirichletParams alphas_from_evidence(std::span<const double> evidence, int delta) {
  if (delta != 0 && delta != 1) {
    throw std::invalid_argument("alphas_from_evidence: delta must be 0 or 1");
  }
  std::vector<double> alpha(evidence.size());
  for (std::size_t k = 0; k < evidence.size(); ++k) {
    if (!(evidence[k] >= 0.0)) {
      throw std::invalid_argument("alphas_from_evidence: evidence must be >= 0");
    }
    alpha[k] = evidence[k] + static_cast<double>(delta);
    if (delta == 0) {
      alpha[k] = std::max(alpha[k], kAlphaFloor);
    }
  }
  return DirichletParams(std::move(alpha));
}

double mse_loss(const DirichletParams& d, std::size_t label) {
  check_label(label, d.size());
  const double a0 = d.alpha0();
  double loss = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double p = d[k] / a0;
    const double y = k == label ? 1.0 : 0.0;
    loss += (y - p) * (y - p) + class_variance(d, k);
  }
  return loss;
}

std::vector<double> mse_loss_gradient(const DirichletParams& d, std::size_t label) {
  check_label(label, d.size());
  // With p = alpha / S: L = sum (y - p)^2 + sum p(1-p) / (S+1).
  const double s = d.alpha0();
  const std::size_t k_count = d.size();
  std::vector<double> g(k_count);
  double weighted = 0.0;
  double spread = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double p = d[k] / s;
    const double y = k == label ? 1.0 : 0.0;
    g[k] = -2.0 * (y - p) + (1.0 - 2.0 * p) / (s + 1.0);
    weighted += g[k] * p;
    spread += p * (1.0 - p);
  }
  std::vector<double> grad(k_count);
  for (std::size_t j = 0; j < k_count; ++j) {
    grad[j] = (g[j] - weighted) / s - spread / ((s + 1.0) * (s + 1.0));
  }
  return grad;
}

double digamma_loss(const DirichletParams& d, std::size_t label) {
  check_label(label, d.size());
  return specfun::digamma(d.alpha0()) - specfun::digamma(d[label]);
}

std::vector<double> digamma_loss_gradient(const DirichletParams& d, std::size_t label) {
  check_label(label, d.size());
  std::vector<double> grad(d.size(), specfun::detail::trigamma(d.alpha0()));
  grad[label] -= specfun::detail::trigamma(d[label]);
  return grad;
}

double mse_kl_loss(const DirichletParams& d, std::size_t label, double lambda_kl) {
  if (!(lambda_kl >= 0.0)) {
    throw std::invalid_argument("mse_kl_loss: lambda_kl must be >= 0");
  }
  const double mse = mse_loss(d, label);
  if (lambda_kl == 0.0) {
    return mse;
  }
  return mse + lambda_kl * kl_to_uniform(d);
}

std::vector<double> mse_kl_loss_gradient(const DirichletParams& d, std::size_t label,
                                         double lambda_kl) {
  if (!(lambda_kl >= 0.0)) {
    throw std::invalid_argument("mse_kl_loss_gradient: lambda_kl must be >= 0");
  }
  std::vector<double> grad = mse_loss_gradient(d, label);
  if (lambda_kl > 0.0) {
    const std::vector<double> kl = kl_to_uniform_gradient(d);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      grad[k] += lambda_kl * kl[k];
    }
  }
  return grad;
}

double log_evidence_penalty(const DirichletParams& d, double lambda_ev) {
  if (!(lambda_ev >= 0.0)) {
    throw std::invalid_argument("log_evidence_penalty: lambda_ev must be >= 0");
  }
  return lambda_ev * std::log1p(d.alpha0());
}

double annealed_lambda(double lambda0, std::size_t num_classes, double epoch, double total_epochs) {
  if (num_classes < 2) {
    throw std::invalid_argument("annealed_lambda: need K >= 2");
  }
  if (!(total_epochs >= 1.0)) {
    throw std::invalid_argument("annealed_lambda: total epochs must be >= 1");
  }
  if (!(epoch >= 0.0) || epoch > total_epochs) {
    throw std::invalid_argument("annealed_lambda: epoch must lie in [0, T]");
  }
  if (!(lambda0 >= 0.0)) {
    throw std::invalid_argument("annealed_lambda: lambda0 must be >= 0");
  }
  return lambda0 / static_cast<double>(num_classes) * (epoch / total_epochs);
}

double warmup_lambda(double epoch, double warmup_epochs) {
  if (!(warmup_epochs > 0.0) || !(epoch >= 0.0)) {
    throw std::invalid_argument("warmup_lambda: need epoch >= 0 and T > 0");
  }
  return std::min(1.0, epoch / warmup_epochs);
}

}  // namespace dirmom::evidential
