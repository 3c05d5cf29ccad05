#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dirmom/dirichlet.hpp"

// Closed-form evaluation of evidential (Dirichlet-output) classifier
// objectives: softmax/cross-entropy, evidence activations, the evidence to
// concentration mapping, the expected-loss objectives and their regularizers.
// Nothing here trains anything; gradients are analytic so they can be checked
// by finite differences.
namespace dirmom::evidential {

enum class Activation { softplus, adaptive_softplus, exponential };

enum class KlMode {
  none,
  annealed_kl,  // lambda0 / K * t / T
  warmup_kl,    // min(1, t / T)
  log_evidence,
};

struct EvidentialConfig {
  Activation activation = Activation::softplus;
  int delta = 1;
  std::vector<double> adaptive_beta;   // per class, >= 1; adaptive_softplus only
  std::vector<double> adaptive_gamma;  // per class, > 0; adaptive_softplus only
  double clamp_bound = 30.0;           // exponential only
  double lambda0 = 1.0;
  KlMode kl_mode = KlMode::none;
  double lambda_ev = 0.0;

  /// Throws std::invalid_argument on a violated invariant. `num_classes` is
  /// checked against the adaptive parameter lengths.
  void validate(std::size_t num_classes) const;
};

/// Lower bound applied to concentrations when delta = 0.
inline constexpr double kAlphaFloor = 1e-6;

/// exp(z / T) normalized, computed max-shifted. T may be +infinity.
ProbabilityVector softmax(std::span<const double> logits, double temperature = 1.0);

/// -ln p[label]. Throws std::domain_error when p[label] == 0.
double ce_loss(const ProbabilityVector& p, std::size_t label);

/// d CE(softmax(z)) / dz = softmax(z) - onehot(label); each entry in [-1, 1].
std::vector<double> ce_gradient(std::span<const double> logits, std::size_t label);

double softplus(double z);
/// log(beta + gamma e^z).
double adaptive_softplus(double z, double beta, double gamma);
/// exp(clamp(z, -bound, bound)).
double clamped_exp(double z, double bound);

/// Elementwise evidence e_k = phi(z_k) for the configured activation.
std::vector<double> evidence(std::span<const double> logits, const EvidentialConfig& cfg);

/// alpha_k = e_k + delta, floored at kAlphaFloor when delta = 0.
DirichletParams alphas_from_evidence(std::span<const double> evidence, int delta);

/// E_{p~Dir(alpha)} ||y - p||^2 in closed form.
double mse_loss(const DirichletParams& d, std::size_t label);
std::vector<double> mse_loss_gradient(const DirichletParams& d, std::size_t label);

/// E_{p~Dir(alpha)} [-ln p_label] = psi(alpha0) - psi(alpha_label).
double digamma_loss(const DirichletParams& d, std::size_t label);
std::vector<double> digamma_loss_gradient(const DirichletParams& d, std::size_t label);

/// mse_loss + lambda_kl * KL(Dir(alpha) || Dir(1)).
double mse_kl_loss(const DirichletParams& d, std::size_t label, double lambda_kl);
std::vector<double> mse_kl_loss_gradient(const DirichletParams& d, std::size_t label,
                                         double lambda_kl);

/// lambda_ev * ln(1 + alpha0).
double log_evidence_penalty(const DirichletParams& d, double lambda_ev);

/// (lambda0 / K) * (t / T). Requires 0 <= t <= T, T >= 1, K >= 2.
double annealed_lambda(double lambda0, std::size_t num_classes, double epoch, double total_epochs);

/// min(1, t / T); the warm-up alternative to annealed_lambda.
double warmup_lambda(double epoch, double warmup_epochs);

}  // namespace dirmom::evidential
