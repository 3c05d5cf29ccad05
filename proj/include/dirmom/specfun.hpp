#pragma once

#include <span>

// Scalar special functions over the positive reals. Every function here is
// pure and reentrant.
namespace dirmom::specfun {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double digamma(double x);

/// Solves digamma(x) = y for x > 0. Throws std::overflow_error when the
/// solution exceeds the double range (y above roughly 709.78) and
/// std::domain_error on non-finite y.
double inverse_digamma(double y);

/// sum_k ln Gamma(alpha_k) - ln Gamma(sum_k alpha_k). Requires at least two
/// strictly positive components.
double log_multivariate_beta(std::span<const double> alpha);

namespace detail {

// psi'(x); used by Newton steps and analytic gradients only.
double trigamma(double x);

}  // namespace detail
}  // namespace dirmom::specfun
