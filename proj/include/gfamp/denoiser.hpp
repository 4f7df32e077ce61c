#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "gfamp/common.hpp"

// Scalar MMSE denoiser for a Bernoulli-Gaussian prior under complex Gaussian
// pseudo-noise, plus the device-level activity log-likelihood ratio. All
// density ratios are formed as differences of log-densities and pushed
// through a saturating logistic, so mW-scale variances (~1e-11) never
// underflow a raw density evaluation.

namespace gfamp::denoiser {

inline double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// log f_CN(0; r, v): circularly-symmetric complex Gaussian log-density with
// mean r and variance v, evaluated at the origin.
inline double log_cn0(cxd r, double v) {
  if (!(v > 0.0)) throw std::domain_error("log_cn0: variance must be positive");
  return -std::log(std::numbers::pi * v) - std::norm(r) / v;
}

namespace detail {
// log f_CN(0; x, y+beta) - log f_CN(0; x, y): per-entry log evidence that x
// carries signal power beta on top of noise power y.
inline double evidence(cxd x, double y, double beta) {
  return std::norm(x) * (beta / (y * (y + beta))) - std::log1p(beta / y);
}
}  // namespace detail

// Posterior activity weight g for one entry, given prior belief z.
inline double activity_gate(cxd x, double y, double z, double beta) {
  if (!(y > 0.0)) throw std::domain_error("activity_gate: y must be positive");
  if (!(beta > 0.0)) throw std::domain_error("activity_gate: beta must be positive");
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return logistic(std::log(z) - std::log1p(-z) + detail::evidence(x, y, beta));
}

// Posterior mean of one Bernoulli-Gaussian coefficient under pseudo-noise
// variance y and prior activity belief z.
inline cxd eta(cxd x, double y, double z, double beta) {
  return (beta / (y + beta)) * activity_gate(x, y, z, beta) * x;
}

// Wirtinger derivative d eta / d x. y * eta_prime equals the posterior
// variance of the coefficient.
inline double eta_prime(cxd x, double y, double z, double beta) {
  double g = activity_gate(x, y, z, beta);
  double gg = g * (1.0 - g);
  double curv = (gg == 0.0) ? 0.0 : std::norm(x) * gg * beta / (y * (y + beta));
  return std::max((beta / (y + beta)) * (g + curv), 0.0);
}

// Device-level activity log-likelihood ratio over the P*M pseudo-observations
// of one device, at common pseudo-noise variance tau.
inline double llr_theta(std::span<const cxd> r, double tau, double beta, double rho) {
  if (!(tau > 0.0)) throw std::domain_error("llr_theta: tau must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("llr_theta: rho must be in (0,1)");
  double lg = -std::log1p(beta / tau);
  double coef = beta / (tau * (tau + beta));
  double theta = std::log(rho) - std::log1p(-rho);
  for (cxd v : r) theta += lg + std::norm(v) * coef;
  return theta;
}

// Leave-one-out activity belief for one entry: the device LLR with this
// entry's own evidence removed, mapped back to a probability.
inline double lambda_local(double theta, cxd r, double tau, double beta) {
  return logistic(theta - detail::evidence(r, tau, beta));
}

}  // namespace gfamp::denoiser
