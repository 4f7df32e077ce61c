#pragma once

#include <cstdint>
#include <vector>

#include "gfamp/common.hpp"

// Scalar state evolution for the AMP recursions under a homogeneous channel
// gain, plus closed-form per-iteration detection error probability and
// channel-estimation MSE predictions.

namespace gfamp::se {

struct SeParams {
  int N = 0;
  int P = 0;
  int L = 0;
  int M = 0;
  double rho = 0.0;
  double beta = 0.0;    // homogeneous effective gain (mW)
  double sigma2 = 0.0;  // noise power (mW)
};

struct GammaPQ {
  double p;  // regularized lower incomplete gamma P(s, x)
  double q;  // regularized upper incomplete gamma Q(s, x)
};

// Series expansion for x < s+1, Lentz continued fraction otherwise.
GammaPQ reg_gamma(double s, double x);

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Initial effective-noise power sigma2 + (N P / L) rho beta.
double tau0(const SeParams& pr);

// Onsager penalty term phi(tau): Monte Carlo over the vector pseudo-
// observation model r = x + sqrt(tau) w. Rejects samples < 1000.
McEstimate phi_mc(double tau, const SeParams& pr, int samples, std::uint64_t seed);

// Same expectation reduced to two 1-D Gamma-weighted integrals (the gate
// depends on r only through ||r||^2).
double phi_quadrature(double tau, const SeParams& pr);

// One state-evolution step: sigma2 + (N P / L) (rho beta tau / (beta + tau) + phi).
double se_step(double tau, const SeParams& pr, int samples, std::uint64_t seed);

struct ErrorProbParts {
  double missed;       // Pr(declared inactive | active)
  double false_alarm;  // Pr(declared active | inactive)
  double error_prob;   // rho * missed + (1 - rho) * false_alarm
};

// Closed-form detection error of the LLR threshold test at effective noise
// tau, via regularized incomplete gamma functions.
ErrorProbParts error_prob_parts(double tau, const SeParams& pr);
double error_prob(double tau, const SeParams& pr);

// Per-coefficient MSE of the channel estimate for a truly active device:
// beta tau / (beta + tau) plus the gate-leakage term, estimated by MC.
McEstimate mse_active(double tau, const SeParams& pr, int samples, std::uint64_t seed);

// Same quantity with the leakage expectation reduced to a 1-D Gamma-weighted
// integral (exact up to quadrature error; used for cross-checks).
double mse_active_quadrature(double tau, const SeParams& pr);

struct SePrediction {
  std::vector<double> tau;    // tau^(0) .. tau^(T)
  std::vector<double> p_err;  // evaluated at each tau
  std::vector<double> p_md;
  std::vector<double> p_fa;
  std::vector<double> mse;
};

SePrediction predict(const SeParams& pr, int T, int samples = 100000, std::uint64_t seed = 1);

}  // namespace gfamp::se
