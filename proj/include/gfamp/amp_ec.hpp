#pragma once

#include <utility>
#include <vector>

#include "gfamp/amp_types.hpp"

// AMP recursion on the effective channels X = a .* h with a Bernoulli-Gaussian
// MMSE denoiser, device-level activity LLRs, and best-iterate tracking under
// the group-sparsity surrogate objective.

namespace gfamp::ec {

struct EcState {
  CMat X_hat;       // (N*P) x M effective-channel estimate
  CMat Z;           // L x M corrected residual
  CMat raw_resid;   // Y - A*X_hat for the current X_hat (reused by tracking)
  RVec tau_hat;     // M, per-antenna residual power
  RVec theta;       // N, device activity LLRs
  RMat lambda;      // (N*P) x M leave-one-out activity beliefs
  RVec ons;         // M, last pass's denoiser-derivative sums
  double f_last;    // objective of the current iterate
  double f_best;    // best objective seen so far
  CMat X_best;      // iterate frozen at f_best
  RVec theta_best;  // LLRs frozen together with X_best
  int t = 0;
};

EcState ec_init(const CMat& Y, int N, int P, double rho);

// One full update pass: residual power, pseudo-observations, device LLRs,
// leave-one-out beliefs, denoised estimate, Onsager-corrected residual.
// Throws NumericalAbort when a non-finite value appears.
void ec_iterate(EcState& st, const CMat& Y, const CMat& A, const RVec& beta_eff, double rho);

// Strict-improvement min-tracking of (f_best, X_best, theta_best).
void ec_track_best(EcState& st);

// Debug cross-check: the derivative-sum form of the next residual power,
// sigma2 + tau_hat * ons / L per antenna. Asymptotically equal to the
// residual form the recursion adopts; never used by the algorithm itself.
RVec ec_tau_long(const EcState& st, double sigma2);

// theta >= 0 declares a device active.
IVec ec_detect(const RVec& theta);

// (device index, P x M estimate) for each detected device.
std::vector<std::pair<int, CMat>> ec_extract_channels(const CMat& X, const IVec& a_hat);

// Full solve on a physical-scale instance. Observations are normalized by
// sqrt(sigma2) internally (the recursion is scale-equivariant; the surrogate
// objective is only meaningful on noise-normalized data) and estimates are
// rescaled back. f_obj is reported in noise-normalized units.
RunResult ec_run(const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
                 const model::SystemConfig& cfg, const GroundTruth* truth = nullptr,
                 bool with_timing = true);

}  // namespace gfamp::ec
