#pragma once

#include "gfamp/amp_types.hpp"

// AMP recursion on (activity, channel) pairs: a soft activity probability per
// device and a Gaussian channel estimate per coefficient. Cheaper per
// iteration than the effective-channel recursion because the denoiser
// collapses to one linear shrinkage per entry plus one logistic per device.

namespace gfamp::ac {

struct AcState {
  CMat H_hat;        // (N*P) x M channel estimate
  RVec lambda_hat;   // N soft activity probabilities
  CMat Z;            // L x M corrected residual
  RVec tau_hat;      // M per-antenna residual power
  RVec theta;        // N device activity LLRs
  double f_last;     // objective of the current thresholded iterate
  double f_best;     // best objective seen so far
  IVec a_best;       // detection frozen at f_best
  CMat H_best;       // channel estimate frozen at f_best
  int t = 0;
};

AcState ac_init(const CMat& Y, int N, int P, double rho);

// One full update pass; throws NumericalAbort on non-finite values.
void ac_iterate(AcState& st, const CMat& Y, const CMat& A, const RVec& beta_eff, double rho);

// Threshold theta at 0, evaluate the surrogate objective at a_hat .* H_hat,
// min-track (f_best, a_best, H_best). Also refreshes st.f_last.
void ac_track_best(AcState& st, const CMat& Y, const CMat& A);

// Full solve on a physical-scale instance; see ec_run for the normalization
// convention. X_out rows hold the per-device channel estimates H_hat.
RunResult ac_run(const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
                 const model::SystemConfig& cfg, const GroundTruth* truth = nullptr,
                 bool with_timing = true);

}  // namespace gfamp::ac
