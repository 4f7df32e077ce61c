#pragma once

#include <cstdint>
#include <vector>

#include "gfamp/common.hpp"
#include "gfamp/rng.hpp"

// Frequency-selective OFDM uplink model for grant-free random access:
// N devices, K subcarriers, Q pilot symbols (L = K*Q observations per
// antenna), M antennas, P channel taps per device. Devices transmit known
// pilots over circulant tap-domain channels; the stacked linear model is
// Y = A X + noise with unit-norm columns of A.

namespace gfamp::model {

struct DistanceModel {
  enum class Kind { Constant, Uniform };
  Kind kind = Kind::Constant;
  double d = 70.0;     // Constant: fixed BS-device distance (m)
  double d_lo = 50.0;  // Uniform: draw per device from [d_lo, d_hi]
  double d_hi = 100.0;
};

struct StopPolicy {
  enum class Kind { FixedIters, RelTau };
  Kind kind = Kind::FixedIters;
  double eps = 1e-6;  // RelTau: stop when |delta mean tau| / mean tau < eps
};

struct SystemConfig {
  int N = 1000;  // devices
  int K = 32;    // subcarriers
  int Q = 4;     // pilot OFDM symbols; L = K*Q
  int M = 64;    // BS antennas
  int P = 3;     // channel taps (P <= K)
  double rho = 0.1;
  double pt_dbm = 10.0;
  double sigma2_mw = 3.819442831163254e-12;  // 10^(-11.418)
  double eta_pl = 2.85;
  double wavelength_m = 0.086;
  DistanceModel distance;
  int iterations = 20;
  StopPolicy stop;
  bool tracking_enabled = true;
  std::uint64_t master_seed = 1;

  int L() const { return K * Q; }
  double pt_mw() const { return std::pow(10.0, pt_dbm / 10.0); }
  void validate() const;  // throws ConfigError
};

// One fully realized trial.
struct ScenarioInstance {
  std::vector<CMat> pilots;  // per device: Q x K, sum_q ||s_q||^2 = K
  CMat A;                    // L x (N*P)
  RVec beta_eff;             // N, pathloss * transmit power (mW)
  IVec a;                    // N, 0/1 activity
  std::vector<CMat> H;       // per device: P x M tap channels, entry variance beta_eff
  CMat X;                    // (N*P) x M effective coefficients, row n*P+p
  CMat Y;                    // L x M received signal
};

// i.i.d. CN(0,1) pilot symbols, rescaled per device to total energy K.
std::vector<CMat> gen_pilots(const SystemConfig& cfg, rng::Stream& rs);

// Unitary DFT matrix, F(k,k') = exp(-2i*pi*k*k'/K) / sqrt(K).
CMat dft_matrix(int K);

// Stack per-device blocks (F^H diag(s_q) F)(:, 0..P-1) over pilot symbols.
// Throws DimensionError if P exceeds K.
CMat build_measurement_matrix(const std::vector<CMat>& pilots, int P);

// Pathloss 10^(-eta * log10(4*pi*d / lambda)).
double pathloss(double d, double eta_pl, double wavelength_m);

// Per-device distances under cfg.distance (drawn once per trial).
RVec gen_distances(const SystemConfig& cfg, rng::Stream& rs);

// beta_eff = pt_mw * pathloss(d); folding transmit power into the channel
// variance keeps A's columns unit-norm.
RVec effective_gains(const SystemConfig& cfg, const RVec& distances);

// Tap channels h_{n,p,m} ~ CN(0, beta_eff_n).
std::vector<CMat> gen_channels(const SystemConfig& cfg, const RVec& beta_eff, rng::Stream& rs);

IVec gen_activities(const SystemConfig& cfg, rng::Stream& rs);

CMat gen_noise(int L, int M, double sigma2_mw, rng::Stream& rs);

// X row n*P+p = a_n * H_n(p, :).
CMat stack_effective(const std::vector<CMat>& H, const IVec& a);

// Y = A X + noise.
CMat synthesize_received(const CMat& A, const CMat& X, const CMat& noise);

// Reference path: per (device, antenna), build the dense K x K circulant
// channel matrix from the zero-padded taps and pass each pilot symbol
// through it in the time domain. Shares an injected noise realization so it
// can be compared entry-for-entry against synthesize_received.
CMat synthesize_received_circulant(const std::vector<CMat>& pilots, const std::vector<CMat>& H,
                                   const IVec& a, int K, const CMat& noise);

// Deterministic trial assembly; all substreams derived from
// (master_seed, point_index, trial_index, purpose).
ScenarioInstance make_scenario(const SystemConfig& cfg, std::uint64_t point_index,
                               std::uint64_t trial_index);

}  // namespace gfamp::model
