#include "gfamp/model.hpp"

#include <cmath>
#include <numbers>

namespace gfamp::model {

void SystemConfig::validate() const {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (Q < 1) throw ConfigError("Q must be >= 1");
  if (M < 1) throw ConfigError("M must be >= 1");
  if (P < 1) throw ConfigError("P must be >= 1");
  if (P > K) throw ConfigError("P must not exceed K");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must be in (0,1)");
  if (!(sigma2_mw > 0.0)) throw ConfigError("sigma2_mw must be positive");
  if (!(eta_pl > 0.0)) throw ConfigError("eta_pl must be positive");
  if (!(wavelength_m > 0.0)) throw ConfigError("wavelength_m must be positive");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (distance.kind == DistanceModel::Kind::Constant) {
    if (!(distance.d > 0.0)) throw ConfigError("distance d must be positive");
  } else {
    if (!(distance.d_lo > 0.0) || !(distance.d_hi >= distance.d_lo))
      throw ConfigError("distance range must satisfy 0 < d_lo <= d_hi");
  }
  if (stop.kind == StopPolicy::Kind::RelTau && !(stop.eps > 0.0))
    throw ConfigError("stop eps must be positive");
}

std::vector<CMat> gen_pilots(const SystemConfig& cfg, rng::Stream& rs) {
  std::vector<CMat> pilots(cfg.N);
  for (int n = 0; n < cfg.N; ++n) {
    CMat s(cfg.Q, cfg.K);
    for (int q = 0; q < cfg.Q; ++q)
      for (int k = 0; k < cfg.K; ++k) s(q, k) = rs.cnormal();
    // total pilot energy per device is fixed to K
    double scale = std::sqrt(static_cast<double>(cfg.K) / s.squaredNorm());
    pilots[n] = scale * s;
  }
  return pilots;
}

CMat dft_matrix(int K) {
  CMat F(K, K);
  const double w = -2.0 * std::numbers::pi / K;
  const double norm = 1.0 / std::sqrt(static_cast<double>(K));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) F(k, j) = std::polar(norm, w * k * j);
  return F;
}

CMat build_measurement_matrix(const std::vector<CMat>& pilots, int P) {
  if (pilots.empty()) throw DimensionError("build_measurement_matrix: no pilots");
  const int Q = static_cast<int>(pilots[0].rows());
  const int K = static_cast<int>(pilots[0].cols());
  const int N = static_cast<int>(pilots.size());
  if (P < 1 || P > K) throw DimensionError("build_measurement_matrix: P must be in [1, K]");
  const CMat F = dft_matrix(K);
  const CMat Fh = F.adjoint();
  const CMat Fp = F.leftCols(P);
  CMat A(K * Q, N * P);
  for (int n = 0; n < N; ++n) {
    if (pilots[n].rows() != Q || pilots[n].cols() != K)
      throw DimensionError("build_measurement_matrix: inconsistent pilot shape");
    for (int q = 0; q < Q; ++q) {
      // (F^H diag(s) F)(:, 0..P-1), built from the first P columns only
      A.block(q * K, n * P, K, P) = Fh * (pilots[n].row(q).transpose().asDiagonal() * Fp);
    }
  }
  return A;
}

double pathloss(double d, double eta_pl, double wavelength_m) {
  return std::pow(10.0, -eta_pl * std::log10(4.0 * std::numbers::pi * d / wavelength_m));
}

RVec gen_distances(const SystemConfig& cfg, rng::Stream& rs) {
  RVec d(cfg.N);
  if (cfg.distance.kind == DistanceModel::Kind::Constant) {
    d.setConstant(cfg.distance.d);
  } else {
    for (int n = 0; n < cfg.N; ++n)
      d(n) = cfg.distance.d_lo + (cfg.distance.d_hi - cfg.distance.d_lo) * rs.uniform();
  }
  return d;
}

RVec effective_gains(const SystemConfig& cfg, const RVec& distances) {
  const double pt = cfg.pt_mw();
  RVec beta(distances.size());
  for (Eigen::Index n = 0; n < distances.size(); ++n)
    beta(n) = pt * pathloss(distances(n), cfg.eta_pl, cfg.wavelength_m);
  return beta;
}

std::vector<CMat> gen_channels(const SystemConfig& cfg, const RVec& beta_eff, rng::Stream& rs) {
  if (beta_eff.size() != cfg.N) throw DimensionError("gen_channels: beta_eff size mismatch");
  std::vector<CMat> H(cfg.N);
  for (int n = 0; n < cfg.N; ++n) {
    const double s = std::sqrt(beta_eff(n));
    CMat h(cfg.P, cfg.M);
    for (int p = 0; p < cfg.P; ++p)
      for (int m = 0; m < cfg.M; ++m) h(p, m) = s * rs.cnormal();
    H[n] = std::move(h);
  }
  return H;
}

IVec gen_activities(const SystemConfig& cfg, rng::Stream& rs) {
  IVec a(cfg.N);
  for (int n = 0; n < cfg.N; ++n) a(n) = rs.bernoulli(cfg.rho) ? 1 : 0;
  return a;
}

CMat gen_noise(int L, int M, double sigma2_mw, rng::Stream& rs) {
  const double s = std::sqrt(sigma2_mw);
  CMat noise(L, M);
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < L; ++l) noise(l, m) = s * rs.cnormal();
  return noise;
}

CMat stack_effective(const std::vector<CMat>& H, const IVec& a) {
  if (H.empty()) throw DimensionError("stack_effective: empty channel list");
  const int N = static_cast<int>(H.size());
  const int P = static_cast<int>(H[0].rows());
  const int M = static_cast<int>(H[0].cols());
  if (a.size() != N) throw DimensionError("stack_effective: activity size mismatch");
  CMat X = CMat::Zero(N * P, M);
  for (int n = 0; n < N; ++n)
    if (a(n)) X.block(n * P, 0, P, M) = H[n];
  return X;
}

CMat synthesize_received(const CMat& A, const CMat& X, const CMat& noise) {
  if (A.cols() != X.rows()) throw DimensionError("synthesize_received: A/X shape mismatch");
  if (noise.rows() != A.rows() || noise.cols() != X.cols())
    throw DimensionError("synthesize_received: noise shape mismatch");
  return A * X + noise;
}

CMat synthesize_received_circulant(const std::vector<CMat>& pilots, const std::vector<CMat>& H,
                                   const IVec& a, int K, const CMat& noise) {
  const int N = static_cast<int>(pilots.size());
  if (static_cast<int>(H.size()) != N || a.size() != N)
    throw DimensionError("synthesize_received_circulant: inconsistent device counts");
  const int Q = static_cast<int>(pilots[0].rows());
  const int P = static_cast<int>(H[0].rows());
  const int M = static_cast<int>(H[0].cols());
  if (P > K) throw DimensionError("synthesize_received_circulant: P must not exceed K");
  if (noise.rows() != K * Q || noise.cols() != M)
    throw DimensionError("synthesize_received_circulant: noise shape mismatch");

  const CMat F = dft_matrix(K);
  const CMat Fh = F.adjoint();
  CMat Y = noise;
  // The stacked model folds the 1/sqrt(K) DFT normalization into the channel
  // block so that A has unit-norm columns; the reference path applies the
  // same scaling to the circulant convolution output.
  const double invsq = 1.0 / std::sqrt(static_cast<double>(K));
  CMat C(K, K);
  for (int n = 0; n < N; ++n) {
    if (!a(n)) continue;
    // time-domain pilots for device n
    CMat s_time = Fh * pilots[n].transpose();  // K x Q
    for (int m = 0; m < M; ++m) {
      // dense circulant from the zero-padded tap vector
      C.setZero();
      for (int i = 0; i < K; ++i)
        for (int p = 0; p < P; ++p) C((i + p) % K, i) = H[n](p, m);
      CMat out = C * s_time;  // K x Q
      for (int q = 0; q < Q; ++q) Y.col(m).segment(q * K, K) += invsq * out.col(q);
    }
  }
  return Y;
}

ScenarioInstance make_scenario(const SystemConfig& cfg, std::uint64_t point_index,
                               std::uint64_t trial_index) {
  cfg.validate();
  auto stream = [&](rng::Purpose p) {
    return rng::Stream(rng::derive_seed(
        cfg.master_seed, {point_index, trial_index, static_cast<std::uint64_t>(p)}));
  };
  ScenarioInstance sc;
  {
    auto rs = stream(rng::Purpose::pilots);
    sc.pilots = gen_pilots(cfg, rs);
  }
  sc.A = build_measurement_matrix(sc.pilots, cfg.P);
  {
    auto rs = stream(rng::Purpose::distances);
    sc.beta_eff = effective_gains(cfg, gen_distances(cfg, rs));
  }
  {
    auto rs = stream(rng::Purpose::activities);
    sc.a = gen_activities(cfg, rs);
  }
  {
    auto rs = stream(rng::Purpose::channels);
    sc.H = gen_channels(cfg, sc.beta_eff, rs);
  }
  sc.X = stack_effective(sc.H, sc.a);
  {
    auto rs = stream(rng::Purpose::noise);
    sc.Y = synthesize_received(sc.A, sc.X, gen_noise(cfg.L(), cfg.M, cfg.sigma2_mw, rs));
  }
  return sc;
}

}  // namespace gfamp::model
