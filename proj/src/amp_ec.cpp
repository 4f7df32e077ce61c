#include "gfamp/amp_ec.hpp"

#include <algorithm>
#include <cmath>

#include "amp_detail.hpp"
#include "gfamp/denoiser.hpp"

namespace gfamp::ec {

EcState ec_init(const CMat& Y, int N, int P, double rho) {
  if (N < 1 || P < 1) throw DimensionError("ec_init: N and P must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("ec_init: rho must be in (0,1)");
  EcState st;
  st.X_hat = CMat::Zero(static_cast<Eigen::Index>(N) * P, Y.cols());
  st.Z = Y;
  st.raw_resid = Y;
  st.tau_hat = RVec::Zero(Y.cols());
  st.ons = RVec::Zero(Y.cols());
  st.theta = RVec::Constant(N, std::log(rho) - std::log1p(-rho));
  st.lambda = RMat::Constant(static_cast<Eigen::Index>(N) * P, Y.cols(), rho);
  st.f_last = 0.5 * Y.squaredNorm();
  st.f_best = st.f_last;
  st.X_best = st.X_hat;
  st.theta_best = st.theta;
  st.t = 0;
  return st;
}

void ec_iterate(EcState& st, const CMat& Y, const CMat& A, const RVec& beta_eff, double rho) {
  const int L = static_cast<int>(A.rows());
  const int M = static_cast<int>(Y.cols());
  const int N = static_cast<int>(beta_eff.size());
  const int P = static_cast<int>(A.cols()) / N;
  if (A.cols() != static_cast<Eigen::Index>(N) * P || st.X_hat.rows() != A.cols())
    throw DimensionError("ec_iterate: A/beta_eff shape mismatch");
  const int it = st.t + 1;

  // residual power per antenna
  RVec tau(M);
  for (int m = 0; m < M; ++m)
    tau(m) = std::max(st.Z.col(m).squaredNorm() / L, detail::kTauFloor);
  detail::check_finite(tau, it, "tau_hat");

  // pseudo-observations
  CMat R = st.X_hat + A.adjoint() * st.Z;

  // device activity LLRs, accumulated with the per-antenna tau
  const double prior = std::log(rho) - std::log1p(-rho);
  RVec theta = RVec::Constant(N, prior);
  for (int m = 0; m < M; ++m) {
    const double t_m = tau(m);
    for (int n = 0; n < N; ++n) {
      const double b = beta_eff(n);
      const double lg = -std::log1p(b / t_m);
      const double coef = b / (t_m * (t_m + b));
      double acc = 0.0;
      for (int p = 0; p < P; ++p) acc += lg + std::norm(R(n * P + p, m)) * coef;
      theta(n) += acc;
    }
  }
  detail::check_finite(theta, it, "theta");

  // leave-one-out beliefs, denoised estimate, and the per-antenna sum of
  // denoiser derivatives feeding the Onsager term (one sum per column)
  CMat Xn(st.X_hat.rows(), M);
  RVec ons = RVec::Zero(M);
  for (int m = 0; m < M; ++m) {
    const double t_m = tau(m);
    double s = 0.0;
    for (int n = 0; n < N; ++n) {
      const double b = beta_eff(n);
      const double th = theta(n);
      for (int p = 0; p < P; ++p) {
        const Eigen::Index i = static_cast<Eigen::Index>(n) * P + p;
        const cxd r = R(i, m);
        const double lam = denoiser::lambda_local(th, r, t_m, b);
        st.lambda(i, m) = lam;
        Xn(i, m) = denoiser::eta(r, t_m, lam, b);
        s += denoiser::eta_prime(r, t_m, lam, b);
      }
    }
    ons(m) = s;
  }
  detail::check_finite(Xn, it, "X_hat");

  // Onsager-corrected residual
  CMat raw = Y - A * Xn;
  CMat Zn = raw;
  for (int m = 0; m < M; ++m) Zn.col(m) += st.Z.col(m) * (ons(m) / L);
  detail::check_finite(Zn, it, "Z");

  st.X_hat = std::move(Xn);
  st.Z = std::move(Zn);
  st.raw_resid = std::move(raw);
  st.tau_hat = std::move(tau);
  st.theta = std::move(theta);
  st.ons = std::move(ons);
  st.f_last = detail::objective_from_residual(st.raw_resid, st.X_hat);
  st.t = it;
}

RVec ec_tau_long(const EcState& st, double sigma2) {
  const double L = static_cast<double>(st.Z.rows());
  return RVec::Constant(st.tau_hat.size(), sigma2) +
         (st.tau_hat.array() * st.ons.array() / L).matrix();
}

void ec_track_best(EcState& st) {
  if (st.f_last < st.f_best) {
    st.f_best = st.f_last;
    st.X_best = st.X_hat;
    st.theta_best = st.theta;
  }
}

IVec ec_detect(const RVec& theta) {
  IVec a(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) a(n) = theta(n) >= 0.0 ? 1 : 0;
  return a;
}

std::vector<std::pair<int, CMat>> ec_extract_channels(const CMat& X, const IVec& a_hat) {
  const int N = static_cast<int>(a_hat.size());
  const int P = static_cast<int>(X.rows()) / N;
  std::vector<std::pair<int, CMat>> out;
  for (int n = 0; n < N; ++n)
    if (a_hat(n)) out.emplace_back(n, X.block(n * P, 0, P, X.cols()));
  return out;
}

RunResult ec_run(const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
                 const model::SystemConfig& cfg, const GroundTruth* truth, bool with_timing) {
  const int N = static_cast<int>(beta_eff.size());
  const int P = static_cast<int>(A.cols()) / std::max(N, 1);
  const double scale = std::sqrt(cfg.sigma2_mw);
  const CMat Yn = Y / scale;
  const RVec beta_n = beta_eff / cfg.sigma2_mw;
  const bool tracking = cfg.tracking_enabled;

  RunResult res;
  EcState st = ec_init(Yn, N, P, rho);
  double prev_tau = 0.0;
  for (int k = 1; k <= cfg.iterations; ++k) {
    auto t0 = detail::Clock::now();
    ec_iterate(st, Yn, A, beta_n, rho);
    if (tracking) ec_track_best(st);
    const double wall = with_timing ? detail::elapsed_us(t0) : 0.0;

    const RVec& theta_sel = tracking ? st.theta_best : st.theta;
    const CMat& X_sel = tracking ? st.X_best : st.X_hat;
    IVec a_hat = ec_detect(theta_sel);

    metrics::MetricRecord rec;
    rec.iteration = k;
    rec.f_obj = tracking ? st.f_best : st.f_last;
    rec.tau_mean = st.tau_hat.mean() * cfg.sigma2_mw;
    rec.wall_time_us = wall;
    detail::fill_truth_metrics(rec, a_hat, detail::masked_estimate(X_sel, a_hat, P, scale),
                               truth);
    res.trace.push_back(rec);
    res.iterations_run = k;

    const double cur_tau = st.tau_hat.mean();
    if (cfg.stop.kind == model::StopPolicy::Kind::RelTau && k >= 2 &&
        std::abs(cur_tau - prev_tau) / prev_tau < cfg.stop.eps)
      break;
    prev_tau = cur_tau;
  }

  const RVec& theta_sel = tracking ? st.theta_best : st.theta;
  res.a_hat = ec_detect(theta_sel);
  res.X_out = (tracking ? st.X_best : st.X_hat) * scale;
  res.theta_final = theta_sel;
  return res;
}

}  // namespace gfamp::ec
