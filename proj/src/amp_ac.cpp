#include "gfamp/amp_ac.hpp"

#include <algorithm>
#include <cmath>

#include "amp_detail.hpp"
#include "gfamp/amp_ec.hpp"
#include "gfamp/denoiser.hpp"

namespace gfamp::ac {

AcState ac_init(const CMat& Y, int N, int P, double rho) {
  if (N < 1 || P < 1) throw DimensionError("ac_init: N and P must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("ac_init: rho must be in (0,1)");
  AcState st;
  st.H_hat = CMat::Zero(static_cast<Eigen::Index>(N) * P, Y.cols());
  st.lambda_hat = RVec::Constant(N, rho);
  st.Z = Y;
  st.tau_hat = RVec::Zero(Y.cols());
  st.theta = RVec::Constant(N, std::log(rho) - std::log1p(-rho));
  st.f_last = 0.5 * Y.squaredNorm();
  st.f_best = st.f_last;
  st.a_best = IVec::Zero(N);
  st.H_best = st.H_hat;
  st.t = 0;
  return st;
}

void ac_iterate(AcState& st, const CMat& Y, const CMat& A, const RVec& beta_eff, double rho) {
  const int L = static_cast<int>(A.rows());
  const int M = static_cast<int>(Y.cols());
  const int N = static_cast<int>(beta_eff.size());
  const int P = static_cast<int>(A.cols()) / N;
  if (A.cols() != static_cast<Eigen::Index>(N) * P || st.H_hat.rows() != A.cols())
    throw DimensionError("ac_iterate: A/beta_eff shape mismatch");
  const int it = st.t + 1;

  RVec tau(M);
  for (int m = 0; m < M; ++m)
    tau(m) = std::max(st.Z.col(m).squaredNorm() / L, detail::kTauFloor);
  detail::check_finite(tau, it, "tau_hat");

  // pseudo-observations around the soft effective estimate
  CMat R = A.adjoint() * st.Z;
  for (int n = 0; n < N; ++n)
    R.block(n * P, 0, P, M) += st.lambda_hat(n) * st.H_hat.block(n * P, 0, P, M);

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

  RVec lam(N);
  for (int n = 0; n < N; ++n) lam(n) = denoiser::logistic(theta(n));
  detail::check_finite(lam, it, "lambda_hat");

  // linear shrinkage per entry
  CMat Hn(st.H_hat.rows(), M);
  for (int m = 0; m < M; ++m) {
    const double t_m = tau(m);
    for (int n = 0; n < N; ++n) {
      const double gain = beta_eff(n) / (t_m + beta_eff(n));
      for (int p = 0; p < P; ++p) {
        const Eigen::Index i = static_cast<Eigen::Index>(n) * P + p;
        Hn(i, m) = gain * R(i, m);
      }
    }
  }
  detail::check_finite(Hn, it, "H_hat");

  // soft effective estimate and its Onsager coefficient (new lambda)
  CMat V(Hn.rows(), M);
  for (int n = 0; n < N; ++n) V.block(n * P, 0, P, M) = lam(n) * Hn.block(n * P, 0, P, M);
  RVec ons(M);
  for (int m = 0; m < M; ++m) {
    const double t_m = tau(m);
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += lam(n) * beta_eff(n) / (t_m + beta_eff(n));
    ons(m) = s * P;
  }
  CMat Zn = Y - A * V;
  for (int m = 0; m < M; ++m) Zn.col(m) += st.Z.col(m) * (ons(m) / L);
  detail::check_finite(Zn, it, "Z");

  st.H_hat = std::move(Hn);
  st.lambda_hat = std::move(lam);
  st.Z = std::move(Zn);
  st.tau_hat = std::move(tau);
  st.theta = std::move(theta);
  st.t = it;
}

namespace {
double thresholded_objective(const AcState& st, const CMat& Y, const CMat& A, IVec& a_out) {
  const int N = static_cast<int>(st.theta.size());
  const int P = static_cast<int>(st.H_hat.rows()) / N;
  a_out = ec::ec_detect(st.theta);
  CMat Xm = detail::masked_estimate(st.H_hat, a_out, P, 1.0);
  return detail::objective_from_residual(Y - A * Xm, Xm);
}
}  // namespace

void ac_track_best(AcState& st, const CMat& Y, const CMat& A) {
  IVec a_hat;
  st.f_last = thresholded_objective(st, Y, A, a_hat);
  if (st.f_last < st.f_best) {
    st.f_best = st.f_last;
    st.a_best = a_hat;
    st.H_best = st.H_hat;
  }
}

RunResult ac_run(const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
                 const model::SystemConfig& cfg, const GroundTruth* truth, bool with_timing) {
  const int N = static_cast<int>(beta_eff.size());
  const int P = static_cast<int>(A.cols()) / std::max(N, 1);
  const double scale = std::sqrt(cfg.sigma2_mw);
  const CMat Yn = Y / scale;
  const RVec beta_n = beta_eff / cfg.sigma2_mw;
  const bool tracking = cfg.tracking_enabled;

  RunResult res;
  AcState st = ac_init(Yn, N, P, rho);
  double prev_tau = 0.0;
  for (int k = 1; k <= cfg.iterations; ++k) {
    auto t0 = detail::Clock::now();
    ac_iterate(st, Yn, A, beta_n, rho);
    IVec a_cur;
    if (tracking) {
      ac_track_best(st, Yn, A);
      a_cur = st.a_best;
    } else {
      st.f_last = thresholded_objective(st, Yn, A, a_cur);
    }
    const double wall = with_timing ? detail::elapsed_us(t0) : 0.0;

    const CMat& H_sel = tracking ? st.H_best : st.H_hat;
    metrics::MetricRecord rec;
    rec.iteration = k;
    rec.f_obj = tracking ? st.f_best : st.f_last;
    rec.tau_mean = st.tau_hat.mean() * cfg.sigma2_mw;
    rec.wall_time_us = wall;
    detail::fill_truth_metrics(rec, a_cur, detail::masked_estimate(H_sel, a_cur, P, scale),
                               truth);
    res.trace.push_back(rec);
    res.iterations_run = k;

    const double cur_tau = st.tau_hat.mean();
    if (cfg.stop.kind == model::StopPolicy::Kind::RelTau && k >= 2 &&
        std::abs(cur_tau - prev_tau) / prev_tau < cfg.stop.eps)
      break;
    prev_tau = cur_tau;
  }

  res.a_hat = tracking ? st.a_best : ec::ec_detect(st.theta);
  res.X_out = (tracking ? st.H_best : st.H_hat) * scale;
  res.theta_final = st.theta;
  return res;
}

}  // namespace gfamp::ac
