#pragma once

#include <chrono>
#include <cmath>
#include <string>

#include "gfamp/amp_types.hpp"

namespace gfamp::detail {

template <typename Mat>
void check_finite(const Mat& m, int iteration, const char* name) {
  if (m.allFinite()) return;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(std::abs(m(r, c)))) {
        std::string entry = std::string(name) + "(" + std::to_string(r);
        if (m.cols() > 1) entry += "," + std::to_string(c);
        entry += ")";
        throw NumericalAbort(iteration, entry);
      }
  throw NumericalAbort(iteration, name);
}

// 0.5*||Y - A X||_F^2 + sum_i ||X(i,:)||_2, evaluated from a precomputed
// raw residual so tracking costs no extra matrix product.
inline double objective_from_residual(const CMat& raw_resid, const CMat& X) {
  double f = 0.5 * raw_resid.squaredNorm();
  for (Eigen::Index i = 0; i < X.rows(); ++i) f += X.row(i).norm();
  return f;
}

// Detector-masked physical-scale estimate: keep row blocks of detected
// devices, zero the rest, undo the noise normalization.
inline CMat masked_estimate(const CMat& X, const IVec& a_hat, int P, double scale) {
  CMat out = CMat::Zero(X.rows(), X.cols());
  for (int n = 0; n < a_hat.size(); ++n)
    if (a_hat(n)) out.block(n * P, 0, P, X.cols()) = scale * X.block(n * P, 0, P, X.cols());
  return out;
}

inline void fill_truth_metrics(metrics::MetricRecord& rec, const IVec& a_hat,
                               const CMat& X_masked_phys, const GroundTruth* truth) {
  if (!truth || !truth->a || !truth->H) return;
  auto rates = metrics::detection_rates(a_hat, *truth->a);
  rec.error_prob = rates.error_prob;
  rec.false_alarm = rates.false_alarm;
  rec.false_alarm_defined = rates.false_alarm_defined;
  rec.missed_detection = rates.missed_detection;
  rec.missed_defined = rates.missed_defined;
  auto mse = metrics::channel_mse(X_masked_phys, *truth->H, *truth->a);
  rec.mse_active = mse.mse_active;
  rec.mse_active_defined = mse.active_defined;
  rec.mse_effective = mse.mse_effective;
}

using Clock = std::chrono::steady_clock;

inline double elapsed_us(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

constexpr double kTauFloor = 1e-300;  // keeps logs finite on a zero residual

}  // namespace gfamp::detail
