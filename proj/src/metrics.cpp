#include "gfamp/metrics.hpp"

namespace gfamp::metrics {

double group_lasso_obj(const CMat& Y, const CMat& A, const CMat& X) {
  if (A.cols() != X.rows() || A.rows() != Y.rows() || X.cols() != Y.cols())
    throw DimensionError("group_lasso_obj: shape mismatch");
  double f = 0.5 * (Y - A * X).squaredNorm();
  for (Eigen::Index i = 0; i < X.rows(); ++i) f += X.row(i).norm();
  return f;
}

DetectionRates detection_rates(const IVec& a_hat, const IVec& a) {
  if (a_hat.size() != a.size()) throw DimensionError("detection_rates: size mismatch");
  const Eigen::Index n = a.size();
  long active = 0, inactive = 0, miss = 0, fa = 0, err = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i)) {
      ++active;
      if (!a_hat(i)) ++miss;
    } else {
      ++inactive;
      if (a_hat(i)) ++fa;
    }
    if ((a_hat(i) != 0) != (a(i) != 0)) ++err;
  }
  DetectionRates r;
  r.error_prob = static_cast<double>(err) / static_cast<double>(n);
  r.false_alarm_defined = inactive > 0;
  r.false_alarm = inactive > 0 ? static_cast<double>(fa) / static_cast<double>(inactive) : 0.0;
  r.missed_defined = active > 0;
  r.missed_detection = active > 0 ? static_cast<double>(miss) / static_cast<double>(active) : 0.0;
  return r;
}

ChannelMse channel_mse(const CMat& X_hat_masked, const std::vector<CMat>& H, const IVec& a) {
  if (H.empty()) throw DimensionError("channel_mse: empty channel list");
  const int N = static_cast<int>(H.size());
  const int P = static_cast<int>(H[0].rows());
  const int M = static_cast<int>(H[0].cols());
  if (a.size() != N) throw DimensionError("channel_mse: activity size mismatch");
  if (X_hat_masked.rows() != static_cast<Eigen::Index>(N) * P || X_hat_masked.cols() != M)
    throw DimensionError("channel_mse: estimate shape mismatch");

  ChannelMse out;
  const double pm = static_cast<double>(P) * M;
  double active_sum = 0.0;
  long active_cnt = 0;
  double eff_sum = 0.0;
  for (int n = 0; n < N; ++n) {
    auto est = X_hat_masked.block(n * P, 0, P, M);
    if (a(n)) {
      double e = (H[n] - est).squaredNorm();
      active_sum += e / pm;
      ++active_cnt;
      eff_sum += e;
    } else {
      eff_sum += est.squaredNorm();
    }
  }
  out.active_defined = active_cnt > 0;
  out.mse_active = active_cnt > 0 ? active_sum / static_cast<double>(active_cnt) : 0.0;
  out.mse_effective = eff_sum / (static_cast<double>(N) * pm);
  return out;
}

}  // namespace gfamp::metrics
