#pragma once

#include <vector>

#include "gfamp/common.hpp"

namespace gfamp::metrics {

// Per-trial, per-iteration measurement row.
struct MetricRecord {
  long trial = 0;
  int iteration = 0;
  double error_prob = 0.0;
  double false_alarm = 0.0;
  bool false_alarm_defined = true;  // false when no inactive devices exist
  double missed_detection = 0.0;
  bool missed_defined = true;  // false when no active devices exist
  double mse_active = 0.0;
  bool mse_active_defined = true;
  double mse_effective = 0.0;
  double f_obj = 0.0;
  double tau_mean = 0.0;
  double wall_time_us = 0.0;
};

// Group-sparsity surrogate objective: 0.5*||Y - A X||_F^2 + sum_i ||X(i,:)||_2.
double group_lasso_obj(const CMat& Y, const CMat& A, const CMat& X);

struct DetectionRates {
  double error_prob = 0.0;
  double false_alarm = 0.0;
  bool false_alarm_defined = true;
  double missed_detection = 0.0;
  bool missed_defined = true;
};

// Empirical rates; a zero denominator reports the rate as 0 with its
// defined-flag cleared.
DetectionRates detection_rates(const IVec& a_hat, const IVec& a);

struct ChannelMse {
  double mse_active = 0.0;     // mean over truly active devices of ||h - h_hat||^2 / (P*M)
  bool active_defined = true;  // false when no device is active
  double mse_effective = 0.0;  // ||X - X_hat||_F^2 / (N*P*M)
};

// X_hat_masked holds the detector-masked estimates: rows of undetected
// devices are zero, so a missed active device contributes its full channel
// energy to mse_active.
ChannelMse channel_mse(const CMat& X_hat_masked, const std::vector<CMat>& H, const IVec& a);

}  // namespace gfamp::metrics
