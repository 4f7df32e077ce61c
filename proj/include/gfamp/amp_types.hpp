#pragma once

#include <vector>

#include "gfamp/common.hpp"
#include "gfamp/metrics.hpp"
#include "gfamp/model.hpp"

namespace gfamp {

// Optional ground truth used to fill detection/MSE metric columns while an
// algorithm runs; the recursion itself never reads it.
struct GroundTruth {
  const IVec* a = nullptr;
  const std::vector<CMat>* H = nullptr;
};

struct RunResult {
  IVec a_hat;                                 // detected activity
  CMat X_out;                                 // effective-channel estimates, physical scale
  RVec theta_final;                           // device log-likelihood ratios backing a_hat
  std::vector<metrics::MetricRecord> trace;   // one row per executed iteration
  int iterations_run = 0;
};

}  // namespace gfamp
