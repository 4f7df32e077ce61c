#pragma once

#include <cstdint>

#include "gfamp/common.hpp"

// Slow reference implementations, independent of the closed forms they
// verify. Used by the `check` subcommand and by the test suites; never by
// the algorithms themselves.

namespace gfamp::oracle {

struct PosteriorMoments {
  cxd mean;            // E[x | r] under the spike-and-Gaussian prior
  double var;          // E[|x - mean|^2 | r]
  double active_mass;  // posterior probability of the Gaussian branch
};

// Numerical posterior of the scalar coordinate x = a*h, h ~ CN(0, beta),
// P(a=1) = z, observed through r = x + sqrt(y)*w. Cartesian tensor grid of
// `nodes`^2 points spanning +-12 posterior std devs around the Gaussian
// product center, log-domain accumulation, plus the exact point mass at 0.
// Equispaced rules are spectrally accurate here (the continuous branch is an
// exact Gaussian), so 64 nodes per axis reaches full double precision.
PosteriorMoments posterior_moments(cxd r, double y, double z, double beta, int nodes = 64);

struct McRates {
  double missed = 0.0;
  double missed_se = 0.0;
  double false_alarm = 0.0;
  double false_alarm_se = 0.0;
  double error_prob = 0.0;
  double error_prob_se = 0.0;
};

// Brute-force Monte Carlo of the LLR threshold detector on the decoupled
// vector observation r = a*h + sqrt(tau)*w, h ~ CN(0, beta I_{PM}).
// Declares active when PM*log(tau/(tau+beta)) + ||r||^2 * beta/(tau*(tau+beta))
// exceeds log((1-rho)/rho); counts errors against the drawn a.
McRates mc_detection(double tau, double beta, double rho, int PM, long samples,
                     std::uint64_t seed);

}  // namespace gfamp::oracle
