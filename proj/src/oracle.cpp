#include "gfamp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gfamp/rng.hpp"

namespace gfamp::oracle {

namespace {
constexpr double kPi = std::numbers::pi;

double log_gauss2(cxd r, cxd c, double v) {  // log CN(r; c, v)
  return -std::log(kPi * v) - std::norm(r - c) / v;
}
}  // namespace

PosteriorMoments posterior_moments(cxd r, double y, double z, double beta, int nodes) {
  if (!(y > 0.0) || !(beta > 0.0)) throw std::domain_error("posterior_moments: y, beta must be > 0");
  if (z < 0.0 || z > 1.0) throw std::domain_error("posterior_moments: z must be in [0, 1]");
  if (nodes < 8) throw std::domain_error("posterior_moments: nodes too small");

  const bool has_spike = z < 1.0;
  const bool has_slab = z > 0.0;
  const double lw_spike = has_spike ? std::log1p(-z) + log_gauss2(r, cxd(0, 0), y) : 0.0;

  std::vector<double> lw;
  std::vector<cxd> xs;
  if (has_slab) {
    const cxd c = r * (beta / (y + beta));
    const double sd = std::sqrt(0.5 * y * beta / (y + beta));  // per real axis
    const double h = 24.0 * sd / (nodes - 1);
    const double la = std::log(z) + 2.0 * std::log(h);
    lw.reserve(static_cast<std::size_t>(nodes) * nodes);
    xs.reserve(lw.capacity());
    for (int i = 0; i < nodes; ++i) {
      const double re = c.real() + (i - 0.5 * (nodes - 1)) * h;
      for (int j = 0; j < nodes; ++j) {
        const double im = c.imag() + (j - 0.5 * (nodes - 1)) * h;
        const cxd x(re, im);
        xs.push_back(x);
        lw.push_back(la + log_gauss2(r, x, y) + log_gauss2(x, cxd(0, 0), beta));
      }
    }
  }

  double lmax = has_spike ? lw_spike : -std::numeric_limits<double>::infinity();
  for (double v : lw) lmax = std::max(lmax, v);

  const double w_spike = has_spike ? std::exp(lw_spike - lmax) : 0.0;
  double w_slab = 0.0;  // kept separate: wsum - w_spike would cancel badly
  cxd num(0, 0);
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double w = std::exp(lw[i] - lmax);
    w_slab += w;
    num += w * xs[i];
  }
  const double wsum = w_spike + w_slab;
  PosteriorMoments out;
  out.mean = num / wsum;
  out.active_mass = w_slab / wsum;

  double var = w_spike * std::norm(out.mean);  // spike sits at x = 0
  for (std::size_t i = 0; i < lw.size(); ++i)
    var += std::exp(lw[i] - lmax) * std::norm(xs[i] - out.mean);
  out.var = var / wsum;
  return out;
}

McRates mc_detection(double tau, double beta, double rho, int PM, long samples,
                     std::uint64_t seed) {
  if (!(tau > 0.0) || !(beta > 0.0)) throw std::domain_error("mc_detection: tau, beta must be > 0");
  if (!(rho > 0.0) || !(rho < 1.0)) throw std::domain_error("mc_detection: rho must be in (0, 1)");
  if (PM < 1 || samples < 1) throw std::domain_error("mc_detection: PM, samples must be >= 1");

  rng::Stream rs(seed);
  const double thresh = std::log1p(-rho) - std::log(rho);
  const double coef = beta / (tau * (tau + beta));
  const double lg = static_cast<double>(PM) * std::log1p(beta / tau);

  long n_act = 0, n_miss = 0, n_fa = 0;
  const double s_act = std::sqrt(tau + beta);  // a*h + noise is CN(0, beta+tau) per coord
  const double s_in = std::sqrt(tau);
  for (long i = 0; i < samples; ++i) {
    const bool active = rs.uniform() < rho;
    const double s = active ? s_act : s_in;
    double u = 0.0;
    for (int k = 0; k < PM; ++k) u += std::norm(s * rs.cnormal());
    const bool declared = u * coef - lg >= thresh;
    if (active) {
      ++n_act;
      if (!declared) ++n_miss;
    } else if (declared) {
      ++n_fa;
    }
  }
  const long n_in = samples - n_act;
  auto rate = [](long k, long n) { return n > 0 ? static_cast<double>(k) / n : 0.0; };
  auto se = [](double p, long n) { return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; };
  McRates out;
  out.missed = rate(n_miss, n_act);
  out.missed_se = se(out.missed, n_act);
  out.false_alarm = rate(n_fa, n_in);
  out.false_alarm_se = se(out.false_alarm, n_in);
  out.error_prob = static_cast<double>(n_miss + n_fa) / samples;
  out.error_prob_se = se(out.error_prob, samples);
  return out;
}

}  // namespace gfamp::oracle
