#include "gfamp/se.hpp"

#include <cmath>
#include <limits>

#include "gfamp/denoiser.hpp"
#include "gfamp/rng.hpp"

namespace gfamp::se {

GammaPQ reg_gamma(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("reg_gamma: s must be positive");
  if (x < 0.0) throw std::domain_error("reg_gamma: x must be non-negative");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};

  const double lpre = s * std::log(x) - x - std::lgamma(s);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double fpmin = std::numeric_limits<double>::min() / eps;
  constexpr int itmax = 20000;

  if (x < s + 1.0) {
    // lower series
    double ap = s;
    double term = 1.0 / s;
    double sum = term;
    for (int i = 0; i < itmax; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    double p = sum * std::exp(lpre);
    if (p > 1.0) p = 1.0;
    return {p, 1.0 - p};
  }
  // upper continued fraction (modified Lentz)
  double b = x + 1.0 - s;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= itmax; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= eps) break;
  }
  double q = h * std::exp(lpre);
  if (q > 1.0) q = 1.0;
  return {1.0 - q, q};
}

namespace {

void check_params(const SeParams& pr) {
  if (pr.N < 1 || pr.P < 1 || pr.L < 1 || pr.M < 1)
    throw ConfigError("se: N, P, L, M must be >= 1");
  if (!(pr.rho >= 0.0 && pr.rho < 1.0)) throw ConfigError("se: rho must be in [0,1)");
  if (!(pr.beta > 0.0)) throw ConfigError("se: beta must be positive");
  if (!(pr.sigma2 > 0.0)) throw ConfigError("se: sigma2 must be positive");
}

// gate as a function of u = ||r||^2
inline double gate_of_u(double u, double tau, const SeParams& pr) {
  const int pm = pr.P * pr.M;
  const double s = std::log(pr.rho) - std::log1p(-pr.rho) - pm * std::log1p(pr.beta / tau) +
                   u * pr.beta / (tau * (tau + pr.beta));
  return denoiser::logistic(s);
}

}  // namespace

double tau0(const SeParams& pr) {
  check_params(pr);
  return pr.sigma2 +
         static_cast<double>(pr.N) * pr.P / pr.L * pr.rho * pr.beta;
}

McEstimate phi_mc(double tau, const SeParams& pr, int samples, std::uint64_t seed) {
  check_params(pr);
  if (!(tau > 0.0)) throw std::domain_error("phi_mc: tau must be positive");
  if (samples < 1000) throw ConfigError("phi_mc: samples must be >= 1000");
  if (pr.rho == 0.0) return {0.0, 0.0};
  const int pm = pr.P * pr.M;
  const double sb = std::sqrt(pr.beta);
  const double stau = std::sqrt(tau);
  rng::Stream rs(seed);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const bool active = rs.bernoulli(pr.rho);
    double u = 0.0;
    for (int j = 0; j < pm; ++j) {
      cxd r = stau * rs.cnormal();
      if (active) r += sb * rs.cnormal();
      u += std::norm(r);
    }
    const double g = gate_of_u(u, tau, pr);
    const double v = g * (1.0 - g) * u;
    sum += v;
    sq += v * v;
  }
  const double n = samples;
  const double mean = sum / n;
  const double var = std::max(sq / n - mean * mean, 0.0);
  const double c = pr.beta * pr.beta / ((pr.beta + tau) * (pr.beta + tau)) / pm;
  return {c * mean, c * std::sqrt(var / n)};
}

namespace {

// E_{u ~ Gamma(k, scale)}[f(u)] by midpoint quadrature in v = u/scale
template <typename F>
double gamma_branch(double k, double scale, F&& f) {
  const double vmax = k + 40.0 * std::sqrt(k) + 40.0;
  const int nodes = 20000;
  const double h = vmax / nodes;
  const double lg = std::lgamma(k);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double v = (i + 0.5) * h;
    const double logw = (k - 1.0) * std::log(v) - v - lg;
    acc += f(scale * v) * std::exp(logw);
  }
  return acc * h;
}

}  // namespace

double phi_quadrature(double tau, const SeParams& pr) {
  check_params(pr);
  if (!(tau > 0.0)) throw std::domain_error("phi_quadrature: tau must be positive");
  if (pr.rho == 0.0) return 0.0;
  const int pm = pr.P * pr.M;
  const double k = pm;
  auto f = [&](double u) {
    const double g = gate_of_u(u, tau, pr);
    return g * (1.0 - g) * u;
  };
  const double c = pr.beta * pr.beta / ((pr.beta + tau) * (pr.beta + tau)) / pm;
  return c * (pr.rho * gamma_branch(k, pr.beta + tau, f) + (1.0 - pr.rho) * gamma_branch(k, tau, f));
}

double se_step(double tau, const SeParams& pr, int samples, std::uint64_t seed) {
  check_params(pr);
  const double np_l = static_cast<double>(pr.N) * pr.P / pr.L;
  return pr.sigma2 +
         np_l * (pr.rho * pr.beta * tau / (pr.beta + tau) + phi_mc(tau, pr, samples, seed).value);
}

ErrorProbParts error_prob_parts(double tau, const SeParams& pr) {
  check_params(pr);
  if (!(tau > 0.0)) throw std::domain_error("error_prob: tau must be positive");
  if (pr.rho == 0.0) return {0.0, 0.0, 0.0};
  const double pm = static_cast<double>(pr.P) * pr.M;
  const double llr0 = std::log1p(-pr.rho) - std::log(pr.rho);  // log((1-rho)/rho)
  const double lb = std::log1p(pr.beta / tau);
  const double x_lo = std::max(tau / pr.beta * llr0 + tau / pr.beta * lb * pm, 0.0);
  const double x_hi =
      std::max((tau + pr.beta) / pr.beta * llr0 + (pr.beta + tau) / pr.beta * lb * pm, 0.0);
  ErrorProbParts parts;
  parts.missed = reg_gamma(pm, x_lo).p;
  parts.false_alarm = reg_gamma(pm, x_hi).q;
  parts.error_prob = pr.rho * parts.missed + (1.0 - pr.rho) * parts.false_alarm;
  return parts;
}

double error_prob(double tau, const SeParams& pr) { return error_prob_parts(tau, pr).error_prob; }

McEstimate mse_active(double tau, const SeParams& pr, int samples, std::uint64_t seed) {
  check_params(pr);
  if (!(tau > 0.0)) throw std::domain_error("mse_active: tau must be positive");
  if (samples < 1000) throw ConfigError("mse_active: samples must be >= 1000");
  const int pm = pr.P * pr.M;
  const double sb = std::sqrt(pr.beta);
  const double stau = std::sqrt(tau);
  const double shrink = pr.beta / (pr.beta + tau);
  rng::Stream rs(seed);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    double u = 0.0;
    for (int j = 0; j < pm; ++j) u += std::norm(sb * rs.cnormal() + stau * rs.cnormal());
    const double g = gate_of_u(u, tau, pr);
    const double v = (1.0 - g) * (1.0 - g) * u;
    sum += v;
    sq += v * v;
  }
  const double n = samples;
  const double mean = sum / n;
  const double var = std::max(sq / n - mean * mean, 0.0);
  const double c = shrink * shrink / pm;
  return {pr.beta * tau / (pr.beta + tau) + c * mean, c * std::sqrt(var / n)};
}

double mse_active_quadrature(double tau, const SeParams& pr) {
  check_params(pr);
  if (!(tau > 0.0)) throw std::domain_error("mse_active: tau must be positive");
  const int pm = pr.P * pr.M;
  const double shrink = pr.beta / (pr.beta + tau);
  auto f = [&](double u) {
    const double g = gate_of_u(u, tau, pr);
    return (1.0 - g) * (1.0 - g) * u;
  };
  return pr.beta * tau / (pr.beta + tau) +
         shrink * shrink / pm * gamma_branch(pm, pr.beta + tau, f);
}

SePrediction predict(const SeParams& pr, int T, int samples, std::uint64_t seed) {
  check_params(pr);
  if (T < 0) throw ConfigError("predict: T must be >= 0");
  SePrediction out;
  out.tau.push_back(tau0(pr));
  for (int t = 1; t <= T; ++t) {
    const std::uint64_t sub = rng::derive_seed(
        seed, {static_cast<std::uint64_t>(rng::Purpose::se_mc), static_cast<std::uint64_t>(t)});
    out.tau.push_back(se_step(out.tau.back(), pr, samples, sub));
  }
  for (int t = 0; t <= T; ++t) {
    const double tau = out.tau[static_cast<size_t>(t)];
    const auto parts = error_prob_parts(tau, pr);
    out.p_err.push_back(parts.error_prob);
    out.p_md.push_back(parts.missed);
    out.p_fa.push_back(parts.false_alarm);
    const std::uint64_t sub = rng::derive_seed(
        seed, {static_cast<std::uint64_t>(rng::Purpose::se_mc), 1000 + static_cast<std::uint64_t>(t)});
    out.mse.push_back(mse_active(tau, pr, samples, sub).value);
  }
  return out;
}

}  // namespace gfamp::se
