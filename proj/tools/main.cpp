#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gfamp/denoiser.hpp"
#include "gfamp/harness.hpp"
#include "gfamp/model.hpp"
#include "gfamp/oracle.hpp"
#include "gfamp/rng.hpp"
#include "gfamp/se.hpp"

namespace {

using namespace gfamp;

struct CommonOpts {
  std::string spec_path;
  std::uint64_t seed = 0;
  int trials = 0;
  int threads = 0;
  std::string format;
  std::string out;
  bool no_tracking = false;
  bool no_timing = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* format_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& c, bool with_spec = true) {
  if (with_spec)
    sub->add_option("spec", c.spec_path, "JSON experiment spec file")
        ->required()
        ->check(CLI::ExistingFile);
  c.seed_opt = sub->add_option("--seed", c.seed, "override master_seed");
  c.trials_opt = sub->add_option("--trials", c.trials, "override trial count")
                     ->check(CLI::PositiveNumber);
  c.threads_opt = sub->add_option("--threads", c.threads, "worker threads (default: GFAMP_THREADS or 1)")
                      ->check(CLI::PositiveNumber);
  c.format_opt = sub->add_option("--format", c.format, "output format")
                     ->check(CLI::IsMember({"csv", "jsonl"}));
  c.out_opt = sub->add_option("--out", c.out, "output file path");
  sub->add_flag("--no-tracking", c.no_tracking, "disable best-iterate tracking");
  sub->add_flag("--no-timing", c.no_timing, "zero the wall_time_us column (byte-stable output)");
}

int resolve_threads(const CommonOpts& c) {
  if (c.threads_opt && c.threads_opt->count()) return c.threads;
  if (const char* env = std::getenv("GFAMP_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
    }
    std::cerr << "warning: ignoring invalid GFAMP_THREADS value\n";
  }
  return 1;
}

enum class Mode { simulate, sweep, se };

int run_mode(Mode mode, const CommonOpts& c) {
  harness::ExperimentSpec spec = harness::load_spec(c.spec_path);
  if (c.seed_opt->count()) spec.base.master_seed = c.seed;
  if (c.trials_opt->count()) spec.trials = c.trials;
  if (c.format_opt->count())
    spec.format = (c.format == "jsonl") ? harness::Format::jsonl : harness::Format::csv;
  if (c.out_opt->count()) spec.output = c.out;
  if (c.no_tracking) spec.base.tracking_enabled = false;
  if (mode == Mode::simulate) spec.sweep.clear();
  if (mode == Mode::se) spec.algorithms = {harness::Algo::se_analysis};

  const auto table = harness::run_experiment(spec, resolve_threads(c), !c.no_timing);
  const std::string agg = harness::write_results(table, spec, spec.output, spec.format);
  std::cout << "wrote " << spec.output << " (" << table.rows.size() << " rows), " << agg << " ("
            << table.aggregates.size() << " rows)\n";
  if (table.failed_trials > 0) {
    std::cerr << table.failed_trials << " trial(s) aborted on non-finite values\n";
    return 2;
  }
  return 0;
}

// ---- check suites: slow reference paths vs the implementations ----

bool suite_model(std::uint64_t seed) {
  double worst = 0.0;
  for (int r = 0; r < 20; ++r) {
    model::SystemConfig cfg;
    cfg.N = 16;
    cfg.K = 16;
    cfg.Q = 2;
    cfg.M = 4;
    cfg.P = 4;
    cfg.rho = 0.3;
    cfg.validate();
    rng::Stream sp(rng::derive_seed(seed, {static_cast<std::uint64_t>(r), 1}));
    rng::Stream sd(rng::derive_seed(seed, {static_cast<std::uint64_t>(r), 2}));
    rng::Stream sh(rng::derive_seed(seed, {static_cast<std::uint64_t>(r), 3}));
    rng::Stream sa(rng::derive_seed(seed, {static_cast<std::uint64_t>(r), 4}));
    rng::Stream sn(rng::derive_seed(seed, {static_cast<std::uint64_t>(r), 5}));
    const auto pilots = model::gen_pilots(cfg, sp);
    const CMat A = model::build_measurement_matrix(pilots, cfg.P);
    const RVec beta = model::effective_gains(cfg, model::gen_distances(cfg, sd));
    const auto H = model::gen_channels(cfg, beta, sh);
    const IVec a = model::gen_activities(cfg, sa);
    const CMat noise = model::gen_noise(cfg.L(), cfg.M, cfg.sigma2_mw, sn);
    const CMat Y1 = model::synthesize_received(A, model::stack_effective(H, a), noise);
    const CMat Y2 = model::synthesize_received_circulant(pilots, H, a, cfg.K, noise);
    worst = std::max(worst, (Y1 - Y2).norm() / Y1.norm());
    for (int col = 0; col < A.cols(); ++col)
      worst = std::max(worst, std::abs(A.col(col).norm() - 1.0));
  }
  std::cout << "model-equivalence: worst deviation " << worst
            << (worst < 1e-9 ? "  pass" : "  FAIL") << "\n";
  return worst < 1e-9;
}

bool suite_denoiser(std::uint64_t seed) {
  rng::Stream rs(rng::derive_seed(seed, {1001}));
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 200; ++k) {
    const double beta = std::pow(10.0, 4.0 * rs.uniform() - 2.0);
    const double y = beta * std::pow(10.0, 4.0 * rs.uniform() - 2.0);
    double z = rs.uniform();
    if (k % 7 == 0) z = 0.0;
    if (k % 7 == 1) z = 1.0;
    const double sd = (k % 2) ? std::sqrt(beta + y) : std::sqrt(y);
    const cxd x = sd * rs.cnormal();
    const auto om = oracle::posterior_moments(x, y, z, beta);
    const cxd eta = denoiser::eta(x, y, z, beta);
    const double veta = y * denoiser::eta_prime(x, y, z, beta);
    const double g = denoiser::activity_gate(x, y, z, beta);
    const double re_mean = std::abs(eta - om.mean) / std::max(std::abs(om.mean), 1e-300);
    const double re_var = std::abs(veta - om.var) / std::max(om.var, 1e-300);
    const double re_gate = std::abs(g - om.active_mass) / std::max(om.active_mass, 1e-300);
    worst = std::max({worst, re_mean, re_var, re_gate});
    if (re_mean > 1e-7 || re_var > 1e-6 || re_gate > 1e-7) ok = false;
  }
  std::cout << "denoiser-quadrature: worst relative error " << worst << (ok ? "  pass" : "  FAIL")
            << "\n";
  return ok;
}

bool suite_se(std::uint64_t seed) {
  bool ok = true;
  double worst = 0.0;
  se::SeParams pr;
  pr.N = 200;
  pr.P = 2;
  pr.L = 192;
  pr.M = 8;
  pr.rho = 0.1;
  pr.beta = 1.0;
  pr.sigma2 = 0.05;
  // operating points where the MC estimators resolve the quantity; deeper in
  // the tails the events are too rare for any sample budget and only the
  // quadrature paths remain informative
  int idx = 0;
  for (double tau : {0.5, 1.0, 2.0, 10.0}) {
    const auto mc = se::phi_mc(tau, pr, 200000, rng::derive_seed(seed, {2001, static_cast<std::uint64_t>(idx)}));
    const double quad = se::phi_quadrature(tau, pr);
    const double dev = std::abs(mc.value - quad) / (4.0 * mc.std_err + 1e-3 * quad);
    worst = std::max(worst, dev);
    if (dev > 1.0) ok = false;
    // closed-form detection error vs a quick brute-force MC
    const auto parts = se::error_prob_parts(tau, pr);
    const auto mcd = oracle::mc_detection(tau, pr.beta, pr.rho, pr.P * pr.M, 200000,
                                          rng::derive_seed(seed, {2002, static_cast<std::uint64_t>(idx)}));
    const double dev2 = std::abs(parts.error_prob - mcd.error_prob) /
                        (4.0 * mcd.error_prob_se + 1e-3 * parts.error_prob);
    worst = std::max(worst, dev2);
    if (dev2 > 1.0) ok = false;
    // Monte-Carlo MSE vs its quadrature reduction
    const auto mm = se::mse_active(tau, pr, 200000,
                                   rng::derive_seed(seed, {2003, static_cast<std::uint64_t>(idx)}));
    const double mq = se::mse_active_quadrature(tau, pr);
    const double dev3 = std::abs(mm.value - mq) / (4.0 * mm.std_err + 1e-3 * mq);
    worst = std::max(worst, dev3);
    if (dev3 > 1.0) ok = false;
    ++idx;
  }
  std::cout << "se-crossval: worst deviation " << worst << " (1 = tolerance)"
            << (ok ? "  pass" : "  FAIL") << "\n";
  return ok;
}

int run_check(std::uint64_t seed) {
  const bool a = suite_model(seed);
  const bool b = suite_denoiser(seed);
  const bool c = suite_se(seed);
  return (a && b && c) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grant-free random access simulation toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_c, sweep_c, se_c;
  CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo trials at the spec's base point");
  add_common(sim, sim_c);
  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo trials over the spec's sweep grid");
  add_common(sweep, sweep_c);
  CLI::App* se_cmd = app.add_subcommand("se", "analytical state-evolution curves only");
  add_common(se_cmd, se_c);

  CLI::App* check = app.add_subcommand("check", "run the oracle verification suites");
  std::uint64_t check_seed = 7;
  check->add_option("--seed", check_seed, "seed for the randomized suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints message / help text
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return run_mode(Mode::simulate, sim_c);
    if (sweep->parsed()) return run_mode(Mode::sweep, sweep_c);
    if (se_cmd->parsed()) return run_mode(Mode::se, se_c);
    if (check->parsed()) return run_check(check_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
