#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "gfamp/amp_ac.hpp"
#include "gfamp/amp_ec.hpp"
#include "gfamp/denoiser.hpp"
#include "gfamp/harness.hpp"
#include "gfamp/metrics.hpp"
#include "gfamp/model.hpp"
#include "gfamp/oracle.hpp"
#include "gfamp/rng.hpp"
#include "gfamp/se.hpp"

namespace py = pybind11;
using namespace gfamp;

namespace {

// builds the optional ground-truth view shared by both run wrappers
template <typename RunFn>
RunResult run_with_truth(RunFn&& run, const CMat& Y, const CMat& A, const RVec& beta_eff,
                         double rho, const model::SystemConfig& cfg, const std::optional<IVec>& a,
                         const std::optional<std::vector<CMat>>& H, bool with_timing) {
  if (a.has_value() != H.has_value())
    throw DimensionError("provide both a and H for ground-truth metrics, or neither");
  if (a) {
    GroundTruth truth{&*a, &*H};
    return run(Y, A, beta_eff, rho, cfg, &truth, with_timing);
  }
  return run(Y, A, beta_eff, rho, cfg, nullptr, with_timing);
}

harness::Format parse_format(const std::string& f) {
  if (f == "csv") return harness::Format::csv;
  if (f == "jsonl" || f == "json-lines") return harness::Format::jsonl;
  throw ConfigError("format must be \"csv\" or \"json-lines\"");
}

}  // namespace

PYBIND11_MODULE(_gfamp, m) {
  m.doc() = "Joint device-activity detection and channel estimation for OFDM grant-free access";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_RuntimeError);

  // ----------------------------------------------------------------- model
  py::enum_<model::DistanceModel::Kind>(m, "DistanceKind")
      .value("constant", model::DistanceModel::Kind::Constant)
      .value("uniform", model::DistanceModel::Kind::Uniform);
  py::class_<model::DistanceModel>(m, "DistanceModel")
      .def(py::init<>())
      .def_readwrite("kind", &model::DistanceModel::kind)
      .def_readwrite("d", &model::DistanceModel::d)
      .def_readwrite("d_lo", &model::DistanceModel::d_lo)
      .def_readwrite("d_hi", &model::DistanceModel::d_hi);

  py::enum_<model::StopPolicy::Kind>(m, "StopKind")
      .value("fixed_iters", model::StopPolicy::Kind::FixedIters)
      .value("rel_tau", model::StopPolicy::Kind::RelTau);
  py::class_<model::StopPolicy>(m, "StopPolicy")
      .def(py::init<>())
      .def_readwrite("kind", &model::StopPolicy::kind)
      .def_readwrite("eps", &model::StopPolicy::eps);

  py::class_<model::SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("N", &model::SystemConfig::N)
      .def_readwrite("K", &model::SystemConfig::K)
      .def_readwrite("Q", &model::SystemConfig::Q)
      .def_readwrite("M", &model::SystemConfig::M)
      .def_readwrite("P", &model::SystemConfig::P)
      .def_readwrite("rho", &model::SystemConfig::rho)
      .def_readwrite("pt_dbm", &model::SystemConfig::pt_dbm)
      .def_readwrite("sigma2_mw", &model::SystemConfig::sigma2_mw)
      .def_readwrite("eta_pl", &model::SystemConfig::eta_pl)
      .def_readwrite("wavelength_m", &model::SystemConfig::wavelength_m)
      .def_readwrite("distance", &model::SystemConfig::distance)
      .def_readwrite("iterations", &model::SystemConfig::iterations)
      .def_readwrite("stop", &model::SystemConfig::stop)
      .def_readwrite("tracking_enabled", &model::SystemConfig::tracking_enabled)
      .def_readwrite("master_seed", &model::SystemConfig::master_seed)
      .def("L", &model::SystemConfig::L)
      .def("pt_mw", &model::SystemConfig::pt_mw)
      .def("validate", &model::SystemConfig::validate);

  py::class_<model::ScenarioInstance>(m, "ScenarioInstance")
      .def_readonly("pilots", &model::ScenarioInstance::pilots)
      .def_readonly("A", &model::ScenarioInstance::A)
      .def_readonly("beta_eff", &model::ScenarioInstance::beta_eff)
      .def_readonly("a", &model::ScenarioInstance::a)
      .def_readonly("H", &model::ScenarioInstance::H)
      .def_readonly("X", &model::ScenarioInstance::X)
      .def_readonly("Y", &model::ScenarioInstance::Y);

  m.def("make_scenario", &model::make_scenario, py::arg("cfg"), py::arg("point_index") = 0,
        py::arg("trial_index") = 0);
  m.def("dft_matrix", &model::dft_matrix, py::arg("K"));
  m.def("pathloss", &model::pathloss, py::arg("d"), py::arg("eta_pl"), py::arg("wavelength_m"));

  // -------------------------------------------------------------- denoiser
  m.def("logistic", &denoiser::logistic, py::arg("t"));
  m.def("activity_gate", &denoiser::activity_gate, py::arg("x"), py::arg("y"), py::arg("z"),
        py::arg("beta"));
  m.def("eta", &denoiser::eta, py::arg("x"), py::arg("y"), py::arg("z"), py::arg("beta"));
  m.def("eta_prime", &denoiser::eta_prime, py::arg("x"), py::arg("y"), py::arg("z"),
        py::arg("beta"));
  m.def(
      "llr_theta",
      [](const std::vector<cxd>& r, double tau, double beta, double rho) {
        return denoiser::llr_theta(std::span<const cxd>(r.data(), r.size()), tau, beta, rho);
      },
      py::arg("r"), py::arg("tau"), py::arg("beta"), py::arg("rho"));
  m.def(
      "posterior_moments",
      [](cxd r, double y, double z, double beta, int nodes) {
        const auto pm = oracle::posterior_moments(r, y, z, beta, nodes);
        return py::make_tuple(pm.mean, pm.var, pm.active_mass);
      },
      py::arg("r"), py::arg("y"), py::arg("z"), py::arg("beta"), py::arg("nodes") = 64,
      "Quadrature posterior (mean, variance, active probability) of one coefficient");

  // ------------------------------------------------------------ algorithms
  py::class_<metrics::MetricRecord>(m, "MetricRecord")
      .def_readonly("trial", &metrics::MetricRecord::trial)
      .def_readonly("iteration", &metrics::MetricRecord::iteration)
      .def_readonly("error_prob", &metrics::MetricRecord::error_prob)
      .def_readonly("false_alarm", &metrics::MetricRecord::false_alarm)
      .def_readonly("false_alarm_defined", &metrics::MetricRecord::false_alarm_defined)
      .def_readonly("missed_detection", &metrics::MetricRecord::missed_detection)
      .def_readonly("missed_defined", &metrics::MetricRecord::missed_defined)
      .def_readonly("mse_active", &metrics::MetricRecord::mse_active)
      .def_readonly("mse_active_defined", &metrics::MetricRecord::mse_active_defined)
      .def_readonly("mse_effective", &metrics::MetricRecord::mse_effective)
      .def_readonly("f_obj", &metrics::MetricRecord::f_obj)
      .def_readonly("tau_mean", &metrics::MetricRecord::tau_mean)
      .def_readonly("wall_time_us", &metrics::MetricRecord::wall_time_us);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("a_hat", &RunResult::a_hat)
      .def_readonly("X_out", &RunResult::X_out)
      .def_readonly("theta_final", &RunResult::theta_final)
      .def_readonly("trace", &RunResult::trace)
      .def_readonly("iterations_run", &RunResult::iterations_run);

  m.def(
      "ec_run",
      [](const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
         const model::SystemConfig& cfg, const std::optional<IVec>& a,
         const std::optional<std::vector<CMat>>& H, bool with_timing) {
        return run_with_truth(ec::ec_run, Y, A, beta_eff, rho, cfg, a, H, with_timing);
      },
      py::arg("Y"), py::arg("A"), py::arg("beta_eff"), py::arg("rho"), py::arg("cfg"),
      py::arg("a") = py::none(), py::arg("H") = py::none(), py::arg("with_timing") = true,
      "AMP on the effective channels with best-iterate tracking per cfg");
  m.def(
      "ac_run",
      [](const CMat& Y, const CMat& A, const RVec& beta_eff, double rho,
         const model::SystemConfig& cfg, const std::optional<IVec>& a,
         const std::optional<std::vector<CMat>>& H, bool with_timing) {
        return run_with_truth(ac::ac_run, Y, A, beta_eff, rho, cfg, a, H, with_timing);
      },
      py::arg("Y"), py::arg("A"), py::arg("beta_eff"), py::arg("rho"), py::arg("cfg"),
      py::arg("a") = py::none(), py::arg("H") = py::none(), py::arg("with_timing") = true,
      "AMP on (activity, channel) pairs with best-iterate tracking per cfg");

  // --------------------------------------------------------------- metrics
  m.def("group_lasso_obj", &metrics::group_lasso_obj, py::arg("Y"), py::arg("A"), py::arg("X"));
  m.def(
      "detection_rates",
      [](const IVec& a_hat, const IVec& a) {
        const auto r = metrics::detection_rates(a_hat, a);
        py::dict d;
        d["error_prob"] = r.error_prob;
        d["false_alarm"] = r.false_alarm_defined ? py::cast(r.false_alarm) : py::none();
        d["missed_detection"] = r.missed_defined ? py::cast(r.missed_detection) : py::none();
        return d;
      },
      py::arg("a_hat"), py::arg("a"));
  m.def(
      "channel_mse",
      [](const CMat& X_hat_masked, const std::vector<CMat>& H, const IVec& a) {
        const auto r = metrics::channel_mse(X_hat_masked, H, a);
        py::dict d;
        d["mse_active"] = r.active_defined ? py::cast(r.mse_active) : py::none();
        d["mse_effective"] = r.mse_effective;
        return d;
      },
      py::arg("X_hat_masked"), py::arg("H"), py::arg("a"));

  // ------------------------------------------------------- state evolution
  py::class_<se::SeParams>(m, "SeParams")
      .def(py::init([](int N, int P, int L, int M, double rho, double beta, double sigma2) {
             return se::SeParams{N, P, L, M, rho, beta, sigma2};
           }),
           py::arg("N"), py::arg("P"), py::arg("L"), py::arg("M"), py::arg("rho"), py::arg("beta"),
           py::arg("sigma2"))
      .def_readwrite("N", &se::SeParams::N)
      .def_readwrite("P", &se::SeParams::P)
      .def_readwrite("L", &se::SeParams::L)
      .def_readwrite("M", &se::SeParams::M)
      .def_readwrite("rho", &se::SeParams::rho)
      .def_readwrite("beta", &se::SeParams::beta)
      .def_readwrite("sigma2", &se::SeParams::sigma2);

  py::class_<se::SePrediction>(m, "SePrediction")
      .def_readonly("tau", &se::SePrediction::tau)
      .def_readonly("p_err", &se::SePrediction::p_err)
      .def_readonly("p_md", &se::SePrediction::p_md)
      .def_readonly("p_fa", &se::SePrediction::p_fa)
      .def_readonly("mse", &se::SePrediction::mse);

  m.def(
      "reg_gamma",
      [](double s, double x) {
        const auto g = se::reg_gamma(s, x);
        return py::make_tuple(g.p, g.q);
      },
      py::arg("s"), py::arg("x"), "Regularized incomplete gamma pair (P, Q)");
  m.def("tau0", &se::tau0, py::arg("params"));
  m.def("phi_quadrature", &se::phi_quadrature, py::arg("tau"), py::arg("params"));
  m.def(
      "error_prob_parts",
      [](double tau, const se::SeParams& pr) {
        const auto r = se::error_prob_parts(tau, pr);
        py::dict d;
        d["missed"] = r.missed;
        d["false_alarm"] = r.false_alarm;
        d["error_prob"] = r.error_prob;
        return d;
      },
      py::arg("tau"), py::arg("params"));
  m.def("error_prob", &se::error_prob, py::arg("tau"), py::arg("params"));
  m.def("mse_active_quadrature", &se::mse_active_quadrature, py::arg("tau"), py::arg("params"));
  m.def(
      "se_predict",
      [](const se::SeParams& pr, int T, int samples, std::uint64_t seed) {
        return se::predict(pr, T, samples, seed);
      },
      py::arg("params"), py::arg("T"), py::arg("samples") = 100000, py::arg("seed") = 1);

  // --------------------------------------------------------------- harness
  py::class_<harness::ExperimentSpec>(m, "ExperimentSpec")
      .def_readwrite("base", &harness::ExperimentSpec::base)
      .def_readwrite("trials", &harness::ExperimentSpec::trials)
      .def_readwrite("output", &harness::ExperimentSpec::output);

  py::class_<harness::ResultTable>(m, "ResultTable")
      .def_readonly("failed_trials", &harness::ResultTable::failed_trials)
      .def_property_readonly("n_rows",
                             [](const harness::ResultTable& t) { return t.rows.size(); })
      .def_property_readonly("n_aggregates",
                             [](const harness::ResultTable& t) { return t.aggregates.size(); });

  m.def(
      "parse_spec",
      [](const std::string& text) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError(std::string("spec parse error: ") + e.what());
        }
        return harness::parse_spec(j);
      },
      py::arg("text"), "Parse an experiment spec from a JSON string");
  m.def("load_spec", &harness::load_spec, py::arg("path"));
  m.def("run_experiment", &harness::run_experiment, py::arg("spec"), py::arg("threads") = 1,
        py::arg("with_timing") = true);
  m.def(
      "write_results",
      [](const harness::ResultTable& table, const harness::ExperimentSpec& spec,
         const std::string& path, const std::string& format) {
        return harness::write_results(table, spec, path, parse_format(format));
      },
      py::arg("table"), py::arg("spec"), py::arg("path"), py::arg("format") = "csv",
      "Write per-trial and aggregate files; returns the aggregate path");

  m.def("derive_seed", [](std::uint64_t master, const std::vector<std::uint64_t>& path) {
    return rng::derive_seed(master, std::span<const std::uint64_t>(path.data(), path.size()));
  });

  m.attr("__version__") = "0.1.0";
}
