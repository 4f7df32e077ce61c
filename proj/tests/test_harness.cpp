#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfamp/amp_ec.hpp"
#include "gfamp/harness.hpp"
#include "gfamp/model.hpp"
#include "gfamp/rng.hpp"
#include "gfamp/se.hpp"

using namespace gfamp;
using namespace gfamp::harness;
using nlohmann::json;

namespace {

json small_spec() {
  return json{{"N", 16}, {"K", 8},          {"Q", 2},       {"M", 2},
              {"P", 2},  {"rho", 0.3},      {"trials", 4},  {"iterations", 3},
              {"algorithms", json::array({"amp_a_ec", "amp_a_ac"})}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("algorithm names map both ways") {
  CHECK(std::string(algo_name(Algo::ec)) == "amp_a_ec");
  CHECK(std::string(algo_name(Algo::ac)) == "amp_a_ac");
  CHECK(std::string(algo_name(Algo::ec_iter)) == "amp_a_ec_iter");
  CHECK(std::string(algo_name(Algo::ac_iter)) == "amp_a_ac_iter");
  CHECK(std::string(algo_name(Algo::se_analysis)) == "se_analysis");
  const auto spec = parse_spec(json{
      {"algorithms",
       json::array({"amp_a_ec", "amp_a_ac", "amp_a_ec_iter", "amp_a_ac_iter", "se_analysis"})}});
  REQUIRE(spec.algorithms.size() == 5);
  CHECK(spec.algorithms[0] == Algo::ec);
  CHECK(spec.algorithms[2] == Algo::ec_iter);
  CHECK(spec.algorithms[4] == Algo::se_analysis);
}

TEST_CASE("spec parsing fills fields and derives L") {
  json j = small_spec();
  j["L"] = 16;  // consistent with K=8, Q=2
  j["pt_dbm"] = 12.5;
  j["stop_policy"] = json{{"rel_tau", 1e-5}};
  j["distance_model"] = json{{"uniform", json::array({50.0, 100.0})}};
  j["master_seed"] = 77;
  j["format"] = "json-lines";
  j["output"] = "runs/out.jsonl";
  j["tracking_enabled"] = false;
  const auto spec = parse_spec(j);
  CHECK(spec.base.N == 16);
  CHECK(spec.base.K == 8);
  CHECK(spec.base.Q == 2);
  CHECK(spec.base.L() == 16);
  CHECK(spec.base.pt_dbm == 12.5);
  CHECK(spec.base.stop.kind == model::StopPolicy::Kind::RelTau);
  CHECK(spec.base.stop.eps == 1e-5);
  CHECK(spec.base.distance.kind == model::DistanceModel::Kind::Uniform);
  CHECK(spec.base.distance.d_lo == 50.0);
  CHECK(spec.base.distance.d_hi == 100.0);
  CHECK(spec.base.master_seed == 77);
  CHECK_FALSE(spec.base.tracking_enabled);
  CHECK(spec.format == Format::jsonl);
  CHECK(spec.output == "runs/out.jsonl");
  CHECK(spec.trials == 4);

  // L alone derives Q
  json j2 = json{{"K", 32}, {"L", 128}};
  CHECK(parse_spec(j2).base.Q == 4);
}

TEST_CASE("spec parsing rejects malformed documents") {
  CHECK_THROWS_AS(parse_spec(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"frobnicate", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"K", 32}, {"L", 100}}), ConfigError);  // not a multiple
  CHECK_THROWS_AS(parse_spec(json{{"K", 32}, {"Q", 2}, {"L", 128}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"trials", 0}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"algorithms", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"algorithms", json::array({"amp_b_ec"})}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"stop_policy", "sometimes"}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"stop_policy", json{{"rel_tau", 1e-5}, {"x", 1}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"format", "xml"}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"distance_model", json{{"gaussian", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"distance_model", json{{"uniform", json::array({50.0})}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"rho", 1.5}}), ConfigError);   // via config validation
  CHECK_THROWS_AS(parse_spec(json{{"P", 40}, {"K", 32}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"sweep", json::array({"M"})}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"sweep", json{{"banana", json::array({1})}}}}), ConfigError);
  CHECK_THROWS_AS(parse_spec(json{{"sweep", json{{"M", json::array()}}}}), ConfigError);
  // sweep values are validated per grid point
  auto spec = parse_spec(json{{"K", 8}, {"sweep", json{{"P", json::array({2, 40})}}}});
  CHECK_THROWS_AS(expand_grid(spec), ConfigError);
}

TEST_CASE("load_spec reports unreadable or unparsable files") {
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), ConfigError);
  const auto p = tmp_file("gfamp_bad_spec.json");
  std::ofstream(p) << "{ not json";
  CHECK_THROWS_AS(load_spec(p.string()), ConfigError);
  std::filesystem::remove(p);
}

TEST_CASE("sweep axes expand in canonical order with the last axis fastest") {
  // spelled N before P; canonical order puts P first
  json j = small_spec();
  j["sweep"] = json{{"N", json::array({10, 20})}, {"P", json::array({1, 2})}};
  const auto spec = parse_spec(j);
  REQUIRE(spec.sweep.size() == 2);
  CHECK(spec.sweep[0].first == "P");
  CHECK(spec.sweep[1].first == "N");
  const auto pts = expand_grid(spec);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].cfg.P == 1);
  CHECK(pts[0].cfg.N == 10);
  CHECK(pts[1].cfg.P == 1);
  CHECK(pts[1].cfg.N == 20);  // last axis (N) varies fastest
  CHECK(pts[2].cfg.P == 2);
  CHECK(pts[2].cfg.N == 10);
  CHECK(pts[3].cfg.P == 2);
  CHECK(pts[3].cfg.N == 20);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].index == i);

  // L values rewrite Q; distance_model values are full objects
  json j2 = small_spec();
  j2["sweep"] = json{{"L", json::array({8, 24})},
                     {"distance_model", json::array({json{{"constant", 70.0}},
                                                     json{{"uniform", json::array({50.0, 100.0})}}})}};
  const auto pts2 = expand_grid(parse_spec(j2));
  REQUIRE(pts2.size() == 4);
  CHECK(pts2[0].cfg.Q == 1);
  CHECK(pts2[2].cfg.Q == 3);
  CHECK(pts2[0].cfg.distance.kind == model::DistanceModel::Kind::Constant);
  CHECK(pts2[1].cfg.distance.kind == model::DistanceModel::Kind::Uniform);

  // no sweep: a single point with the base config
  const auto pts3 = expand_grid(parse_spec(small_spec()));
  REQUIRE(pts3.size() == 1);
  CHECK(pts3[0].cfg.N == 16);
}

TEST_CASE("results do not depend on the worker count") {
  json j = small_spec();
  j["algorithms"] = json::array({"amp_a_ec", "amp_a_ac_iter", "se_analysis"});
  j["master_seed"] = 5;
  const auto spec = parse_spec(j);
  const auto t1 = run_experiment(spec, 1, false);
  const auto t3 = run_experiment(spec, 3, false);
  REQUIRE(t1.rows.size() == t3.rows.size());
  REQUIRE(t1.aggregates.size() == t3.aggregates.size());

  const auto p1 = tmp_file("gfamp_sched_1.csv");
  const auto p3 = tmp_file("gfamp_sched_3.csv");
  const auto a1 = write_results(t1, spec, p1.string(), Format::csv);
  const auto a3 = write_results(t3, spec, p3.string(), Format::csv);
  CHECK(slurp(p1) == slurp(p3));
  CHECK(slurp(a1) == slurp(a3));
  for (const auto& p : {p1.string(), p3.string(), a1, a3}) std::filesystem::remove(p);
}

TEST_CASE("aborted trials are flagged and left out of aggregates") {
  // a pathologically close device yields a finite but near-DBL_MAX gain, so
  // the received power overflows exactly when a device transmits; the raised
  // noise floor keeps the all-inactive trials finite end to end
  json j{{"N", 2},
         {"K", 8},
         {"Q", 2},
         {"M", 2},
         {"P", 8},
         {"rho", 0.5},
         {"pt_dbm", 293.0},
         {"sigma2_mw", 4.0},
         {"distance_model", json{{"constant", 1e-100}}},
         {"iterations", 2},
         {"trials", 16},
         {"master_seed", 11},
         {"algorithms", json::array({"amp_a_ec"})}};
  const auto spec = parse_spec(j);

  // ground truth for which trials abort, via the same public entry points
  long expect_failed = 0;
  std::vector<bool> fails(static_cast<std::size_t>(spec.trials));
  for (long t = 0; t < spec.trials; ++t) {
    const auto sc = model::make_scenario(spec.base, 0, static_cast<std::uint64_t>(t));
    bool failed = false;
    try {
      ec::ec_run(sc.Y, sc.A, sc.beta_eff, spec.base.rho, spec.base, nullptr, false);
    } catch (const NumericalAbort&) {
      failed = true;
    }
    fails[static_cast<std::size_t>(t)] = failed;
    if (failed) ++expect_failed;
  }
  REQUIRE(expect_failed >= 1);
  REQUIRE(expect_failed < spec.trials);

  const auto table = run_experiment(spec, 2, false);
  CHECK(table.failed_trials == expect_failed);
  long seen_failed = 0;
  for (const auto& row : table.rows) {
    if (row.failed) {
      ++seen_failed;
      CHECK(fails[static_cast<std::size_t>(row.trial)]);
      CHECK(row.status.rfind("aborted@", 0) == 0);
      CHECK(std::isnan(row.rec.error_prob));
      CHECK(std::isnan(row.rec.f_obj));
    } else {
      CHECK(row.status == "ok");
      CHECK_FALSE(fails[static_cast<std::size_t>(row.trial)]);
      CHECK(std::isfinite(row.rec.error_prob));
    }
  }
  CHECK(seen_failed == expect_failed);  // one row per aborted trial
  REQUIRE(!table.aggregates.empty());
  for (const auto& ag : table.aggregates) {
    CHECK(ag.trials_ok == spec.trials - expect_failed);
    CHECK(ag.failed_trials == expect_failed);
    CHECK(std::isfinite(ag.error_prob_mean));
    CHECK(std::isfinite(ag.f_obj_mean));
  }
}

TEST_CASE("csv output carries the fixed schema") {
  json j = small_spec();
  j["algorithms"] = json::array({"amp_a_ec", "se_analysis"});
  j["trials"] = 2;
  const auto spec = parse_spec(j);
  const auto table = run_experiment(spec, 1, false);
  const auto p = tmp_file("gfamp_schema.csv");
  const auto agg_path = write_results(table, spec, p.string(), Format::csv);
  CHECK(agg_path == (std::filesystem::temp_directory_path() / "gfamp_schema.agg.csv").string());

  const auto lines = read_lines(p);
  REQUIRE(lines.size() >= 2);
  const std::string point_cols =
      "point,N,K,Q,L,M,P,rho,pt_dbm,sigma2_mw,eta_pl,wavelength_m,distance_model";
  CHECK(lines[0] == point_cols +
                        ",algorithm,trial,iteration,error_prob,false_alarm,missed_detection,"
                        "mse_active,mse_effective,f_obj,tau_mean,wall_time_us,status");
  const auto header = split_csv(lines[0]);
  const auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    REQUIRE(false);
    return std::size_t{0};
  };
  // 2 trials x 3 iterations for the simulator + 3 predictor rows
  CHECK(lines.size() == 1 + 2 * 3 + 3);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    REQUIRE(cells.size() == header.size());
    CHECK(cells[col("status")] == "ok");
    CHECK(cells[col("distance_model")] == "constant:70");
    if (cells[col("algorithm")] == "se_analysis") {
      CHECK(cells[col("mse_effective")].empty());
      CHECK(cells[col("f_obj")].empty());
      CHECK(cells[col("trial")] == "0");
      CHECK(!cells[col("error_prob")].empty());
    } else {
      CHECK(cells[col("algorithm")] == "amp_a_ec");
      CHECK(!cells[col("f_obj")].empty());
    }
    // timing was disabled for reproducibility
    CHECK(cells[col("wall_time_us")] == "0");
  }

  const auto agg_lines = read_lines(agg_path);
  CHECK(agg_lines[0] ==
        point_cols +
            ",algorithm,iteration,trials_ok,failed_trials,error_prob_mean,error_prob_se,"
            "false_alarm_mean,false_alarm_se,missed_detection_mean,missed_detection_se,"
            "mse_active_mean,mse_active_se,mse_active_n,mse_effective_mean,mse_effective_se,"
            "f_obj_mean,f_obj_se,tau_mean_mean,wall_time_us_median");
  CHECK(agg_lines.size() == 1 + 3 + 3);
  const auto agg_header = split_csv(agg_lines[0]);
  for (std::size_t i = 1; i < agg_lines.size(); ++i)
    CHECK(split_csv(agg_lines[i]).size() == agg_header.size());

  std::filesystem::remove(p);
  std::filesystem::remove(agg_path);

  // extension-less outputs get a plain .agg suffix
  const auto p2 = tmp_file("gfamp_noext");
  const auto agg2 = write_results(table, spec, p2.string(), Format::csv);
  CHECK(agg2 == p2.string() + ".agg");
  std::filesystem::remove(p2);
  std::filesystem::remove(agg2);
}

TEST_CASE("json-lines output nulls undefined metrics") {
  json j = small_spec();
  j["algorithms"] = json::array({"se_analysis"});
  const auto spec = parse_spec(j);
  const auto table = run_experiment(spec, 1, false);
  const auto p = tmp_file("gfamp_rows.jsonl");
  const auto agg_path = write_results(table, spec, p.string(), Format::jsonl);
  const auto lines = read_lines(p);
  REQUIRE(lines.size() == 3);  // one per iteration, independent of trials
  for (const auto& line : lines) {
    const json o = json::parse(line);
    CHECK(o.at("algorithm") == "se_analysis");
    CHECK(o.at("mse_effective").is_null());
    CHECK(o.at("f_obj").is_null());
    CHECK(o.at("error_prob").is_number());
    CHECK(o.at("tau_mean").is_number());
    CHECK(o.at("status") == "ok");
    CHECK(o.at("distance_model") == "constant:70");
  }
  for (const auto& line : read_lines(agg_path)) {
    const json o = json::parse(line);
    CHECK(o.at("trials_ok") == 1);
    CHECK(o.at("mse_effective_mean").is_null());
  }
  std::filesystem::remove(p);
  std::filesystem::remove(agg_path);
}

TEST_CASE("predictor rows reproduce a direct state-evolution call") {
  json j = small_spec();
  j["algorithms"] = json::array({"se_analysis"});
  j["iterations"] = 4;
  j["master_seed"] = 42;
  const auto spec = parse_spec(j);
  const auto table = run_experiment(spec, 1, false);
  REQUIRE(table.rows.size() == 4);

  const auto setup = se_setup(spec.base);
  const double beta_direct =
      spec.base.pt_mw() *
      model::pathloss(spec.base.distance.d, spec.base.eta_pl, spec.base.wavelength_m);
  CHECK(setup.beta == doctest::Approx(beta_direct).epsilon(1e-15));
  se::SeParams pr{spec.base.N,   spec.base.P, spec.base.L(),      spec.base.M,
                  spec.base.rho, setup.beta,  spec.base.sigma2_mw};
  const auto pred = se::predict(
      pr, 4, 100000,
      rng::derive_seed(spec.base.master_seed,
                       {0, static_cast<std::uint64_t>(rng::Purpose::se_mc)}));
  for (int k = 1; k <= 4; ++k) {
    const auto& rec = table.rows[static_cast<std::size_t>(k - 1)].rec;
    CHECK(rec.iteration == k);
    CHECK(rec.error_prob == pred.p_err[static_cast<std::size_t>(k - 1)]);
    CHECK(rec.missed_detection == pred.p_md[static_cast<std::size_t>(k - 1)]);
    CHECK(rec.false_alarm == pred.p_fa[static_cast<std::size_t>(k - 1)]);
    CHECK(rec.mse_active == pred.mse[static_cast<std::size_t>(k - 1)]);
    CHECK(rec.tau_mean == pred.tau[static_cast<std::size_t>(k - 1)]);
  }
}

TEST_CASE("state-evolution analysis requires homogeneous gains") {
  json j = small_spec();
  j["algorithms"] = json::array({"se_analysis"});
  j["distance_model"] = json{{"uniform", json::array({50.0, 100.0})}};
  const auto spec = parse_spec(j);
  CHECK_THROWS_AS(se_setup(spec.base), ConfigError);
  CHECK_THROWS_AS(run_experiment(spec, 1, false), ConfigError);
}

TEST_CASE("format_double round-trips doubles exactly") {
  for (double v : {1.0 / 3.0, 0.1, 1e-300, 3.7328716673265104e-11, 1e308, 0.0, -0.25,
                   2.2250738585072014e-308, 123456789.123456789}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}
