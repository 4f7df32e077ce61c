#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfamp/metrics.hpp"
#include "gfamp/model.hpp"

// Experiment orchestration: JSON spec parsing, grid expansion, seeded
// parallel Monte-Carlo trials with schedule-independent results, and
// CSV / JSON-lines writers.

namespace gfamp::harness {

enum class Algo { ec, ac, ec_iter, ac_iter, se_analysis };

const char* algo_name(Algo a);

enum class Format { csv, jsonl };

struct ExperimentSpec {
  model::SystemConfig base;
  int trials = 100;
  std::vector<Algo> algorithms = {Algo::ec, Algo::ac};
  // axis name -> values, expanded as a cross product in canonical axis order
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> sweep;
  std::string output = "results.csv";
  Format format = Format::csv;
};

// Flat JSON object, keys matching the config field names; unknown keys are
// rejected, missing keys fall back to defaults.
ExperimentSpec parse_spec(const nlohmann::json& j);
ExperimentSpec load_spec(const std::string& path);

struct GridPoint {
  std::size_t index = 0;
  model::SystemConfig cfg;
};

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

struct TrialRow {
  std::size_t point = 0;
  Algo algo = Algo::ec;
  long trial = 0;
  metrics::MetricRecord rec;
  bool failed = false;
  std::string status = "ok";
};

struct AggRow {
  std::size_t point = 0;
  Algo algo = Algo::ec;
  int iteration = 0;
  long trials_ok = 0;
  long failed_trials = 0;
  double error_prob_mean = 0, error_prob_se = 0;
  double false_alarm_mean = 0, false_alarm_se = 0;
  double missed_mean = 0, missed_se = 0;
  double mse_active_mean = 0, mse_active_se = 0;
  long mse_active_n = 0;
  double mse_eff_mean = 0, mse_eff_se = 0;
  double f_obj_mean = 0, f_obj_se = 0;
  double tau_mean_mean = 0;
  double wall_time_us_median = 0;
};

struct ResultTable {
  std::vector<GridPoint> points;
  std::vector<TrialRow> rows;
  std::vector<AggRow> aggregates;
  long failed_trials = 0;
};

// Runs trials across `threads` workers; the result is identical for any
// worker count (fixed task slots, ordered reduction, per-trial seeds derived
// from (master_seed, point, trial, purpose)).
ResultTable run_experiment(const ExperimentSpec& spec, int threads = 1, bool with_timing = true);

// %.17g, enough digits to round-trip a double.
std::string format_double(double v);

// Writes <path> with per-trial rows and <stem>.agg.<ext> with aggregates.
// Returns the aggregate-file path.
std::string write_results(const ResultTable& table, const ExperimentSpec& spec,
                          const std::string& path, Format format);

// State-evolution parameters implied by a homogeneous-gain config; throws
// ConfigError if the distance model is not constant.
struct SeSetup {
  double beta;
  int iterations;
};
SeSetup se_setup(const model::SystemConfig& cfg);

}  // namespace gfamp::harness
