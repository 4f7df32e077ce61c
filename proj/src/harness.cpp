#include "gfamp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "gfamp/amp_ac.hpp"
#include "gfamp/amp_ec.hpp"
#include "gfamp/se.hpp"

namespace gfamp::harness {

const char* algo_name(Algo a) {
  switch (a) {
    case Algo::ec: return "amp_a_ec";
    case Algo::ac: return "amp_a_ac";
    case Algo::ec_iter: return "amp_a_ec_iter";
    case Algo::ac_iter: return "amp_a_ac_iter";
    case Algo::se_analysis: return "se_analysis";
  }
  return "?";
}

namespace {

const std::set<std::string> kTopKeys = {
    "N",          "K",          "Q",          "L",           "M",
    "P",          "rho",        "pt_dbm",     "sigma2_mw",   "eta_pl",
    "wavelength_m", "distance_model", "iterations", "stop_policy", "tracking_enabled",
    "master_seed", "trials",    "algorithms", "sweep",       "output",
    "format"};

const std::vector<std::string> kAxisOrder = {"L",      "M",   "P",             "N",
                                             "pt_dbm", "rho", "distance_model"};

model::DistanceModel parse_distance(const nlohmann::json& j) {
  model::DistanceModel d;
  if (j.is_object() && j.contains("constant") && j.size() == 1) {
    d.kind = model::DistanceModel::Kind::Constant;
    d.d = j.at("constant").get<double>();
    return d;
  }
  if (j.is_object() && j.contains("uniform") && j.size() == 1) {
    const auto& u = j.at("uniform");
    if (!u.is_array() || u.size() != 2)
      throw ConfigError("distance_model uniform expects [d_lo, d_hi]");
    d.kind = model::DistanceModel::Kind::Uniform;
    d.d_lo = u[0].get<double>();
    d.d_hi = u[1].get<double>();
    return d;
  }
  throw ConfigError("distance_model must be {\"constant\": d} or {\"uniform\": [lo, hi]}");
}

std::string distance_label(const model::DistanceModel& d) {
  if (d.kind == model::DistanceModel::Kind::Constant)
    return "constant:" + format_double(d.d);
  return "uniform:" + format_double(d.d_lo) + ":" + format_double(d.d_hi);
}

Algo parse_algo(const std::string& s) {
  if (s == "amp_a_ec") return Algo::ec;
  if (s == "amp_a_ac") return Algo::ac;
  if (s == "amp_a_ec_iter") return Algo::ec_iter;
  if (s == "amp_a_ac_iter") return Algo::ac_iter;
  if (s == "se_analysis") return Algo::se_analysis;
  throw ConfigError("unknown algorithm \"" + s + "\"");
}

int get_int(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
  return j.at(key).get<int>();
}

// derive Q from L (L = K*Q)
void apply_L(model::SystemConfig& cfg, int L) {
  if (L < 1 || L % cfg.K != 0)
    throw ConfigError("L=" + std::to_string(L) + " must be a positive multiple of K=" +
                      std::to_string(cfg.K));
  cfg.Q = L / cfg.K;
}

}  // namespace

ExperimentSpec parse_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("spec must be a JSON object");
  for (const auto& item : j.items())
    if (!kTopKeys.count(item.key())) throw ConfigError("unknown spec key \"" + item.key() + "\"");

  ExperimentSpec spec;
  auto& cfg = spec.base;
  if (j.contains("K")) cfg.K = get_int(j, "K");
  if (j.contains("N")) cfg.N = get_int(j, "N");
  if (j.contains("M")) cfg.M = get_int(j, "M");
  if (j.contains("P")) cfg.P = get_int(j, "P");
  if (j.contains("Q")) cfg.Q = get_int(j, "Q");
  if (j.contains("L")) {
    int L = get_int(j, "L");
    if (j.contains("Q") && cfg.K * cfg.Q != L)
      throw ConfigError("inconsistent L, K, Q: L must equal K*Q");
    apply_L(cfg, L);
  }
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  if (j.contains("pt_dbm")) cfg.pt_dbm = j.at("pt_dbm").get<double>();
  if (j.contains("sigma2_mw")) cfg.sigma2_mw = j.at("sigma2_mw").get<double>();
  if (j.contains("eta_pl")) cfg.eta_pl = j.at("eta_pl").get<double>();
  if (j.contains("wavelength_m")) cfg.wavelength_m = j.at("wavelength_m").get<double>();
  if (j.contains("distance_model")) cfg.distance = parse_distance(j.at("distance_model"));
  if (j.contains("iterations")) cfg.iterations = get_int(j, "iterations");
  if (j.contains("stop_policy")) {
    const auto& sp = j.at("stop_policy");
    if (sp.is_string() && sp.get<std::string>() == "fixed") {
      cfg.stop.kind = model::StopPolicy::Kind::FixedIters;
    } else if (sp.is_object() && sp.contains("rel_tau") && sp.size() == 1) {
      cfg.stop.kind = model::StopPolicy::Kind::RelTau;
      cfg.stop.eps = sp.at("rel_tau").get<double>();
    } else {
      throw ConfigError("stop_policy must be \"fixed\" or {\"rel_tau\": eps}");
    }
  }
  if (j.contains("tracking_enabled")) cfg.tracking_enabled = j.at("tracking_enabled").get<bool>();
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("trials")) {
    spec.trials = get_int(j, "trials");
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
  }
  if (j.contains("algorithms")) {
    spec.algorithms.clear();
    for (const auto& s : j.at("algorithms")) spec.algorithms.push_back(parse_algo(s.get<std::string>()));
    if (spec.algorithms.empty()) throw ConfigError("algorithms must not be empty");
  }
  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    if (!sw.is_object()) throw ConfigError("sweep must be an object of axis -> value list");
    for (const auto& item : sw.items()) {
      if (std::find(kAxisOrder.begin(), kAxisOrder.end(), item.key()) == kAxisOrder.end())
        throw ConfigError("unknown sweep axis \"" + item.key() + "\"");
      if (!item.value().is_array() || item.value().empty())
        throw ConfigError("sweep axis \"" + item.key() + "\" must be a non-empty array");
    }
    // canonical axis order regardless of spelling order in the document
    for (const auto& ax : kAxisOrder)
      if (sw.contains(ax))
        spec.sweep.emplace_back(ax, std::vector<nlohmann::json>(sw.at(ax).begin(), sw.at(ax).end()));
  }
  if (j.contains("output")) spec.output = j.at("output").get<std::string>();
  if (j.contains("format")) {
    const std::string f = j.at("format").get<std::string>();
    if (f == "csv") spec.format = Format::csv;
    else if (f == "jsonl" || f == "json-lines") spec.format = Format::jsonl;
    else throw ConfigError("format must be \"csv\" or \"json-lines\"");
  }
  spec.base.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("spec parse error: ") + e.what());
  }
  return parse_spec(j);
}

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> points;
  std::size_t total = 1;
  for (const auto& ax : spec.sweep) total *= ax.second.size();
  points.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    model::SystemConfig cfg = spec.base;
    // row-major: last listed axis varies fastest
    std::size_t rem = idx;
    for (std::size_t a = spec.sweep.size(); a-- > 0;) {
      const auto& [name, values] = spec.sweep[a];
      const nlohmann::json& v = values[rem % values.size()];
      rem /= values.size();
      if (name == "L") apply_L(cfg, v.get<int>());
      else if (name == "M") cfg.M = v.get<int>();
      else if (name == "P") cfg.P = v.get<int>();
      else if (name == "N") cfg.N = v.get<int>();
      else if (name == "pt_dbm") cfg.pt_dbm = v.get<double>();
      else if (name == "rho") cfg.rho = v.get<double>();
      else if (name == "distance_model") cfg.distance = parse_distance(v);
    }
    cfg.validate();
    points.push_back(GridPoint{idx, cfg});
  }
  return points;
}

SeSetup se_setup(const model::SystemConfig& cfg) {
  if (cfg.distance.kind != model::DistanceModel::Kind::Constant)
    throw ConfigError("se_analysis requires a constant distance model (homogeneous gain)");
  return SeSetup{cfg.pt_mw() * model::pathloss(cfg.distance.d, cfg.eta_pl, cfg.wavelength_m),
                 cfg.iterations};
}

namespace {

struct Slot {
  std::vector<metrics::MetricRecord> trace;
  bool failed = false;
  int fail_iter = 0;
  std::string status = "ok";
};

struct Task {
  std::size_t point;
  std::size_t algo_pos;  // position in spec.algorithms
  long trial;
};

metrics::MetricRecord nan_record(long trial, int iteration) {
  metrics::MetricRecord r;
  r.trial = trial;
  r.iteration = iteration;
  r.error_prob = r.false_alarm = r.missed_detection = std::nan("");
  r.mse_active = r.mse_effective = r.f_obj = r.tau_mean = std::nan("");
  r.wall_time_us = std::nan("");
  return r;
}

void run_one(const GridPoint& pt, Algo algo, long trial, bool with_timing, Slot& slot) {
  model::SystemConfig cfg = pt.cfg;
  if (algo == Algo::ec_iter || algo == Algo::ac_iter) cfg.tracking_enabled = false;
  try {
    auto sc = model::make_scenario(cfg, pt.index, static_cast<std::uint64_t>(trial));
    GroundTruth truth{&sc.a, &sc.H};
    RunResult run;
    if (algo == Algo::ec || algo == Algo::ec_iter)
      run = ec::ec_run(sc.Y, sc.A, sc.beta_eff, cfg.rho, cfg, &truth, with_timing);
    else
      run = ac::ac_run(sc.Y, sc.A, sc.beta_eff, cfg.rho, cfg, &truth, with_timing);
    slot.trace = std::move(run.trace);
    for (auto& rec : slot.trace) rec.trial = trial;
  } catch (const NumericalAbort& e) {
    slot.failed = true;
    slot.fail_iter = e.iteration;
    slot.status = "aborted@" + std::to_string(e.iteration) + ":" + e.entry;
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Accum {
  std::vector<double> err, fa, md, msea, msee, fobj, taum, wall;
};

void mean_se(const std::vector<double>& v, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double s2 = 0.0;
  for (double x : v) s2 += (x - mean) * (x - mean);
  s2 /= static_cast<double>(v.size() - 1);
  se = std::sqrt(s2 / static_cast<double>(v.size()));
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec, int threads, bool with_timing) {
  ResultTable table;
  table.points = expand_grid(spec);

  std::vector<std::size_t> sim_pos;
  for (std::size_t i = 0; i < spec.algorithms.size(); ++i)
    if (spec.algorithms[i] != Algo::se_analysis) sim_pos.push_back(i);
  // validate the SE configuration up front so a bad spec fails before work
  for (const auto& pt : table.points)
    for (Algo a : spec.algorithms)
      if (a == Algo::se_analysis) se_setup(pt.cfg);

  std::vector<Task> tasks;
  tasks.reserve(table.points.size() * sim_pos.size() * static_cast<std::size_t>(spec.trials));
  for (const auto& pt : table.points)
    for (std::size_t pos : sim_pos)
      for (long trial = 0; trial < spec.trials; ++trial) tasks.push_back({pt.index, pos, trial});

  std::vector<Slot> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const Task& tk = tasks[i];
      run_one(table.points[tk.point], spec.algorithms[tk.algo_pos], tk.trial, with_timing,
              slots[i]);
    }
  };
  const int nw = std::max(threads, 1);
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // deterministic reduction: points, then algorithms in spec order, then trials
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    by_group[{tasks[i].point, tasks[i].algo_pos}].push_back(i);

  for (const auto& pt : table.points) {
    for (std::size_t pos = 0; pos < spec.algorithms.size(); ++pos) {
      const Algo algo = spec.algorithms[pos];
      if (algo == Algo::se_analysis) {
        const auto setup = se_setup(pt.cfg);
        se::SeParams pr{pt.cfg.N, pt.cfg.P,          pt.cfg.L(),       pt.cfg.M,
                        pt.cfg.rho, setup.beta, pt.cfg.sigma2_mw};
        const auto t0 = std::chrono::steady_clock::now();
        const auto pred =
            se::predict(pr, setup.iterations, 100000,
                        rng::derive_seed(pt.cfg.master_seed,
                                         {pt.index, static_cast<std::uint64_t>(rng::Purpose::se_mc)}));
        const double total_us =
            with_timing
                ? std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                      .count()
                : 0.0;
        for (int k = 1; k <= setup.iterations; ++k) {
          TrialRow row;
          row.point = pt.index;
          row.algo = algo;
          row.trial = 0;
          auto& rec = row.rec;
          rec.trial = 0;
          rec.iteration = k;
          rec.error_prob = pred.p_err[static_cast<std::size_t>(k - 1)];
          rec.false_alarm = pred.p_fa[static_cast<std::size_t>(k - 1)];
          rec.missed_detection = pred.p_md[static_cast<std::size_t>(k - 1)];
          rec.mse_active = pred.mse[static_cast<std::size_t>(k - 1)];
          rec.mse_effective = std::nan("");
          rec.f_obj = std::nan("");
          rec.tau_mean = pred.tau[static_cast<std::size_t>(k - 1)];
          rec.wall_time_us = total_us / setup.iterations;
          table.rows.push_back(std::move(row));

          AggRow ag;
          ag.point = pt.index;
          ag.algo = algo;
          ag.iteration = k;
          ag.trials_ok = 1;
          ag.error_prob_mean = rec.error_prob;
          ag.false_alarm_mean = rec.false_alarm;
          ag.missed_mean = rec.missed_detection;
          ag.mse_active_mean = rec.mse_active;
          ag.mse_active_n = 1;
          ag.mse_eff_mean = std::nan("");
          ag.f_obj_mean = std::nan("");
          ag.tau_mean_mean = rec.tau_mean;
          ag.wall_time_us_median = rec.wall_time_us;
          table.aggregates.push_back(ag);
        }
        continue;
      }

      const auto& idxs = by_group[{pt.index, pos}];
      long failed = 0;
      int max_iter = 0;
      for (std::size_t i : idxs) {
        const Slot& slot = slots[i];
        if (slot.failed) {
          ++failed;
          TrialRow row;
          row.point = pt.index;
          row.algo = algo;
          row.trial = tasks[i].trial;
          row.rec = nan_record(tasks[i].trial, slot.fail_iter);
          row.failed = true;
          row.status = slot.status;
          table.rows.push_back(std::move(row));
          continue;
        }
        for (const auto& rec : slot.trace) {
          max_iter = std::max(max_iter, rec.iteration);
          TrialRow row;
          row.point = pt.index;
          row.algo = algo;
          row.trial = rec.trial;
          row.rec = rec;
          table.rows.push_back(std::move(row));
        }
      }
      table.failed_trials += failed;

      for (int k = 1; k <= max_iter; ++k) {
        Accum acc;
        for (std::size_t i : idxs) {
          const Slot& slot = slots[i];
          if (slot.failed) continue;
          for (const auto& rec : slot.trace) {
            if (rec.iteration != k) continue;
            acc.err.push_back(rec.error_prob);
            if (rec.false_alarm_defined) acc.fa.push_back(rec.false_alarm);
            if (rec.missed_defined) acc.md.push_back(rec.missed_detection);
            if (rec.mse_active_defined) acc.msea.push_back(rec.mse_active);
            acc.msee.push_back(rec.mse_effective);
            acc.fobj.push_back(rec.f_obj);
            acc.taum.push_back(rec.tau_mean);
            acc.wall.push_back(rec.wall_time_us);
          }
        }
        AggRow ag;
        ag.point = pt.index;
        ag.algo = algo;
        ag.iteration = k;
        ag.trials_ok = static_cast<long>(acc.err.size());
        ag.failed_trials = failed;
        mean_se(acc.err, ag.error_prob_mean, ag.error_prob_se);
        mean_se(acc.fa, ag.false_alarm_mean, ag.false_alarm_se);
        mean_se(acc.md, ag.missed_mean, ag.missed_se);
        mean_se(acc.msea, ag.mse_active_mean, ag.mse_active_se);
        ag.mse_active_n = static_cast<long>(acc.msea.size());
        mean_se(acc.msee, ag.mse_eff_mean, ag.mse_eff_se);
        mean_se(acc.fobj, ag.f_obj_mean, ag.f_obj_se);
        double unused_se = 0.0;
        mean_se(acc.taum, ag.tau_mean_mean, unused_se);
        ag.wall_time_us_median = median(acc.wall);
        table.aggregates.push_back(ag);
      }
    }
  }
  return table;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string csv_cell(double v, bool defined = true) {
  if (!defined || std::isnan(v)) return "";
  return format_double(v);
}

const char* kPointCols =
    "point,N,K,Q,L,M,P,rho,pt_dbm,sigma2_mw,eta_pl,wavelength_m,distance_model";

std::string point_cells(const GridPoint& pt) {
  const auto& c = pt.cfg;
  std::string s = std::to_string(pt.index);
  s += "," + std::to_string(c.N) + "," + std::to_string(c.K) + "," + std::to_string(c.Q);
  s += "," + std::to_string(c.L()) + "," + std::to_string(c.M) + "," + std::to_string(c.P);
  s += "," + format_double(c.rho) + "," + format_double(c.pt_dbm) + "," +
       format_double(c.sigma2_mw);
  s += "," + format_double(c.eta_pl) + "," + format_double(c.wavelength_m) + "," +
       distance_label(c.distance);
  return s;
}

nlohmann::ordered_json point_fields(const GridPoint& pt) {
  const auto& c = pt.cfg;
  nlohmann::ordered_json o;
  o["point"] = pt.index;
  o["N"] = c.N;
  o["K"] = c.K;
  o["Q"] = c.Q;
  o["L"] = c.L();
  o["M"] = c.M;
  o["P"] = c.P;
  o["rho"] = c.rho;
  o["pt_dbm"] = c.pt_dbm;
  o["sigma2_mw"] = c.sigma2_mw;
  o["eta_pl"] = c.eta_pl;
  o["wavelength_m"] = c.wavelength_m;
  o["distance_model"] = distance_label(c.distance);
  return o;
}

void json_num(nlohmann::ordered_json& o, const char* key, double v, bool defined = true) {
  if (!defined || std::isnan(v)) o[key] = nullptr;
  else o[key] = v;
}

std::string agg_path_for(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + ".agg";
  return path.substr(0, dot) + ".agg" + path.substr(dot);
}

}  // namespace

std::string write_results(const ResultTable& table, const ExperimentSpec&,
                          const std::string& path, Format format) {
  std::map<std::size_t, const GridPoint*> pts;
  for (const auto& pt : table.points) pts[pt.index] = &pt;
  const std::string agg_path = agg_path_for(path);

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path);
  std::ofstream agg(agg_path);
  if (!agg) throw ConfigError("cannot open output file " + agg_path);

  if (format == Format::csv) {
    out << kPointCols
        << ",algorithm,trial,iteration,error_prob,false_alarm,missed_detection,mse_active,"
           "mse_effective,f_obj,tau_mean,wall_time_us,status\n";
    for (const auto& row : table.rows) {
      const auto& rec = row.rec;
      out << point_cells(*pts.at(row.point)) << ',' << algo_name(row.algo) << ',' << row.trial
          << ',' << rec.iteration << ',' << csv_cell(rec.error_prob) << ','
          << csv_cell(rec.false_alarm, rec.false_alarm_defined) << ','
          << csv_cell(rec.missed_detection, rec.missed_defined) << ','
          << csv_cell(rec.mse_active, rec.mse_active_defined) << ','
          << csv_cell(rec.mse_effective) << ',' << csv_cell(rec.f_obj) << ','
          << csv_cell(rec.tau_mean) << ',' << csv_cell(rec.wall_time_us) << ',' << row.status
          << '\n';
    }
    agg << kPointCols
        << ",algorithm,iteration,trials_ok,failed_trials,error_prob_mean,error_prob_se,"
           "false_alarm_mean,false_alarm_se,missed_detection_mean,missed_detection_se,"
           "mse_active_mean,mse_active_se,mse_active_n,mse_effective_mean,mse_effective_se,"
           "f_obj_mean,f_obj_se,tau_mean_mean,wall_time_us_median\n";
    for (const auto& ag : table.aggregates) {
      agg << point_cells(*pts.at(ag.point)) << ',' << algo_name(ag.algo) << ',' << ag.iteration
          << ',' << ag.trials_ok << ',' << ag.failed_trials << ',' << csv_cell(ag.error_prob_mean)
          << ',' << csv_cell(ag.error_prob_se) << ',' << csv_cell(ag.false_alarm_mean) << ','
          << csv_cell(ag.false_alarm_se) << ',' << csv_cell(ag.missed_mean) << ','
          << csv_cell(ag.missed_se) << ',' << csv_cell(ag.mse_active_mean) << ','
          << csv_cell(ag.mse_active_se) << ',' << ag.mse_active_n << ','
          << csv_cell(ag.mse_eff_mean) << ',' << csv_cell(ag.mse_eff_se) << ','
          << csv_cell(ag.f_obj_mean) << ',' << csv_cell(ag.f_obj_se) << ','
          << csv_cell(ag.tau_mean_mean) << ',' << csv_cell(ag.wall_time_us_median) << '\n';
    }
  } else {
    for (const auto& row : table.rows) {
      const auto& rec = row.rec;
      nlohmann::ordered_json o = point_fields(*pts.at(row.point));
      o["algorithm"] = algo_name(row.algo);
      o["trial"] = row.trial;
      o["iteration"] = rec.iteration;
      json_num(o, "error_prob", rec.error_prob);
      json_num(o, "false_alarm", rec.false_alarm, rec.false_alarm_defined);
      json_num(o, "missed_detection", rec.missed_detection, rec.missed_defined);
      json_num(o, "mse_active", rec.mse_active, rec.mse_active_defined);
      json_num(o, "mse_effective", rec.mse_effective);
      json_num(o, "f_obj", rec.f_obj);
      json_num(o, "tau_mean", rec.tau_mean);
      json_num(o, "wall_time_us", rec.wall_time_us);
      o["status"] = row.status;
      out << o.dump() << '\n';
    }
    for (const auto& ag : table.aggregates) {
      nlohmann::ordered_json o = point_fields(*pts.at(ag.point));
      o["algorithm"] = algo_name(ag.algo);
      o["iteration"] = ag.iteration;
      o["trials_ok"] = ag.trials_ok;
      o["failed_trials"] = ag.failed_trials;
      json_num(o, "error_prob_mean", ag.error_prob_mean);
      json_num(o, "error_prob_se", ag.error_prob_se);
      json_num(o, "false_alarm_mean", ag.false_alarm_mean);
      json_num(o, "false_alarm_se", ag.false_alarm_se);
      json_num(o, "missed_detection_mean", ag.missed_mean);
      json_num(o, "missed_detection_se", ag.missed_se);
      json_num(o, "mse_active_mean", ag.mse_active_mean);
      json_num(o, "mse_active_se", ag.mse_active_se);
      o["mse_active_n"] = ag.mse_active_n;
      json_num(o, "mse_effective_mean", ag.mse_eff_mean);
      json_num(o, "mse_effective_se", ag.mse_eff_se);
      json_num(o, "f_obj_mean", ag.f_obj_mean);
      json_num(o, "f_obj_se", ag.f_obj_se);
      json_num(o, "tau_mean_mean", ag.tau_mean_mean);
      json_num(o, "wall_time_us_median", ag.wall_time_us_median);
      agg << o.dump() << '\n';
    }
  }
  return agg_path;
}

}  // namespace gfamp::harness
