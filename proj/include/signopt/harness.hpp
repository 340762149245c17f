#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <thread>
#include <vector>

#include "signopt/config.hpp"
#include "signopt/smoothness.hpp"
#include "signopt/verify.hpp"

namespace signopt {

inline std::string make_run_id(const ExperimentConfig& cfg, std::int64_t T,
                               std::uint64_t seed) {
  return cfg.problem.kind + "_" + cfg.optimizer.kind + "_T" + std::to_string(T) +
         "_s" + std::to_string(seed);
}

/// Executes one (T, seed) cell of the experiment.
inline RunRecord run_experiment(const ExperimentConfig& cfg, std::int64_t T,
                                std::uint64_t seed) {
  const Objective obj = cfg.build_objective();
  const Hyper hyper = cfg.resolve_hyper(obj, T);
  OptimizerState state = init_state(cfg.optimizer_kind(), cfg.start_point(obj.dim()), hyper);
  RunRecord rec;
  if (cfg.distributed()) {
    const WorkerOracle workers =
        split_workers(obj, cfg.noise.n, cfg.noise.sigma, cfg.noise.sigma_bar, seed);
    const FccConfig fcc_cfg = cfg.resolve_fcc(obj, T);
    const bool eval_at_v = cfg.compression ? cfg.compression->eval_at_v : false;
    rec = run_distributed(workers, std::move(state), fcc_cfg, eval_at_v, T, seed,
                          cfg.exact_grad_logging);
  } else {
    const StochasticOracle oracle(obj, cfg.noise.sigma);
    rec = run_single(obj, oracle, std::move(state), T, seed, cfg.exact_grad_logging);
  }
  rec.run_id = make_run_id(cfg, T, seed);
  return rec;
}

inline nlohmann::json meta_json(const RunRecord& rec) {
  nlohmann::json m;
  m["run_id"] = rec.run_id;
  m["kind"] = kind_name(rec.kind);
  m["seed"] = rec.seed;
  m["T"] = rec.T;
  m["problem"] = rec.problem;
  m["hyper"] = {{"gamma", rec.hyper.gamma},
                {"theta", rec.hyper.theta},
                {"zeta", rec.hyper.zeta},
                {"lambda", rec.hyper.lambda},
                {"operator", rec.hyper.op.name()}};
  m["rows"] = rec.rows.size();
  m["mean_grad_l1"] = rec.mean_grad_l1;
  if (!rec.rows.empty()) {
    m["final_f"] = rec.rows.back().f;
    m["final_grad_l1"] = rec.rows.back().grad_l1;
  }
  m["aborted"] = rec.aborted;
  if (rec.aborted) m["abort_reason"] = rec.abort_reason;
  m["exact_grad_logging"] = rec.log_eps;
  if (rec.has_comm)
    m["comm"] = {{"rounds", rec.comm_rounds_total},
                 {"scalars", rec.comm_scalars_total}};
  return m;
}

inline void write_record_files(const RunRecord& rec,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / (rec.run_id + ".csv"), std::ios::binary);
    write_csv(csv, rec);
  }
  {
    std::ofstream meta(out_dir / (rec.run_id + ".meta.json"), std::ios::binary);
    meta << meta_json(rec).dump(2) << '\n';
  }
}

/// Fans the (T, seed) grid out over a bounded worker pool; results land in
/// grid order so file writing (by the caller's single thread) is stable.
inline std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg) {
  struct Cell {
    std::int64_t T;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::int64_t T : cfg.t_grid)
    for (std::uint64_t seed : cfg.seeds) cells.push_back({T, seed});
  std::vector<RunRecord> records(cells.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                     cells.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        records[i] = run_experiment(cfg, cells[i].T, cells[i].seed);
      }
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln T, ln median mean_grad_l1)
};

/// Least-squares line through (ln T, ln median-over-seeds mean_grad_l1).
/// Requires at least 3 distinct T values with at least 3 records each.
inline RateFit fit_rate(const std::vector<RunRecord>& records) {
  std::map<std::int64_t, std::vector<double>> by_t;
  for (const auto& rec : records)
    if (!rec.aborted) by_t[rec.T].push_back(rec.mean_grad_l1);
  if (by_t.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 distinct T values");
  RateFit fit;
  for (auto& [T, vals] : by_t) {
    if (vals.size() < 3)
      throw std::invalid_argument("fit_rate: need at least 3 seeds per T");
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    const double median =
        n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    if (!(median > 0.0))
      throw std::invalid_argument("fit_rate: non-positive median metric");
    fit.points.emplace_back(std::log(static_cast<double>(T)), std::log(median));
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= fit.points.size();
  my /= fit.points.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

inline nlohmann::json rate_fit_json(const RateFit& fit) {
  nlohmann::json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [x, y] : fit.points) pts.push_back({{"log_T", x}, {"log_metric", y}});
  j["points"] = pts;
  return j;
}

inline nlohmann::json verify_report_json(const VerifyReport& rep) {
  nlohmann::json j;
  j["suite"] = rep.suite;
  j["trials"] = rep.trials;
  j["passes"] = rep.passes;
  j["failures"] = rep.failures;
  j["worst_margin"] = rep.worst_margin;
  j["notes"] = rep.notes;
  return j;
}

struct SmoothnessTraceResult {
  std::string run_id;
  TrajectorySmoothness trace;
  AffineEnvelope envelope;
};

/// Smoothness trace of the configured run: one sample per optimizer step,
/// plus the fitted affine envelope at 95% coverage.
inline SmoothnessTraceResult run_smoothness_trace(const ExperimentConfig& cfg,
                                                  std::int64_t T, std::uint64_t seed) {
  if (cfg.distributed())
    throw ConfigError("estimate: smoothness traces are single-node only");
  const Objective obj = cfg.build_objective();
  const Hyper hyper = cfg.resolve_hyper(obj, T);
  const StochasticOracle oracle(obj, cfg.noise.sigma);
  OptimizerState state = init_state(cfg.optimizer_kind(), cfg.start_point(obj.dim()), hyper);
  SmoothnessTraceResult res;
  res.run_id = make_run_id(cfg, T, seed);
  const auto traj = collect_trajectory(obj, oracle, std::move(state), T, seed);
  res.trace = trajectory_smoothness(obj, traj);
  if (res.trace.samples.size() >= 2)
    res.envelope = fit_affine_envelope(res.trace.samples, 0.95);
  return res;
}

inline void write_smoothness_files(const SmoothnessTraceResult& res,
                                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / (res.run_id + ".smoothness.csv"), std::ios::binary);
    csv << "step_index,grad_norm,local_H,local_L\n";
    for (const auto& s : res.trace.samples)
      csv << s.step_index << ',' << format_double(s.grad_norm) << ','
          << format_double(s.local_H) << ',' << format_double(s.local_L) << '\n';
  }
  {
    nlohmann::json j;
    j["run_id"] = res.run_id;
    j["samples"] = res.trace.samples.size();
    j["skipped"] = res.trace.skipped;
    j["envelope"] = {{"offset", res.envelope.offset},
                     {"slope", res.envelope.slope},
                     {"violation_count", res.envelope.violation_count},
                     {"max_violation", res.envelope.max_violation}};
    std::ofstream meta(out_dir / (res.run_id + ".smoothness.meta.json"),
                       std::ios::binary);
    meta << j.dump(2) << '\n';
  }
}

}  // namespace signopt
