// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs fixed-seed protocols end to end against pinned tolerances.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "signopt/comms.hpp"
#include "signopt/harness.hpp"
#include "signopt/optim.hpp"
#include "signopt/smoothness.hpp"
#include "signopt/verify.hpp"

namespace {

using signopt::Compressor;
using signopt::FccConfig;
using signopt::Hyper;
using signopt::Matrix;
using signopt::Objective;
using signopt::OptimizerKind;
using signopt::OptimizerState;
using signopt::ParamVec;
using signopt::StochasticOracle;
using signopt::WorkerOracle;

struct Outcome {
  bool pass = false;
  std::string detail;
};

ParamVec gauss_vec(int d, std::uint64_t seed, std::uint64_t stream) {
  signopt::CounterRng rng(seed, stream, 0);
  ParamVec x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.next_gaussian();
  return x;
}

double median(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  return n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

double window_mean_grad_l1(const signopt::RunRecord& rec, std::size_t begin,
                           std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += rec.rows[i].grad_l1;
  return sum / static_cast<double>(end - begin);
}

// Shared benchmark of criteria 11-13: rank-one with Y = I in d = 10,
// started on the diagonal ray at radius 2.2.
const int kBenchDim = 10;

Objective bench_objective() {
  return Objective::rank_one(Matrix::Identity(kBenchDim, kBenchDim));
}

ParamVec bench_start() {
  return ParamVec::Constant(kBenchDim, 2.2 / std::sqrt(static_cast<double>(kBenchDim)));
}

Outcome criterion01_gradient_correctness() {
  std::vector<Objective> objectives;
  {
    Matrix y(6, 6);
    y.setZero();
    for (int i = 0; i < 6; ++i) y(i, i) = 0.3 * (i + 1);
    y(0, 3) = y(3, 0) = 0.25;
    objectives.push_back(Objective::rank_one(y));
  }
  {
    ParamVec a0(4), target(3);
    a0 << 0.4, -0.9, 0.3, 1.1;
    target << 0.5, -0.2, 1.0;
    objectives.push_back(Objective::penalty_net(a0, target, 3, 2.0));
  }
  objectives.push_back(Objective::scalar_power(4));
  objectives.push_back(Objective::scalar_exp());
  {
    Matrix a(5, 5);
    a.setIdentity();
    a(0, 1) = a(1, 0) = 0.2;
    a(2, 2) = 3.0;
    ParamVec b(5);
    b << 0.1, -0.4, 0.0, 0.7, -1.0;
    objectives.push_back(Objective::quadratic(a, b));
  }
  objectives.push_back(Objective::cubic());

  double worst = 0.0;
  for (const auto& obj : objectives) {
    for (int trial = 0; trial < 100; ++trial) {
      const ParamVec x = gauss_vec(obj.dim(), 1001, trial);
      const double h = 1e-5 * (1.0 + x.norm());
      const ParamVec fd = signopt::fd_gradient(obj, x, h);
      const double err = (obj.gradient(x) - fd).norm() / (1.0 + fd.norm());
      worst = std::max(worst, err);
      if (err >= 1e-5)
        return {false, obj.descriptor() + " trial " + std::to_string(trial) +
                           " rel err " + signopt::format_double(err)};
    }
  }
  return {true, "6 kinds x 100 points, worst rel err " + signopt::format_double(worst)};
}

Outcome criterion02_condition1_identity() {
  const int d = 16;
  const auto sign_rep =
      signopt::verify_condition1(signopt::DescentOperator::sign_op(d), d, 10000, 7);
  if (std::abs(sign_rep.min_ratio - 1.0) > 1e-12)
    return {false, "sign min_ratio " + signopt::format_double(sign_rep.min_ratio)};
  if (sign_rep.max_norm > 4.0)
    return {false, "sign max_norm " + signopt::format_double(sign_rep.max_norm)};
  const auto l2_rep = signopt::verify_condition1(
      signopt::DescentOperator::l2_normalize_op(), d, 10000, 7);
  if (std::abs(l2_rep.min_ratio - 1.0) > 1e-12 ||
      l2_rep.max_norm > 1.0 + 1e-12)
    return {false, "l2_normalize ratios off"};
  return {true, "sign ratio exact, max_norm " +
                    signopt::format_double(sign_rep.max_norm) + " = sqrt(16)"};
}

Outcome criterion03_contraction() {
  const int d = 32;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int k : {1, 8, 32}) {
    const double factor = 1.0 - static_cast<double>(k) / d;
    for (int trial = 0; trial < 10000; ++trial) {
      const ParamVec x = gauss_vec(d, 3001, 3 * trial + k);
      const double residual = (signopt::topk_compress(x, k) - x).squaredNorm();
      if (residual > factor * x.squaredNorm()) ++violations;
      if (x.squaredNorm() > 0.0)
        worst_ratio = std::max(worst_ratio, residual / x.squaredNorm());
    }
  }
  return {violations == 0, "30000 checks, max residual ratio " +
                               signopt::format_double(worst_ratio)};
}

Outcome criterion04_fcc_bound() {
  const int d = 32, k = 8;
  const Compressor comp = Compressor::top_k(k, d);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const ParamVec x = gauss_vec(d, 4001, trial);
    ParamVec prev = ParamVec::Zero(d);
    for (int u = 1; u <= 3; ++u) {
      const ParamVec out = signopt::fcc(x, FccConfig(comp, u));
      if ((out - x).squaredNorm() > std::pow(1.0 - comp.delta, u) * x.squaredNorm())
        ++violations;
      if ((out - prev - comp(x - prev)).norm() != 0.0) ++violations;
      prev = out;
    }
  }
  return {violations == 0,
          "10000 vectors x u in {1,2,3}, violations " + std::to_string(violations)};
}

Outcome run_descent(const Objective& obj, const signopt::DescentOperator& op,
                    double gamma, const ParamVec& x0, std::string label,
                    std::string& detail) {
  Hyper h;
  h.gamma = gamma;
  h.theta = 0.9;
  h.op = op;
  const OptimizerKind kind = op.kind == signopt::DescentOperator::Kind::Sign
                                 ? OptimizerKind::ASignSgd
                                 : OptimizerKind::GSignSgd;
  const auto chk = signopt::check_descent_inequality(
      obj, signopt::init_state(kind, x0, h), 500, 1e-10);
  detail += label + " worst_slack=" + signopt::format_double(chk.worst_slack) + "; ";
  return {chk.violations == 0, ""};
}

Outcome criterion05_sign_descent() {
  const int d = 10;
  std::string detail;
  const Objective quad = Objective::quadratic(Matrix::Identity(d, d), ParamVec::Zero(d));
  const Objective rank = bench_objective();
  const ParamVec x0 = ParamVec::Constant(d, 0.6);
  bool ok = run_descent(quad, signopt::DescentOperator::sign_op(d), 0.1, x0,
                        "quadratic", detail)
                .pass;
  const double gamma_rank = 0.5 / (*rank.smoothness().L2 * d);
  ok = run_descent(rank, signopt::DescentOperator::sign_op(d), gamma_rank, x0,
                   "rank_one", detail)
           .pass &&
       ok;
  return {ok, detail};
}

Outcome criterion06_general_descent() {
  const int d = 10;
  std::string detail;
  const Objective quad = Objective::quadratic(Matrix::Identity(d, d), ParamVec::Zero(d));
  const Objective rank = bench_objective();
  const ParamVec x0 = ParamVec::Constant(d, 0.6);
  bool ok = run_descent(quad, signopt::DescentOperator::l2_normalize_op(), 0.1, x0,
                        "quadratic", detail)
                .pass;
  const double gamma_rank = 0.5 / *rank.smoothness().L2;
  ok = run_descent(rank, signopt::DescentOperator::l2_normalize_op(), gamma_rank,
                   x0, "rank_one", detail)
           .pass &&
       ok;
  return {ok, detail};
}

Outcome criterion07_mc_lemma_bounds() {
  const int d = 10, n = 4;
  const Objective rank = bench_objective();
  const WorkerOracle workers = signopt::split_workers(rank, n, 1.0, 1.0, 71);
  const FccConfig cfg(Compressor::top_k(2, d), 2);
  // moderate-gradient points so the variance terms carry the bound
  const ParamVec x = gauss_vec(d, 7001, 0).normalized();
  const ParamVec y = 1.5 * gauss_vec(d, 7001, 1).normalized();
  const auto second = signopt::mc_check_second_moment(workers, cfg, x, 10000, 71);
  const auto cross = signopt::mc_check_cross_term(workers, cfg, x, y, 10000, 71);
  const bool ok = second.within(3.0) && cross.within(3.0);
  return {ok, "second: lhs=" + signopt::format_double(second.lhs_mean) +
                  " rhs=" + signopt::format_double(second.rhs) +
                  "; cross: lhs=" + signopt::format_double(cross.lhs_mean) +
                  " rhs=" + signopt::format_double(cross.rhs)};
}

Outcome criterion08_equivalences() {
  const int d = 8;
  const Objective obj = bench_objective();
  const Objective small = Objective::rank_one(Matrix::Identity(d, d));
  const StochasticOracle oracle(small, 1.0);
  const ParamVec x0 = ParamVec::Constant(d, 1.1);
  Hyper h;
  h.gamma = 0.01;
  h.theta = 0.9;

  auto lion_h = h;
  lion_h.lambda = 0.0;
  auto lion = signopt::init_state(OptimizerKind::Lion, x0, lion_h);
  auto asign_a = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
  for (int k = 0; k < 1000; ++k) {
    signopt::lion_step(lion, oracle, 81);
    signopt::asign_step(asign_a, oracle, 81);
    if (!(lion.w == asign_a.w))
      return {false, "lion(lambda=0) diverged from a_sign_sgd at step " +
                         std::to_string(k)};
  }

  auto gsign = signopt::init_state(OptimizerKind::GSignSgd, x0, h);
  auto asign_b = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
  for (int k = 0; k < 1000; ++k) {
    signopt::gsign_step(gsign, oracle, 82);
    signopt::asign_step(asign_b, oracle, 82);
    if (!(gsign.w == asign_b.w))
      return {false, "g_sign_sgd(sign) diverged at step " + std::to_string(k)};
  }

  const WorkerOracle single = signopt::split_workers(small, 1, 1.0, 0.0, 83);
  const FccConfig pass(Compressor::identity(), 0);
  auto server = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
  auto asign_c = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
  signopt::CommLedger ledger;
  for (int k = 0; k < 1000; ++k) {
    signopt::casign_round(server, single, pass, false, 83, ledger);
    signopt::asign_step(asign_c, oracle, 83);
    if (!(server.w == asign_c.w))
      return {false, "ca_sign_sgd(n=1) diverged at step " + std::to_string(k)};
  }
  (void)obj;
  return {true, "lion/g_sign/ca_sign all bit-identical over 1000 steps"};
}

Outcome criterion09_scale_invariance() {
  const int d = 8;
  const Objective obj = Objective::rank_one(Matrix::Identity(d, d));
  const ParamVec x0 = ParamVec::Constant(d, 1.2);
  Hyper h;
  h.gamma = 0.01;
  h.theta = 0.9;
  for (std::uint64_t seed : {11, 12, 13}) {
    for (OptimizerKind kind : {OptimizerKind::SignSgd, OptimizerKind::ASignSgd,
                               OptimizerKind::Lion, OptimizerKind::GSignSgd}) {
      const StochasticOracle base(obj, 1.0, 1.0);
      const StochasticOracle scaled(obj, 1.0, 7.0);
      auto s1 = signopt::init_state(kind, x0, h);
      auto s2 = signopt::init_state(kind, x0, h);
      for (int k = 0; k < 1000; ++k) {
        signopt::step(s1, base, seed);
        signopt::step(s2, scaled, seed);
        if (!(s1.w == s2.w))
          return {false, signopt::kind_name(kind) + " seed " +
                             std::to_string(seed) + " diverged at step " +
                             std::to_string(k)};
      }
    }
    // distributed path with compression
    const WorkerOracle w1 = signopt::split_workers(obj, 3, 1.0, 0.5, seed, 1.0);
    const WorkerOracle w7 = signopt::split_workers(obj, 3, 1.0, 0.5, seed, 7.0);
    const FccConfig cfg(Compressor::top_k(3, d), 2);
    auto s1 = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
    auto s2 = signopt::init_state(OptimizerKind::ASignSgd, x0, h);
    signopt::CommLedger l1, l2;
    for (int k = 0; k < 1000; ++k) {
      signopt::casign_round(s1, w1, cfg, false, seed, l1);
      signopt::casign_round(s2, w7, cfg, false, seed, l2);
      if (!(s1.w == s2.w))
        return {false, "ca_sign_sgd seed " + std::to_string(seed) +
                           " diverged at step " + std::to_string(k)};
    }
  }
  return {true, "4 kinds + ca_sign_sgd, 3 seeds, 1000 steps each"};
}

Outcome criterion10_theorem_presets() {
  signopt::SmoothnessConstants c1;
  c1.L1 = 1.0;
  const auto plain = signopt::theorem1_presets(10000, c1, false);
  if (plain.hyper.theta != 0.99 || plain.hyper.gamma != 0.001)
    return {false, "theorem1 theta=" + signopt::format_double(plain.hyper.theta) +
                       " gamma=" + signopt::format_double(plain.hyper.gamma)};
  signopt::SmoothnessConstants c2;
  c2.L1 = 1.0;
  c2.H1 = 1.0;
  c2.H2 = 0.0;
  const auto accel = signopt::theorem1_presets(128, c2, true);
  if (accel.hyper.theta != 0.9375 || accel.hyper.gamma != 0.03125 ||
      accel.hyper.zeta != 15.0)
    return {false, "theorem1_accel (" + signopt::format_double(accel.hyper.theta) +
                       ", " + signopt::format_double(accel.hyper.gamma) + ", " +
                       signopt::format_double(accel.hyper.zeta) + ")"};
  const auto dist = signopt::theorem2_presets(10000, 4, 10, 0.2, c1, false);
  if (std::abs((1.0 - dist.hyper.theta) - 0.02) > 1e-12 ||
      std::abs(dist.hyper.gamma - std::sqrt(2.0) / 1000.0) > 1e-12)
    return {false, "theorem2 1-theta=" +
                       signopt::format_double(1.0 - dist.hyper.theta) +
                       " gamma=" + signopt::format_double(dist.hyper.gamma)};
  return {true, "(0.99, 0.001), (0.9375, 0.03125, 15), (0.02, sqrt(2)/1000)"};
}

Outcome criterion11_convergence_sanity() {
  const Objective obj = bench_objective();
  const std::int64_t T = 10000;
  const auto preset = signopt::theorem1_presets(T, obj.smoothness(), false, kBenchDim);
  std::vector<double> first, final;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const StochasticOracle oracle(obj, 1.0);
    auto st = signopt::init_state(OptimizerKind::ASignSgd, bench_start(), preset.hyper);
    const auto rec = signopt::run_single(obj, oracle, std::move(st), T, seed);
    if (rec.aborted) return {false, "run aborted: " + rec.abort_reason};
    first.push_back(window_mean_grad_l1(rec, 0, T / 10));
    final.push_back(window_mean_grad_l1(rec, T - T / 10, T));
  }
  const double med_first = median(first);
  const double med_final = median(final);
  return {med_final < 0.2 * med_first,
          "first-window median " + signopt::format_double(med_first) +
              ", final-window median " + signopt::format_double(med_final) +
              " (ratio " + signopt::format_double(med_final / med_first) + ")"};
}

Outcome criterion12_acceleration_ordering() {
  const Objective obj = bench_objective();
  const std::int64_t T = 16384;
  const auto plain = signopt::theorem1_presets(T, obj.smoothness(), false, kBenchDim);
  const auto accel = signopt::theorem1_presets(T, obj.smoothness(), true, kBenchDim);
  std::vector<double> plain_metric, accel_metric;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const StochasticOracle oracle(obj, 1.0);
    auto st_p = signopt::init_state(OptimizerKind::ASignSgd, bench_start(), plain.hyper);
    const auto rec_p = signopt::run_single(obj, oracle, std::move(st_p), T, seed);
    auto st_a = signopt::init_state(OptimizerKind::ASignSgd, bench_start(), accel.hyper);
    const auto rec_a = signopt::run_single(obj, oracle, std::move(st_a), T, seed);
    if (rec_p.aborted || rec_a.aborted) return {false, "run aborted"};
    plain_metric.push_back(rec_p.mean_grad_l1);
    accel_metric.push_back(rec_a.mean_grad_l1);
  }
  const double med_plain = median(plain_metric);
  const double med_accel = median(accel_metric);
  return {med_accel <= med_plain,
          "accelerated " + signopt::format_double(med_accel) + " vs plain " +
              signopt::format_double(med_plain)};
}

Outcome criterion13_linear_speedup() {
  const Objective obj = bench_objective();
  const std::int64_t T = 4096;
  std::vector<double> medians;
  std::string detail;
  for (int n : {1, 4, 16}) {
    const double sigma_bar = n == 1 ? 0.0 : 1.0;  // one worker carries no dispersion
    const auto preset =
        signopt::theorem2_presets(T, n, kBenchDim, 2.0 / kBenchDim, obj.smoothness(),
                                  false);
    const FccConfig cfg(Compressor::top_k(2, kBenchDim), preset.u);
    std::vector<double> finals;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const WorkerOracle workers = signopt::split_workers(obj, n, 1.0, sigma_bar, seed);
      auto st = signopt::init_state(OptimizerKind::ASignSgd, bench_start(), preset.hyper);
      const auto rec =
          signopt::run_distributed(workers, std::move(st), cfg, false, T, seed);
      if (rec.aborted) return {false, "run aborted"};
      finals.push_back(window_mean_grad_l1(rec, T - T / 10, T));
    }
    medians.push_back(median(finals));
    detail += "n=" + std::to_string(n) + ": " + signopt::format_double(medians.back()) +
              "; ";
  }
  const bool ok = medians[1] <= medians[0] && medians[2] <= medians[1];
  return {ok, detail};
}

Outcome criterion14_hessian_estimator() {
  const Objective cub = Objective::cubic();
  const double est_cubic = signopt::local_hessian_smoothness(
      cub, ParamVec::Constant(1, 1.0), ParamVec::Constant(1, 1.0), 0.1);
  if (std::abs(est_cubic - 6.0) > 1e-9)
    return {false, "cubic estimate " + signopt::format_double(est_cubic)};

  Matrix a(4, 4);
  a.setIdentity();
  a(1, 1) = 3.0;
  a(0, 2) = a(2, 0) = 0.4;
  const Objective quad = Objective::quadratic(a, ParamVec::Zero(4));
  const double est_quad = signopt::local_hessian_smoothness(
      quad, gauss_vec(4, 1401, 0), gauss_vec(4, 1401, 1), 0.05);
  if (std::abs(est_quad) > 1e-9)
    return {false, "quadratic estimate " + signopt::format_double(est_quad)};

  const Objective rank = Objective::rank_one(Matrix::Identity(5, 5));
  const StochasticOracle oracle(rank, 0.5);
  Hyper h;
  h.gamma = 0.01;
  h.theta = 0.9;
  const auto traj = signopt::collect_trajectory(
      rank, oracle,
      signopt::init_state(OptimizerKind::ASignSgd, ParamVec::Constant(5, 0.8), h),
      300, 14);
  const auto trace = signopt::trajectory_smoothness(rank, traj);
  const auto env = signopt::fit_affine_envelope(trace.samples, 0.95);
  // coverage >= 95% checked in integers: 20 * covered >= 19 * total
  const std::int64_t total = static_cast<std::int64_t>(trace.samples.size());
  const std::int64_t covered = total - env.violation_count;
  return {20 * covered >= 19 * total && std::isfinite(env.slope) &&
              std::isfinite(env.offset),
          "cubic 6 exact, quadratic 0 exact, envelope coverage " +
              std::to_string(covered) + "/" + std::to_string(total)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
    double budget_s;  // 0 = no stated budget
  };
  const std::vector<Criterion> criteria = {
      {"01 gradient-correctness", criterion01_gradient_correctness, 5.0},
      {"02 condition1-identity", criterion02_condition1_identity, 1.0},
      {"03 compression-contraction", criterion03_contraction, 0.0},
      {"04 fcc-bound", criterion04_fcc_bound, 0.0},
      {"05 sign-descent-inequality", criterion05_sign_descent, 0.0},
      {"06 general-descent-inequality", criterion06_general_descent, 0.0},
      {"07 mc-lemma-bounds", criterion07_mc_lemma_bounds, 30.0},
      {"08 equivalences", criterion08_equivalences, 0.0},
      {"09 scale-invariance", criterion09_scale_invariance, 0.0},
      {"10 theorem-presets", criterion10_theorem_presets, 0.0},
      {"11 convergence-sanity", criterion11_convergence_sanity, 60.0},
      {"12 acceleration-ordering", criterion12_acceleration_ordering, 0.0},
      {"13 linear-speedup", criterion13_linear_speedup, 0.0},
      {"14 hessian-estimator", criterion14_hessian_estimator, 0.0},
  };

  int failures = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    bool pass = out.pass;
    std::string note = out.detail;
    if (pass && cr.budget_s > 0.0 && elapsed > cr.budget_s) {
      pass = false;
      note += " [exceeded " + std::to_string(cr.budget_s) + " s budget]";
    }
    std::printf("[%s] %s: %s (%.2f s)\n", pass ? "PASS" : "FAIL", cr.name,
                note.c_str(), elapsed);
    if (!pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
