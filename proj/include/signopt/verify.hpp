#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "signopt/comms.hpp"
#include "signopt/optim.hpp"
#include "signopt/smoothness.hpp"

namespace signopt {

struct DescentCheck {
  std::int64_t steps = 0;
  std::int64_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
};

/// Pointwise one-step descent inequality for the operator in use, with exact
/// gradients:
///   f(w') - f(w) <= -(gamma*l/2) ||grad f(w)||_diamond
///                   + (U + b) gamma ||m - grad f(w)||
///                   + (L1 U^2 / 2) gamma^2.
/// The sign operator (l = 1, U = b = sqrt(d), diamond = l1) turns this into
/// the sign-specific descent bound with the gamma^2 d remainder.
inline DescentCheck check_descent_inequality(const Objective& obj,
                                             OptimizerState state, std::int64_t T,
                                             double tol = 1e-10) {
  const SmoothnessConstants& c = obj.smoothness();
  if (!c.L1) throw std::invalid_argument("descent check: objective lacks L1");
  const StochasticOracle oracle(obj, 0.0);
  const DescentOperator& op = state.hyper.op;
  const double gamma = state.hyper.gamma;
  const double rhs_quad = 0.5 * *c.L1 * op.U * op.U * gamma * gamma;
  DescentCheck res;
  for (std::int64_t k = 0; k < T; ++k) {
    const ParamVec w = state.w;
    const double f_before = obj.value(w);
    const ParamVec g = obj.gradient(w);
    step(state, oracle, /*seed=*/0);
    const double lhs = obj.value(state.w) - f_before;
    const double eps = (state.m - g).norm();
    const double rhs = -0.5 * gamma * op.l * op.diamond_norm(g) +
                       (op.U + op.norm_equiv_b) * gamma * eps + rhs_quad;
    const double slack = rhs - lhs;
    res.worst_slack = std::min(res.worst_slack, slack);
    if (slack < -tol) ++res.violations;
    ++res.steps;
  }
  return res;
}

struct VerifyReport {
  std::string suite;
  std::int64_t trials = 0;
  std::int64_t passes = 0;
  std::int64_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<std::string> notes;
  bool passed() const { return failures == 0; }
};

namespace detail {

inline void tally(VerifyReport& rep, bool ok, double margin) {
  ++rep.trials;
  if (ok)
    ++rep.passes;
  else
    ++rep.failures;
  rep.worst_margin = std::min(rep.worst_margin, margin);
}

inline ParamVec random_vec(int dim, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, 0x7e57da7aULL, stream);
  ParamVec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.next_gaussian();
  return x;
}

}  // namespace detail

/// Operator contract: exact l1 identity of the sign operator and the norm
/// bounds for both built-in operators.
inline VerifyReport verify_condition1_suite(std::int64_t trials, std::uint64_t seed) {
  VerifyReport rep;
  rep.suite = "condition1";
  const int d = 16;
  for (const DescentOperator& op :
       {DescentOperator::sign_op(d), DescentOperator::l2_normalize_op()}) {
    const Condition1Report r =
        verify_condition1(op, d, static_cast<int>(trials), seed);
    detail::tally(rep, r.l_ok, r.min_ratio - op.l);
    detail::tally(rep, r.u_ok, op.U - r.max_norm);
    rep.notes.push_back(op.name() + ": min_ratio=" + format_double(r.min_ratio) +
                        " max_norm=" + format_double(r.max_norm));
  }
  return rep;
}

/// Deterministic compressor contraction plus the FCC geometric bound and
/// round-recursion identity.
inline VerifyReport verify_contraction_suite(std::int64_t trials, std::uint64_t seed) {
  VerifyReport rep;
  rep.suite = "contraction";
  const int d = 32;
  double worst_ratio = 0.0;
  for (int k : {1, 8, 32}) {
    const double bound_factor = 1.0 - static_cast<double>(k) / d;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
      const ParamVec x = detail::random_vec(d, seed, 0x9000 + trial * 3 + k);
      const double norm_sq = x.squaredNorm();
      const double residual = (topk_compress(x, k) - x).squaredNorm();
      detail::tally(rep, residual <= bound_factor * norm_sq,
                    bound_factor * norm_sq - residual);
      if (norm_sq > 0.0) worst_ratio = std::max(worst_ratio, residual / norm_sq);
    }
  }
  // FCC: residual <= (1 - k/d)^u ||x||^2 and the telescoping identity
  const int k_fcc = 8;
  const Compressor comp = Compressor::top_k(k_fcc, d);
  for (std::int64_t trial = 0; trial < std::min<std::int64_t>(trials, 1000); ++trial) {
    const ParamVec x = detail::random_vec(d, seed, 0xf0000 + trial);
    ParamVec prev = ParamVec::Zero(d);
    for (int u = 1; u <= 3; ++u) {
      const FccConfig cfg(comp, u);
      const ParamVec out = fcc(x, cfg);
      const double bound = std::pow(1.0 - comp.delta, u) * x.squaredNorm();
      const double residual = (out - x).squaredNorm();
      detail::tally(rep, residual <= bound, bound - residual);
      const ParamVec expected_delta = comp(x - prev);
      detail::tally(rep, (out - prev - expected_delta).norm() == 0.0, 0.0);
      prev = out;
    }
  }
  rep.notes.push_back("max residual ratio=" + format_double(worst_ratio));
  return rep;
}

/// Exact-gradient descent inequality along sign and l2-normalized runs on a
/// quadratic and on the rank-one problem, with gamma within the precondition
/// gamma <= max{l a / (U^2 L2), r}.
inline VerifyReport verify_descent_suite(std::int64_t steps, std::uint64_t seed) {
  VerifyReport rep;
  rep.suite = "descent";
  const std::int64_t T = steps > 0 ? steps : 500;

  auto run_case = [&](const Objective& obj, OptimizerKind kind,
                      const DescentOperator& op, double gamma,
                      const ParamVec& x0, const std::string& label) {
    Hyper h;
    h.gamma = gamma;
    h.theta = 0.9;
    h.op = op;
    const DescentCheck chk = check_descent_inequality(obj, init_state(kind, x0, h), T);
    detail::tally(rep, chk.violations == 0, chk.worst_slack);
    rep.notes.push_back(label + ": violations=" + std::to_string(chk.violations) +
                        " worst_slack=" + format_double(chk.worst_slack));
  };

  const int d = 10;
  const Objective quad = Objective::quadratic(Matrix::Identity(d, d), ParamVec::Zero(d));
  const Objective rank = Objective::rank_one(Matrix::Identity(d, d));
  const ParamVec x0 = 1.5 * detail::random_vec(d, seed, 0xd35cULL).normalized() +
                      ParamVec::Constant(d, 0.3);
  run_case(quad, OptimizerKind::ASignSgd, DescentOperator::sign_op(d), 0.1, x0,
           "sign/quadratic");
  run_case(quad, OptimizerKind::GSignSgd, DescentOperator::l2_normalize_op(), 0.1,
           x0, "l2/quadratic");
  {
    const SmoothnessConstants& c = rank.smoothness();
    const double gamma_sign = 0.5 / (*c.L2 * d);
    run_case(rank, OptimizerKind::ASignSgd, DescentOperator::sign_op(d), gamma_sign,
             x0, "sign/rank_one");
    const double gamma_l2 = 0.5 / *c.L2;
    run_case(rank, OptimizerKind::GSignSgd, DescentOperator::l2_normalize_op(),
             gamma_l2, x0, "l2/rank_one");
  }
  return rep;
}

/// Monte-Carlo checks of the compressed-mean second-moment and cross-term
/// bounds at the reference setting n=4, d=10, sigma=sigma_bar=1, top-2, u=2.
inline VerifyReport verify_lemmas_suite(std::int64_t samples, std::uint64_t seed) {
  VerifyReport rep;
  rep.suite = "lemmas";
  const std::int64_t n_samples = samples > 0 ? samples : 10000;
  const int d = 10;
  const Objective rank = Objective::rank_one(Matrix::Identity(d, d));
  const WorkerOracle workers = split_workers(rank, 4, 1.0, 1.0, seed);
  const FccConfig cfg(Compressor::top_k(2, d), 2);
  const ParamVec x = detail::random_vec(d, seed, 0xa110cULL);
  const ParamVec y = detail::random_vec(d, seed, 0xb220dULL);

  const McBoundCheck second = mc_check_second_moment(workers, cfg, x, n_samples, seed);
  detail::tally(rep, second.within(3.0),
                second.rhs + 3.0 * second.stderr_mean - second.lhs_mean);
  rep.notes.push_back("second_moment: lhs=" + format_double(second.lhs_mean) +
                      " rhs=" + format_double(second.rhs) +
                      " stderr=" + format_double(second.stderr_mean));

  const McBoundCheck cross = mc_check_cross_term(workers, cfg, x, y, n_samples, seed);
  detail::tally(rep, cross.within(3.0),
                cross.rhs + 3.0 * cross.stderr_mean - cross.lhs_mean);
  rep.notes.push_back("cross_term: lhs=" + format_double(cross.lhs_mean) +
                      " rhs=" + format_double(cross.rhs) +
                      " stderr=" + format_double(cross.stderr_mean));
  return rep;
}

/// Collects the iterates w^1 .. w^{T+1} of a run; used by the smoothness trace.
inline std::vector<ParamVec> collect_trajectory(const Objective& obj,
                                                const StochasticOracle& oracle,
                                                OptimizerState state, std::int64_t T,
                                                std::uint64_t seed) {
  std::vector<ParamVec> traj;
  traj.reserve(T + 1);
  traj.push_back(state.w);
  for (std::int64_t k = 0; k < T; ++k) {
    step(state, oracle, seed);
    traj.push_back(state.w);
  }
  return traj;
}

/// Exact values of the second-difference estimator on quadratic/cubic probes,
/// the rank-one Hessian-vs-gradient affine bound, and the envelope coverage
/// on a real trajectory.
inline VerifyReport verify_smoothness_suite(std::int64_t trials, std::uint64_t seed) {
  VerifyReport rep;
  rep.suite = "smoothness";
  {
    const Objective cub = Objective::cubic();
    const double est = local_hessian_smoothness(cub, ParamVec::Constant(1, 1.0),
                                                ParamVec::Constant(1, 1.0), 0.1);
    detail::tally(rep, std::abs(est - 6.0) <= 1e-9, 1e-9 - std::abs(est - 6.0));
    rep.notes.push_back("cubic estimate=" + format_double(est));
  }
  {
    const int d = 4;
    const Objective quad =
        Objective::quadratic(Matrix::Identity(d, d) * 2.0, ParamVec::Zero(d));
    const ParamVec w = detail::random_vec(d, seed, 0x90adULL);
    const ParamVec dir = detail::random_vec(d, seed, 0x90aeULL);
    const double est = local_hessian_smoothness(quad, w, dir, 0.05);
    detail::tally(rep, std::abs(est) <= 1e-9, 1e-9 - std::abs(est));
  }
  {
    // Hessian norm against the gradient-affine bound for the rank-one problem,
    // outside the ball ||x|| >= 2a with 8a^2 = ||Y||_op. The constants follow
    // the paper's half-scaled gradient normalization, hence 40a^2 here.
    const int d = 6;
    const Matrix y = Matrix::Identity(d, d) * 2.0;
    const Objective rank = Objective::rank_one(y);
    const double a = 0.5 * std::sqrt(0.5 * 2.0);
    const std::int64_t n_pts = trials > 0 ? trials : 100;
    for (std::int64_t i = 0; i < n_pts; ++i) {
      ParamVec x = detail::random_vec(d, seed, 0xbb00 + i);
      const double target_norm = 2.0 * a * (1.0 + 2.0 * (i % 17) / 16.0);
      x *= target_norm / x.norm();
      const double lhs = rank.hessian_opnorm(x);
      const double rhs = (3.0 / a) * rank.gradient(x).norm() + 40.0 * a * a;
      detail::tally(rep, lhs <= rhs + 1e-9, rhs - lhs);
    }
  }
  {
    const int d = 5;
    const Objective rank = Objective::rank_one(Matrix::Identity(d, d));
    const StochasticOracle oracle(rank, 0.5);
    Hyper h;
    h.gamma = 0.01;
    h.theta = 0.9;
    const auto traj = collect_trajectory(
        rank, oracle,
        init_state(OptimizerKind::ASignSgd, ParamVec::Constant(d, 0.8), h), 200,
        seed);
    const TrajectorySmoothness ts = trajectory_smoothness(rank, traj);
    const AffineEnvelope env = fit_affine_envelope(ts.samples, 0.95);
    // coverage >= 95% in integer arithmetic
    const std::int64_t total = static_cast<std::int64_t>(ts.samples.size());
    const std::int64_t covered = total - env.violation_count;
    detail::tally(rep, std::isfinite(env.slope) && std::isfinite(env.offset) &&
                           20 * covered >= 19 * total,
                  static_cast<double>(20 * covered - 19 * total));
    rep.notes.push_back("envelope: slope=" + format_double(env.slope) +
                        " offset=" + format_double(env.offset) + " coverage=" +
                        std::to_string(covered) + "/" + std::to_string(total));
  }
  return rep;
}

inline VerifyReport run_verify_suite(const std::string& name, std::int64_t trials,
                                     std::uint64_t seed) {
  if (name == "condition1")
    return verify_condition1_suite(trials > 0 ? trials : 10000, seed);
  if (name == "contraction")
    return verify_contraction_suite(trials > 0 ? trials : 10000, seed);
  if (name == "descent") return verify_descent_suite(trials > 0 ? trials : 500, seed);
  if (name == "lemmas") return verify_lemmas_suite(trials > 0 ? trials : 10000, seed);
  if (name == "smoothness")
    return verify_smoothness_suite(trials > 0 ? trials : 100, seed);
  throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace signopt
