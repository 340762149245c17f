#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "signopt/objectives.hpp"
#include "signopt/oracles.hpp"
#include "signopt/records.hpp"
#include "signopt/signcore.hpp"

namespace signopt {

/// Full optimizer state. At t=0 the iterates satisfy w = w_prev and m = 0;
/// after t steps, w holds w^{t+1}, w_prev holds w^t and m holds m^t.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::SignSgd;
  ParamVec w, w_prev, m;
  std::int64_t t = 0;
  Hyper hyper;
};

inline void validate_hyper(const Hyper& h) {
  if (!(h.gamma > 0.0)) throw std::invalid_argument("hyper: gamma must be > 0");
  if (!(h.theta >= 0.0 && h.theta < 1.0))
    throw std::invalid_argument("hyper: theta must be in [0,1)");
  if (!(h.zeta >= 0.0)) throw std::invalid_argument("hyper: zeta must be >= 0");
  if (!(h.lambda >= 0.0)) throw std::invalid_argument("hyper: lambda must be >= 0");
}

inline OptimizerState init_state(OptimizerKind kind, const ParamVec& w0, Hyper hyper) {
  validate_hyper(hyper);
  if (!all_finite(w0)) throw std::invalid_argument("init_state: non-finite start");
  if (kind == OptimizerKind::Lion && hyper.zeta != 0.0)
    throw std::invalid_argument("init_state: lion has no extrapolation step");
  // operator constants depend on the dimension
  if (hyper.op.kind == DescentOperator::Kind::Sign)
    hyper.op = DescentOperator::sign_op(static_cast<int>(w0.size()));
  OptimizerState st;
  st.kind = kind;
  st.w = w0;
  st.w_prev = w0;
  st.m = ParamVec::Zero(w0.size());
  st.t = 0;
  st.hyper = hyper;
  return st;
}

/// Extrapolation point v^t = w^t + zeta (w^t - w^{t-1}), computed on the fly.
inline ParamVec extrapolation_point(const OptimizerState& st) {
  if (st.hyper.zeta == 0.0) return st.w;
  return st.w + st.hyper.zeta * (st.w - st.w_prev);
}

namespace detail {

// Shared momentum + update tail of every sign-family variant. Using one code
// path is what makes the lion/a_sign/g_sign/ca_sign equivalences bit-exact.
inline void sign_family_update(OptimizerState& st, const ParamVec& g) {
  if (!all_finite(g)) throw std::runtime_error("step: non-finite gradient sample");
  const Hyper& h = st.hyper;
  st.m = h.theta * st.m + (1.0 - h.theta) * g;
  const ParamVec dir = apply(h.op, st.m);
  const ParamVec w_next = st.w - (h.gamma * h.lambda) * st.w - h.gamma * dir;
  st.w_prev = st.w;
  st.w = w_next;
  st.t += 1;
}

}  // namespace detail

/// One A-SignSGD step: gradient sampled at the extrapolation point, momentum
/// averaged, then a sign update. Also serves plain SignSGD (theta = zeta = 0).
inline void asign_step(OptimizerState& st, const StochasticOracle& oracle,
                       std::uint64_t seed) {
  if (st.kind != OptimizerKind::SignSgd && st.kind != OptimizerKind::ASignSgd)
    throw std::invalid_argument("asign_step: wrong optimizer kind");
  const ParamVec v = extrapolation_point(st);
  detail::sign_family_update(st, oracle.sample(v, st.t + 1, 0, seed));
}

/// Simplified LION step (single momentum): gradient at w^t, sign update plus
/// the multiplicative decay term -gamma*lambda*w^t.
inline void lion_step(OptimizerState& st, const StochasticOracle& oracle,
                      std::uint64_t seed) {
  if (st.kind != OptimizerKind::Lion)
    throw std::invalid_argument("lion_step: wrong optimizer kind");
  detail::sign_family_update(st, oracle.sample(st.w, st.t + 1, 0, seed));
}

/// G-SignSGD step: same as A-SignSGD with sign replaced by the configured
/// descent operator.
inline void gsign_step(OptimizerState& st, const StochasticOracle& oracle,
                       std::uint64_t seed) {
  if (st.kind != OptimizerKind::GSignSgd)
    throw std::invalid_argument("gsign_step: wrong optimizer kind");
  const ParamVec v = extrapolation_point(st);
  detail::sign_family_update(st, oracle.sample(v, st.t + 1, 0, seed));
}

/// SGD / heavy-ball SGDM comparison arms. SGDM uses m' = theta*m + g.
inline void baseline_step(OptimizerState& st, const StochasticOracle& oracle,
                          std::uint64_t seed) {
  if (st.kind != OptimizerKind::Sgd && st.kind != OptimizerKind::Sgdm)
    throw std::invalid_argument("baseline_step: wrong optimizer kind");
  const Hyper& h = st.hyper;
  ParamVec g = oracle.sample(st.w, st.t + 1, 0, seed);
  if (!all_finite(g)) throw std::runtime_error("step: non-finite gradient sample");
  ParamVec dir;
  if (st.kind == OptimizerKind::Sgd) {
    dir = g;
  } else {
    st.m = h.theta * st.m + g;
    dir = st.m;
  }
  const ParamVec w_next = st.w - (h.gamma * h.lambda) * st.w - h.gamma * dir;
  st.w_prev = st.w;
  st.w = w_next;
  st.t += 1;
}

inline void step(OptimizerState& st, const StochasticOracle& oracle,
                 std::uint64_t seed) {
  switch (st.kind) {
    case OptimizerKind::SignSgd:
    case OptimizerKind::ASignSgd:
      asign_step(st, oracle, seed);
      return;
    case OptimizerKind::Lion:
      lion_step(st, oracle, seed);
      return;
    case OptimizerKind::GSignSgd:
      gsign_step(st, oracle, seed);
      return;
    case OptimizerKind::Sgd:
    case OptimizerKind::Sgdm:
      baseline_step(st, oracle, seed);
      return;
  }
  throw std::logic_error("unreachable");
}

struct PresetResult {
  Hyper hyper;
  std::vector<std::string> warnings;
};

namespace detail {

// T^(k/7) evaluated as exp2(k*log2(T)/7); exact when T is a power of two and
// k*log2(T) is divisible by 7.
inline double pow_sevenths(double t, double k) {
  return std::exp2(k * std::log2(t) / 7.0);
}

inline void warn_if_below(std::vector<std::string>& warnings, double T,
                          double bound, const std::string& label) {
  if (std::isfinite(bound) && T < bound)
    warnings.push_back("T=" + format_double(T) + " is below the theorem floor " +
                       format_double(bound) + " (" + label + ")");
}

}  // namespace detail

/// Hyperparameters dictated by the single-node convergence/acceleration
/// statements. `dim` feeds the dimension-dependent floors of the warnings.
inline PresetResult theorem1_presets(std::int64_t T, const SmoothnessConstants& c,
                                     bool accelerated, int dim = 1) {
  if (T < 1) throw std::invalid_argument("theorem1_presets: T must be >= 1");
  if (!c.L1) throw std::invalid_argument("theorem1_presets: missing constant L1");
  PresetResult res;
  const double Td = static_cast<double>(T);
  const double d = static_cast<double>(dim);
  if (!accelerated) {
    const double sqrtT = std::sqrt(Td);
    const double t34 = sqrtT * std::sqrt(sqrtT);
    res.hyper.theta = 1.0 - 1.0 / sqrtT;
    res.hyper.gamma = 1.0 / (*c.L1 * t34);
    res.hyper.zeta = 0.0;
    const double L2 = c.L2.value_or(0.0);
    detail::warn_if_below(res.warnings, Td,
                          std::pow(16.0 * L2, 4.0) * d * d / std::pow(*c.L1, 4.0),
                          "(16 L2)^4 d^2 / L1^4");
    detail::warn_if_below(res.warnings, Td, std::pow(L2 * d / *c.L1, 4.0 / 3.0),
                          "(L2 d / L1)^{4/3}");
    if (c.r)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.L1 * *c.r, -4.0 / 3.0),
                            "(L1 r)^{-4/3}");
  } else {
    if (!c.H1 || !c.H2)
      throw std::invalid_argument("theorem1_presets: missing constant " +
                                  std::string(!c.H1 ? "H1" : "H2"));
    const double C = *c.C();
    const double one_minus_theta = 1.0 / detail::pow_sevenths(Td, 4.0);
    res.hyper.theta = 1.0 - one_minus_theta;
    res.hyper.gamma = 1.0 / (C * detail::pow_sevenths(Td, 5.0));
    res.hyper.zeta = res.hyper.theta / one_minus_theta;
    const double L2 = c.L2.value_or(0.0);
    detail::warn_if_below(res.warnings, Td, std::pow(d * L2 / C, 7.0 / 5.0),
                          "(d L2 / C)^{7/5}");
    if (c.r)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.r * C, -7.0 / 5.0),
                            "(r C)^{-7/5}");
    if (c.R)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.R * C, -7.0 / 5.0),
                            "(R C)^{-7/5}");
    detail::warn_if_below(res.warnings, Td, std::pow(8.0 * *c.H2 / (C * C), 3.5),
                          "(8 H2 / C^2)^{7/2}");
    detail::warn_if_below(res.warnings, Td, 128.0 * std::pow(d, 21.0 / 4.0),
                          "128 d^{21/4}");
  }
  return res;
}

/// Runs T steps on a single node and records the per-step metrics. Exact
/// gradient norms at w^t are always logged (they are the reported quantity);
/// `log_eps` additionally records the momentum bias ||m^t - grad f(w^t)||.
inline RunRecord run_single(const Objective& obj, const StochasticOracle& oracle,
                            OptimizerState state, std::int64_t T,
                            std::uint64_t seed, bool log_eps = false) {
  if (T < 1) throw std::invalid_argument("run_single: T must be >= 1");
  RunRecord rec;
  rec.kind = state.kind;
  rec.hyper = state.hyper;
  rec.seed = seed;
  rec.T = T;
  rec.problem = obj.descriptor();
  rec.log_eps = log_eps;
  rec.rows.reserve(T);
  double sum_l1 = 0.0;
  for (std::int64_t k = 1; k <= T; ++k) {
    RunRow row;
    row.t = k;
    const ParamVec w_t = state.w;
    row.f = obj.value(w_t);
    const ParamVec g_true = obj.gradient(w_t);
    row.grad_l1 = g_true.lpNorm<1>();
    row.grad_l2 = g_true.norm();
    try {
      step(state, oracle, seed);
    } catch (const std::exception& e) {
      rec.aborted = true;
      rec.abort_reason = e.what();
      break;
    }
    if (log_eps) row.eps_l2 = (state.m - g_true).norm();
    row.step_len = (state.w - state.w_prev).norm();
    sum_l1 += row.grad_l1;
    rec.rows.push_back(row);
  }
  rec.mean_grad_l1 =
      rec.rows.empty() ? 0.0 : sum_l1 / static_cast<double>(rec.rows.size());
  return rec;
}

}  // namespace signopt
