#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "signopt/optim.hpp"
#include "signopt/oracles.hpp"

namespace signopt {

/// Deterministic contractive compressor: ||C(x) - x||^2 <= (1-delta)||x||^2.
struct Compressor {
  enum class Kind { TopK, Identity };

  Kind kind = Kind::Identity;
  int k = 0;        // top-k only
  double delta = 1.0;

  static Compressor top_k(int k, int dim) {
    if (k < 1 || k > dim) throw std::invalid_argument("top_k: k out of range");
    Compressor c;
    c.kind = Kind::TopK;
    c.k = k;
    c.delta = static_cast<double>(k) / static_cast<double>(dim);
    return c;
  }

  static Compressor identity() {
    Compressor c;
    c.kind = Kind::Identity;
    c.delta = 1.0;
    return c;
  }

  ParamVec operator()(const ParamVec& x) const {
    switch (kind) {
      case Kind::Identity:
        return x;
      case Kind::TopK:
        return topk_compress(x, k);
    }
    throw std::logic_error("unreachable");
  }

  /// Keeps the k largest-magnitude entries, zeroing the rest; ties break
  /// toward the lowest index.
  static ParamVec topk_compress(const ParamVec& x, int k) {
    const int d = static_cast<int>(x.size());
    if (k < 1 || k > d) throw std::invalid_argument("topk_compress: k out of range");
    if (k == d) return x;
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&x](int a, int b) {
                        const double fa = std::abs(x[a]), fb = std::abs(x[b]);
                        if (fa != fb) return fa > fb;
                        return a < b;
                      });
    ParamVec out = ParamVec::Zero(d);
    for (int i = 0; i < k; ++i) out[idx[i]] = x[idx[i]];
    return out;
  }
};

inline ParamVec topk_compress(const ParamVec& x, int k) {
  return Compressor::topk_compress(x, k);
}

/// Multi-round compression. u = 0 is the pass-through mode reserved for
/// delta = 1 (send verbatim); u >= 1 runs the residual-feedback rounds.
struct FccConfig {
  Compressor compressor;
  int u = 0;

  FccConfig() = default;
  FccConfig(Compressor c, int rounds) : compressor(c), u(rounds) {
    if (u < 0) throw std::invalid_argument("fcc: u must be >= 0");
    if (u == 0 && compressor.delta < 1.0)
      throw std::invalid_argument("fcc: u = 0 requires the identity compressor");
  }

  bool passthrough() const { return u == 0; }

  // (1-delta)^u with the non-compressed cases mapping to zero residual.
  double contraction_factor() const {
    if (passthrough() || compressor.delta >= 1.0) return 0.0;
    return std::pow(1.0 - compressor.delta, u);
  }

  // scalar units for one compressor application on a d-vector: values plus
  // indices for top-k, the full vector otherwise
  std::int64_t cost_per_round(int dim) const {
    return compressor.kind == Compressor::Kind::TopK
               ? 2 * static_cast<std::int64_t>(compressor.k)
               : static_cast<std::int64_t>(dim);
  }
};

/// FCC_u(x) = sum of the per-round compressed residuals c^k with v^0 = 0,
/// c^k = C(x - v^k), v^{k+1} = v^k + c^k.
inline ParamVec fcc(const ParamVec& x, const FccConfig& cfg) {
  if (cfg.passthrough()) return x;
  ParamVec v = ParamVec::Zero(x.size());
  for (int round = 0; round < cfg.u; ++round) {
    const ParamVec residual = x - v;
    if (residual.isZero(0.0)) break;  // remaining rounds send exact zeros
    v += cfg.compressor(residual);
  }
  return v;
}

struct CommLedger {
  std::int64_t rounds = 0;
  std::int64_t scalars = 0;
  std::vector<std::int64_t> per_worker_scalars;

  void ensure_workers(int n) {
    if (per_worker_scalars.size() < static_cast<std::size_t>(n))
      per_worker_scalars.resize(n, 0);
  }
};

struct Theorem2Preset {
  Hyper hyper;
  int u = 0;
  std::vector<std::string> warnings;
};

/// Distributed presets. delta = 1 selects the pass-through mode (u = 0); the
/// round-count formula is never evaluated there.
inline Theorem2Preset theorem2_presets(std::int64_t T, int n, int dim, double delta,
                                       const SmoothnessConstants& c,
                                       bool accelerated) {
  if (T < 1) throw std::invalid_argument("theorem2_presets: T must be >= 1");
  if (n < 1) throw std::invalid_argument("theorem2_presets: n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("theorem2_presets: delta must be in (0, 1]");
  if (!c.L1) throw std::invalid_argument("theorem2_presets: missing constant L1");
  const double Td = static_cast<double>(T);
  const double nd = static_cast<double>(n);
  const double d = static_cast<double>(dim);
  if (std::sqrt(nd) > std::sqrt(Td))
    throw std::invalid_argument("theorem2_presets: sqrt(n) must be <= sqrt(T)");

  Theorem2Preset res;
  const double n14 = std::sqrt(std::sqrt(nd));
  const double L2 = c.L2.value_or(0.0);
  if (!accelerated) {
    const double sqrtT = std::sqrt(Td);
    const double t34 = sqrtT * std::sqrt(sqrtT);
    const double one_minus_theta = std::sqrt(nd) / sqrtT;
    res.hyper.theta = 1.0 - one_minus_theta;
    res.hyper.gamma = n14 / (*c.L1 * t34);
    res.hyper.zeta = 0.0;
    if (delta < 1.0) {
      const double arg = 64.0 * std::sqrt(2.0 * d) * nd * std::sqrt(std::sqrt(Td));
      const double u_real = 2.0 * std::log(arg) / std::log(1.0 / (1.0 - delta));
      res.u = std::max(1, static_cast<int>(std::ceil(u_real)));
    }
    detail::warn_if_below(res.warnings, Td,
                          std::pow(16.0 * d * L2 / *c.L1, 4.0),
                          "(16 d L2 / L1)^4");
    detail::warn_if_below(res.warnings, Td, std::pow(L2 * d / *c.L1, 4.0 / 3.0),
                          "(L2 d / L1)^{4/3}");
    if (c.r)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.L1 * *c.r, -4.0 / 3.0),
                            "(L1 r)^{-4/3}");
  } else {
    if (!c.H1 || !c.H2)
      throw std::invalid_argument("theorem2_presets: missing constant " +
                                  std::string(!c.H1 ? "H1" : "H2"));
    const double C = *c.C();
    const double t47 = detail::pow_sevenths(Td, 4.0);
    if (std::sqrt(nd) > t47)
      throw std::invalid_argument("theorem2_presets: sqrt(n) must be <= T^{4/7}");
    const double one_minus_theta = std::sqrt(nd) / t47;
    res.hyper.theta = 1.0 - one_minus_theta;
    res.hyper.gamma = n14 / (C * detail::pow_sevenths(Td, 5.0));
    res.hyper.zeta = res.hyper.theta / one_minus_theta;
    if (delta < 1.0) {
      const double arg = (64.0 * std::sqrt(2.0) + 64.0 * std::sqrt(2.0 * d)) * nd * Td;
      const double u_real = 2.0 * std::log(arg) / std::log(1.0 / (1.0 - delta));
      res.u = std::max(1, static_cast<int>(std::ceil(u_real)));
    }
    detail::warn_if_below(res.warnings, Td, std::pow(d * L2 / C, 7.0), "(d L2 / C)^7");
    if (c.r)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.r * C, -7.0 / 5.0),
                            "(r C)^{-7/5}");
    if (c.R)
      detail::warn_if_below(res.warnings, Td, std::pow(*c.R * C, -7.0 / 5.0),
                            "(R C)^{-7/5}");
    detail::warn_if_below(res.warnings, Td,
                          std::pow(8.0 * std::pow(d, 1.5) * *c.H2 / (C * C), 3.5),
                          "(8 d^{3/2} H2 / C^2)^{7/2}");
    detail::warn_if_below(res.warnings, Td, std::pow(nd, 4.0), "n^4");
  }
  return res;
}

/// One parameter-server round: every worker samples its gradient, compresses
/// it with FCC and the server averages in ascending worker order (fixed-order
/// reduction keeps runs bit-reproducible), then takes the sign step.
/// The printed listing samples at w^t; eval_at_v switches to v^t.
inline void casign_round(OptimizerState& server, const WorkerOracle& workers,
                         const FccConfig& cfg, bool eval_at_v, std::uint64_t seed,
                         CommLedger& ledger) {
  const int n = workers.workers();
  ledger.ensure_workers(n);
  const std::uint64_t t_idx = static_cast<std::uint64_t>(server.t) + 1;
  const ParamVec point = eval_at_v ? extrapolation_point(server) : server.w;
  const int d = static_cast<int>(server.w.size());
  const std::int64_t rounds_each = cfg.passthrough() ? 1 : cfg.u;
  const std::int64_t cost_each = rounds_each * cfg.cost_per_round(d);
  ParamVec sum = ParamVec::Zero(d);
  for (int i = 0; i < n; ++i) {
    const ParamVec g = workers.sample(i, point, t_idx, seed);
    if (!all_finite(g)) throw std::runtime_error("casign_round: non-finite worker sample");
    sum += fcc(g, cfg);
    ledger.rounds += rounds_each;
    ledger.scalars += cost_each;
    ledger.per_worker_scalars[i] += cost_each;
  }
  const ParamVec mean = sum / static_cast<double>(n);
  detail::sign_family_update(server, mean);
}

/// Distributed run with per-step communication accounting in the rows.
inline RunRecord run_distributed(const WorkerOracle& workers, OptimizerState state,
                                 const FccConfig& cfg, bool eval_at_v,
                                 std::int64_t T, std::uint64_t seed,
                                 bool log_eps = false) {
  if (T < 1) throw std::invalid_argument("run_distributed: T must be >= 1");
  const Objective& obj = workers.objective();
  RunRecord rec;
  rec.kind = state.kind;
  rec.hyper = state.hyper;
  rec.seed = seed;
  rec.T = T;
  rec.problem = obj.descriptor();
  rec.log_eps = log_eps;
  rec.has_comm = true;
  rec.rows.reserve(T);
  CommLedger ledger;
  double sum_l1 = 0.0;
  for (std::int64_t k = 1; k <= T; ++k) {
    RunRow row;
    row.t = k;
    const ParamVec w_t = state.w;
    row.f = obj.value(w_t);
    const ParamVec g_true = obj.gradient(w_t);
    row.grad_l1 = g_true.lpNorm<1>();
    row.grad_l2 = g_true.norm();
    const std::int64_t rounds_before = ledger.rounds;
    const std::int64_t scalars_before = ledger.scalars;
    try {
      casign_round(state, workers, cfg, eval_at_v, seed, ledger);
    } catch (const std::exception& e) {
      rec.aborted = true;
      rec.abort_reason = e.what();
      break;
    }
    if (log_eps) row.eps_l2 = (state.m - g_true).norm();
    row.step_len = (state.w - state.w_prev).norm();
    row.comm_rounds = ledger.rounds - rounds_before;
    row.comm_scalars = ledger.scalars - scalars_before;
    sum_l1 += row.grad_l1;
    rec.rows.push_back(row);
  }
  rec.mean_grad_l1 =
      rec.rows.empty() ? 0.0 : sum_l1 / static_cast<double>(rec.rows.size());
  rec.comm_rounds_total = ledger.rounds;
  rec.comm_scalars_total = ledger.scalars;
  return rec;
}

struct McBoundCheck {
  double lhs_mean = 0.0;
  double rhs = 0.0;
  double stderr_mean = 0.0;
  std::int64_t samples = 0;
  bool within(double num_stderr) const {
    return lhs_mean <= rhs + num_stderr * stderr_mean;
  }
};

namespace detail {

inline ParamVec compressed_mean(const WorkerOracle& workers, const FccConfig& cfg,
                                const ParamVec& x, std::uint64_t t,
                                std::uint64_t seed) {
  ParamVec sum = ParamVec::Zero(x.size());
  for (int i = 0; i < workers.workers(); ++i)
    sum += fcc(workers.sample(i, x, t, seed), cfg);
  return sum / static_cast<double>(workers.workers());
}

}  // namespace detail

/// Monte-Carlo estimate of E||mean_i FCC(g_i) - grad f(x)||^2 against
/// (2s^2 + 4sb^2)(1-delta)^u + 2s^2/n + 4(1-delta)^u ||grad f(x)||^2.
inline McBoundCheck mc_check_second_moment(const WorkerOracle& workers,
                                           const FccConfig& cfg, const ParamVec& x,
                                           std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("mc check: samples must be >= 1");
  const ParamVec g_exact = workers.objective().gradient(x);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const ParamVec bar = detail::compressed_mean(workers, cfg, x, s, seed);
    const double val = (bar - g_exact).squaredNorm();
    const double delta1 = val - mean;
    mean += delta1 / static_cast<double>(s + 1);
    m2 += delta1 * (val - mean);
  }
  const double s2 = workers.sigma() * workers.sigma();
  const double sb2 = workers.sigma_bar() * workers.sigma_bar();
  const double factor = cfg.contraction_factor();
  McBoundCheck res;
  res.lhs_mean = mean;
  res.rhs = (2.0 * s2 + 4.0 * sb2) * factor +
            2.0 * s2 / static_cast<double>(workers.workers()) +
            4.0 * factor * g_exact.squaredNorm();
  res.samples = samples;
  if (samples > 1)
    res.stderr_mean = std::sqrt(m2 / static_cast<double>(samples - 1) /
                                static_cast<double>(samples));
  return res;
}

/// Monte-Carlo estimate of the cross-term inner product at two points against
/// (2s^2 + 4sb^2)(1-delta)^u + 2(1-delta)^u (||grad f(x)||^2 + ||grad f(y)||^2).
inline McBoundCheck mc_check_cross_term(const WorkerOracle& workers,
                                        const FccConfig& cfg, const ParamVec& x,
                                        const ParamVec& y, std::int64_t samples,
                                        std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("mc check: samples must be >= 1");
  const ParamVec gx = workers.objective().gradient(x);
  const ParamVec gy = workers.objective().gradient(y);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const ParamVec bar_x = detail::compressed_mean(workers, cfg, x, 2 * s, seed);
    const ParamVec bar_y = detail::compressed_mean(workers, cfg, y, 2 * s + 1, seed);
    const double val = (bar_x - gx).dot(bar_y - gy);
    const double delta1 = val - mean;
    mean += delta1 / static_cast<double>(s + 1);
    m2 += delta1 * (val - mean);
  }
  const double s2 = workers.sigma() * workers.sigma();
  const double sb2 = workers.sigma_bar() * workers.sigma_bar();
  const double factor = cfg.contraction_factor();
  McBoundCheck res;
  res.lhs_mean = mean;
  res.rhs = (2.0 * s2 + 4.0 * sb2) * factor +
            2.0 * factor * (gx.squaredNorm() + gy.squaredNorm());
  res.samples = samples;
  if (samples > 1)
    res.stderr_mean = std::sqrt(m2 / static_cast<double>(samples - 1) /
                                static_cast<double>(samples));
  return res;
}

}  // namespace signopt
