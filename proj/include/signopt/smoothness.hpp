#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "signopt/objectives.hpp"

namespace signopt {

constexpr double kDefaultHessianGridDelta = 0.05;

/// Grid {delta, 2*delta, ..., 1}; includes 1 when 1/delta is an integer,
/// otherwise ends at floor(1/delta)*delta.
inline std::vector<double> hessian_probe_grid(double delta) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("probe grid: delta must be in (0, 1]");
  const int n = static_cast<int>(std::floor(1.0 / delta + 1e-9));
  std::vector<double> grid;
  grid.reserve(n);
  for (int i = 1; i <= n; ++i) grid.push_back(i * delta);
  return grid;
}

/// Difference-quotient estimate of the first-order constant between two points.
inline double local_grad_lipschitz(const Objective& obj, const ParamVec& x,
                                   const ParamVec& y) {
  const double dist = (y - x).norm();
  if (dist == 0.0) throw std::invalid_argument("local_grad_lipschitz: x == y");
  return (obj.gradient(y) - obj.gradient(x)).norm() / dist;
}

/// Second-difference Hessian smoothness estimate along `dir`:
/// max over the h-grid of ||g(w+h d) + g(w-h d) - 2 g(w)|| / (h^2 ||d||^2).
inline double local_hessian_smoothness(const Objective& obj, const ParamVec& w,
                                       const ParamVec& dir, double delta) {
  if (dir.norm() == 0.0)
    throw std::invalid_argument("local_hessian_smoothness: zero direction");
  const ParamVec g0 = obj.gradient(w);
  const double dir_sq = dir.squaredNorm();
  double best = 0.0;
  for (double h : hessian_probe_grid(delta)) {
    const ParamVec diff =
        obj.gradient(w + h * dir) + obj.gradient(w - h * dir) - 2.0 * g0;
    best = std::max(best, diff.norm() / (h * h * dir_sq));
  }
  return best;
}

// First-order analogue on the same grid; diagnostic counterpart for the
// gradient condition.
inline double local_grad_smoothness(const Objective& obj, const ParamVec& w,
                                    const ParamVec& dir, double delta) {
  if (dir.norm() == 0.0)
    throw std::invalid_argument("local_grad_smoothness: zero direction");
  const ParamVec g0 = obj.gradient(w);
  const double dir_norm = dir.norm();
  double best = 0.0;
  for (double h : hessian_probe_grid(delta)) {
    const ParamVec diff = obj.gradient(w + h * dir) - g0;
    best = std::max(best, diff.norm() / (h * dir_norm));
  }
  return best;
}

struct SmoothnessSample {
  int step_index = 0;
  double grad_norm = 0.0;
  double local_H = 0.0;
  double local_L = 0.0;
};

struct TrajectorySmoothness {
  std::vector<SmoothnessSample> samples;
  int skipped = 0;  // consecutive duplicate points
};

/// One sample per consecutive trajectory pair with direction w^{t+1} - w^t.
/// Duplicate consecutive points are skipped and counted, not errored.
inline TrajectorySmoothness trajectory_smoothness(
    const Objective& obj, const std::vector<ParamVec>& trajectory,
    double delta = kDefaultHessianGridDelta) {
  if (trajectory.size() < 2)
    throw std::invalid_argument("trajectory_smoothness: need at least 2 points");
  TrajectorySmoothness out;
  for (std::size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const ParamVec dir = trajectory[t + 1] - trajectory[t];
    if (dir.norm() == 0.0) {
      ++out.skipped;
      continue;
    }
    SmoothnessSample s;
    s.step_index = static_cast<int>(t);
    s.grad_norm = obj.gradient(trajectory[t]).norm();
    s.local_H = local_hessian_smoothness(obj, trajectory[t], dir, delta);
    s.local_L = local_grad_smoothness(obj, trajectory[t], dir, delta);
    out.samples.push_back(s);
  }
  return out;
}

struct AffineEnvelope {
  double offset = 0.0;
  double slope = 0.0;
  int violation_count = 0;
  double max_violation = 0.0;
};

/// Least-squares slope of local_H on grad_norm, then the offset inflated to
/// the requested coverage quantile. Violations are judged on the stored
/// residuals so that quantile = 1 yields zero violations by construction.
inline AffineEnvelope fit_affine_envelope(const std::vector<SmoothnessSample>& samples,
                                          double quantile = 0.95) {
  if (samples.size() < 2)
    throw std::invalid_argument("fit_affine_envelope: need at least 2 samples");
  if (!(quantile > 0.0 && quantile <= 1.0))
    throw std::invalid_argument("fit_affine_envelope: quantile must be in (0, 1]");
  const std::size_t n = samples.size();
  double mean_g = 0.0, mean_h = 0.0;
  for (const auto& s : samples) {
    mean_g += s.grad_norm;
    mean_h += s.local_H;
  }
  mean_g /= n;
  mean_h /= n;
  double cov = 0.0, var = 0.0;
  for (const auto& s : samples) {
    cov += (s.grad_norm - mean_g) * (s.local_H - mean_h);
    var += (s.grad_norm - mean_g) * (s.grad_norm - mean_g);
  }
  AffineEnvelope env;
  env.slope = var > 0.0 ? cov / var : 0.0;

  std::vector<double> residuals(n);
  for (std::size_t i = 0; i < n; ++i)
    residuals[i] = samples[i].local_H - env.slope * samples[i].grad_norm;
  std::vector<double> sorted = residuals;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k =
      std::min<std::size_t>(n, static_cast<std::size_t>(
                                   std::ceil(quantile * static_cast<double>(n))));
  env.offset = sorted[k == 0 ? 0 : k - 1];

  for (double r : residuals) {
    if (r > env.offset) {
      ++env.violation_count;
      env.max_violation = std::max(env.max_violation, r - env.offset);
    }
  }
  return env;
}

struct ThirdOrderCheck {
  double lhs = 0.0;        // ||D3 f(x)||_F
  double grad_norm = 0.0;  // ||grad f(x)||
  double h1 = 0.0;         // affine coefficients the bound is tested against
  double h2 = 0.0;
  bool satisfied = false;
};

/// Third-order Frobenius norm against the affine budget h1*||grad f|| + h2.
inline ThirdOrderCheck check_third_order_bound(const Objective& obj,
                                               const ParamVec& x) {
  if (!obj.has_third_order())
    throw std::invalid_argument("check_third_order_bound: unsupported kind");
  const SmoothnessConstants& c = obj.smoothness();
  if (!c.Hhat1 || !c.Hhat2)
    throw std::invalid_argument("check_third_order_bound: missing budget constants");
  ThirdOrderCheck res;
  res.lhs = obj.third_order_frobenius(x);
  res.grad_norm = obj.gradient(x).norm();
  res.h1 = *c.Hhat1;
  res.h2 = *c.Hhat2;
  res.satisfied = res.lhs <= res.h1 * res.grad_norm + res.h2 + 1e-12;
  return res;
}

}  // namespace signopt
