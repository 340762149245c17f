#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "signopt/objectives.hpp"
#include "signopt/rng.hpp"

namespace signopt {

/// Coordinate-wise sign with sign(0) = 0. Zero coordinates are measure-zero
/// under Gaussian noise; the 0 convention avoids an arbitrary direction and
/// caps the step length at gamma*sqrt(d) instead of forcing equality.
inline ParamVec sign_of(const ParamVec& v) {
  ParamVec s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    s[i] = v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0);
  return s;
}

enum class DiamondNorm { L1, L2 };

/// Descent operator T with its contract constants: <x, T(x)> >= l * ||x||_d
/// and ||T(x)||_2 <= U, plus the equivalence constants a*||.||_2 <= ||.||_d
/// <= b*||.||_2 of the diamond norm.
struct DescentOperator {
  enum class Kind { Sign, L2Normalize };

  Kind kind = Kind::Sign;
  double l = 1.0;
  double U = 1.0;
  DiamondNorm diamond = DiamondNorm::L1;
  double norm_equiv_a = 1.0;
  double norm_equiv_b = 1.0;

  static DescentOperator sign_op(int dim) {
    DescentOperator op;
    op.kind = Kind::Sign;
    op.l = 1.0;
    op.U = std::sqrt(static_cast<double>(dim));
    op.diamond = DiamondNorm::L1;
    op.norm_equiv_a = 1.0;
    op.norm_equiv_b = std::sqrt(static_cast<double>(dim));
    return op;
  }

  static DescentOperator l2_normalize_op() {
    DescentOperator op;
    op.kind = Kind::L2Normalize;
    op.l = 1.0;
    op.U = 1.0;
    op.diamond = DiamondNorm::L2;
    op.norm_equiv_a = 1.0;
    op.norm_equiv_b = 1.0;
    return op;
  }

  std::string name() const {
    return kind == Kind::Sign ? "sign" : "l2_normalize";
  }

  double diamond_norm(const ParamVec& v) const {
    return diamond == DiamondNorm::L1 ? v.lpNorm<1>() : v.norm();
  }
};

inline ParamVec apply(const DescentOperator& op, const ParamVec& v) {
  switch (op.kind) {
    case DescentOperator::Kind::Sign:
      return sign_of(v);
    case DescentOperator::Kind::L2Normalize: {
      const double n = v.norm();
      if (n == 0.0) return ParamVec::Zero(v.size());
      return v / n;
    }
  }
  throw std::logic_error("unreachable");
}

struct Condition1Report {
  double min_ratio = 0.0;  // min over trials of <x, T(x)> / ||x||_diamond
  double max_norm = 0.0;   // max over trials of ||T(x)||_2
  bool l_ok = false;
  bool u_ok = false;
  bool passed() const { return l_ok && u_ok; }
};

/// Empirical check of the operator contract over random nonzero Gaussian
/// vectors. Declared constants violated beyond 1e-10 relative fail the report.
inline Condition1Report verify_condition1(const DescentOperator& op, int dim,
                                          int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_condition1: trials must be >= 1");
  if (dim < 1) throw std::invalid_argument("verify_condition1: dim must be >= 1");
  Condition1Report rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_norm = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    CounterRng rng(seed, 0xc0d1710aULL, static_cast<std::uint64_t>(trial));
    ParamVec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.next_gaussian();
    if (x.norm() == 0.0) continue;
    const ParamVec tx = apply(op, x);
    const double ratio = x.dot(tx) / op.diamond_norm(x);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_norm = std::max(rep.max_norm, tx.norm());
  }
  const double tol = 1e-10;
  rep.l_ok = rep.min_ratio >= op.l * (1.0 - tol);
  rep.u_ok = rep.max_norm <= op.U * (1.0 + tol);
  return rep;
}

}  // namespace signopt
