#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace signopt {

using ParamVec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline bool all_finite(const ParamVec& v) { return v.allFinite(); }

/// Constants of the weak first- and second-order smoothness conditions,
/// plus the third-order affine budget. Fields are optional: a kind only
/// carries the constants that can be derived for it.
struct SmoothnessConstants {
  std::optional<double> L1, L2, r;        // ||g(y)-g(x)|| <= (L1+L2||g(x)||)||y-x||
  std::optional<double> H1, H2, R;        // same shape for the Hessian difference
  std::optional<double> Hhat1, Hhat2;     // ||D3 f||_F <= Hhat1*||g|| + Hhat2

  std::optional<double> C() const {
    if (!L1) return std::nullopt;
    double c = *L1;
    if (H1) c = std::max(c, std::sqrt(*H1));
    if (H2) c = std::max(c, std::sqrt(*H2));
    return c;
  }
};

/// Deterministic synthetic objective with closed-form value/gradient and,
/// where available, Hessian spectral norm and third-order Frobenius norm.
/// All evaluators are pure; instances are safe to share across threads.
class Objective {
 public:
  enum class Kind { RankOne, PenaltyNet, ScalarPower, ScalarExp, Quadratic, Cubic };

  static Objective rank_one(Matrix y) {
    if (y.rows() != y.cols()) throw std::invalid_argument("rank_one: Y must be square");
    if (!y.isApprox(y.transpose(), 1e-12))
      throw std::invalid_argument("rank_one: Y must be symmetric");
    Objective o(Kind::RankOne, static_cast<int>(y.rows()));
    o.y_ = std::move(y);
    o.derive_rank_one_constants();
    return o;
  }

  // Minimal two-layer penalized network: parameters are [vec(W1), vec(W2), z]
  // with W1 in R^{q x p}, W2 in R^{m x q}, z in R^q and tanh activation.
  static Objective penalty_net(ParamVec a0, ParamVec target, int hidden, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("penalty_net: rho must be > 0");
    if (hidden < 1) throw std::invalid_argument("penalty_net: hidden must be >= 1");
    if (a0.size() < 1 || target.size() < 1)
      throw std::invalid_argument("penalty_net: empty data");
    const int p = static_cast<int>(a0.size());
    const int m = static_cast<int>(target.size());
    Objective o(Kind::PenaltyNet, hidden * p + m * hidden + hidden);
    o.a0_ = std::move(a0);
    o.target_ = std::move(target);
    o.hidden_ = hidden;
    o.rho_ = rho;
    return o;
  }

  static Objective scalar_power(int n) {
    if (n < 4) throw std::invalid_argument("scalar_power: requires n >= 4");
    Objective o(Kind::ScalarPower, 1);
    o.power_ = n;
    const double nn = static_cast<double>(n);
    o.smooth_.L1 = nn * (nn - 1.0);
    o.smooth_.L2 = nn - 1.0;
    o.smooth_.r = 1.0;
    // |f'''| on a unit-radius segment costs a 2^{n-3} inflation factor
    o.smooth_.H1 = nn * (nn - 1.0) * (nn - 2.0) * std::pow(2.0, nn - 3.0);
    o.smooth_.H2 = (nn - 1.0) * (nn - 2.0) * std::pow(2.0, nn - 3.0);
    o.smooth_.R = 1.0;
    o.smooth_.Hhat1 = (nn - 1.0) * (nn - 2.0);
    o.smooth_.Hhat2 = nn * (nn - 1.0) * (nn - 2.0);
    return o;
  }

  static Objective scalar_exp() {
    Objective o(Kind::ScalarExp, 1);
    o.smooth_.L1 = 1.0;
    o.smooth_.L2 = 1.0;
    o.smooth_.r = 1.0;
    o.smooth_.H1 = 1.0;
    o.smooth_.H2 = std::exp(1.0);
    o.smooth_.R = 1.0;
    o.smooth_.Hhat1 = 1.0;
    o.smooth_.Hhat2 = 0.0;
    return o;
  }

  static Objective quadratic(Matrix a, ParamVec b) {
    if (a.rows() != a.cols()) throw std::invalid_argument("quadratic: A must be square");
    if (b.size() != a.rows()) throw std::invalid_argument("quadratic: b dimension mismatch");
    if (!a.isApprox(a.transpose(), 1e-12))
      throw std::invalid_argument("quadratic: A must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("quadratic: A must be positive definite");
    Objective o(Kind::Quadratic, static_cast<int>(a.rows()));
    o.a_ = std::move(a);
    o.b_ = std::move(b);
    o.smooth_.L1 = es.eigenvalues().cwiseAbs().maxCoeff();
    o.smooth_.L2 = 0.0;
    o.smooth_.r = std::numeric_limits<double>::infinity();
    o.smooth_.H1 = 1.0;  // Hessian is constant; any positive H1 is valid
    o.smooth_.H2 = 0.0;
    o.smooth_.R = std::numeric_limits<double>::infinity();
    o.smooth_.Hhat1 = 0.0;
    o.smooth_.Hhat2 = 0.0;
    return o;
  }

  // f(s) = s^3, 1-D. Diagnostic function: its gradient is an exact quadratic,
  // so the symmetric-difference Hessian estimator is exact on it.
  static Objective cubic() {
    Objective o(Kind::Cubic, 1);
    o.smooth_.L1 = 6.0;
    o.smooth_.L2 = 2.0;
    o.smooth_.r = 1.0;
    o.smooth_.H1 = 6.0;
    o.smooth_.H2 = 0.0;
    o.smooth_.R = std::numeric_limits<double>::infinity();
    o.smooth_.Hhat1 = 0.0;
    o.smooth_.Hhat2 = 6.0;
    return o;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const SmoothnessConstants& smoothness() const { return smooth_; }
  SmoothnessConstants& smoothness() { return smooth_; }

  double value(const ParamVec& x) const {
    check_dim(x);
    switch (kind_) {
      case Kind::RankOne: {
        Matrix r = x * x.transpose() - y_;
        return 0.5 * r.squaredNorm();
      }
      case Kind::PenaltyNet: {
        PenaltyParts parts = split_penalty(x);
        const ParamVec h = (parts.w1 * a0_).array().tanh();
        const ParamVec e1 = parts.w2 * parts.z - target_;
        const ParamVec e2 = parts.z - h;
        return 0.5 * e1.squaredNorm() + 0.5 * rho_ * e2.squaredNorm();
      }
      case Kind::ScalarPower:
        return std::pow(x[0], power_);
      case Kind::ScalarExp:
        return std::exp(x[0]);
      case Kind::Quadratic:
        return 0.5 * x.dot(a_ * x) - b_.dot(x);
      case Kind::Cubic:
        return x[0] * x[0] * x[0];
    }
    throw std::logic_error("unreachable");
  }

  ParamVec gradient(const ParamVec& x) const {
    check_dim(x);
    switch (kind_) {
      case Kind::RankOne:
        return 2.0 * ((x * x.transpose() - y_) * x);
      case Kind::PenaltyNet: {
        PenaltyParts parts = split_penalty(x);
        const ParamVec s = parts.w1 * a0_;
        const ParamVec h = s.array().tanh();
        const ParamVec dh = 1.0 - h.array().square();  // tanh'
        const ParamVec e1 = parts.w2 * parts.z - target_;
        const ParamVec e2 = parts.z - h;
        Matrix gw1 = -rho_ * (dh.cwiseProduct(e2)) * a0_.transpose();
        Matrix gw2 = e1 * parts.z.transpose();
        ParamVec gz = parts.w2.transpose() * e1 + rho_ * e2;
        return join_penalty(gw1, gw2, gz);
      }
      case Kind::ScalarPower: {
        ParamVec g(1);
        g[0] = power_ * std::pow(x[0], power_ - 1);
        return g;
      }
      case Kind::ScalarExp: {
        ParamVec g(1);
        g[0] = std::exp(x[0]);
        return g;
      }
      case Kind::Quadratic:
        return a_ * x - b_;
      case Kind::Cubic: {
        ParamVec g(1);
        g[0] = 3.0 * x[0] * x[0];
        return g;
      }
    }
    throw std::logic_error("unreachable");
  }

  bool has_hessian() const { return kind_ != Kind::PenaltyNet; }

  /// Spectral norm of the Hessian via dense symmetric eigen-decomposition.
  /// Rejects d > 256 instead of silently approximating.
  double hessian_opnorm(const ParamVec& x) const {
    check_dim(x);
    if (dim_ > 256)
      throw std::invalid_argument("hessian_opnorm: dense eigensolve limited to d <= 256");
    switch (kind_) {
      case Kind::RankOne: {
        Matrix h = 2.0 * x.squaredNorm() * Matrix::Identity(dim_, dim_) +
                   4.0 * (x * x.transpose()) - 2.0 * y_;
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
      }
      case Kind::PenaltyNet:
        throw std::invalid_argument("hessian_opnorm: unsupported for penalty_net");
      case Kind::ScalarPower:
        return std::abs(power_ * (power_ - 1) * std::pow(x[0], power_ - 2));
      case Kind::ScalarExp:
        return std::exp(x[0]);
      case Kind::Quadratic: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
      }
      case Kind::Cubic:
        return std::abs(6.0 * x[0]);
    }
    throw std::logic_error("unreachable");
  }

  bool has_third_order() const {
    return kind_ != Kind::PenaltyNet;
  }

  /// Frobenius norm of the third-derivative tensor, in closed form.
  double third_order_frobenius(const ParamVec& x) const {
    check_dim(x);
    switch (kind_) {
      case Kind::RankOne:
        // slices d H/d x_k = 4(x_k I + e_k x^T + x e_k^T)
        return 4.0 * std::sqrt(3.0 * dim_ + 6.0) * x.norm();
      case Kind::PenaltyNet:
        throw std::invalid_argument("third_order_frobenius: unsupported for penalty_net");
      case Kind::ScalarPower:
        return std::abs(power_ * (power_ - 1) * (power_ - 2) *
                        std::pow(x[0], power_ - 3));
      case Kind::ScalarExp:
        return std::exp(x[0]);
      case Kind::Quadratic:
        return 0.0;
      case Kind::Cubic:
        return 6.0;
    }
    throw std::logic_error("unreachable");
  }

  const Matrix& rank_one_y() const {
    if (kind_ != Kind::RankOne) throw std::logic_error("not a rank_one objective");
    return y_;
  }

  std::string descriptor() const {
    switch (kind_) {
      case Kind::RankOne: return "rank_one(d=" + std::to_string(dim_) + ")";
      case Kind::PenaltyNet: return "penalty_net(d=" + std::to_string(dim_) + ")";
      case Kind::ScalarPower: return "scalar_power(n=" + std::to_string(power_) + ")";
      case Kind::ScalarExp: return "scalar_exp";
      case Kind::Quadratic: return "quadratic(d=" + std::to_string(dim_) + ")";
      case Kind::Cubic: return "cubic";
    }
    return "?";
  }

 private:
  Objective(Kind kind, int dim) : kind_(kind), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("objective: dim must be >= 1");
  }

  void check_dim(const ParamVec& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("objective: dimension mismatch, expected " +
                                  std::to_string(dim_) + " got " +
                                  std::to_string(x.size()));
  }

  struct PenaltyParts {
    Matrix w1, w2;
    ParamVec z;
  };

  PenaltyParts split_penalty(const ParamVec& x) const {
    const int p = static_cast<int>(a0_.size());
    const int m = static_cast<int>(target_.size());
    const int q = hidden_;
    PenaltyParts parts;
    parts.w1 = Eigen::Map<const Matrix>(x.data(), q, p);
    parts.w2 = Eigen::Map<const Matrix>(x.data() + q * p, m, q);
    parts.z = x.segment(q * p + m * q, q);
    return parts;
  }

  ParamVec join_penalty(const Matrix& gw1, const Matrix& gw2, const ParamVec& gz) const {
    ParamVec g(dim_);
    Eigen::Map<Matrix>(g.data(), gw1.rows(), gw1.cols()) = gw1;
    Eigen::Map<Matrix>(g.data() + gw1.size(), gw2.rows(), gw2.cols()) = gw2;
    g.tail(gz.size()) = gz;
    return g;
  }

  // Weak-smoothness constants for the rank-one problem, valid at every x:
  //   ||H(x)||_op <= 6||x||^2 + 2||Y||_op
  //   ||g(x)||    >= 2(||x||^3 - ||Y||_op ||x||) >= ||x||^3  when ||x|| >= 4a,
  // with 8a^2 = ||Y||_op. A floor on a keeps the constants finite for Y ~ 0.
  void derive_rank_one_constants() {
    Eigen::SelfAdjointEigenSolver<Matrix> es(y_, Eigen::EigenvaluesOnly);
    const double y_op = es.eigenvalues().cwiseAbs().maxCoeff();
    const double a = std::max(0.5 * std::sqrt(0.5 * y_op), 0.25);
    const double d = static_cast<double>(dim_);
    const double root = std::sqrt(3.0 * d + 6.0);
    smooth_.L1 = 120.0 * a * a;
    smooth_.L2 = 1.5 / a;
    smooth_.r = 1.0;
    smooth_.H1 = 48.0 * a + 6.0;
    smooth_.H2 = 0.75 / (a * a);
    smooth_.R = 1.0;
    smooth_.Hhat1 = 0.25 * root / (a * a);
    smooth_.Hhat2 = 16.0 * root * a;
  }

  Kind kind_;
  int dim_;
  SmoothnessConstants smooth_;
  // rank_one
  Matrix y_;
  // penalty_net
  ParamVec a0_, target_;
  int hidden_ = 0;
  double rho_ = 0.0;
  // scalar_power
  int power_ = 0;
  // quadratic
  Matrix a_;
  ParamVec b_;
};

/// Independent central-difference gradient oracle.
inline ParamVec fd_gradient(const Objective& obj, const ParamVec& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("fd_gradient: h must be > 0");
  ParamVec g(x.size());
  ParamVec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = obj.value(probe);
    probe[i] = xi - h;
    const double fm = obj.value(probe);
    probe[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace signopt
