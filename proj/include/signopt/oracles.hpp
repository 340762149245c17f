#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "signopt/objectives.hpp"
#include "signopt/rng.hpp"

namespace signopt {

/// Seeded noisy-gradient sampler. Noise is additive Gaussian with covariance
/// (sigma^2/d) I, so E||g - grad f||^2 = sigma^2 holds with equality. Draws
/// are keyed by (seed, t, worker): identical keys give identical samples.
class StochasticOracle {
 public:
  StochasticOracle(const Objective& obj, double sigma, double output_scale = 1.0)
      : obj_(&obj), sigma_(sigma), scale_(output_scale) {
    if (sigma < 0.0) throw std::invalid_argument("oracle: sigma must be >= 0");
  }

  const Objective& objective() const { return *obj_; }
  double sigma() const { return sigma_; }
  double output_scale() const { return scale_; }

  ParamVec sample(const ParamVec& x, std::uint64_t t, std::uint64_t worker,
                  std::uint64_t seed) const {
    ParamVec g = obj_->gradient(x);
    if (sigma_ > 0.0) {
      CounterRng rng(seed, t, worker);
      const double coord_sd = sigma_ / std::sqrt(static_cast<double>(g.size()));
      for (Eigen::Index i = 0; i < g.size(); ++i)
        g[i] += coord_sd * rng.next_gaussian();
    }
    if (scale_ != 1.0) g *= scale_;
    return g;
  }

 private:
  const Objective* obj_;
  double sigma_;
  double scale_;
};

inline ParamVec sample_grad(const StochasticOracle& oracle, const ParamVec& x,
                            std::uint64_t t, std::uint64_t worker,
                            std::uint64_t seed) {
  return oracle.sample(x, t, worker, seed);
}

/// Heterogeneous n-node oracle: f_i(x) = f(x) + <b_i, x> with sum_i b_i = 0
/// and (1/n) sum_i ||b_i||^2 = sigma_bar^2, so Assumption-4-style worker
/// dispersion holds with equality uniformly in x.
class WorkerOracle {
 public:
  WorkerOracle(const Objective& obj, std::vector<ParamVec> biases, double sigma,
               double sigma_bar, double output_scale = 1.0)
      : obj_(&obj),
        biases_(std::move(biases)),
        sigma_(sigma),
        sigma_bar_(sigma_bar),
        scale_(output_scale) {}

  const Objective& objective() const { return *obj_; }
  int workers() const { return static_cast<int>(biases_.size()); }
  double sigma() const { return sigma_; }
  double sigma_bar() const { return sigma_bar_; }
  const ParamVec& bias(int i) const { return biases_.at(i); }

  ParamVec worker_gradient(int i, const ParamVec& x) const {
    return obj_->gradient(x) + biases_.at(i);
  }

  ParamVec sample(int i, const ParamVec& x, std::uint64_t t,
                  std::uint64_t seed) const {
    ParamVec g = worker_gradient(i, x);
    if (sigma_ > 0.0) {
      CounterRng rng(seed, t, static_cast<std::uint64_t>(i));
      const double coord_sd = sigma_ / std::sqrt(static_cast<double>(g.size()));
      for (Eigen::Index j = 0; j < g.size(); ++j)
        g[j] += coord_sd * rng.next_gaussian();
    }
    if (scale_ != 1.0) g *= scale_;
    return g;
  }

 private:
  const Objective* obj_;
  std::vector<ParamVec> biases_;
  double sigma_;
  double sigma_bar_;
  double scale_;
};

/// Builds the worker biases: seeded Gaussian directions, centered so they sum
/// to zero, then rescaled so the mean squared norm equals sigma_bar^2 exactly.
inline WorkerOracle split_workers(const Objective& obj, int n, double sigma,
                                  double sigma_bar, std::uint64_t seed,
                                  double output_scale = 1.0) {
  if (n < 1) throw std::invalid_argument("split_workers: n must be >= 1");
  if (sigma_bar < 0.0) throw std::invalid_argument("split_workers: sigma_bar must be >= 0");
  if (n == 1 && sigma_bar > 0.0)
    throw std::invalid_argument(
        "split_workers: a single worker cannot carry nonzero dispersion");
  const int d = obj.dim();
  std::vector<ParamVec> biases(n, ParamVec::Zero(d));
  if (sigma_bar > 0.0) {
    ParamVec mean = ParamVec::Zero(d);
    for (int i = 0; i < n; ++i) {
      CounterRng rng(seed, 0x5eedb1a5ULL, static_cast<std::uint64_t>(i));
      for (int j = 0; j < d; ++j) biases[i][j] = rng.next_gaussian();
      mean += biases[i];
    }
    mean /= static_cast<double>(n);
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      biases[i] -= mean;
      sq += biases[i].squaredNorm();
    }
    if (sq <= 0.0)
      throw std::runtime_error("split_workers: degenerate bias draw");
    const double scale = sigma_bar * std::sqrt(static_cast<double>(n) / sq);
    for (auto& b : biases) b *= scale;
  }
  return WorkerOracle(obj, std::move(biases), sigma, sigma_bar, output_scale);
}

}  // namespace signopt
