#pragma once

#include <json.hpp>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "signopt/comms.hpp"
#include "signopt/objectives.hpp"
#include "signopt/optim.hpp"

namespace signopt {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InitConfig {
  std::string kind = "gaussian";  // "constant" | "gaussian"
  double value = 1.0;             // constant fill
  double scale = 1.0;             // gaussian scale
  std::uint64_t seed = 1234;      // start point is shared across run seeds
};

struct NoiseConfig {
  double sigma = 0.0;
  double sigma_bar = 0.0;
  int n = 1;
};

struct CompressionConfig {
  std::string kind = "identity";  // "top_k" | "identity"
  int k = 1;
  std::optional<int> u;  // absent = "auto" (theorem formula / pass-through)
  bool eval_at_v = false;
};

struct OptimizerConfig {
  std::string kind;
  std::optional<double> gamma, theta, zeta, lambda;
  std::string op = "sign";  // "sign" | "l2_normalize"
  std::optional<std::string> preset;
};

struct ProblemConfig {
  std::string kind;
  int d = 1;
  Matrix A;      // quadratic
  ParamVec b;    // quadratic
  Matrix Y;      // rank_one
  int power = 4;
  ParamVec a0, target;  // penalty_net
  int hidden = 2;
  double rho = 1.0;
  std::vector<std::pair<std::string, double>> constant_overrides;
};

struct ExperimentConfig {
  ProblemConfig problem;
  OptimizerConfig optimizer;
  std::vector<std::int64_t> t_grid;
  std::vector<std::uint64_t> seeds;
  NoiseConfig noise;
  std::optional<CompressionConfig> compression;
  bool exact_grad_logging = false;
  bool smoothness_trace = false;
  InitConfig init;
  std::string out = "runs";

  bool distributed() const { return noise.n > 1 || compression.has_value(); }

  Objective build_objective() const;
  OptimizerKind optimizer_kind() const;
  Hyper resolve_hyper(const Objective& obj, std::int64_t T) const;
  FccConfig resolve_fcc(const Objective& obj, std::int64_t T) const;
  ParamVec start_point(int dim) const;
};

namespace cfgdetail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(path + ": unknown key '" + it.key() + "'");
}

inline const json& require(const json& obj, const std::string& path,
                           const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key + ": missing");
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return v.get<int>();
}

inline ParamVec as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array");
  ParamVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Matrix as_matrix(const json& v, int d, const std::string& path) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "identity") return Matrix::Identity(d, d);
    if (s == "zero") return Matrix::Zero(d, d);
    throw ConfigError(path + ": expected 'identity', 'zero', or a matrix");
  }
  if (v.is_object()) {
    require_keys(v, path, {"scaled_identity"});
    return as_number(require(v, path, "scaled_identity"), path + ".scaled_identity") *
           Matrix::Identity(d, d);
  }
  if (!v.is_array() || v.empty())
    throw ConfigError(path + ": expected a matrix");
  if (v[0].is_array()) {
    const int rows = static_cast<int>(v.size());
    Matrix m(rows, rows);
    for (int i = 0; i < rows; ++i) {
      if (!v[i].is_array() || static_cast<int>(v[i].size()) != rows)
        throw ConfigError(path + ": matrix must be square");
      for (int j = 0; j < rows; ++j)
        m(i, j) = as_number(v[i][j], path + "[" + std::to_string(i) + "]");
    }
    return m;
  }
  // flat array = diagonal
  const ParamVec diag = as_vector(v, path);
  return diag.asDiagonal();
}

inline ProblemConfig parse_problem(const json& j) {
  const std::string path = "problem";
  require_keys(j, path,
               {"kind", "d", "A", "b", "Y", "n", "a0", "y", "hidden", "rho",
                "constants"});
  ProblemConfig p;
  p.kind = require(j, path, "kind").get<std::string>();
  const std::set<std::string> kinds = {"quadratic", "rank_one", "penalty_net",
                                       "scalar_power", "scalar_exp"};
  if (!kinds.count(p.kind)) throw ConfigError(path + ".kind: unknown kind '" + p.kind + "'");
  if (p.kind == "quadratic" || p.kind == "rank_one") {
    p.d = as_int(require(j, path, "d"), path + ".d");
    if (p.d < 1) throw ConfigError(path + ".d: must be >= 1");
  }
  if (p.kind == "quadratic") {
    p.A = j.contains("A") ? as_matrix(j["A"], p.d, path + ".A")
                          : Matrix::Identity(p.d, p.d);
    p.b = j.contains("b") ? as_vector(j["b"], path + ".b") : ParamVec::Zero(p.d);
    if (p.b.size() != p.d) throw ConfigError(path + ".b: dimension mismatch");
  } else if (p.kind == "rank_one") {
    p.Y = j.contains("Y") ? as_matrix(j["Y"], p.d, path + ".Y")
                          : Matrix::Identity(p.d, p.d);
  } else if (p.kind == "scalar_power") {
    p.power = as_int(require(j, path, "n"), path + ".n");
    p.d = 1;
  } else if (p.kind == "scalar_exp") {
    p.d = 1;
  } else if (p.kind == "penalty_net") {
    p.a0 = as_vector(require(j, path, "a0"), path + ".a0");
    p.target = as_vector(require(j, path, "y"), path + ".y");
    p.hidden = j.contains("hidden") ? as_int(j["hidden"], path + ".hidden") : 2;
    p.rho = j.contains("rho") ? as_number(j["rho"], path + ".rho") : 1.0;
    p.d = p.hidden * static_cast<int>(p.a0.size()) +
          static_cast<int>(p.target.size()) * p.hidden + p.hidden;
  }
  if (j.contains("constants")) {
    const json& c = j["constants"];
    require_keys(c, path + ".constants", {"L1", "L2", "r", "H1", "H2", "R"});
    for (auto it = c.begin(); it != c.end(); ++it)
      p.constant_overrides.emplace_back(
          it.key(), as_number(*it, path + ".constants." + it.key()));
  }
  return p;
}

inline OptimizerConfig parse_optimizer(const json& j) {
  const std::string path = "optimizer";
  require_keys(j, path,
               {"kind", "gamma", "theta", "zeta", "lambda", "operator", "preset"});
  OptimizerConfig o;
  o.kind = require(j, path, "kind").get<std::string>();
  const std::set<std::string> kinds = {"sign_sgd", "a_sign_sgd", "lion",
                                       "g_sign_sgd", "sgd", "sgdm"};
  if (!kinds.count(o.kind)) throw ConfigError(path + ".kind: unknown kind '" + o.kind + "'");
  if (j.contains("gamma")) o.gamma = as_number(j["gamma"], path + ".gamma");
  if (j.contains("theta")) o.theta = as_number(j["theta"], path + ".theta");
  if (j.contains("zeta")) o.zeta = as_number(j["zeta"], path + ".zeta");
  if (j.contains("lambda")) o.lambda = as_number(j["lambda"], path + ".lambda");
  if (j.contains("operator")) {
    o.op = j["operator"].get<std::string>();
    if (o.op != "sign" && o.op != "l2_normalize")
      throw ConfigError(path + ".operator: unknown operator '" + o.op + "'");
  }
  if (j.contains("preset")) {
    o.preset = j["preset"].get<std::string>();
    const std::set<std::string> presets = {"theorem1", "theorem1_accel", "theorem2",
                                           "theorem2_accel"};
    if (!presets.count(*o.preset))
      throw ConfigError(path + ".preset: unknown preset '" + *o.preset + "'");
    if (o.gamma || o.theta)
      throw ConfigError(path + ": gamma/theta conflict with a preset");
  } else if (!o.gamma) {
    throw ConfigError(path + ".gamma: missing (no preset given)");
  }
  return o;
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using cfgdetail::as_int;
  using cfgdetail::as_number;
  using cfgdetail::require;
  using cfgdetail::require_keys;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  require_keys(j, "config",
               {"problem", "optimizer", "T", "seeds", "noise", "compression",
                "logging", "init", "out"});
  ExperimentConfig cfg;
  cfg.problem = cfgdetail::parse_problem(require(j, "config", "problem"));
  cfg.optimizer = cfgdetail::parse_optimizer(require(j, "config", "optimizer"));

  const nlohmann::json& t = require(j, "config", "T");
  if (t.is_array()) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::int64_t v = as_int(t[i], "T[" + std::to_string(i) + "]");
      if (v < 1) throw ConfigError("T: entries must be >= 1");
      cfg.t_grid.push_back(v);
    }
    if (cfg.t_grid.empty()) throw ConfigError("T: empty grid");
  } else {
    const std::int64_t v = as_int(t, "T");
    if (v < 1) throw ConfigError("T: must be >= 1");
    cfg.t_grid.push_back(v);
  }

  const nlohmann::json& seeds = require(j, "config", "seeds");
  if (!seeds.is_array() || seeds.empty())
    throw ConfigError("seeds: expected a non-empty array");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::int64_t s = as_int(seeds[i], "seeds[" + std::to_string(i) + "]");
    if (s < 0) throw ConfigError("seeds: must be non-negative");
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }

  if (j.contains("noise")) {
    const auto& n = j["noise"];
    require_keys(n, "noise", {"sigma", "sigma_bar", "n"});
    if (n.contains("sigma")) cfg.noise.sigma = as_number(n["sigma"], "noise.sigma");
    if (n.contains("sigma_bar"))
      cfg.noise.sigma_bar = as_number(n["sigma_bar"], "noise.sigma_bar");
    if (n.contains("n")) cfg.noise.n = as_int(n["n"], "noise.n");
    if (cfg.noise.sigma < 0.0) throw ConfigError("noise.sigma: must be >= 0");
    if (cfg.noise.sigma_bar < 0.0) throw ConfigError("noise.sigma_bar: must be >= 0");
    if (cfg.noise.n < 1) throw ConfigError("noise.n: must be >= 1");
    if (cfg.noise.n == 1 && cfg.noise.sigma_bar > 0.0)
      throw ConfigError("noise.sigma_bar: a single worker cannot carry dispersion");
  }

  if (j.contains("compression")) {
    const auto& c = j["compression"];
    require_keys(c, "compression", {"kind", "k", "u", "eval_at_v"});
    CompressionConfig cc;
    cc.kind = require(c, "compression", "kind").get<std::string>();
    if (cc.kind != "top_k" && cc.kind != "identity")
      throw ConfigError("compression.kind: unknown kind '" + cc.kind + "'");
    if (cc.kind == "top_k") cc.k = as_int(require(c, "compression", "k"), "compression.k");
    if (c.contains("u")) {
      if (c["u"].is_string()) {
        if (c["u"].get<std::string>() != "auto")
          throw ConfigError("compression.u: expected an integer or 'auto'");
      } else {
        cc.u = as_int(c["u"], "compression.u");
        if (*cc.u < 0) throw ConfigError("compression.u: must be >= 0");
      }
    }
    if (c.contains("eval_at_v")) {
      if (!c["eval_at_v"].is_boolean())
        throw ConfigError("compression.eval_at_v: expected a boolean");
      cc.eval_at_v = c["eval_at_v"].get<bool>();
    }
    cfg.compression = cc;
  }

  if (j.contains("logging")) {
    const auto& l = j["logging"];
    require_keys(l, "logging", {"exact_grad_logging", "smoothness_trace"});
    if (l.contains("exact_grad_logging"))
      cfg.exact_grad_logging = l["exact_grad_logging"].get<bool>();
    if (l.contains("smoothness_trace"))
      cfg.smoothness_trace = l["smoothness_trace"].get<bool>();
  }

  if (j.contains("init")) {
    const auto& in = j["init"];
    require_keys(in, "init", {"kind", "value", "scale", "seed"});
    if (in.contains("kind")) {
      cfg.init.kind = in["kind"].get<std::string>();
      if (cfg.init.kind != "constant" && cfg.init.kind != "gaussian")
        throw ConfigError("init.kind: unknown kind '" + cfg.init.kind + "'");
    }
    if (in.contains("value")) cfg.init.value = as_number(in["value"], "init.value");
    if (in.contains("scale")) cfg.init.scale = as_number(in["scale"], "init.scale");
    if (in.contains("seed")) cfg.init.seed = as_int(in["seed"], "init.seed");
  }

  if (j.contains("out")) cfg.out = j["out"].get<std::string>();

  if (cfg.distributed() && cfg.optimizer.kind != "a_sign_sgd" &&
      cfg.optimizer.kind != "sign_sgd")
    throw ConfigError(
        "optimizer.kind: distributed runs support sign_sgd/a_sign_sgd only");

  // Fail fast on preset requirements for the first grid point.
  const Objective probe = cfg.build_objective();
  (void)cfg.resolve_hyper(probe, cfg.t_grid.front());
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline Objective ExperimentConfig::build_objective() const {
  Objective obj = [&]() {
    if (problem.kind == "quadratic") return Objective::quadratic(problem.A, problem.b);
    if (problem.kind == "rank_one") return Objective::rank_one(problem.Y);
    if (problem.kind == "scalar_power") return Objective::scalar_power(problem.power);
    if (problem.kind == "scalar_exp") return Objective::scalar_exp();
    if (problem.kind == "penalty_net")
      return Objective::penalty_net(problem.a0, problem.target, problem.hidden,
                                    problem.rho);
    throw ConfigError("problem.kind: unknown kind '" + problem.kind + "'");
  }();
  for (const auto& [key, val] : problem.constant_overrides) {
    SmoothnessConstants& c = obj.smoothness();
    if (key == "L1") c.L1 = val;
    else if (key == "L2") c.L2 = val;
    else if (key == "r") c.r = val;
    else if (key == "H1") c.H1 = val;
    else if (key == "H2") c.H2 = val;
    else if (key == "R") c.R = val;
  }
  return obj;
}

inline OptimizerKind ExperimentConfig::optimizer_kind() const {
  if (optimizer.kind == "sign_sgd") return OptimizerKind::SignSgd;
  if (optimizer.kind == "a_sign_sgd") return OptimizerKind::ASignSgd;
  if (optimizer.kind == "lion") return OptimizerKind::Lion;
  if (optimizer.kind == "g_sign_sgd") return OptimizerKind::GSignSgd;
  if (optimizer.kind == "sgd") return OptimizerKind::Sgd;
  if (optimizer.kind == "sgdm") return OptimizerKind::Sgdm;
  throw ConfigError("optimizer.kind: unknown kind '" + optimizer.kind + "'");
}

inline Hyper ExperimentConfig::resolve_hyper(const Objective& obj,
                                             std::int64_t T) const {
  Hyper h;
  h.op = optimizer.op == "l2_normalize" ? DescentOperator::l2_normalize_op()
                                        : DescentOperator::sign_op(obj.dim());
  if (optimizer.preset) {
    const std::string& p = *optimizer.preset;
    try {
      if (p == "theorem1" || p == "theorem1_accel") {
        const PresetResult res = theorem1_presets(T, obj.smoothness(),
                                                  p == "theorem1_accel", obj.dim());
        h.gamma = res.hyper.gamma;
        h.theta = res.hyper.theta;
        h.zeta = res.hyper.zeta;
      } else {
        const double delta =
            compression && compression->kind == "top_k"
                ? static_cast<double>(compression->k) / obj.dim()
                : 1.0;
        const Theorem2Preset res =
            theorem2_presets(T, noise.n, obj.dim(), delta, obj.smoothness(),
                             p == "theorem2_accel");
        h.gamma = res.hyper.gamma;
        h.theta = res.hyper.theta;
        h.zeta = res.hyper.zeta;
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("optimizer.preset: ") + e.what());
    }
    if (optimizer.zeta) {
      const double expected_accel = h.theta / (1.0 - h.theta);
      const bool ok = *optimizer.zeta == 0.0 ||
                      std::abs(*optimizer.zeta - expected_accel) <=
                          1e-12 * (1.0 + expected_accel);
      if (!ok)
        throw ConfigError(
            "optimizer.zeta: with a preset, zeta must be 0 or theta/(1-theta)");
      h.zeta = *optimizer.zeta;
    }
  } else {
    h.gamma = *optimizer.gamma;
    h.theta = optimizer.theta.value_or(0.0);
    h.zeta = optimizer.zeta.value_or(0.0);
  }
  h.lambda = optimizer.lambda.value_or(0.0);
  try {
    validate_hyper(h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  return h;
}

inline FccConfig ExperimentConfig::resolve_fcc(const Objective& obj,
                                               std::int64_t T) const {
  if (!compression) return FccConfig(Compressor::identity(), 0);
  const CompressionConfig& cc = *compression;
  Compressor comp = cc.kind == "top_k" ? Compressor::top_k(cc.k, obj.dim())
                                       : Compressor::identity();
  int u;
  if (cc.u) {
    u = *cc.u;
  } else if (comp.delta >= 1.0) {
    u = 0;  // pass-through
  } else {
    const bool accel = optimizer.preset && *optimizer.preset == "theorem2_accel";
    const Theorem2Preset res =
        theorem2_presets(T, noise.n, obj.dim(), comp.delta, obj.smoothness(), accel);
    u = res.u;
  }
  try {
    return FccConfig(comp, u);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("compression: ") + e.what());
  }
}

inline ParamVec ExperimentConfig::start_point(int dim) const {
  if (init.kind == "constant") return ParamVec::Constant(dim, init.value);
  CounterRng rng(init.seed, 0x1417ULL, 0);
  ParamVec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = init.scale * rng.next_gaussian();
  return x;
}

}  // namespace signopt
