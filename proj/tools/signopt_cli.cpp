// Command-line harness: run/sweep experiments from a JSON config, execute the
// verification suites, or trace smoothness along a trajectory.
//
// Exit codes: 0 success, 2 config error, 3 verification failure, 4 runtime
// failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "signopt/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitRuntime = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw signopt::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

signopt::ExperimentConfig load_config(const std::string& path) {
  return signopt::parse_config(read_file(path));
}

void print_record(const signopt::RunRecord& rec, bool quiet) {
  if (quiet) return;
  std::cout << rec.run_id << ": mean_grad_l1=" << rec.mean_grad_l1;
  if (rec.aborted) std::cout << " [aborted: " << rec.abort_reason << "]";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sign-based optimizer harness"};
  app.require_subcommand(1);
  app.fallthrough();  // --out/--quiet may follow the subcommand

  std::string config_path;
  std::string out_override;
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.add_option("--out", out_override, "output directory (overrides config)");

  auto* cmd_run = app.add_subcommand("run", "execute a single-run config");
  cmd_run->add_option("config", config_path, "JSON config file")->required();

  auto* cmd_sweep = app.add_subcommand("sweep", "execute every (seed, T) cell");
  cmd_sweep->add_option("config", config_path, "JSON config file")->required();

  std::string suite;
  std::int64_t trials = 0;
  std::int64_t verify_seed = 0;
  auto* cmd_verify = app.add_subcommand("verify", "run a verification suite");
  cmd_verify
      ->add_option("suite", suite,
                   "one of: condition1, contraction, descent, lemmas, smoothness")
      ->required();
  cmd_verify->add_option("--trials", trials, "trial count (0 = suite default)");
  cmd_verify->add_option("--seed", verify_seed, "random seed (default 0)");

  auto* cmd_estimate = app.add_subcommand("estimate", "smoothness trace of a run");
  cmd_estimate->add_option("config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_verify->parsed()) {
      signopt::VerifyReport rep;
      try {
        rep = signopt::run_verify_suite(suite, trials,
                                        static_cast<std::uint64_t>(verify_seed));
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
      }
      const std::filesystem::path out_dir =
          out_override.empty() ? "runs" : out_override;
      std::filesystem::create_directories(out_dir);
      std::ofstream out(out_dir / ("verify_" + suite + ".json"), std::ios::binary);
      out << signopt::verify_report_json(rep).dump(2) << '\n';
      if (!quiet) {
        std::cout << rep.suite << ": " << rep.passes << "/" << rep.trials
                  << " checks passed, worst margin " << rep.worst_margin << '\n';
        for (const auto& note : rep.notes) std::cout << "  " << note << '\n';
      }
      return rep.passed() ? kExitOk : kExitVerify;
    }

    signopt::ExperimentConfig cfg;
    try {
      cfg = load_config(config_path);
    } catch (const signopt::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    const std::filesystem::path out_dir =
        out_override.empty() ? cfg.out : out_override;

    if (cmd_run->parsed()) {
      if (cfg.t_grid.size() != 1 || cfg.seeds.size() != 1) {
        std::cerr << "config error: 'run' expects a scalar T and exactly one "
                     "seed; use 'sweep' for grids\n";
        return kExitConfig;
      }
      const signopt::RunRecord rec =
          signopt::run_experiment(cfg, cfg.t_grid[0], cfg.seeds[0]);
      signopt::write_record_files(rec, out_dir);
      if (cfg.smoothness_trace) {
        const auto trace =
            signopt::run_smoothness_trace(cfg, cfg.t_grid[0], cfg.seeds[0]);
        signopt::write_smoothness_files(trace, out_dir);
      }
      print_record(rec, quiet);
      return rec.aborted ? kExitRuntime : kExitOk;
    }

    if (cmd_sweep->parsed()) {
      const auto records = signopt::run_sweep(cfg);
      bool any_aborted = false;
      for (const auto& rec : records) {
        signopt::write_record_files(rec, out_dir);
        print_record(rec, quiet);
        any_aborted = any_aborted || rec.aborted;
      }
      std::map<std::int64_t, int> seeds_per_t;
      for (const auto& rec : records)
        if (!rec.aborted) seeds_per_t[rec.T] += 1;
      const bool fittable =
          seeds_per_t.size() >= 3 &&
          std::all_of(seeds_per_t.begin(), seeds_per_t.end(),
                      [](const auto& kv) { return kv.second >= 3; });
      if (fittable) {
        const signopt::RateFit fit = signopt::fit_rate(records);
        std::ofstream out(out_dir / "rate_fit.json", std::ios::binary);
        out << signopt::rate_fit_json(fit).dump(2) << '\n';
        if (!quiet)
          std::cout << "rate fit: slope=" << fit.slope << " r2=" << fit.r_squared
                    << '\n';
      }
      return any_aborted ? kExitRuntime : kExitOk;
    }

    if (cmd_estimate->parsed()) {
      for (std::int64_t T : cfg.t_grid) {
        for (std::uint64_t seed : cfg.seeds) {
          const auto trace = signopt::run_smoothness_trace(cfg, T, seed);
          signopt::write_smoothness_files(trace, out_dir);
          if (!quiet)
            std::cout << trace.run_id << ": " << trace.trace.samples.size()
                      << " samples, " << trace.trace.skipped
                      << " skipped, envelope offset=" << trace.envelope.offset
                      << " slope=" << trace.envelope.slope << '\n';
        }
      }
      return kExitOk;
    }
  } catch (const signopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
