#include "stencilnet/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stencilnet/experiments.hpp"
#include "stencilnet/network.hpp"
#include "stencilnet/serialize.hpp"

namespace stencilnet {

namespace {

// Options that mirror ExperimentConfig; CLI11 needs persistent storage for
// optional flags, hence the separate holder.
struct ConfigFlags {
  ExperimentConfig base;
  std::optional<double> h_t;
  std::string config_file;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags, bool with_file) {
  cmd->add_option("--c", flags.base.c, "advection speed (standard sweep value: 1)")
      ->capture_default_str();
  cmd->add_option("--nu", flags.base.nu, "diffusion coefficient (standard sweep set: 0, 1e-4, 1e-2)")
      ->capture_default_str();
  cmd->add_option("--period", flags.base.period, "spatial period (standard sweep value: 1)")
      ->capture_default_str();
  cmd->add_option("--p", flags.base.p,
                  "decay rate of the random coefficient amplitudes (standard sweep set: 2, 4, 8)")
      ->capture_default_str();
  cmd->add_option("--N", flags.base.N, "node count parameter, N+1 grid nodes (standard sweep set: 51, 101, 201)")
      ->capture_default_str();
  cmd->add_option("--n", flags.base.n, "stencil width, odd (standard sweep set: 3, 5, 7, 9, 11)")
      ->capture_default_str();
  cmd->add_option("--s", flags.base.s, "multistep depth (standard sweep set: 2, 3)")
      ->capture_default_str();
  cmd->add_option("--h-t-multiplier", flags.base.h_t_multiplier,
                  "factor on the critical step (standard sweep set: 1.0, 1.01, 1.1)")
      ->capture_default_str();
  cmd->add_option("--Q", flags.base.Q,
                  "recurrent prediction steps in the loss (standard sweep set: 1, 3, 4, 5, 9)")
      ->capture_default_str();
  cmd->add_option("--T", flags.base.T, "training cases (standard sweep set: 1, 10, 100)")
      ->capture_default_str();
  cmd->add_option("--kappa-max", flags.base.kappa_max,
                  "optimizer iteration cap (standard sweep set: 10, 100, 1000; 0 = baseline)")
      ->capture_default_str();
  cmd->add_option("--seed", flags.base.seed, "training-data stream seed")->capture_default_str();
  cmd->add_option("--h-t", flags.h_t, "explicit time step, bypassing the critical-step resolution");
  if (with_file)
    cmd->add_option("--config", flags.config_file,
                    "JSON config file; flags given on the command line override its fields");
}

ExperimentConfig resolve_flags(const CLI::App* cmd, const ConfigFlags& flags) {
  ExperimentConfig config = flags.base;
  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) throw std::invalid_argument("cannot open config file: " + flags.config_file);
    config = config_from_json(nlohmann::json::parse(in));
    // Command-line flags take precedence over file fields.
    if (cmd->count("--c")) config.c = flags.base.c;
    if (cmd->count("--nu")) config.nu = flags.base.nu;
    if (cmd->count("--period")) config.period = flags.base.period;
    if (cmd->count("--p")) config.p = flags.base.p;
    if (cmd->count("--N")) config.N = flags.base.N;
    if (cmd->count("--n")) config.n = flags.base.n;
    if (cmd->count("--s")) config.s = flags.base.s;
    if (cmd->count("--h-t-multiplier")) config.h_t_multiplier = flags.base.h_t_multiplier;
    if (cmd->count("--Q")) config.Q = flags.base.Q;
    if (cmd->count("--T")) config.T = flags.base.T;
    if (cmd->count("--kappa-max")) config.kappa_max = flags.base.kappa_max;
    if (cmd->count("--seed")) config.seed = flags.base.seed;
  }
  if (flags.h_t) config.h_t_explicit = flags.h_t;
  validate_config(config);
  for (const std::string& note : out_of_grid_notes(config)) std::cerr << "note: " << note << "\n";
  return config;
}

void write_text(const std::string& path, const std::string& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << payload;
  if (!out) throw std::runtime_error("short write to output file: " + path);
}

std::string store_root(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("STENCILNET_STORE"); env && *env) return env;
  return "results";
}

nlohmann::json result_summary(const ExperimentResult& result) {
  nlohmann::json j{{"hash", config_hash(result.config)},
                   {"h_t", result.h_t},
                   {"status", to_string(result.status)},
                   {"iterations", result.iterations},
                   {"stable", result.stable},
                   {"max_error_0_1", fmt17(result.max_error_0_1)},
                   {"max_error_0_20", fmt17(result.max_error_0_20)}};
  j["J_final"] = result.J_final ? nlohmann::json(*result.J_final) : nlohmann::json();
  return j;
}

std::string error_curve_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "level,t,error\n";
  for (std::size_t i = 0; i < result.forward_error.size(); ++i) {
    const int level = result.config.s + static_cast<int>(i);
    os << level << "," << fmt17(level * result.h_t) << "," << fmt17(result.forward_error[i])
       << "\n";
  }
  return os.str();
}

ExperimentResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open result file: " + path);
  return result_from_json(nlohmann::json::parse(in));
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Learned finite-difference stencils for the periodic advection-diffusion equation"};
  app.require_subcommand(1);

  // weights
  auto* weights_cmd = app.add_subcommand(
      "weights", "Emit the centered-difference stencil weight pair as JSON");
  int weights_n = 3;
  std::string weights_out;
  weights_cmd->add_option("--n", weights_n, "stencil width, odd (standard sweep set: 3, 5, 7, 9, 11)")
      ->capture_default_str();
  weights_cmd->add_option("--out", weights_out, "output file (default: stdout)");
  weights_cmd->callback([&]() {
    write_text(weights_out, weights_to_json(StencilWeights::centered(weights_n)).dump(2) + "\n");
  });

  // stability
  auto* stab_cmd = app.add_subcommand(
      "stability",
      "Emit the multistep stability boundary (and, with --N, the scaled spectrum of the "
      "centered operator) as CSV");
  ConfigFlags stab_flags;
  stab_flags.base.n = 3;
  int stab_samples = 512;
  std::string stab_out;
  add_config_flags(stab_cmd, stab_flags, false);
  stab_cmd->add_option("--samples", stab_samples, "boundary sample count")->capture_default_str();
  stab_cmd->add_option("--out", stab_out, "output file (default: stdout)");
  stab_cmd->callback([&]() {
    if (stab_samples < 1) throw std::invalid_argument("samples must be positive");
    const AbScheme scheme(stab_flags.base.s);
    const StabilityProbe probe = StabilityProbe::make(scheme, stab_samples);
    std::vector<std::complex<double>> scaled;
    if (stab_cmd->count("--N")) {
      const ExperimentConfig config = resolve_flags(stab_cmd, stab_flags);
      const double h_t = resolve_timestep(config);
      const Grid grid(config.N, config.period, config.n);
      const DiffOperator op(grid, StencilWeights::centered(config.n), config.c, config.nu);
      const Eigen::VectorXcd lambdas = operator_eigenvalues(op);
      for (Eigen::Index i = 0; i < lambdas.size(); ++i) scaled.push_back(lambdas[i] * h_t);
    }
    std::ostringstream os;
    write_stability_csv(os, probe.boundary_samples, scaled);
    write_text(stab_out, os.str());
  });

  // train
  auto* train_cmd = app.add_subcommand(
      "train", "Train stencil weights on random exact solutions and evaluate the result");
  ConfigFlags train_flags;
  std::string train_out, train_log;
  add_config_flags(train_cmd, train_flags, true);
  train_cmd->add_option("--out", train_out, "full result JSON output file");
  train_cmd->add_option("--log", train_log,
                        "per-iteration JSON-lines log (kappa, J, grad norm, rho, weights)");
  train_cmd->callback([&]() {
    const ExperimentConfig config = resolve_flags(train_cmd, train_flags);
    std::shared_ptr<std::ofstream> log;
    if (!train_log.empty()) {
      log = std::make_shared<std::ofstream>(train_log, std::ios::trunc);
      if (!*log) throw std::runtime_error("cannot open log file: " + train_log);
    }
    const auto logger = [log](const IterationRecord& record) {
      if (log) *log << iteration_record_to_json(record).dump() << "\n";
    };
    const ExperimentResult result = run_experiment(config, logger);
    if (!train_out.empty()) write_text(train_out, result_to_json(result).dump(2) + "\n");
    std::cout << result_summary(result).dump(2) << "\n";
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Evaluate a stored weight set (default: centered) against the exact solution");
  ConfigFlags eval_flags;
  std::string eval_weights, eval_out, eval_errors;
  add_config_flags(eval_cmd, eval_flags, true);
  eval_cmd->add_option("--weights", eval_weights, "weight JSON file (default: centered stencil)");
  eval_cmd->add_option("--out", eval_out, "full result JSON output file");
  eval_cmd->add_option("--errors", eval_errors, "forward-error curve CSV output file");
  eval_cmd->callback([&]() {
    const ExperimentConfig config = resolve_flags(eval_cmd, eval_flags);
    StencilWeights weights = StencilWeights::centered(config.n);
    if (!eval_weights.empty()) {
      std::ifstream in(eval_weights);
      if (!in) throw std::invalid_argument("cannot open weights file: " + eval_weights);
      weights = weights_from_json(nlohmann::json::parse(in));
    }
    const ExperimentResult result = evaluate_weights(config, weights);
    if (!eval_out.empty()) write_text(eval_out, result_to_json(result).dump(2) + "\n");
    if (!eval_errors.empty()) write_text(eval_errors, error_curve_csv(result));
    std::cout << result_summary(result).dump(2) << "\n";
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run the standard parameter grid into a resumable result store");
  std::string sweep_store;
  int sweep_jobs = 1;
  bool sweep_full = false, sweep_dry = false;
  sweep_cmd->add_option("--store", sweep_store,
                        "result store directory (default: $STENCILNET_STORE or ./results)");
  sweep_cmd->add_option("--jobs", sweep_jobs, "worker pool size")->capture_default_str();
  sweep_cmd->add_flag("--full", sweep_full,
                      "run the full 36450-point product grid instead of the curated 225");
  sweep_cmd->add_flag("--dry-run", sweep_dry, "list the grid size and pending count, run nothing");
  sweep_cmd->callback([&]() {
    if (sweep_jobs < 1) throw std::invalid_argument("jobs must be positive");
    const std::vector<ExperimentConfig> grid = standard_grid(sweep_full);
    ResultStore store(store_root(sweep_store));
    if (sweep_dry) {
      int pending = 0;
      for (const auto& config : grid) pending += store.contains(config) ? 0 : 1;
      std::cout << "grid " << grid.size() << " pending " << pending << "\n";
      return;
    }
    const SweepReport report =
        sweep(grid, store, sweep_jobs, [](const std::string& line) { std::cout << line << "\n"; });
    std::cout << "executed " << report.executed << " skipped " << report.skipped << " failed "
              << report.failed << "\n";
    std::cout << "index " << (store.root() / "index.csv").string() << "\n";
  });

  // export-plot-data
  auto* export_cmd = app.add_subcommand(
      "export-plot-data", "Convert a stored result into plot-ready CSV files");
  std::string export_result, export_hash, export_store, export_errors, export_stability;
  int export_samples = 512;
  export_cmd->add_option("--result", export_result, "result JSON file");
  export_cmd->add_option("--hash", export_hash, "config hash to load from the store");
  export_cmd->add_option("--store", export_store,
                         "result store directory (default: $STENCILNET_STORE or ./results)");
  export_cmd->add_option("--errors", export_errors, "forward-error curve CSV output file");
  export_cmd->add_option("--stability", export_stability,
                         "stability boundary + scaled spectrum CSV output file");
  export_cmd->add_option("--samples", export_samples, "boundary sample count")
      ->capture_default_str();
  export_cmd->callback([&]() {
    if (export_result.empty() == export_hash.empty())
      throw std::invalid_argument("exactly one of --result or --hash is required");
    if (export_errors.empty() && export_stability.empty())
      throw std::invalid_argument("at least one of --errors or --stability is required");
    std::string path = export_result;
    if (path.empty())
      path = (std::filesystem::path(store_root(export_store)) / (export_hash + ".json")).string();
    const ExperimentResult result = load_result(path);
    if (!export_errors.empty()) write_text(export_errors, error_curve_csv(result));
    if (!export_stability.empty()) {
      const StabilityProbe probe = StabilityProbe::make(AbScheme(result.config.s), export_samples);
      std::ostringstream os;
      write_stability_csv(os, probe.boundary_samples, result.scaled_eigenvalues);
      write_text(export_stability, os.str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace stencilnet
