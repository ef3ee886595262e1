#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stencilnet/serialize.hpp"
#include "stencilnet/training.hpp"

namespace stencilnet {

inline constexpr int kConfigSchemaVersion = 1;

// One point of the sweep grid. The resolved step is
// h_t_multiplier x (critical step of the centered scheme); h_t_explicit,
// when set, bypasses the critical-step computation entirely (needed for
// degenerate operators such as c = nu = 0 whose critical step is
// undefined).
struct ExperimentConfig {
  double c = 1.0;
  double nu = 0.0;
  double period = 1.0;
  int p = 2;
  int N = 101;
  int n = 9;
  int s = 2;
  double h_t_multiplier = 1.0;
  int Q = 1;
  int T = 1;
  int kappa_max = 10;
  std::uint64_t seed = 1;
  std::optional<double> h_t_explicit;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws std::invalid_argument on hard domain violations (even n, n > N,
// negative nu, unsupported p, ...). Values merely outside the standard
// sweep sets are legal; see out_of_grid_notes.
void validate_config(const ExperimentConfig& config);

// One human-readable note per field whose value lies outside the standard
// sweep domain. Empty for grid-conforming configs.
std::vector<std::string> out_of_grid_notes(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

// FNV-1a 64 of the canonical JSON dump, as 16 lowercase hex digits. Used
// as the result-store filename stem.
std::string config_hash(const ExperimentConfig& config);

enum class ExperimentStatus {
  Baseline,  // kappa_max = 0, optimizer skipped, centered weights
  Converged,
  MaxIterations,
  LineSearchFailed,
  Evaluated,  // externally supplied weights, no optimizer run
};

const char* to_string(ExperimentStatus status);
ExperimentStatus experiment_status_from_string(const std::string& name);

// Forward-error heuristics recorded alongside every result: a stable,
// successfully trained method must not grow by more than kGrowthCap from
// t = 1 to t = 20; an untrained unstable method is expected to exceed
// kBlowupFloor before t = 20.
inline constexpr double kGrowthCap = 1e3;
inline constexpr double kBlowupFloor = 1e6;

struct ExperimentResult {
  ExperimentConfig config;
  double h_t = 0.0;
  StencilWeights weights;  // final iterate (centered for baseline runs)
  ExperimentStatus status = ExperimentStatus::Baseline;
  std::optional<double> J_final;  // absent for baseline runs
  int iterations = 0;
  // || u_exact(l h_t) - u_net(l h_t) ||_inf for l = s .. floor(20/h_t);
  // +inf once the trajectory overflows.
  std::vector<double> forward_error;
  std::vector<std::complex<double>> scaled_eigenvalues;  // lambda_eta h_t, final weights
  bool stable = false;  // every scaled eigenvalue passes the root condition
  double max_error_0_1 = 0.0;
  double max_error_0_20 = 0.0;
};

nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& j);

// h_t_multiplier x critical_timestep of the centered stencil, with the
// s = 3 critical value substituted when s = 2 admits none (pure
// advection). h_t_explicit overrides everything. Throws std::runtime_error
// when no step can be resolved.
double resolve_timestep(const ExperimentConfig& config);

// Full pipeline: training set, BFGS from the centered initialization
// (skipped when kappa_max = 0), then forward evaluation against the exact
// bump-function solution on t in (0, 20] with exact kickstart levels.
// Optimizer failure is recorded in the status; evaluation always runs with
// the best weights found.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const IterationRecord&)>& logger = {});

// Evaluation half of run_experiment with a fixed weight set: forward error
// against the exact bump solution, scaled spectrum, stability verdict.
ExperimentResult evaluate_weights(const ExperimentConfig& config, const StencilWeights& weights);

// Shared truncated-coefficient set of the bump initial data (eta in
// [-300, 300], each coefficient to 1e-15), computed once per process.
const FourierData& bump_reference_data();

// One JSON file per result, named by config hash, plus a regenerated CSV
// index. Writes are atomic (temp file + rename); the store is append-only.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_for(const ExperimentConfig& config) const;

  bool contains(const ExperimentConfig& config) const;
  void put(const ExperimentResult& result);
  // Failure record for a config whose run threw; counts as present.
  void put_failure(const ExperimentConfig& config, const std::string& message);
  std::optional<ExperimentResult> get(const ExperimentConfig& config) const;

  // Every successfully parsed result in the store.
  std::vector<ExperimentResult> load_all() const;

  // Rebuilds index.csv from the stored JSON files, sorted by hash.
  void write_index() const;

 private:
  std::filesystem::path root_;
};

struct SweepReport {
  int executed = 0;
  int skipped = 0;
  int failed = 0;
};

// Runs every config not already present in the store on a bounded worker
// pool. Individual failures are recorded in the store and never abort the
// sweep. on_event receives per-config progress lines.
SweepReport sweep(const std::vector<ExperimentConfig>& grid, ResultStore& store, int jobs = 1,
                  const std::function<void(const std::string&)>& on_event = {});

// The standard parameter grid. The curated form covers the five headline
// parameter sets (every Q, T, kappa_max combination on each; 225 configs);
// the full form is the complete 36450-point product grid. Seeds are
// derived per config from the content hash, so the grid is deterministic.
std::vector<ExperimentConfig> standard_grid(bool full);

}  // namespace stencilnet
