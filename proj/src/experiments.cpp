#include "stencilnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stencilnet/network.hpp"
#include "stencilnet/training_data.hpp"

namespace stencilnet {

namespace {

constexpr double kHorizon = 20.0;

bool near_any(double x, std::initializer_list<double> set) {
  for (double v : set)
    if (x == v) return true;
  return false;
}

bool in_set(int x, std::initializer_list<int> set) {
  for (int v : set)
    if (x == v) return true;
  return false;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

// Non-finite doubles have no JSON number representation; encode them as
// strings and accept both forms on read.
nlohmann::json encode_double(double x) {
  if (std::isfinite(x)) return x;
  return fmt17(x);
}

double decode_double(const nlohmann::json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

ExperimentStatus status_of(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::GradientConverged:
      return ExperimentStatus::Converged;
    case OptimizerStatus::MaxIterations:
      return ExperimentStatus::MaxIterations;
    case OptimizerStatus::LineSearchFailed:
      return ExperimentStatus::LineSearchFailed;
  }
  throw std::logic_error("unreachable optimizer status");
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (!(config.period > 0.0)) throw std::invalid_argument("config: period must be positive");
  if (config.nu < 0.0) throw std::invalid_argument("config: nu must be nonnegative");
  if (config.N < 2) throw std::invalid_argument("config: N must be at least 2");
  if (config.n < 3 || config.n % 2 == 0)
    throw std::invalid_argument("config: n must be odd and at least 3");
  if (config.n > config.N) throw std::invalid_argument("config: n must not exceed N");
  if (config.s < 1 || config.s > 8)
    throw std::invalid_argument("config: s must lie in 1..8");
  if (!in_set(config.p, {0, 2, 4, 8}))
    throw std::invalid_argument("config: p must be one of 0, 2, 4, 8");
  if (!(config.h_t_multiplier > 0.0))
    throw std::invalid_argument("config: h_t_multiplier must be positive");
  if (config.Q < 1) throw std::invalid_argument("config: Q must be at least 1");
  if (config.T < 1) throw std::invalid_argument("config: T must be at least 1");
  if (config.kappa_max < 0) throw std::invalid_argument("config: kappa_max must be nonnegative");
  if (config.h_t_explicit && !(*config.h_t_explicit > 0.0))
    throw std::invalid_argument("config: h_t_explicit must be positive");
}

std::vector<std::string> out_of_grid_notes(const ExperimentConfig& config) {
  std::vector<std::string> notes;
  const auto note = [&](const std::string& text) { notes.push_back(text); };
  if (config.c != 1.0) note("c outside standard sweep value {1}");
  if (!near_any(config.nu, {0.0, 1e-4, 1e-2}))
    note("nu outside standard sweep set {0, 1e-4, 1e-2}");
  if (config.period != 1.0) note("period outside standard sweep value {1}");
  if (!in_set(config.p, {2, 4, 8})) note("p outside standard sweep set {2, 4, 8}");
  if (!in_set(config.N, {51, 101, 201})) note("N outside standard sweep set {51, 101, 201}");
  if (!in_set(config.n, {3, 5, 7, 9, 11})) note("n outside standard sweep set {3, 5, 7, 9, 11}");
  if (!in_set(config.s, {2, 3})) note("s outside standard sweep set {2, 3}");
  if (!near_any(config.h_t_multiplier, {1.0, 1.01, 1.1}))
    note("h_t_multiplier outside standard sweep set {1.0, 1.01, 1.1}");
  if (!in_set(config.Q, {1, 3, 4, 5, 9})) note("Q outside standard sweep set {1, 3, 4, 5, 9}");
  if (!in_set(config.T, {1, 10, 100})) note("T outside standard sweep set {1, 10, 100}");
  if (config.kappa_max != 0 && !in_set(config.kappa_max, {10, 100, 1000}))
    note("kappa_max outside standard sweep set {10, 100, 1000} (0 = baseline)");
  if (config.h_t_explicit) note("h_t_explicit set: resolved critical step bypassed");
  return notes;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j{{"schema_version", kConfigSchemaVersion},
                   {"c", config.c},
                   {"nu", config.nu},
                   {"period", config.period},
                   {"p", config.p},
                   {"N", config.N},
                   {"n", config.n},
                   {"s", config.s},
                   {"h_t_multiplier", config.h_t_multiplier},
                   {"Q", config.Q},
                   {"T", config.T},
                   {"kappa_max", config.kappa_max},
                   {"seed", config.seed}};
  if (config.h_t_explicit) j["h_t_explicit"] = *config.h_t_explicit;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kConfigSchemaVersion)
    throw std::invalid_argument("config: unsupported schema_version");
  ExperimentConfig config;
  config.c = j.at("c").get<double>();
  config.nu = j.at("nu").get<double>();
  config.period = j.at("period").get<double>();
  config.p = j.at("p").get<int>();
  config.N = j.at("N").get<int>();
  config.n = j.at("n").get<int>();
  config.s = j.at("s").get<int>();
  config.h_t_multiplier = j.at("h_t_multiplier").get<double>();
  config.Q = j.at("Q").get<int>();
  config.T = j.at("T").get<int>();
  config.kappa_max = j.at("kappa_max").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("h_t_explicit") && !j.at("h_t_explicit").is_null())
    config.h_t_explicit = j.at("h_t_explicit").get<double>();
  validate_config(config);
  return config;
}

std::string config_hash(const ExperimentConfig& config) {
  return hex16(fnv1a64(config_to_json(config).dump()));
}

const char* to_string(ExperimentStatus status) {
  switch (status) {
    case ExperimentStatus::Baseline:
      return "baseline";
    case ExperimentStatus::Converged:
      return "converged";
    case ExperimentStatus::MaxIterations:
      return "max_iterations";
    case ExperimentStatus::LineSearchFailed:
      return "line_search_failed";
    case ExperimentStatus::Evaluated:
      return "evaluated";
  }
  return "unknown";
}

ExperimentStatus experiment_status_from_string(const std::string& name) {
  if (name == "baseline") return ExperimentStatus::Baseline;
  if (name == "converged") return ExperimentStatus::Converged;
  if (name == "max_iterations") return ExperimentStatus::MaxIterations;
  if (name == "line_search_failed") return ExperimentStatus::LineSearchFailed;
  if (name == "evaluated") return ExperimentStatus::Evaluated;
  throw std::invalid_argument("unknown experiment status: " + name);
}

nlohmann::json result_to_json(const ExperimentResult& result) {
  nlohmann::json errors = nlohmann::json::array();
  for (double e : result.forward_error) errors.push_back(encode_double(e));
  nlohmann::json eig_re = nlohmann::json::array();
  nlohmann::json eig_im = nlohmann::json::array();
  for (const auto& z : result.scaled_eigenvalues) {
    eig_re.push_back(z.real());
    eig_im.push_back(z.imag());
  }
  nlohmann::json j{{"schema_version", kConfigSchemaVersion},
                   {"config", config_to_json(result.config)},
                   {"h_t", result.h_t},
                   {"weights", weights_to_json(result.weights)},
                   {"status", to_string(result.status)},
                   {"iterations", result.iterations},
                   {"forward_error", std::move(errors)},
                   {"scaled_eigenvalues_re", std::move(eig_re)},
                   {"scaled_eigenvalues_im", std::move(eig_im)},
                   {"stable", result.stable},
                   {"max_error_0_1", encode_double(result.max_error_0_1)},
                   {"max_error_0_20", encode_double(result.max_error_0_20)},
                   {"heuristics", {{"growth_cap", kGrowthCap}, {"blowup_floor", kBlowupFloor}}}};
  j["J_final"] = result.J_final ? nlohmann::json(*result.J_final) : nlohmann::json();
  return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
  if (j.contains("failed") && j.at("failed").get<bool>())
    throw std::invalid_argument("result JSON records a failed run");
  ExperimentResult result;
  result.config = config_from_json(j.at("config"));
  result.h_t = j.at("h_t").get<double>();
  result.weights = weights_from_json(j.at("weights"));
  result.status = experiment_status_from_string(j.at("status").get<std::string>());
  if (!j.at("J_final").is_null()) result.J_final = j.at("J_final").get<double>();
  result.iterations = j.at("iterations").get<int>();
  for (const auto& item : j.at("forward_error"))
    result.forward_error.push_back(decode_double(item));
  const auto& re = j.at("scaled_eigenvalues_re");
  const auto& im = j.at("scaled_eigenvalues_im");
  if (re.size() != im.size())
    throw std::invalid_argument("result JSON: eigenvalue arrays disagree in length");
  for (std::size_t i = 0; i < re.size(); ++i)
    result.scaled_eigenvalues.emplace_back(re[i].get<double>(), im[i].get<double>());
  result.stable = j.at("stable").get<bool>();
  result.max_error_0_1 = decode_double(j.at("max_error_0_1"));
  result.max_error_0_20 = decode_double(j.at("max_error_0_20"));
  return result;
}

double resolve_timestep(const ExperimentConfig& config) {
  validate_config(config);
  if (config.h_t_explicit) return *config.h_t_explicit;

  // The step size is always referenced to the three-point second-order
  // operator, independent of the configured stencil width, so every n shares
  // the same baseline step for a given (c, nu, N, s).
  const Grid grid(config.N, config.period, 3);
  const PdeProblem problem(config.c, config.nu, config.period);
  const DiffOperator op(grid, StencilWeights::centered(3), problem.c, problem.nu);

  std::optional<double> critical = critical_timestep(AbScheme(config.s), op);
  if (!critical && config.s == 2) critical = critical_timestep(AbScheme(3), op);
  if (!critical)
    throw std::runtime_error("resolve_timestep: no stable step exists for this configuration");
  return config.h_t_multiplier * *critical;
}

const FourierData& bump_reference_data() {
  static const FourierData data = fourier_coefficients(bump_initial, 1.0, 300, 1e-15);
  return data;
}

namespace {

// Forward evaluation against the exact bump solution on (0, 20], plus the
// scaled spectrum and stability verdict of the result's weights.
void evaluate_into(ExperimentResult& result) {
  const ExperimentConfig& config = result.config;
  const Grid grid(config.N, config.period, config.n);
  const PdeProblem problem(config.c, config.nu, config.period);
  const AbScheme scheme(config.s);
  const DiffOperator op(grid, result.weights, problem.c, problem.nu);

  const int last_level = static_cast<int>(std::floor(kHorizon / result.h_t));
  if (last_level >= config.s) {
    const Eigen::MatrixXd exact =
        sample_grid_solution(problem, bump_reference_data(), config.N, result.h_t, last_level + 1);
    std::vector<Eigen::VectorXd> kick;
    for (int l = 0; l < config.s; ++l) kick.push_back(exact.col(l));
    TrajectoryState traj = TrajectoryState::kickstart(kick, op);

    result.forward_error.clear();
    result.forward_error.reserve(static_cast<std::size_t>(last_level - config.s + 1));
    for (int l = config.s; l <= last_level; ++l) {
      const Eigen::VectorXd u = additive(traj, scheme, result.h_t);
      double err = (u - exact.col(l)).cwiseAbs().maxCoeff();
      if (!std::isfinite(err)) {
        // Saturate after overflow; later levels cannot recover.
        for (int r = l; r <= last_level; ++r)
          result.forward_error.push_back(std::numeric_limits<double>::infinity());
        break;
      }
      result.forward_error.push_back(err);
    }

    for (int l = config.s; l <= last_level; ++l) {
      const double err = result.forward_error[static_cast<std::size_t>(l - config.s)];
      if (l * result.h_t <= 1.0) result.max_error_0_1 = std::max(result.max_error_0_1, err);
      result.max_error_0_20 = std::max(result.max_error_0_20, err);
    }
  }

  const Eigen::VectorXcd lambdas = operator_eigenvalues(op);
  result.scaled_eigenvalues.clear();
  result.scaled_eigenvalues.reserve(static_cast<std::size_t>(lambdas.size()));
  result.stable = true;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const std::complex<double> xi = lambdas[i] * result.h_t;
    result.scaled_eigenvalues.push_back(xi);
    if (!is_stable(scheme, xi)) result.stable = false;
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const IterationRecord&)>& logger) {
  validate_config(config);

  ExperimentResult result;
  result.config = config;
  result.h_t = resolve_timestep(config);

  const Grid grid(config.N, config.period, config.n);
  const PdeProblem problem(config.c, config.nu, config.period);
  const AbScheme scheme(config.s);
  // Every run starts from the padded second-order stencil: the baseline is
  // then the classical method, and training explores the extra width.
  const StencilWeights initial = StencilWeights::second_order_padded(config.n);

  if (config.kappa_max == 0) {
    // Baseline pass-through: no training data is generated, so the result
    // depends only on (c, nu, N, n, s, h_t).
    result.weights = initial;
    result.status = ExperimentStatus::Baseline;
  } else {
    const TrainingSet training = generate_training_set(problem, config.N, result.h_t, config.s,
                                                       config.Q, config.T, config.p, config.seed);
    const Objective objective =
        make_training_objective(training, scheme, grid, problem, result.h_t, config.Q);
    BfgsOptions options;
    options.kappa_max = config.kappa_max;
    options.logger = logger;
    const OptimizerState state = bfgs_minimize(initial.packed(), objective, options);
    result.weights = StencilWeights::from_packed(state.omega);
    result.status = status_of(state.status);
    result.J_final = state.J_history.back();
    result.iterations = state.kappa;
  }

  evaluate_into(result);
  return result;
}

ExperimentResult evaluate_weights(const ExperimentConfig& config, const StencilWeights& weights) {
  validate_config(config);
  if (weights.n() != config.n)
    throw std::invalid_argument("evaluate_weights: weight length must equal config.n");

  ExperimentResult result;
  result.config = config;
  result.h_t = resolve_timestep(config);
  result.weights = weights;
  result.status = ExperimentStatus::Evaluated;
  evaluate_into(result);
  return result;
}

ResultStore::ResultStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path ResultStore::path_for(const ExperimentConfig& config) const {
  return root_ / (config_hash(config) + ".json");
}

bool ResultStore::contains(const ExperimentConfig& config) const {
  return std::filesystem::exists(path_for(config));
}

namespace {

void atomic_write(const std::filesystem::path& target, const std::string& payload) {
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("result store: cannot open " + tmp.string());
    out << payload;
    if (!out) throw std::runtime_error("result store: short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace

void ResultStore::put(const ExperimentResult& result) {
  atomic_write(path_for(result.config), result_to_json(result).dump(2) + "\n");
}

void ResultStore::put_failure(const ExperimentConfig& config, const std::string& message) {
  nlohmann::json j{{"schema_version", kConfigSchemaVersion},
                   {"config", config_to_json(config)},
                   {"failed", true},
                   {"error", message}};
  atomic_write(path_for(config), j.dump(2) + "\n");
}

std::optional<ExperimentResult> ResultStore::get(const ExperimentConfig& config) const {
  const auto path = path_for(config);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return result_from_json(nlohmann::json::parse(in));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<ExperimentResult> ResultStore::load_all() const {
  std::vector<ExperimentResult> results;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    if (!in) continue;
    try {
      results.push_back(result_from_json(nlohmann::json::parse(in)));
    } catch (const std::exception&) {
      continue;  // failure records and foreign files are not results
    }
  }
  return results;
}

void ResultStore::write_index() const {
  struct Row {
    std::string hash;
    std::string line;
  };
  std::vector<Row> rows;

  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    if (!in) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const std::exception&) {
      continue;
    }
    if (!j.contains("config")) continue;

    ExperimentConfig config;
    try {
      config = config_from_json(j.at("config"));
    } catch (const std::exception&) {
      continue;
    }
    std::ostringstream line;
    line << config_hash(config) << "," << fmt17(config.c) << "," << fmt17(config.nu) << ","
         << fmt17(config.period) << "," << config.p << "," << config.N << "," << config.n << ","
         << config.s << "," << fmt17(config.h_t_multiplier) << "," << config.Q << "," << config.T
         << "," << config.kappa_max << "," << config.seed << ",";
    const bool failed = j.contains("failed") && j.at("failed").get<bool>();
    if (failed) {
      line << ",,failed,,,";
    } else {
      line << fmt17(j.at("h_t").get<double>()) << ",";
      if (j.at("J_final").is_null())
        line << ",";
      else
        line << fmt17(j.at("J_final").get<double>()) << ",";
      line << j.at("status").get<std::string>() << ","
           << (j.at("stable").get<bool>() ? "true" : "false") << ","
           << fmt17(decode_double(j.at("max_error_0_1"))) << ","
           << fmt17(decode_double(j.at("max_error_0_20")));
    }
    rows.push_back({config_hash(config), line.str()});
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.hash < b.hash; });

  std::ostringstream body;
  body << "hash,c,nu,period,p,N,n,s,h_t_multiplier,Q,T,kappa_max,seed,h_t,J_final,status,stable,"
          "max_error_0_1,max_error_0_20\n";
  for (const auto& row : rows) body << row.line << "\n";
  atomic_write(root_ / "index.csv", body.str());
}

SweepReport sweep(const std::vector<ExperimentConfig>& grid, ResultStore& store, int jobs,
                  const std::function<void(const std::string&)>& on_event) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty config grid");

  // Dedupe by hash so two workers never race on one file.
  std::vector<ExperimentConfig> pending;
  std::vector<std::string> seen;
  SweepReport report;
  for (const auto& config : grid) {
    validate_config(config);
    const std::string hash = config_hash(config);
    if (std::find(seen.begin(), seen.end(), hash) != seen.end()) continue;
    seen.push_back(hash);
    if (store.contains(config)) {
      ++report.skipped;
      continue;
    }
    pending.push_back(config);
  }

  std::mutex mtx;
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const ExperimentConfig& config = pending[i];
      try {
        const ExperimentResult result = run_experiment(config);
        store.put(result);
        std::lock_guard<std::mutex> lock(mtx);
        ++report.executed;
        if (on_event)
          on_event(config_hash(config) + " " + to_string(result.status) +
                   (result.stable ? " stable" : " unstable"));
      } catch (const std::exception& ex) {
        store.put_failure(config, ex.what());
        std::lock_guard<std::mutex> lock(mtx);
        ++report.failed;
        if (on_event) on_event(config_hash(config) + " failed: " + ex.what());
      }
    }
  };

  const int count = std::max(1, std::min<int>(jobs, static_cast<int>(pending.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  store.write_index();
  return report;
}

std::vector<ExperimentConfig> standard_grid(bool full) {
  std::vector<ExperimentConfig> grid;
  const auto derive_seed = [](ExperimentConfig config) {
    config.seed = 0;
    nlohmann::json j = config_to_json(config);
    j.erase("seed");
    return fnv1a64(j.dump());
  };

  if (full) {
    for (double nu : {0.0, 1e-4, 1e-2})
      for (int p : {2, 4, 8})
        for (int N : {51, 101, 201})
          for (int n : {3, 5, 7, 9, 11})
            for (int s : {2, 3})
              for (double mult : {1.0, 1.01, 1.1})
                for (int Q : {1, 3, 4, 5, 9})
                  for (int T : {1, 10, 100})
                    for (int kappa : {10, 100, 1000}) {
                      ExperimentConfig config;
                      config.nu = nu;
                      config.p = p;
                      config.N = N;
                      config.n = n;
                      config.s = s;
                      config.h_t_multiplier = mult;
                      config.Q = Q;
                      config.T = T;
                      config.kappa_max = kappa;
                      config.seed = derive_seed(config);
                      grid.push_back(config);
                    }
    return grid;
  }

  // The five headline parameter sets: {nu, p, N, n, multiplier}, all s = 2.
  struct Base {
    double nu;
    int p;
    int N;
    int n;
    double mult;
  };
  const Base bases[] = {{0.0, 2, 101, 9, 1.1},
                        {1e-4, 2, 101, 9, 1.1},
                        {1e-2, 2, 201, 7, 1.01},
                        {1e-4, 0, 101, 9, 1.1},
                        {1e-4, 2, 201, 9, 1.1}};
  for (const Base& base : bases)
    for (int Q : {1, 3, 4, 5, 9})
      for (int T : {1, 10, 100})
        for (int kappa : {10, 100, 1000}) {
          ExperimentConfig config;
          config.nu = base.nu;
          config.p = base.p;
          config.N = base.N;
          config.n = base.n;
          config.s = 2;
          config.h_t_multiplier = base.mult;
          config.Q = Q;
          config.T = T;
          config.kappa_max = kappa;
          config.seed = derive_seed(config);
          grid.push_back(config);
        }
  return grid;
}

}  // namespace stencilnet
