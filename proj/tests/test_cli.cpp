#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "stencilnet/cli.hpp"
#include "stencilnet/experiments.hpp"
#include "stencilnet/serialize.hpp"

namespace {

// Invokes the CLI entry point with captured standard streams.
int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("stencilnet");
  for (const auto& a : args) argv.push_back(a.c_str());

  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = stencilnet::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  for (std::string cell; std::getline(is, cell, ',');) cells.push_back(cell);
  return cells;
}

// Zero-dynamics configuration: with c = nu = 0 every exact level equals the
// initial one and the effective stencil vanishes, so training converges at
// the start and every forward error is exactly zero. The explicit step
// avoids the (undefined) critical step of the zero operator.
std::vector<std::string> zero_dynamics_flags() {
  return {"--c", "0",  "--nu", "0", "--N", "11", "--n", "3", "--s", "2",
          "--Q", "1",  "--T",  "1", "--p", "2",  "--seed", "5", "--h-t", "0.01"};
}

}  // namespace

TEST_CASE("weights subcommand emits the centered stencil as JSON") {
  std::string out, err;
  CHECK(run_cli({"weights", "--n", "3"}, &out, &err) == 0);
  const nlohmann::json j = nlohmann::json::parse(out);
  CHECK(j.at("n").get<int>() == 3);
  REQUIRE(j.at("w1").size() == 3);
  CHECK(j.at("w1")[0].get<double>() == -0.5);
  CHECK(j.at("w1")[1].get<double>() == 0.0);
  CHECK(j.at("w1")[2].get<double>() == 0.5);
  CHECK(j.at("w2")[0].get<double>() == 1.0);
  CHECK(j.at("w2")[1].get<double>() == -2.0);
  CHECK(j.at("w2")[2].get<double>() == 1.0);

  oracle::TempDir tmp("cliw");
  const std::string path = (tmp.path / "w.json").string();
  CHECK(run_cli({"weights", "--n", "5", "--out", path}, &out, &err) == 0);
  CHECK(out.empty());
  std::ifstream in(path);
  REQUIRE(in.good());
  const nlohmann::json j5 = nlohmann::json::parse(in);
  CHECK(j5.at("n").get<int>() == 5);

  // Even widths are a domain error, reported on stderr with exit code 2.
  CHECK(run_cli({"weights", "--n", "4"}, &out, &err) == 2);
  CHECK(err.find("error:") != std::string::npos);

  // Unwritable output paths are I/O failures, not usage errors.
  CHECK(run_cli({"weights", "--out", "/nonexistent_dir_zz/w.json"}, &out, &err) == 1);
}

TEST_CASE("stability subcommand traces the boundary and optionally the spectrum") {
  std::string out, err;
  CHECK(run_cli({"stability", "--s", "2", "--samples", "256"}, &out, &err) == 0);
  const auto lines = split_lines(out);
  REQUIRE(lines.size() == 1 + 256);
  CHECK(lines[0] == "re,im,kind");
  CHECK(lines[1] == "0,0,boundary");
  CHECK(count_occurrences(out, ",eigenvalue") == 0);

  // Sample 128 of 256 sits at angle pi, where the two-step boundary
  // crosses the real axis at -1.
  const auto cells = split_csv(lines[1 + 128]);
  REQUIRE(cells.size() == 3);
  CHECK(std::abs(std::stod(cells[0]) - -1.0) <= 1e-12);
  CHECK(std::abs(std::stod(cells[1])) <= 1e-12);
  CHECK(cells[2] == "boundary");

  // With --N the scaled spectrum of the centered operator is appended.
  CHECK(run_cli({"stability", "--s", "2", "--N", "31", "--nu", "1e-2", "--samples", "64"},
                &out, &err) == 0);
  CHECK(count_occurrences(out, ",boundary") == 64);
  CHECK(count_occurrences(out, ",eigenvalue") == 32);
  CHECK(err.find("note: N outside") != std::string::npos);

  CHECK(run_cli({"stability", "--samples", "0"}, &out, &err) == 2);
}

TEST_CASE("train reports a converged zero-loss run for zero dynamics") {
  oracle::TempDir tmp("clit");
  const std::string result_path = (tmp.path / "result.json").string();
  const std::string log_path = (tmp.path / "log.jsonl").string();

  auto args = zero_dynamics_flags();
  args.insert(args.begin(), "train");
  args.insert(args.end(), {"--kappa-max", "5", "--out", result_path, "--log", log_path});

  std::string out, err;
  CHECK(run_cli(args, &out, &err) == 0);
  CHECK(err.find("note: c outside") != std::string::npos);
  CHECK(err.find("note: h_t_explicit") != std::string::npos);

  const nlohmann::json summary = nlohmann::json::parse(out);
  CHECK(summary.at("status").get<std::string>() == "converged");
  CHECK(summary.at("iterations").get<int>() == 0);
  CHECK(summary.at("J_final").get<double>() == 0.0);
  CHECK(summary.at("stable").get<bool>() == true);
  CHECK(summary.at("h_t").get<double>() == 0.01);
  CHECK(summary.at("hash").get<std::string>().size() == 16);
  CHECK(summary.at("max_error_0_20").get<std::string>() == "0");

  // The gradient vanished at the start, so the log holds only the initial
  // record.
  std::ifstream log(log_path);
  REQUIRE(log.good());
  std::string line;
  REQUIRE(std::getline(log, line));
  const nlohmann::json rec = nlohmann::json::parse(line);
  CHECK(rec.at("kappa").get<int>() == 0);
  CHECK(rec.at("rho").get<double>() == 0.0);
  CHECK(rec.at("J").get<double>() == 0.0);
  CHECK(rec.at("omega").size() == 6);
  CHECK_FALSE(std::getline(log, line));

  // The full result file round-trips through the library reader.
  std::ifstream in(result_path);
  REQUIRE(in.good());
  const auto result = stencilnet::result_from_json(nlohmann::json::parse(in));
  CHECK(result.status == stencilnet::ExperimentStatus::Converged);
  CHECK(result.max_error_0_20 == 0.0);
  CHECK(result.config.N == 11);
}

TEST_CASE("evaluate honors config files with command-line overrides") {
  oracle::TempDir tmp("clie");
  stencilnet::ExperimentConfig cfg;
  cfg.c = 0.0;
  cfg.nu = 0.0;
  cfg.N = 11;
  cfg.n = 3;
  cfg.s = 2;
  cfg.Q = 1;
  cfg.T = 1;
  cfg.kappa_max = 0;
  cfg.seed = 5;
  cfg.h_t_explicit = 0.01;

  const std::string cfg_path = (tmp.path / "config.json").string();
  std::ofstream(cfg_path) << stencilnet::config_to_json(cfg).dump(2) << "\n";

  const std::string out_path = (tmp.path / "result.json").string();
  std::string out, err;
  CHECK(run_cli({"evaluate", "--config", cfg_path, "--out", out_path}, &out, &err) == 0);
  const nlohmann::json summary = nlohmann::json::parse(out);
  CHECK(summary.at("status").get<std::string>() == "evaluated");

  std::ifstream in(out_path);
  REQUIRE(in.good());
  const auto result = stencilnet::result_from_json(nlohmann::json::parse(in));
  CHECK(result.config == cfg);
  CHECK(result.h_t == 0.01);

  // A flag given on the command line overrides the file field; --h-t
  // replaces the stored explicit step.
  CHECK(run_cli({"evaluate", "--config", cfg_path, "--T", "10", "--h-t", "0.02",
                 "--out", out_path},
                &out, &err) == 0);
  std::ifstream in2(out_path);
  const auto result2 = stencilnet::result_from_json(nlohmann::json::parse(in2));
  stencilnet::ExperimentConfig expect = cfg;
  expect.T = 10;
  expect.h_t_explicit = 0.02;
  CHECK(result2.config == expect);

  CHECK(run_cli({"evaluate", "--config", (tmp.path / "missing.json").string()}, &out, &err) == 2);
  const std::string bad_path = (tmp.path / "bad.json").string();
  std::ofstream(bad_path) << "{not json";
  CHECK(run_cli({"evaluate", "--config", bad_path}, &out, &err) == 2);
}

TEST_CASE("evaluate accepts explicit weight files and writes error curves") {
  oracle::TempDir tmp("cliew");
  const std::string w_path = (tmp.path / "w.json").string();
  std::ofstream(w_path) << stencilnet::weights_to_json(
                               stencilnet::StencilWeights::centered(3))
                               .dump()
                        << "\n";
  const std::string err_path = (tmp.path / "errors.csv").string();

  auto args = zero_dynamics_flags();
  args.insert(args.begin(), "evaluate");
  args.insert(args.end(), {"--weights", w_path, "--errors", err_path});

  std::string out, err;
  CHECK(run_cli(args, &out, &err) == 0);

  std::ifstream curve(err_path);
  REQUIRE(curve.good());
  std::string header;
  std::getline(curve, header);
  CHECK(header == "level,t,error");
  std::size_t rows = 0;
  std::string first_row;
  for (std::string line; std::getline(curve, line);) {
    if (line.empty()) continue;
    if (rows == 0) first_row = line;
    ++rows;
  }
  // Levels s..floor(20/h_t) with s = 2 and h_t = 0.01.
  CHECK(rows == 1999);
  const auto cells = split_csv(first_row);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == "2");
  CHECK(std::stod(cells[1]) == 0.02);
  CHECK(cells[2] == "0");

  CHECK(run_cli({"evaluate", "--weights", (tmp.path / "none.json").string(), "--c", "0",
                 "--nu", "0", "--N", "11", "--n", "3", "--h-t", "0.01"},
                &out, &err) == 2);
}

TEST_CASE("sweep dry runs report the grid without executing anything") {
  oracle::TempDir tmp("clis");
  const std::string store = (tmp.path / "store").string();

  std::string out, err;
  CHECK(run_cli({"sweep", "--dry-run", "--store", store}, &out, &err) == 0);
  CHECK(out == "grid 225 pending 225\n");

  // The store directory exists (created on open) but holds nothing.
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(store)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 0);

  // Prefilling one grid config's record reduces the pending count.
  stencilnet::ResultStore rs(store);
  stencilnet::ExperimentResult res;
  res.config = stencilnet::standard_grid(false)[0];
  res.h_t = 0.01;
  res.weights = stencilnet::StencilWeights::centered(res.config.n);
  res.status = stencilnet::ExperimentStatus::Converged;
  res.J_final = 1.0;
  rs.put(res);
  CHECK(run_cli({"sweep", "--dry-run", "--store", store}, &out, &err) == 0);
  CHECK(out == "grid 225 pending 224\n");

  CHECK(run_cli({"sweep", "--jobs", "0", "--store", store}, &out, &err) == 2);
}

TEST_CASE("sweep resolves its store from the environment when no flag is given") {
  oracle::TempDir tmp("clienv");
  const std::string store = (tmp.path / "envstore").string();
  REQUIRE(setenv("STENCILNET_STORE", store.c_str(), 1) == 0);
  std::string out, err;
  const int code = run_cli({"sweep", "--dry-run"}, &out, &err);
  REQUIRE(unsetenv("STENCILNET_STORE") == 0);
  CHECK(code == 0);
  CHECK(out == "grid 225 pending 225\n");
  CHECK(std::filesystem::is_directory(store));
}

TEST_CASE("export-plot-data converts stored results into CSV") {
  oracle::TempDir tmp("clix");
  const std::string result_path = (tmp.path / "result.json").string();

  auto args = zero_dynamics_flags();
  args.insert(args.begin(), "evaluate");
  args.insert(args.end(), {"--out", result_path});
  std::string out, err;
  REQUIRE(run_cli(args, &out, &err) == 0);

  const std::string err_csv = (tmp.path / "err.csv").string();
  const std::string stab_csv = (tmp.path / "stab.csv").string();
  CHECK(run_cli({"export-plot-data", "--result", result_path, "--errors", err_csv,
                 "--stability", stab_csv, "--samples", "32"},
                &out, &err) == 0);

  std::ifstream curve(err_csv);
  REQUIRE(curve.good());
  std::string header;
  std::getline(curve, header);
  CHECK(header == "level,t,error");

  std::ifstream stab(stab_csv);
  REQUIRE(stab.good());
  std::ostringstream stab_text;
  stab_text << stab.rdbuf();
  CHECK(count_occurrences(stab_text.str(), ",boundary") == 32);
  // The stored spectrum has one eigenvalue per grid node (N + 1 = 12).
  CHECK(count_occurrences(stab_text.str(), ",eigenvalue") == 12);

  // The hash + store form loads the same record.
  std::ifstream in(result_path);
  const auto result = stencilnet::result_from_json(nlohmann::json::parse(in));
  const std::string store = (tmp.path / "store").string();
  stencilnet::ResultStore rs(store);
  rs.put(result);
  const std::string hash = stencilnet::config_hash(result.config);
  CHECK(run_cli({"export-plot-data", "--hash", hash, "--store", store, "--errors", err_csv},
                &out, &err) == 0);

  // Source and output selection errors are usage errors.
  CHECK(run_cli({"export-plot-data", "--errors", err_csv}, &out, &err) == 2);
  CHECK(run_cli({"export-plot-data", "--result", result_path, "--hash", hash, "--errors",
                 err_csv},
                &out, &err) == 2);
  CHECK(run_cli({"export-plot-data", "--result", result_path}, &out, &err) == 2);
  CHECK(run_cli({"export-plot-data", "--result", (tmp.path / "nope.json").string(),
                 "--errors", err_csv},
                &out, &err) == 2);
}

TEST_CASE("help output enumerates subcommands and parameter domains") {
  std::string out, err;
  CHECK(run_cli({"--help"}, &out, &err) == 0);
  for (const char* name :
       {"weights", "stability", "train", "evaluate", "sweep", "export-plot-data"})
    CHECK(out.find(name) != std::string::npos);

  CHECK(run_cli({"train", "--help"}, &out, &err) == 0);
  for (const char* flag : {"--c", "--nu", "--period", "--p", "--N", "--n", "--s",
                           "--h-t-multiplier", "--Q", "--T", "--kappa-max", "--seed", "--h-t",
                           "--config"})
    CHECK(out.find(flag) != std::string::npos);
  CHECK(count_occurrences(out, "standard sweep") >= 11);

  CHECK(run_cli({"sweep", "--help"}, &out, &err) == 0);
  CHECK(out.find("--full") != std::string::npos);
  CHECK(out.find("--dry-run") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  std::string out, err;
  CHECK(run_cli({}, &out, &err) == 2);                     // missing subcommand
  CHECK(run_cli({"frobnicate"}, &out, &err) == 2);         // unknown subcommand
  CHECK(run_cli({"weights", "--bogus"}, &out, &err) == 2); // unknown flag
  CHECK(run_cli({"evaluate", "--c", "0", "--nu", "0", "--N", "11", "--n", "3", "--h-t", "0"},
                &out, &err) == 2);                         // invalid domain value
  CHECK(err.find("error:") != std::string::npos);
}

TEST_CASE("seventeen-digit formatting round-trips every double") {
  using stencilnet::fmt17;
  const auto parse = [](const std::string& text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    REQUIRE(ec == std::errc());
    REQUIRE(ptr == text.data() + text.size());
    return value;
  };
  for (double x : {3.141592653589793, 1.0 / 3.0, 1e300, 5e-324, 0.1, -0.0,
                   123456789.123456789, 2.2250738585072014e-308}) {
    const double back = parse(fmt17(x));
    CHECK(back == x);
    CHECK(std::signbit(back) == std::signbit(x));
  }
  CHECK(fmt17(0.0) == "0");
  CHECK(std::isinf(parse(fmt17(std::numeric_limits<double>::infinity()))));

  Eigen::VectorXd v(3);
  v << -0.0, 5e-324, 1.0 / 3.0;
  const Eigen::VectorXd back = stencilnet::vector_from_json(stencilnet::vector_to_json(v));
  CHECK((back.array() == v.array()).all());
}
