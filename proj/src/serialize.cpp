#include "stencilnet/serialize.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stencilnet {

namespace {

// std::stod raises out_of_range on subnormal input; from_chars round-trips
// the full double range.
double parse_cell(const std::string& cell) {
  double value = 0.0;
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), last, value);
  if (ec != std::errc() || ptr != last)
    throw std::invalid_argument("trajectory CSV: malformed number: " + cell);
  return value;
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& item : j) v[i++] = item.get<double>();
  return v;
}

nlohmann::json weights_to_json(const StencilWeights& weights) {
  return {{"n", weights.n()}, {"w1", vector_to_json(weights.w1)}, {"w2", vector_to_json(weights.w2)}};
}

StencilWeights weights_from_json(const nlohmann::json& j) {
  StencilWeights w(vector_from_json(j.at("w1")), vector_from_json(j.at("w2")));
  if (j.contains("n") && j.at("n").get<int>() != w.n())
    throw std::invalid_argument("weights JSON: field n disagrees with array lengths");
  return w;
}

nlohmann::json trajectory_meta_to_json(const TrajectoryMeta& meta) {
  return {{"seed", meta.seed}, {"p", meta.p},   {"N", meta.N}, {"h_t", meta.h_t},
          {"s", meta.s},       {"Q", meta.Q},   {"T", meta.T}};
}

TrajectoryMeta trajectory_meta_from_json(const nlohmann::json& j) {
  TrajectoryMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.p = j.at("p").get<int>();
  m.N = j.at("N").get<int>();
  m.h_t = j.at("h_t").get<double>();
  m.s = j.at("s").get<int>();
  m.Q = j.at("Q").get<int>();
  m.T = j.at("T").get<int>();
  return m;
}

void write_trajectory_csv(std::ostream& os, const Eigen::MatrixXd& levels) {
  os << "x_index";
  for (Eigen::Index l = 0; l < levels.cols(); ++l) os << ",level_" << l;
  os << "\n";
  for (Eigen::Index k = 0; k < levels.rows(); ++k) {
    os << k;
    for (Eigen::Index l = 0; l < levels.cols(); ++l) os << "," << fmt17(levels(k, l));
    os << "\n";
  }
}

Eigen::MatrixXd read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("trajectory CSV: missing header");
  std::size_t cols = 0;
  for (char ch : line) cols += (ch == ',');
  if (cols == 0) throw std::invalid_argument("trajectory CSV: header has no level columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    std::getline(ls, cell, ',');  // node index column
    while (std::getline(ls, cell, ',')) row.push_back(parse_cell(cell));
    if (row.size() != cols) throw std::invalid_argument("trajectory CSV: ragged row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t l = 0; l < cols; ++l)
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = rows[k][l];
  return out;
}

void write_stability_csv(std::ostream& os, const std::vector<std::complex<double>>& boundary,
                         const std::vector<std::complex<double>>& scaled_eigenvalues) {
  os << "re,im,kind\n";
  for (const auto& z : boundary)
    os << fmt17(z.real()) << "," << fmt17(z.imag()) << ",boundary\n";
  for (const auto& z : scaled_eigenvalues)
    os << fmt17(z.real()) << "," << fmt17(z.imag()) << ",eigenvalue\n";
}

nlohmann::json iteration_record_to_json(const IterationRecord& record) {
  return {{"kappa", record.kappa},
          {"J", record.J},
          {"grad_norm", record.grad_norm},
          {"rho", record.rho},
          {"omega", vector_to_json(record.omega)}};
}

}  // namespace stencilnet
