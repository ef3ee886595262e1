#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stencilnet/stencil.hpp"
#include "stencilnet/training.hpp"

namespace stencilnet {

// Decimal formatting with 17 significant digits, independent of locale.
// Every finite double round-trips exactly through this representation.
std::string fmt17(double x);

nlohmann::json weights_to_json(const StencilWeights& weights);
StencilWeights weights_from_json(const nlohmann::json& j);

// Metadata mirror written next to trajectory CSV dumps.
struct TrajectoryMeta {
  std::uint64_t seed = 0;
  int p = 0;
  int N = 0;
  double h_t = 0.0;
  int s = 0;
  int Q = 0;
  int T = 0;
};

nlohmann::json trajectory_meta_to_json(const TrajectoryMeta& meta);
TrajectoryMeta trajectory_meta_from_json(const nlohmann::json& j);

// Sampled solution levels as CSV; header row is the node index column
// followed by one column per time level.
void write_trajectory_csv(std::ostream& os, const Eigen::MatrixXd& levels);
Eigen::MatrixXd read_trajectory_csv(std::istream& is);

// Stability-region scatter data: columns re,im,kind with kind either
// "boundary" or "eigenvalue".
void write_stability_csv(std::ostream& os, const std::vector<std::complex<double>>& boundary,
                         const std::vector<std::complex<double>>& scaled_eigenvalues);

nlohmann::json iteration_record_to_json(const IterationRecord& record);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace stencilnet
