#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stencilnet/multistep.hpp"
#include "stencilnet/stencil.hpp"

namespace stencilnet {

// Constant gather indices realizing the assignment layer: row k lists the
// n source indices of node k's neighborhood in ascending physical
// coordinate (periodic images wrap modulo N+1). The dense 0/1 selector
// matrices exist only in test oracles.
class GatherMap {
 public:
  explicit GatherMap(const Grid& grid);

  int rows() const { return static_cast<int>(idx_.rows()); }
  int cols() const { return static_cast<int>(idx_.cols()); }
  int operator()(int k, int j) const { return idx_(k, j); }

 private:
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> idx_;
};

// Stacked neighborhood copy of u: block k (entries k*n .. k*n + n-1) holds
// u over node k's neighborhood in ascending order.
Eigen::VectorXd assignment(const GatherMap& map, const Eigen::VectorXd& u);

// (N+1) x n matrix with Z(k, j) = assigned[k*n + j].
Eigen::MatrixXd reshape(const Eigen::VectorXd& assigned, int n);

// assignment followed by reshape without the intermediate copy.
Eigen::MatrixXd gather_rows(const GatherMap& map, const Eigen::VectorXd& u);

// Z times the effective stencil -(c/h_x) w1 + (nu/h_x^2) w2. Identical
// arithmetic to apply_operator on the un-gathered vector (bit-for-bit).
Eigen::VectorXd convolution(const Eigen::MatrixXd& Z, const StencilWeights& weights,
                            const PdeProblem& problem, const Grid& grid);

// Time-stepping state: ring buffers of the last s states and the last s
// convolution outputs, seeded from exact kickstart levels and advanced by
// the additive layer. Level index l means the newest state is u(l h_t).
class TrajectoryState {
 public:
  // samples must hold exactly s columns: exact u(l h_t), l = 0..s-1. The
  // seeded convolutions are computed through the layered pass.
  static TrajectoryState kickstart(const std::vector<Eigen::VectorXd>& samples,
                                   const DiffOperator& op);

  const Eigen::VectorXd& newest() const { return zeta_plus_[head_]; }
  int level() const { return level_; }
  int s() const { return static_cast<int>(zeta_plus_.size()); }

  // u(t - l h_t) and D u(t - l h_t) for l = 0..s-1 (newest first).
  const Eigen::VectorXd& state_back(int l) const;
  const Eigen::VectorXd& conv_back(int l) const;

  friend Eigen::VectorXd additive(TrajectoryState& state, const AbScheme& scheme, double h_t);

 private:
  explicit TrajectoryState(DiffOperator op) : op_(std::move(op)), map_(op_.grid) {}
  void push(Eigen::VectorXd zp, Eigen::VectorXd zc);

  DiffOperator op_;
  GatherMap map_;
  std::vector<Eigen::VectorXd> zeta_plus_;
  std::vector<Eigen::VectorXd> zeta_conv_;
  int head_ = 0;
  int level_ = 0;
};

// One multistep update: the newest state is the input layer, and
//   zeta_plus = input + h_t sum_j alpha_j conv(t - j h_t).
// Pushes both ring buffers forward (the new state's convolution is
// computed through the layered pass) and returns the new state.
Eigen::VectorXd additive(TrajectoryState& state, const AbScheme& scheme, double h_t);

}  // namespace stencilnet
