#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "stencilnet/multistep.hpp"
#include "stencilnet/network.hpp"
#include "stencilnet/training_data.hpp"

namespace stencilnet {

// Loss value with its gradient in the packed weight order [d/dw1; d/dw2].
// conv_delta_norms[l] accumulates the 2-norms of the convolution-layer
// deltas at time level l over all (case, prediction) pairs; it is a
// vanishing-gradient diagnostic only.
struct LossGradient {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd conv_delta_norms;
};

// Backpropagation workspace for one (case, prediction-step) pair. Levels
// above q carry no deltas and are not stored. The reshape- and
// assignment-layer deltas are rank-1 views of the convolution deltas and
// are materialized on demand.
struct DeltaField {
  int q = 0;
  std::vector<Eigen::VectorXd> delta_plus;   // levels 0..q (additive layer)
  std::vector<Eigen::VectorXd> delta_input;  // levels 0..q (input layer)
  std::vector<Eigen::VectorXd> delta_conv;   // levels 0..s-1+q (convolution layer)

  // Delta of the reshape layer at conv level l: delta_conv(l) w_eff^T.
  Eigen::MatrixXd delta_reshape(int l, const Eigen::VectorXd& w_eff) const;
  // Delta of the assignment layer: the reshape delta flattened row-major.
  Eigen::VectorXd delta_assignment(int l, const Eigen::VectorXd& w_eff) const;
};

// Recurrent loss J = sum_tau sum_{q=0}^{Q-1} 1/2 || zeta_plus - u_tau ||^2,
// where each trajectory is kickstarted from the case's first s exact levels
// and stepped Q times with the current weights.
double loss(const StencilWeights& omega, const TrainingSet& training, const AbScheme& scheme,
            const Grid& grid, const PdeProblem& problem, double h_t, int Q);

// Loss plus its exact gradient, backpropagated through all Q recurrent
// steps and the kickstart convolutions, assembled as
//   [-(c/h_x) I; (nu/h_x^2) I] sum_{tau,q,l} Z^R(l)^T delta_conv(l).
LossGradient backprop(const StencilWeights& omega, const TrainingSet& training,
                      const AbScheme& scheme, const Grid& grid, const PdeProblem& problem,
                      double h_t, int Q);

// Objective pair consumed by the optimizer: a cheap value-only evaluation
// for line searches and the full evaluation for accepted steps.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<LossGradient(const Eigen::VectorXd&)> value_and_grad;
};

Objective make_training_objective(TrainingSet training, AbScheme scheme, Grid grid,
                                  PdeProblem problem, double h_t, int Q);

enum class OptimizerStatus {
  GradientConverged,  // gradient norm fell below grad_tol
  MaxIterations,      // kappa_max accepted steps taken
  LineSearchFailed,   // rho shrank below rho_min without strict decrease
};

const char* to_string(OptimizerStatus status);

struct IterationRecord {
  int kappa;
  double J;
  double grad_norm;
  double rho;  // accepted step length (0 for the initial record)
  Eigen::VectorXd omega;
};

struct BfgsOptions {
  int kappa_max = 1000;
  double rho_min = 1e-5;
  double grad_tol = 1e-12;
  double curvature_tol = 1e-12;  // skip H update when s.y <= tol |s||y|
  std::function<void(const IterationRecord&)> logger;  // optional
};

struct OptimizerState {
  Eigen::VectorXd omega;          // best iterate (J history is strictly decreasing)
  Eigen::MatrixXd H;              // final approximate Hessian
  int kappa = 0;                  // accepted iterations
  double rho = 0.0;               // last accepted line-search parameter
  std::vector<double> J_history;  // J at the initial point and each accepted step
  double grad_norm = 0.0;
  OptimizerStatus status = OptimizerStatus::MaxIterations;
};

// BFGS with H^0 = ||grad J(omega^0)|| I and backtracking line search that
// accepts on strict decrease only (rho <- 3/4 rho until J drops, failure
// below rho_min). Stops on gradient norm, kappa_max, or line-search failure.
OptimizerState bfgs_minimize(const Eigen::VectorXd& initial, const Objective& objective,
                             const BfgsOptions& options);

}  // namespace stencilnet
