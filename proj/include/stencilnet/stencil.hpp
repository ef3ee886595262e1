#pragma once

#include <Eigen/Dense>

#include "stencilnet/grid.hpp"
#include "stencilnet/pde.hpp"

namespace stencilnet {

// Weights of the collocation derivative of the degree-(n-1) Lagrange
// interpolant on offsets -(n-1)/2..(n-1)/2 at unit spacing, evaluated at
// the center node. derivative_order is 1 or 2. Throws on even n.
Eigen::VectorXd lagrange_collocation_weights(int n, int derivative_order);

// The 2n trainable parameters: w1 scales as a first derivative at unit
// spacing, w2 as a second derivative. Packed order is [w1; w2].
struct StencilWeights {
  Eigen::VectorXd w1;
  Eigen::VectorXd w2;

  StencilWeights() = default;
  StencilWeights(Eigen::VectorXd w1_, Eigen::VectorXd w2_);

  int n() const { return static_cast<int>(w1.size()); }

  // Classical centered-difference initialization for odd n.
  static StencilWeights centered(int n);

  // Three-point second-order stencils zero-padded to odd width n. Training
  // starts here for every n, so wider stencils begin as the same operator.
  static StencilWeights second_order_padded(int n);

  Eigen::VectorXd packed() const;
  static StencilWeights from_packed(const Eigen::VectorXd& omega);
};

// Circulant differentiation operator: the action of the matrix whose row k
// carries the effective stencil over node k's neighborhood. Stored and
// applied as a stencil; dense assembly exists only in test oracles.
struct DiffOperator {
  Grid grid;
  StencilWeights weights;
  double c;
  double nu;

  DiffOperator(Grid grid_, StencilWeights weights_, double c_, double nu_);

  // w = -(c/h_x) w1 + (nu/h_x^2) w2, indexed by ascending offset.
  Eigen::VectorXd effective_stencil() const;
};

// y_k = sum_j w_j u_{(k+j-half) mod (N+1)}. Throws on length mismatch.
Eigen::VectorXd apply_operator(const DiffOperator& op, const Eigen::VectorXd& u);

// lambda_eta = sum_{j=-h}^{h} w_{j+h} e^{i 2 pi j eta / (N+1)} for
// eta = -floor(N/2) .. ceil(N/2), ascending (N+1 values; entry i holds
// eta = i - floor(N/2)). This is the complete circulant spectrum.
Eigen::VectorXcd operator_eigenvalues(const DiffOperator& op);

}  // namespace stencilnet
