#include "stencilnet/stencil.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace stencilnet {

// Fornberg's recursion for finite-difference weights on arbitrary nodes,
// specialized to the centered integer offsets used here. Generates weights
// for all derivative orders 0..m at x0 = 0; we return the requested row.
Eigen::VectorXd lagrange_collocation_weights(int n, int derivative_order) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("lagrange_collocation_weights: n must be odd and >= 3");
  if (derivative_order != 1 && derivative_order != 2)
    throw std::invalid_argument("lagrange_collocation_weights: derivative_order must be 1 or 2");

  const int m = derivative_order;
  const int half = (n - 1) / 2;
  Eigen::VectorXd alpha(n);
  for (int i = 0; i < n; ++i) alpha[i] = i - half;

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, m + 1);
  delta(0, 0) = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = alpha[i] - alpha[j];
      c2 *= c3;
      if (j == i - 1) {
        // Row i must read row i-1 before this pass overwrites it.
        for (int k = mn; k >= 0; --k) {
          const double prev = (k > 0) ? delta(i - 1, k - 1) : 0.0;
          delta(i, k) = c1 * (k * prev - alpha[i - 1] * delta(i - 1, k)) / c2;
        }
      }
      for (int k = mn; k >= 0; --k) {
        const double prev = (k > 0) ? delta(j, k - 1) : 0.0;
        delta(j, k) = (alpha[i] * delta(j, k) - k * prev) / c3;
      }
    }
    c1 = c2;
  }
  return delta.col(m);
}

StencilWeights::StencilWeights(Eigen::VectorXd w1_, Eigen::VectorXd w2_)
    : w1(std::move(w1_)), w2(std::move(w2_)) {
  if (w1.size() != w2.size())
    throw std::invalid_argument("StencilWeights: w1 and w2 must have equal length");
  if (w1.size() < 3 || w1.size() % 2 == 0)
    throw std::invalid_argument("StencilWeights: length must be odd and >= 3");
  if (!w1.allFinite() || !w2.allFinite())
    throw std::invalid_argument("StencilWeights: entries must be finite");
}

StencilWeights StencilWeights::centered(int n) {
  return StencilWeights(lagrange_collocation_weights(n, 1),
                        lagrange_collocation_weights(n, 2));
}

StencilWeights StencilWeights::second_order_padded(int n) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("StencilWeights::second_order_padded: n must be odd and >= 3");
  Eigen::VectorXd w1 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(n);
  const int h = (n - 1) / 2;
  w1[h - 1] = -0.5;
  w1[h + 1] = 0.5;
  w2[h - 1] = 1.0;
  w2[h] = -2.0;
  w2[h + 1] = 1.0;
  return StencilWeights(std::move(w1), std::move(w2));
}

Eigen::VectorXd StencilWeights::packed() const {
  Eigen::VectorXd omega(2 * n());
  omega << w1, w2;
  return omega;
}

StencilWeights StencilWeights::from_packed(const Eigen::VectorXd& omega) {
  if (omega.size() % 2 != 0)
    throw std::invalid_argument("StencilWeights::from_packed: even length required");
  const int n = static_cast<int>(omega.size()) / 2;
  return StencilWeights(omega.head(n), omega.tail(n));
}

DiffOperator::DiffOperator(Grid grid_, StencilWeights weights_, double c_, double nu_)
    : grid(grid_), weights(std::move(weights_)), c(c_), nu(nu_) {
  if (weights.n() != grid.n)
    throw std::invalid_argument("DiffOperator: weights length must equal grid.n");
  if (nu < 0.0) throw std::invalid_argument("DiffOperator: nu must be >= 0");
}

Eigen::VectorXd DiffOperator::effective_stencil() const {
  const double hx = grid.h_x();
  return (-(c / hx)) * weights.w1 + (nu / (hx * hx)) * weights.w2;
}

Eigen::VectorXd apply_operator(const DiffOperator& op, const Eigen::VectorXd& u) {
  const int M = op.grid.nodes();
  if (u.size() != M)
    throw std::invalid_argument("apply_operator: vector length must be N+1");
  const int n = op.grid.n;
  const int half = op.grid.half_width();
  const Eigen::VectorXd w = op.effective_stencil();

  Eigen::VectorXd y(M);
  for (int k = 0; k < M; ++k) {
    // Ordered accumulation over ascending offsets; the network layer path
    // uses the identical loop so the two are bit-identical.
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      int src = k + j - half;
      src %= M;
      if (src < 0) src += M;
      acc += w[j] * u[src];
    }
    y[k] = acc;
  }
  return y;
}

Eigen::VectorXcd operator_eigenvalues(const DiffOperator& op) {
  const int M = op.grid.nodes();
  const int n = op.grid.n;
  const int half = op.grid.half_width();
  const int N = op.grid.N;
  const Eigen::VectorXd w = op.effective_stencil();

  Eigen::VectorXcd lambda(M);
  const double base = 2.0 * M_PI / M;
  for (int i = 0; i < M; ++i) {
    const int eta = i - N / 2;
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
      const double phase = base * (j - half) * eta;
      acc += w[j] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    lambda[i] = acc;
  }
  return lambda;
}

}  // namespace stencilnet
