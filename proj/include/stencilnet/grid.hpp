#pragma once

#include <stdexcept>

namespace stencilnet {

// Equispaced periodic grid with N+1 nodes x_k = k * period / (N+1),
// k = 0..N, plus the odd neighborhood size n used by local stencils.
// The neighborhood of node k spans offsets -(n-1)/2 .. (n-1)/2 in
// ascending physical coordinate, wrapping periodically at the ends.
struct Grid {
  int N;          // grid has N+1 nodes
  double period;  // spatial period
  int n;          // neighborhood size, odd, 3 <= n <= N

  Grid(int N_, double period_, int n_) : N(N_), period(period_), n(n_) {
    if (N < 2) throw std::invalid_argument("Grid: N must be >= 2");
    if (period <= 0.0) throw std::invalid_argument("Grid: period must be > 0");
    if (n < 3 || n > N) throw std::invalid_argument("Grid: need 3 <= n <= N");
    if (n % 2 == 0) throw std::invalid_argument("Grid: n must be odd");
  }

  int nodes() const { return N + 1; }
  double h_x() const { return period / (N + 1); }
  int half_width() const { return (n - 1) / 2; }
};

}  // namespace stencilnet
