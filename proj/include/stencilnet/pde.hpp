#pragma once

#include <stdexcept>

namespace stencilnet {

// Physical setup of the 1-D periodic advection-diffusion problem
//   u_t = -c u_x + nu u_xx  on  [0, period).
struct PdeProblem {
  double c = 1.0;       // advection speed
  double nu = 0.0;      // diffusion coefficient, >= 0
  double period = 1.0;  // spatial period, > 0

  PdeProblem() = default;
  PdeProblem(double c_, double nu_, double period_) : c(c_), nu(nu_), period(period_) {
    if (nu < 0.0) throw std::invalid_argument("PdeProblem: nu must be >= 0");
    if (period <= 0.0) throw std::invalid_argument("PdeProblem: period must be > 0");
  }
};

}  // namespace stencilnet
