#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "stencilnet/pde.hpp"

namespace stencilnet {

// Truncated Fourier coefficient set b_eta for eta in [-eta_max, eta_max].
// Coefficients outside the retained band read as zero. For real-valued
// represented functions the data is conjugate symmetric.
class FourierData {
 public:
  explicit FourierData(int eta_max);

  int eta_max() const { return eta_max_; }

  std::complex<double> coeff(int eta) const {
    if (eta < -eta_max_ || eta > eta_max_) return {0.0, 0.0};
    return coeffs_[static_cast<std::size_t>(eta + eta_max_)];
  }

  void set_coeff(int eta, std::complex<double> value);

  bool is_conjugate_symmetric(double tol) const;

 private:
  int eta_max_;
  std::vector<std::complex<double>> coeffs_;  // index i <-> eta = i - eta_max
};

// 1-periodic extension of the bump: e^{1/((2(x-floor(x))-1)^2 - 1)} off the
// integers, 0 on them. Smooth everywhere.
double bump_initial(double x);

// Raised when adaptive refinement cannot reach the requested absolute
// tolerance; carries the mode index that failed first.
struct QuadratureError : std::runtime_error {
  int worst_eta;
  QuadratureError(const std::string& what, int eta)
      : std::runtime_error(what), worst_eta(eta) {}
};

// b_eta = (1/P) integral_0^P f(x) e^{-i 2 pi eta x / P} dx for
// |eta| <= eta_max, each to within abstol. Periodic integrands make
// equispaced panel sums spectrally accurate, so the panel count doubles
// until successive refinements agree to abstol for every mode.
FourierData fourier_coefficients(const std::function<double(double)>& f, double period,
                                 int eta_max, double abstol);

// Re sum_eta b_eta(0) e^{i phi_eta (x - c t) - phi_eta^2 nu t},
// phi_eta = 2 pi eta / P, over the retained modes.
double exact_solution(const PdeProblem& problem, const FourierData& data, double x, double t);

// (N+1) x levels matrix; column l holds the exact solution at time l*h_t on
// the grid x_k = k P / (N+1).
Eigen::MatrixXd sample_grid_solution(const PdeProblem& problem, const FourierData& data,
                                     int N, double h_t, int levels);

}  // namespace stencilnet
