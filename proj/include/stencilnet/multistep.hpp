#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stencilnet/stencil.hpp"

namespace stencilnet {

// Adams-Bashforth coefficients alpha_0..alpha_{s-1} for 1 <= s <= 8,
// computed by exact rational integration of the Lagrange basis and
// converted to doubles at the end. Consistency sum(alpha) = 1 holds in
// the rationals.
Eigen::VectorXd ab_coefficients(int s);

// The same coefficients as reduced fractions {numerator, denominator},
// denominator > 0. Exposed so exact identities can be tested exactly.
std::vector<std::pair<std::int64_t, std::int64_t>> ab_coefficients_exact(int s);

struct AbScheme {
  int s;
  Eigen::VectorXd alpha;  // alpha_0 .. alpha_{s-1}

  explicit AbScheme(int s_) : s(s_), alpha(ab_coefficients(s_)) {}
};

// One AB-s step: u(t+h_t) = u(t) + h_t sum_l alpha_l D u(t - l h_t).
// history holds the last s states, newest first: history[l] = u(t - l h_t).
Eigen::VectorXd ab_step(const AbScheme& scheme, const DiffOperator& op,
                        const std::vector<Eigen::VectorXd>& history, double h_t);

// Point of the stability-region boundary at angle theta: the scaled
// eigenvalue xi for which zeta = e^{i theta} is a root of the AB-s
// characteristic polynomial,
//   xi(theta) = (e^{i s theta} - e^{i (s-1) theta})
//             / sum_l alpha_l e^{i (s-1-l) theta}.
// Throws std::domain_error if the denominator vanishes numerically.
std::complex<double> stability_boundary(const AbScheme& scheme, double theta);

// Root condition for the characteristic polynomial
//   zeta^s - (1 + alpha_0 xi) zeta^{s-1} - sum_{j>=1} alpha_j xi zeta^{s-1-j}.
// True iff all roots satisfy |zeta| <= 1+tol, where any root within tol of
// another (numerically multiple) must satisfy |zeta| < 1-tol.
bool is_stable(const AbScheme& scheme, std::complex<double> xi, double tol = 1e-12);

// Largest h_t (relative tolerance tol_rel) such that every operator
// eigenvalue scaled by h_t passes is_stable; nullopt when no positive h_t
// works (e.g. purely imaginary spectrum under AB-2). Bisection on
// [0, 10/max|lambda|] with bracket growth, then a verification pass at
// 0.9 h* that rejects brackets admitted only by the root-modulus slack.
std::optional<double> critical_timestep(const AbScheme& scheme, const DiffOperator& op,
                                        double tol_rel = 1e-6);

// Uniformly sampled boundary trace, theta_k = 2 pi k / samples.
// boundary_samples[0] is exactly 0.
struct StabilityProbe {
  AbScheme scheme;
  std::vector<std::complex<double>> boundary_samples;
  double tolerance;

  static StabilityProbe make(const AbScheme& scheme, int samples, double tol = 1e-12);
};

}  // namespace stencilnet
