#include "stencilnet/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace stencilnet {

FourierData::FourierData(int eta_max) : eta_max_(eta_max) {
  if (eta_max < 0) throw std::invalid_argument("FourierData: eta_max must be >= 0");
  coeffs_.assign(2 * static_cast<std::size_t>(eta_max) + 1, {0.0, 0.0});
}

void FourierData::set_coeff(int eta, std::complex<double> value) {
  if (eta < -eta_max_ || eta > eta_max_)
    throw std::invalid_argument("FourierData: mode index outside retained band");
  coeffs_[static_cast<std::size_t>(eta + eta_max_)] = value;
}

bool FourierData::is_conjugate_symmetric(double tol) const {
  for (int eta = 0; eta <= eta_max_; ++eta)
    if (std::abs(coeff(-eta) - std::conj(coeff(eta))) > tol) return false;
  return true;
}

double bump_initial(double x) {
  const double frac = x - std::floor(x);
  if (frac == 0.0) return 0.0;
  const double t = 2.0 * frac - 1.0;
  const double denom = t * t - 1.0;
  if (denom == 0.0) return 0.0;  // grid fraction exactly 0 handled above; guard rounding
  return std::exp(1.0 / denom);
}

namespace {

// Rectangle-rule mode sums over K equispaced samples of one period:
//   b_eta^(K) = (1/K) sum_k f(P k / K) e^{-i 2 pi eta k / K}.
// The 1/P of the coefficient integral cancels against the P/K panel width.
// Twiddle factors come from a table indexed by (eta k) mod K, computed in
// exact integer arithmetic so every trig argument stays in [0, 2 pi).
// Kahan compensation keeps the summation roundoff independent of K.
std::vector<std::complex<double>> mode_sums(const std::vector<double>& samples, int eta_max) {
  const int K = static_cast<int>(samples.size());

  std::vector<std::complex<double>> table(static_cast<std::size_t>(K));
  for (int m = 0; m < K; ++m) {
    const double phase = -2.0 * M_PI * m / K;
    table[static_cast<std::size_t>(m)] = {std::cos(phase), std::sin(phase)};
  }

  const auto compensated_add = [](double& sum, double& comp, double term) {
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };

  std::vector<std::complex<double>> modes(2 * static_cast<std::size_t>(eta_max) + 1);
  for (int eta = -eta_max; eta <= eta_max; ++eta) {
    double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;
    for (int k = 0; k < K; ++k) {
      long long m = (static_cast<long long>(eta) * k) % K;
      if (m < 0) m += K;
      const std::complex<double> w = table[static_cast<std::size_t>(m)];
      compensated_add(re, re_c, samples[static_cast<std::size_t>(k)] * w.real());
      compensated_add(im, im_c, samples[static_cast<std::size_t>(k)] * w.imag());
    }
    modes[static_cast<std::size_t>(eta + eta_max)] = std::complex<double>(re, im) / double(K);
  }
  return modes;
}

}  // namespace

FourierData fourier_coefficients(const std::function<double(double)>& f, double period,
                                 int eta_max, double abstol) {
  if (eta_max < 0) throw std::invalid_argument("fourier_coefficients: eta_max must be >= 0");
  if (abstol <= 0.0) throw std::invalid_argument("fourier_coefficients: abstol must be > 0");
  if (period <= 0.0) throw std::invalid_argument("fourier_coefficients: period must be > 0");

  // Adaptive panel refinement: every refinement level halves all panels at
  // once, which for periodic integrands converges spectrally. The distance
  // between successive levels certifies every mode's error; one sample set
  // serves all modes.
  const auto sample = [&](int K) {
    std::vector<double> s(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) s[static_cast<std::size_t>(k)] = f(period * k / K);
    return s;
  };

  int K = 64;
  while (K < 2 * (eta_max + 1)) K *= 2;
  constexpr int kMaxSamples = 1 << 17;

  std::vector<std::complex<double>> prev = mode_sums(sample(K), eta_max);
  int worst_eta = 0;
  while (K < kMaxSamples) {
    K *= 2;
    std::vector<std::complex<double>> cur = mode_sums(sample(K), eta_max);

    double worst = -1.0;
    for (int eta = -eta_max; eta <= eta_max; ++eta) {
      const std::size_t i = static_cast<std::size_t>(eta + eta_max);
      const double d = std::abs(cur[i] - prev[i]);
      if (d > worst) {
        worst = d;
        worst_eta = eta;
      }
    }
    if (worst <= abstol) {
      FourierData data(eta_max);
      for (int eta = -eta_max; eta <= eta_max; ++eta)
        data.set_coeff(eta, cur[static_cast<std::size_t>(eta + eta_max)]);
      return data;
    }
    prev = std::move(cur);
  }
  throw QuadratureError("fourier_coefficients: refinement stalled above abstol", worst_eta);
}

double exact_solution(const PdeProblem& problem, const FourierData& data, double x, double t) {
  if (t < 0.0) throw std::invalid_argument("exact_solution: t must be >= 0");
  const double base = 2.0 * M_PI / problem.period;
  double acc = 0.0;
  for (int eta = -data.eta_max(); eta <= data.eta_max(); ++eta) {
    const std::complex<double> b = data.coeff(eta);
    if (b == std::complex<double>(0.0, 0.0)) continue;
    const double phi = base * eta;
    const double phase = phi * (x - problem.c * t);
    const double decay = std::exp(-phi * phi * problem.nu * t);
    acc += decay * (b.real() * std::cos(phase) - b.imag() * std::sin(phase));
  }
  return acc;
}

Eigen::MatrixXd sample_grid_solution(const PdeProblem& problem, const FourierData& data,
                                     int N, double h_t, int levels) {
  if (N < 2) throw std::invalid_argument("sample_grid_solution: N must be >= 2");
  if (h_t <= 0.0) throw std::invalid_argument("sample_grid_solution: h_t must be > 0");
  if (levels < 1) throw std::invalid_argument("sample_grid_solution: levels must be >= 1");

  const int M = N + 1;
  const int modes = 2 * data.eta_max() + 1;
  const double base = 2.0 * M_PI / problem.period;
  const double hx = problem.period / M;

  // E(k, i) = e^{i phi_eta x_k}; column i of the evolved coefficient vector
  // carries b_eta e^{(-i c phi - nu phi^2) t}, so each level is one matvec.
  Eigen::MatrixXcd E(M, modes);
  for (int i = 0; i < modes; ++i) {
    const double phi = base * (i - data.eta_max());
    for (int k = 0; k < M; ++k) {
      const double phase = phi * (hx * k);
      E(k, i) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }

  Eigen::MatrixXd out(M, levels);
  Eigen::VectorXcd evolved(modes);
  for (int l = 0; l < levels; ++l) {
    const double t = h_t * l;
    for (int i = 0; i < modes; ++i) {
      const int eta = i - data.eta_max();
      const double phi = base * eta;
      const double decay = std::exp(-phi * phi * problem.nu * t);
      const double phase = -phi * problem.c * t;
      evolved[i] = data.coeff(eta) * decay *
                   std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out.col(l) = (E * evolved).real();
  }
  return out;
}

}  // namespace stencilnet
