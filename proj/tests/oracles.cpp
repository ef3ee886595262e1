#include "oracles.hpp"

#include <unistd.h>

#include <atomic>
#include <limits>
#include <random>
#include <stdexcept>

namespace oracle {

namespace {

using Wide = __int128;

std::int64_t narrow(Wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("Fraction: reduced value exceeds 64 bits");
  return static_cast<std::int64_t>(v);
}

Wide gcd_wide(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const Wide r = a % b;
    a = b;
    b = r;
  }
  return a;
}

Fraction reduce(Wide num, Wide den) {
  if (den == 0) throw std::invalid_argument("Fraction: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Wide g = num == 0 ? den : gcd_wide(num, den);
  // Assign members directly: list-init would re-enter the normalizing
  // constructor.
  Fraction out;
  out.num = narrow(num / g);
  out.den = narrow(den / g);
  return out;
}

}  // namespace

Fraction::Fraction(std::int64_t n, std::int64_t d) { *this = reduce(n, d); }

Fraction Fraction::operator+(const Fraction& o) const {
  return reduce(Wide(num) * o.den + Wide(o.num) * den, Wide(den) * o.den);
}

Fraction Fraction::operator-(const Fraction& o) const { return *this + (-o); }

Fraction Fraction::operator*(const Fraction& o) const {
  return reduce(Wide(num) * o.num, Wide(den) * o.den);
}

Fraction Fraction::operator/(const Fraction& o) const {
  if (o.num == 0) throw std::invalid_argument("Fraction: division by zero");
  return reduce(Wide(num) * o.den, Wide(den) * o.num);
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, Fraction(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = out[i + j] + a[i] * b[j];
  return out;
}

Fraction poly_integral_01(const Poly& p) {
  Fraction sum(0);
  for (std::size_t k = 0; k < p.size(); ++k)
    sum = sum + p[k] / Fraction(static_cast<std::int64_t>(k) + 1);
  return sum;
}

std::vector<Fraction> lagrange_weights_exact(int n, int order) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("lagrange_weights_exact: n odd >= 3");
  if (order != 1 && order != 2) throw std::invalid_argument("lagrange_weights_exact: order 1 or 2");
  const int half = (n - 1) / 2;
  std::vector<Fraction> weights;
  weights.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Poly numerator{Fraction(1)};
    Fraction denominator(1);
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      numerator = poly_mul(numerator, Poly{Fraction(-(m - half)), Fraction(1)});
      denominator = denominator * Fraction(j - m);
    }
    // p(x) = sum a_k x^k, so p'(0) = a_1 and p''(0) = 2 a_2.
    const Fraction coeff = numerator[static_cast<std::size_t>(order)];
    weights.push_back(coeff * Fraction(order == 1 ? 1 : 2) / denominator);
  }
  return weights;
}

std::vector<Fraction> ab_alpha_exact(int s) {
  if (s < 1) throw std::invalid_argument("ab_alpha_exact: s >= 1");
  std::vector<Fraction> alpha;
  alpha.reserve(static_cast<std::size_t>(s));
  for (int l = 0; l < s; ++l) {
    Poly numerator{Fraction(1)};
    Fraction denominator(1);
    for (int m = 0; m < s; ++m) {
      if (m == l) continue;
      numerator = poly_mul(numerator, Poly{Fraction(m), Fraction(1)});
      denominator = denominator * Fraction(m - l);
    }
    alpha.push_back(poly_integral_01(numerator) / denominator);
  }
  return alpha;
}

namespace {

int wrap(int i, int nodes) { return ((i % nodes) + nodes) % nodes; }

}  // namespace

Eigen::MatrixXd dense_selector(int N, int n) {
  const int nodes = N + 1;
  const int half = (n - 1) / 2;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n * nodes, nodes);
  for (int k = 0; k < nodes; ++k)
    for (int j = 0; j < n; ++j) U(k * n + j, wrap(k + j - half, nodes)) = 1.0;
  return U;
}

Eigen::MatrixXd dense_row_selector(int N, int n, int j) {
  const int nodes = N + 1;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nodes, n * nodes);
  for (int k = 0; k < nodes; ++k) R(k, k * n + j) = 1.0;
  return R;
}

Eigen::MatrixXd dense_circulant(int N, const Eigen::VectorXd& stencil) {
  const int nodes = N + 1;
  const int n = static_cast<int>(stencil.size());
  const int half = (n - 1) / 2;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 0; k < nodes; ++k)
    for (int j = 0; j < n; ++j) D(k, wrap(k + j - half, nodes)) += stencil[j];
  return D;
}

Eigen::MatrixXd dense_operator(const stencilnet::Grid& grid,
                               const stencilnet::StencilWeights& weights,
                               const stencilnet::PdeProblem& problem) {
  const double h = grid.h_x();
  const Eigen::VectorXd stencil =
      (-problem.c / h) * weights.w1 + (problem.nu / (h * h)) * weights.w2;
  return dense_circulant(grid.N, stencil);
}

Eigen::VectorXd dense_ab_step(const Eigen::MatrixXd& D, const Eigen::VectorXd& alpha,
                              const std::vector<Eigen::VectorXd>& history, double h_t) {
  Eigen::VectorXd next = history[0];
  for (int l = 0; l < alpha.size(); ++l)
    next += h_t * alpha[l] * (D * history[static_cast<std::size_t>(l)]);
  return next;
}

Eigen::MatrixXd dense_companion(const Eigen::MatrixXd& D, const Eigen::VectorXd& alpha,
                                double h_t) {
  const int nodes = static_cast<int>(D.rows());
  const int s = static_cast<int>(alpha.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(s * nodes, s * nodes);
  M.block(0, 0, nodes, nodes) = Eigen::MatrixXd::Identity(nodes, nodes) + h_t * alpha[0] * D;
  for (int l = 1; l < s; ++l) M.block(0, l * nodes, nodes, nodes) = h_t * alpha[l] * D;
  for (int l = 1; l < s; ++l)
    M.block(l * nodes, (l - 1) * nodes, nodes, nodes) = Eigen::MatrixXd::Identity(nodes, nodes);
  return M;
}

Eigen::VectorXd random_vector(int size, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = dist(rng);
  return v;
}

double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x, int i, double eps) {
  Eigen::VectorXd lo = x, hi = x;
  hi[i] += eps;
  lo[i] -= eps;
  return (f(hi) - f(lo)) / (2.0 * eps);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path = std::filesystem::temp_directory_path() /
         ("stenciltest_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" +
          std::to_string(static_cast<unsigned>(::getpid())));
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

}  // namespace oracle
