#include "stencilnet/network.hpp"

#include <stdexcept>

namespace stencilnet {

GatherMap::GatherMap(const Grid& grid) {
  const int M = grid.nodes();
  const int n = grid.n;
  const int half = grid.half_width();
  idx_.resize(M, n);
  for (int k = 0; k < M; ++k) {
    for (int j = 0; j < n; ++j) {
      int src = k + j - half;
      src %= M;
      if (src < 0) src += M;
      idx_(k, j) = src;
    }
  }
}

Eigen::VectorXd assignment(const GatherMap& map, const Eigen::VectorXd& u) {
  const int M = map.rows();
  const int n = map.cols();
  if (u.size() != M) throw std::invalid_argument("assignment: vector length must be N+1");
  Eigen::VectorXd out(static_cast<Eigen::Index>(M) * n);
  for (int k = 0; k < M; ++k)
    for (int j = 0; j < n; ++j) out[static_cast<Eigen::Index>(k) * n + j] = u[map(k, j)];
  return out;
}

Eigen::MatrixXd reshape(const Eigen::VectorXd& assigned, int n) {
  if (n < 1 || assigned.size() % n != 0)
    throw std::invalid_argument("reshape: length must be a multiple of n");
  const int M = static_cast<int>(assigned.size()) / n;
  Eigen::MatrixXd Z(M, n);
  for (int k = 0; k < M; ++k)
    for (int j = 0; j < n; ++j) Z(k, j) = assigned[static_cast<Eigen::Index>(k) * n + j];
  return Z;
}

Eigen::MatrixXd gather_rows(const GatherMap& map, const Eigen::VectorXd& u) {
  const int M = map.rows();
  const int n = map.cols();
  if (u.size() != M) throw std::invalid_argument("gather_rows: vector length must be N+1");
  Eigen::MatrixXd Z(M, n);
  for (int k = 0; k < M; ++k)
    for (int j = 0; j < n; ++j) Z(k, j) = u[map(k, j)];
  return Z;
}

Eigen::VectorXd convolution(const Eigen::MatrixXd& Z, const StencilWeights& weights,
                            const PdeProblem& problem, const Grid& grid) {
  if (Z.cols() != grid.n || weights.n() != grid.n || Z.rows() != grid.nodes())
    throw std::invalid_argument("convolution: shape mismatch");
  const double hx = grid.h_x();
  const Eigen::VectorXd w =
      (-(problem.c / hx)) * weights.w1 + (problem.nu / (hx * hx)) * weights.w2;

  const int M = static_cast<int>(Z.rows());
  const int n = grid.n;
  Eigen::VectorXd y(M);
  for (int k = 0; k < M; ++k) {
    // Same ordered kernel as apply_operator, so the two paths agree bitwise.
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += Z(k, j) * w[j];
    y[k] = acc;
  }
  return y;
}

TrajectoryState TrajectoryState::kickstart(const std::vector<Eigen::VectorXd>& samples,
                                           const DiffOperator& op) {
  if (samples.empty())
    throw std::invalid_argument("kickstart: at least one seed level required");
  TrajectoryState state(op);
  state.zeta_plus_.reserve(samples.size());
  state.zeta_conv_.reserve(samples.size());
  for (const auto& u : samples) {
    if (u.size() != op.grid.nodes())
      throw std::invalid_argument("kickstart: seed length must be N+1");
    state.zeta_plus_.push_back(u);
    state.zeta_conv_.push_back(convolution(gather_rows(state.map_, u), op.weights,
                                           PdeProblem(op.c, op.nu, op.grid.period), op.grid));
  }
  state.head_ = static_cast<int>(samples.size()) - 1;
  state.level_ = static_cast<int>(samples.size()) - 1;
  return state;
}

const Eigen::VectorXd& TrajectoryState::state_back(int l) const {
  const int s = this->s();
  if (l < 0 || l >= s) throw std::out_of_range("TrajectoryState: history index");
  return zeta_plus_[(head_ - l + s) % s];
}

const Eigen::VectorXd& TrajectoryState::conv_back(int l) const {
  const int s = this->s();
  if (l < 0 || l >= s) throw std::out_of_range("TrajectoryState: history index");
  return zeta_conv_[(head_ - l + s) % s];
}

void TrajectoryState::push(Eigen::VectorXd zp, Eigen::VectorXd zc) {
  const int s = this->s();
  head_ = (head_ + 1) % s;
  zeta_plus_[head_] = std::move(zp);
  zeta_conv_[head_] = std::move(zc);
  ++level_;
}

Eigen::VectorXd additive(TrajectoryState& state, const AbScheme& scheme, double h_t) {
  const int s = scheme.s;
  if (state.s() != s)
    throw std::invalid_argument("additive: state history size must equal scheme steps");

  Eigen::VectorXd next = state.state_back(0);
  for (int j = 0; j < s; ++j) next += (h_t * scheme.alpha[j]) * state.conv_back(j);

  Eigen::VectorXd conv =
      convolution(gather_rows(state.map_, next), state.op_.weights,
                  PdeProblem(state.op_.c, state.op_.nu, state.op_.grid.period), state.op_.grid);
  state.push(next, std::move(conv));
  return next;
}

}  // namespace stencilnet
