#include "stencilnet/training.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace stencilnet {

namespace {

struct ForwardTrace {
  std::vector<Eigen::VectorXd> states;  // u~ at levels 0..s+Q-1
  std::vector<Eigen::VectorXd> convs;   // D u~ at levels 0..s+Q-2
};

// Forward pass retaining every level; the reshape outputs Z^R are index
// views of the states and are re-read through the gather map instead of
// being stored.
ForwardTrace forward_case(const Eigen::MatrixXd& levels, const GatherMap& map,
                          const Eigen::VectorXd& w, const AbScheme& scheme, double h_t,
                          int Q) {
  const int s = scheme.s;
  const int M = static_cast<int>(levels.rows());
  const int n = map.cols();

  const auto conv_of = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd y(M);
    for (int k = 0; k < M; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += u[map(k, j)] * w[j];
      y[k] = acc;
    }
    return y;
  };

  ForwardTrace trace;
  trace.states.reserve(s + Q);
  trace.convs.reserve(s + Q - 1);
  for (int l = 0; l < s; ++l) {
    trace.states.push_back(levels.col(l));
    trace.convs.push_back(conv_of(trace.states.back()));
  }
  for (int q = 0; q < Q; ++q) {
    const int L = s - 1 + q;
    Eigen::VectorXd next = trace.states[L];
    for (int j = 0; j < s; ++j) next += (h_t * scheme.alpha[j]) * trace.convs[L - j];
    trace.states.push_back(std::move(next));
    if (q < Q - 1) trace.convs.push_back(conv_of(trace.states.back()));
  }
  return trace;
}

void check_shapes(const StencilWeights& omega, const TrainingSet& training, const Grid& grid,
                  const AbScheme& scheme, int Q) {
  if (Q < 1) throw std::invalid_argument("loss: Q must be >= 1");
  if (omega.n() != grid.n) throw std::invalid_argument("loss: weights length must equal grid.n");
  for (const auto& levels : training.cases) {
    if (levels.rows() != grid.nodes())
      throw std::invalid_argument("loss: case row count must be N+1");
    if (levels.cols() != scheme.s + Q)
      throw std::invalid_argument("loss: cases must hold exactly s+Q time levels");
  }
}

}  // namespace

Eigen::MatrixXd DeltaField::delta_reshape(int l, const Eigen::VectorXd& w_eff) const {
  return delta_conv.at(static_cast<std::size_t>(l)) * w_eff.transpose();
}

Eigen::VectorXd DeltaField::delta_assignment(int l, const Eigen::VectorXd& w_eff) const {
  const Eigen::MatrixXd dr = delta_reshape(l, w_eff);
  Eigen::VectorXd out(dr.size());
  for (int k = 0; k < dr.rows(); ++k)
    for (int j = 0; j < dr.cols(); ++j) out[static_cast<Eigen::Index>(k) * dr.cols() + j] = dr(k, j);
  return out;
}

double loss(const StencilWeights& omega, const TrainingSet& training, const AbScheme& scheme,
            const Grid& grid, const PdeProblem& problem, double h_t, int Q) {
  check_shapes(omega, training, grid, scheme, Q);
  const GatherMap map(grid);
  const double hx = grid.h_x();
  const Eigen::VectorXd w =
      (-(problem.c / hx)) * omega.w1 + (problem.nu / (hx * hx)) * omega.w2;

  const int s = scheme.s;
  double J = 0.0;
  for (const auto& levels : training.cases) {
    const ForwardTrace trace = forward_case(levels, map, w, scheme, h_t, Q);
    for (int q = 0; q < Q; ++q) {
      const Eigen::VectorXd r = trace.states[s + q] - levels.col(s + q);
      J += 0.5 * r.squaredNorm();
    }
  }
  return J;
}

LossGradient backprop(const StencilWeights& omega, const TrainingSet& training,
                      const AbScheme& scheme, const Grid& grid, const PdeProblem& problem,
                      double h_t, int Q) {
  check_shapes(omega, training, grid, scheme, Q);
  const GatherMap map(grid);
  const int M = grid.nodes();
  const int n = grid.n;
  const int s = scheme.s;
  const double hx = grid.h_x();
  const Eigen::VectorXd w =
      (-(problem.c / hx)) * omega.w1 + (problem.nu / (hx * hx)) * omega.w2;

  double J = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);  // dJ / d w_eff
  Eigen::VectorXd conv_norms = Eigen::VectorXd::Zero(s + Q - 1);

  // Adjoint of the convolution chain: delta_input = D^T delta_conv,
  // scattered through the same gather indices the forward pass read.
  const auto scatter_dt = [&](const Eigen::VectorXd& dc, Eigen::VectorXd& out) {
    for (int k = 0; k < M; ++k) {
      const double dck = dc[k];
      for (int j = 0; j < n; ++j) out[map(k, j)] += dck * w[j];
    }
  };

  for (const auto& levels : training.cases) {
    const ForwardTrace trace = forward_case(levels, map, w, scheme, h_t, Q);
    for (int q = 0; q < Q; ++q) {
      const Eigen::VectorXd r = trace.states[s + q] - levels.col(s + q);
      J += 0.5 * r.squaredNorm();

      DeltaField field;
      field.q = q;
      field.delta_plus.assign(q + 1, Eigen::VectorXd());
      field.delta_input.assign(q + 1, Eigen::VectorXd());
      field.delta_conv.assign(s + q, Eigen::VectorXd());

      // Computed levels, newest prediction first: the additive-layer delta
      // at the output level is the residual; earlier levels receive the
      // input-layer delta of the level above.
      for (int l = q; l >= 0; --l) {
        field.delta_plus[l] = (l == q) ? r : field.delta_input[l + 1];

        Eigen::VectorXd dc = Eigen::VectorXd::Zero(M);
        const int jmax = std::min(s - 1, q - l);
        for (int j = 0; j <= jmax; ++j) dc += (h_t * scheme.alpha[j]) * field.delta_plus[l + j];
        field.delta_conv[s - 1 + l] = std::move(dc);

        field.delta_input[l] = field.delta_plus[l];
        scatter_dt(field.delta_conv[s - 1 + l], field.delta_input[l]);
      }

      // Kickstart convolutions: these levels have no state delta, only the
      // multistep taps that reach computed levels.
      for (int l2 = s - 2; l2 >= 0; --l2) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(M);
        const int jlo = s - l2;
        const int jhi = std::min(s, s + q - l2);
        for (int j = jlo; j <= jhi; ++j)
          acc += scheme.alpha[j - 1] * field.delta_plus[l2 + j - s];
        field.delta_conv[l2] = h_t * acc;
      }

      // Assemble sum_l Z^R(l)^T delta_conv(l), reading Z^R back through the
      // gather map.
      for (int l = 0; l < s + q; ++l) {
        const Eigen::VectorXd& st = trace.states[l];
        const Eigen::VectorXd& dc = field.delta_conv[l];
        conv_norms[l] += dc.norm();
        for (int k = 0; k < M; ++k) {
          const double dck = dc[k];
          for (int j = 0; j < n; ++j) g[j] += st[map(k, j)] * dck;
        }
      }
    }
  }

  LossGradient out;
  out.value = J;
  out.grad.resize(2 * n);
  out.grad << (-(problem.c / hx)) * g, (problem.nu / (hx * hx)) * g;
  out.conv_delta_norms = std::move(conv_norms);
  return out;
}

Objective make_training_objective(TrainingSet training, AbScheme scheme, Grid grid,
                                  PdeProblem problem, double h_t, int Q) {
  auto shared = std::make_shared<TrainingSet>(std::move(training));
  Objective obj;
  obj.value = [=](const Eigen::VectorXd& omega) {
    return loss(StencilWeights::from_packed(omega), *shared, scheme, grid, problem, h_t, Q);
  };
  obj.value_and_grad = [=](const Eigen::VectorXd& omega) {
    return backprop(StencilWeights::from_packed(omega), *shared, scheme, grid, problem, h_t, Q);
  };
  return obj;
}

const char* to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::GradientConverged:
      return "converged";
    case OptimizerStatus::MaxIterations:
      return "max_iterations";
    case OptimizerStatus::LineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

OptimizerState bfgs_minimize(const Eigen::VectorXd& initial, const Objective& objective,
                             const BfgsOptions& options) {
  if (options.kappa_max < 1)
    throw std::invalid_argument("bfgs_minimize: kappa_max must be >= 1");
  if (options.rho_min <= 0.0)
    throw std::invalid_argument("bfgs_minimize: rho_min must be > 0");

  const Eigen::Index dim = initial.size();
  OptimizerState state;
  state.omega = initial;

  LossGradient eval = objective.value_and_grad(state.omega);
  double J = eval.value;
  Eigen::VectorXd grad = eval.grad;
  state.J_history.push_back(J);
  state.grad_norm = grad.norm();
  if (options.logger) options.logger({0, J, state.grad_norm, 0.0, state.omega});

  state.H = state.grad_norm * Eigen::MatrixXd::Identity(dim, dim);
  if (state.grad_norm < options.grad_tol) {
    state.status = OptimizerStatus::GradientConverged;
    return state;
  }

  for (int kappa = 1; kappa <= options.kappa_max; ++kappa) {
    const Eigen::VectorXd sigma = state.H.ldlt().solve(-grad);

    double rho = 1.0;
    bool accepted = false;
    while (rho >= options.rho_min) {
      if (objective.value(state.omega + rho * sigma) < J) {
        accepted = true;
        break;
      }
      rho *= 0.75;
    }
    if (!accepted) {
      state.status = OptimizerStatus::LineSearchFailed;
      return state;  // best-so-far iterate: J decreased at every accepted step
    }

    const Eigen::VectorXd step = rho * sigma;
    const Eigen::VectorXd omega_next = state.omega + step;
    eval = objective.value_and_grad(omega_next);
    const Eigen::VectorXd y = eval.grad - grad;

    const double sy = step.dot(y);
    if (sy > options.curvature_tol * step.norm() * y.norm()) {
      const Eigen::VectorXd Hs = state.H * step;
      state.H -= (Hs * Hs.transpose()) / step.dot(Hs);
      state.H += (y * y.transpose()) / sy;
    }

    state.omega = omega_next;
    J = eval.value;
    grad = eval.grad;
    state.kappa = kappa;
    state.rho = rho;
    state.grad_norm = grad.norm();
    state.J_history.push_back(J);
    if (options.logger) options.logger({kappa, J, state.grad_norm, rho, state.omega});

    if (state.grad_norm < options.grad_tol) {
      state.status = OptimizerStatus::GradientConverged;
      return state;
    }
  }
  state.status = OptimizerStatus::MaxIterations;
  return state;
}

}  // namespace stencilnet
