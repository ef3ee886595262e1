#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "stencilnet/fourier.hpp"
#include "stencilnet/pde.hpp"

namespace stencilnet {

// T exact sampled-solution trajectories used as training data. Each case
// holds (N+1) x (s+Q) values: grid samples of a random-coefficient exact
// solution at times l*h_t, l = 0..s+Q-1.
struct TrainingSet {
  std::vector<Eigen::MatrixXd> cases;
  int decay_p = 0;
  std::uint64_t seed = 0;
};

// For each case tau: draw b_hat ~ Uniform(-1,1) for eta = 0..(N-1)/2 in
// ascending order from the per-case stream, set
//   b_0 = b_hat_0,   b_eta = b_{-eta} = eta^{-p} b_hat_eta  (eta >= 1),
// then fill s+Q exact time levels. p must be one of {0,2,4,8}.
TrainingSet generate_training_set(const PdeProblem& problem, int N, double h_t, int s, int Q,
                                  int T, int p, std::uint64_t seed);

}  // namespace stencilnet
