#include "stencilnet/training_data.hpp"

#include <cmath>
#include <stdexcept>

#include "stencilnet/rng.hpp"

namespace stencilnet {

TrainingSet generate_training_set(const PdeProblem& problem, int N, double h_t, int s, int Q,
                                  int T, int p, std::uint64_t seed) {
  if (p != 0 && p != 2 && p != 4 && p != 8)
    throw std::invalid_argument("generate_training_set: p must be one of {0,2,4,8}");
  if (T < 1) throw std::invalid_argument("generate_training_set: T must be >= 1");
  if (s < 1 || Q < 1) throw std::invalid_argument("generate_training_set: s and Q must be >= 1");
  if (N < 2) throw std::invalid_argument("generate_training_set: N must be >= 2");
  if (h_t <= 0.0) throw std::invalid_argument("generate_training_set: h_t must be > 0");

  const int eta_max = (N - 1) / 2;
  TrainingSet set;
  set.decay_p = p;
  set.seed = seed;
  set.cases.reserve(T);

  for (int tau = 0; tau < T; ++tau) {
    SplitMix64 rng = SplitMix64::for_case(seed, static_cast<std::uint64_t>(tau));
    FourierData data(eta_max);
    data.set_coeff(0, {rng.next_symmetric(), 0.0});
    for (int eta = 1; eta <= eta_max; ++eta) {
      const double amp = rng.next_symmetric() * std::pow(static_cast<double>(eta), -p);
      data.set_coeff(eta, {amp, 0.0});
      data.set_coeff(-eta, {amp, 0.0});
    }
    set.cases.push_back(sample_grid_solution(problem, data, N, h_t, s + Q));
  }
  return set;
}

}  // namespace stencilnet
