#pragma once

// Empirical sensitivity: the trajectory change when a single agent's dataset
// is swapped, under fully coupled randomness.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "privnet/learn.hpp"

namespace privnet {

// Runs the paired trajectories with identical seeds (identical noise draws and
// sampling paths) and returns Delta(i) = ||W_i - W'_i|| per iteration.
inline Vector empirical_sensitivity(const Problem& problem, const Problem& problem_prime,
                                    const RunConfig& config, const CombinationTriple& triple,
                                    const Topology& topo) {
  if (problem.agents != problem_prime.agents || problem.dimension != problem_prime.dimension)
    throw std::invalid_argument("empirical_sensitivity: problems must share dimensions");
  const Trajectory a = run(config, triple, topo, problem);
  const Trajectory b = run(config, triple, topo, problem_prime);
  Vector delta(a.states.size());
  for (size_t i = 0; i < a.states.size(); ++i) {
    double acc = 0.0;
    for (size_t k = 0; k < a.states[i].size(); ++k) {
      const double d = a.states[i][k] - b.states[i][k];
      acc += d * d;
    }
    delta[i] = std::sqrt(acc);
  }
  return delta;
}

}  // namespace privnet
