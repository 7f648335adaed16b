#pragma once

// The generalized distributed recursion
//
//   phi_p = sum_m a1_mp (w_m + g1_mp)
//   psi_p = sum_m a0_mp (phi_m + g0_mp) - mu * grad_p(phi_p)
//   w_p   = sum_m a2_mp (psi_m + g2_mp)
//
// which reduces to consensus, CTA and ATC diffusion under the presets, and to
// the non-private algorithm with all-zero noise.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "privnet/graph.hpp"
#include "privnet/objectives.hpp"
#include "privnet/privacy.hpp"

namespace privnet {

enum class GradientMode { stochastic, full };

struct RunConfig {
  double mu = 0.1;
  int steps = 100;
  Preset preset = Preset::atc;
  NoisePlan noise;
  GradientMode gradient_mode = GradientMode::stochastic;
  uint64_t seed = 0;
  int replicas = 1;
};

inline void validate_run_config(const RunConfig& c) {
  if (!(c.mu > 0.0)) throw std::invalid_argument("run config: mu must be > 0");
  if (c.steps < 1) throw std::invalid_argument("run config: steps must be >= 1");
  if (c.replicas < 1) throw std::invalid_argument("run config: replicas must be >= 1");
  validate_plan(c.noise);
}

struct DivergenceError : std::runtime_error {
  int iteration;
  explicit DivergenceError(int it)
      : std::runtime_error("trajectory diverged at iteration " + std::to_string(it)),
        iteration(it) {}
};

// Stacked models and centroid per iteration; states[i] holds W_(i+1) flattened
// agent-major (series length equals the step count, W_0 = 0 is implicit).
struct Trajectory {
  int agents = 0;
  int dimension = 0;
  std::vector<Vector> states;
  std::vector<Vector> centroids;
};

inline Vector centroid(const Vector& stacked, const Vector& q, int dimension) {
  Vector c(dimension, 0.0);
  for (size_t p = 0; p < q.size(); ++p)
    for (int k = 0; k < dimension; ++k) c[k] += q[p] * stacked[p * dimension + k];
  return c;
}

namespace detail {

// One combine stage: out_p = sum over in-edges of weight * (in_m + noise).
inline void combine_stage(const StageLinks& s, const std::vector<double>& noise, int agents,
                          int dimension, const Vector& in, Vector& out) {
  for (int p = 0; p < agents; ++p) {
    double* op = out.data() + static_cast<size_t>(p) * dimension;
    for (int k = 0; k < dimension; ++k) op[k] = 0.0;
    for (int e = s.recv_offsets[p]; e < s.recv_offsets[p + 1]; ++e) {
      const double w = s.weights[e];
      const double* im = in.data() + static_cast<size_t>(s.senders[e]) * dimension;
      if (noise.empty()) {
        for (int k = 0; k < dimension; ++k) op[k] += w * im[k];
      } else {
        const double* g = noise.data() + static_cast<size_t>(e) * dimension;
        for (int k = 0; k < dimension; ++k) op[k] += w * (im[k] + g[k]);
      }
    }
  }
}

}  // namespace detail

// One step of the (privatized) generalized recursion. The gradient callback
// receives (agent, phi_p) and must return the gradient approximation used for
// this iteration.
inline Vector step(const Vector& w_prev, const CommPattern& pattern, int dimension, double mu,
                   const LinkNoise& noise,
                   const std::function<Vector(int, const Vector&)>& gradient) {
  const int agents = pattern.agents;
  if (static_cast<int>(w_prev.size()) != agents * dimension)
    throw std::invalid_argument("step: state size mismatch");

  Vector phi;
  if (pattern.stage[1].identity)
    phi = w_prev;
  else {
    phi.resize(w_prev.size());
    detail::combine_stage(pattern.stage[1], noise.stage[1], agents, dimension, w_prev, phi);
  }

  Vector psi(w_prev.size());
  if (pattern.stage[0].identity)
    psi = phi;
  else
    detail::combine_stage(pattern.stage[0], noise.stage[0], agents, dimension, phi, psi);
  Vector phi_p(dimension);
  for (int p = 0; p < agents; ++p) {
    for (int k = 0; k < dimension; ++k) phi_p[k] = phi[static_cast<size_t>(p) * dimension + k];
    const Vector g = gradient(p, phi_p);
    for (int k = 0; k < dimension; ++k) psi[static_cast<size_t>(p) * dimension + k] -= mu * g[k];
  }

  if (pattern.stage[2].identity) return psi;
  Vector w_next(w_prev.size());
  detail::combine_stage(pattern.stage[2], noise.stage[2], agents, dimension, psi, w_next);
  return w_next;
}

// Index of the datum agent p samples at iteration i. A pure function of
// (seed, p, i): paired runs with equal seeds share sampling paths no matter
// which noise scheme they carry.
inline int sample_index_at(uint64_t seed, int p, int i, int samples) {
  return static_cast<int>(derive_seed(seed, kStreamSampling, static_cast<uint64_t>(p),
                                      static_cast<uint64_t>(i)) %
                          static_cast<uint64_t>(samples));
}

// Runs the recursion from W_0 = 0 with fresh noise each iteration. Noise and
// data sampling use disjoint streams derived from the seed. Any coordinate
// exceeding 1e12 in magnitude aborts with the iteration index.
inline Trajectory run(const RunConfig& config, const CombinationTriple& triple,
                      const Topology& topo, const Problem& problem) {
  validate_run_config(config);
  const int agents = problem.agents;
  const int dim = problem.dimension;
  if (triple.a0.rows() != agents)
    throw std::invalid_argument("run: triple and problem disagree on agent count");

  const CommPattern pattern = build_comm_pattern(triple);
  Rng noise_rng(derive_seed(config.seed, kStreamNoise));
  LinkNoise noise;
  noise.reset(pattern, dim);  // stays all-empty buffers for scheme none

  std::vector<NeighbourhoodPartition> partitions;
  if (config.noise.scheme == Scheme::local_graph_homomorphic)
    partitions = make_partitions(topo, config.noise);

  Trajectory traj;
  traj.agents = agents;
  traj.dimension = dim;
  traj.states.reserve(config.steps);
  traj.centroids.reserve(config.steps);

  Vector w(static_cast<size_t>(agents) * dim, 0.0);
  for (int i = 1; i <= config.steps; ++i) {
    switch (config.noise.scheme) {
      case Scheme::none:
        break;
      case Scheme::random:
        random_noise(pattern, dim, config.noise.sigma_g2, noise_rng, noise);
        break;
      case Scheme::graph_homomorphic:
        graph_homomorphic_noise(pattern, triple, dim, config.noise.sigma_g2,
                                config.noise.gh_variant, noise_rng, noise);
        break;
      case Scheme::local_graph_homomorphic:
        local_gh_noise(pattern, topo, partitions, dim, config.noise.sigma_g2, noise_rng, noise);
        break;
    }
    auto gradient = [&](int p, const Vector& at) {
      if (config.gradient_mode == GradientMode::full) return full_gradient(problem, p, at);
      return sample_gradient(problem, p, at,
                             sample_index_at(config.seed, p, i, problem.samples(p)));
    };
    w = step(w, pattern, dim, config.mu, noise, gradient);
    for (double x : w)
      if (!(std::abs(x) <= 1e12)) throw DivergenceError(i);
    traj.states.push_back(w);
    traj.centroids.push_back(centroid(w, triple.q, dim));
  }
  return traj;
}

}  // namespace privnet
