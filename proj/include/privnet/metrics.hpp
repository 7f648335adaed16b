#pragma once

// Performance and diagnostic quantities computed from trajectories.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "privnet/learn.hpp"
#include "privnet/objectives.hpp"

namespace privnet {

struct MetricSeries {
  Vector msd_centroid;
  Vector msd_avg;
  Vector disagreement;
};

// ||w_c,i - w_global||^2 per iteration.
inline Vector msd_centroid(const Trajectory& traj, const Vector& w_global) {
  Vector out(traj.centroids.size());
  for (size_t i = 0; i < traj.centroids.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < traj.dimension; ++k) {
      const double d = traj.centroids[i][k] - w_global[k];
      acc += d * d;
    }
    out[i] = acc;
  }
  return out;
}

// (1/P) sum_p ||w_p,i - w_global||^2 per iteration.
inline Vector msd_avg(const Trajectory& traj, const Vector& w_global) {
  Vector out(traj.states.size());
  for (size_t i = 0; i < traj.states.size(); ++i) {
    double acc = 0.0;
    for (int p = 0; p < traj.agents; ++p)
      for (int k = 0; k < traj.dimension; ++k) {
        const double d = traj.states[i][static_cast<size_t>(p) * traj.dimension + k] - w_global[k];
        acc += d * d;
      }
    out[i] = acc / traj.agents;
  }
  return out;
}

// (1/P) sum_p ||w_p,i - w_c,i||^2 per iteration.
inline Vector disagreement(const Trajectory& traj) {
  Vector out(traj.states.size());
  for (size_t i = 0; i < traj.states.size(); ++i) {
    double acc = 0.0;
    for (int p = 0; p < traj.agents; ++p)
      for (int k = 0; k < traj.dimension; ++k) {
        const double d =
            traj.states[i][static_cast<size_t>(p) * traj.dimension + k] - traj.centroids[i][k];
        acc += d * d;
      }
    out[i] = acc / traj.agents;
  }
  return out;
}

inline MetricSeries compute_metrics(const Trajectory& traj, const Vector& w_global) {
  return MetricSeries{msd_centroid(traj, w_global), msd_avg(traj, w_global), disagreement(traj)};
}

// Mean over the trailing window of one series.
inline double steady_state(const Vector& series, int window) {
  if (window < 1 || window > static_cast<int>(series.size()))
    throw std::invalid_argument("steady_state: window must lie in [1, steps]");
  double acc = 0.0;
  for (size_t i = series.size() - window; i < series.size(); ++i) acc += series[i];
  return acc / window;
}

// Mean over the trailing window, then over replicas (order-independent).
inline double steady_state(const std::vector<Vector>& replica_series, int window) {
  if (replica_series.empty()) throw std::invalid_argument("steady_state: no replicas");
  double acc = 0.0;
  for (const Vector& s : replica_series) acc += steady_state(s, window);
  return acc / replica_series.size();
}

// Empirical second moment of the gradient noise s_p = stochastic - full
// gradient at a fixed point w.
inline double gradient_noise_moment(const Problem& problem, int p, const Vector& w, int trials,
                                    Rng& rng) {
  if (trials < 1) throw std::invalid_argument("gradient_noise_moment: trials must be >= 1");
  const Vector g_full = full_gradient(problem, p, w);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector g = stochastic_gradient(problem, p, w, rng);
    double n = 0.0;
    for (size_t k = 0; k < g.size(); ++k) {
      const double d = g[k] - g_full[k];
      n += d * d;
    }
    acc += n;
  }
  return acc / trials;
}

// Misclassification fraction of sign(u^T w) against +-1 labels.
inline double test_error(const Matrix& features, const Vector& labels, const Vector& w) {
  if (features.rows() == 0) throw std::invalid_argument("test_error: empty holdout");
  if (features.cols() != static_cast<int>(w.size()))
    throw std::invalid_argument("test_error: dimension mismatch");
  int wrong = 0;
  for (int i = 0; i < features.rows(); ++i) {
    double margin = 0.0;
    for (int k = 0; k < features.cols(); ++k) margin += features(i, k) * w[k];
    const double pred = margin >= 0.0 ? 1.0 : -1.0;
    if (pred != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / features.rows();
}

inline double test_error(const Problem& problem, const Vector& w) {
  if (problem.kind != ProblemKind::logistic)
    throw std::invalid_argument("test_error: needs a classification problem with a holdout");
  return test_error(problem.holdout_features, problem.holdout_labels, w);
}

inline double db10(double x) { return 10.0 * std::log10(std::max(x, 1e-300)); }

}  // namespace privnet
