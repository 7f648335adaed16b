#pragma once

// Per-agent risks, synthetic data generation, gradient oracles and
// closed-form minimizers.
//
// Ridge regression uses the loss (d - u^T w)^2 + ridge * ||w||^2 without a
// one-half factor; all gradients and closed forms follow that convention.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "privnet/linalg.hpp"
#include "privnet/rng.hpp"

namespace privnet {

enum class ProblemKind { ridge_regression, logistic };

struct AgentData {
  Matrix features;       // one sample per row
  Vector targets;        // regression targets, or +-1 labels for logistic
  double noise_std = 0;  // observation noise level used at generation time
  Matrix second_moment;  // (1/N) sum u u^T
  Vector cross_moment;   // (1/N) sum d u
};

struct Problem {
  ProblemKind kind = ProblemKind::ridge_regression;
  int agents = 0;
  int dimension = 0;
  double ridge = 0.0;
  std::vector<AgentData> data;
  double nu = 0.0;     // smallest Hessian eigenvalue across agents
  double delta = 0.0;  // largest Hessian eigenvalue across agents
  Vector w_star;       // generative model, when known
  Vector w_global;     // minimizer of the uniform average of the risks
  std::vector<Vector> w_local;  // per-agent minimizers (ridge only)
  // held-out set for classification problems
  Matrix holdout_features;
  Vector holdout_labels;

  int samples(int p) const { return data[p].features.rows(); }
};

inline void check_agent_and_dim(const Problem& prob, int p, const Vector& w) {
  if (p < 0 || p >= prob.agents) throw std::invalid_argument("agent index out of range");
  if (static_cast<int>(w.size()) != prob.dimension)
    throw std::invalid_argument("model dimension mismatch");
}

// Exact gradient of agent p's regularized empirical risk.
inline Vector full_gradient(const Problem& prob, int p, const Vector& w) {
  check_agent_and_dim(prob, p, w);
  const AgentData& d = prob.data[p];
  const int m = prob.dimension;
  Vector g(m, 0.0);
  if (prob.kind == ProblemKind::ridge_regression) {
    // 2 (R_p w - c_p) + 2 ridge w
    Vector rw = d.second_moment * w;
    for (int k = 0; k < m; ++k) g[k] = 2.0 * (rw[k] - d.cross_moment[k]) + 2.0 * prob.ridge * w[k];
  } else {
    const int n = d.features.rows();
    for (int i = 0; i < n; ++i) {
      const double* u = d.features.row(i);
      const double y = d.targets[i];
      double margin = 0.0;
      for (int k = 0; k < m; ++k) margin += u[k] * w[k];
      const double s = 1.0 / (1.0 + std::exp(y * margin));  // sigma(-y u^T w)
      for (int k = 0; k < m; ++k) g[k] -= y * s * u[k];
    }
    for (int k = 0; k < m; ++k) g[k] = g[k] / n + 2.0 * prob.ridge * w[k];
  }
  return g;
}

// Gradient of the loss at one explicitly chosen sample plus the ridge term.
inline Vector sample_gradient(const Problem& prob, int p, const Vector& w, int sample) {
  check_agent_and_dim(prob, p, w);
  const AgentData& d = prob.data[p];
  if (sample < 0 || sample >= d.features.rows())
    throw std::invalid_argument("sample index out of range");
  const int m = prob.dimension;
  const double* u = d.features.row(sample);
  Vector g(m, 0.0);
  double margin = 0.0;
  for (int k = 0; k < m; ++k) margin += u[k] * w[k];
  if (prob.kind == ProblemKind::ridge_regression) {
    const double r = 2.0 * (margin - d.targets[sample]);
    for (int k = 0; k < m; ++k) g[k] = r * u[k] + 2.0 * prob.ridge * w[k];
  } else {
    const double y = d.targets[sample];
    const double s = 1.0 / (1.0 + std::exp(y * margin));
    for (int k = 0; k < m; ++k) g[k] = -y * s * u[k] + 2.0 * prob.ridge * w[k];
  }
  return g;
}

// Gradient at one uniformly drawn sample; unbiased for full_gradient.
inline Vector stochastic_gradient(const Problem& prob, int p, const Vector& w, Rng& rng) {
  const int n = prob.samples(p);
  return sample_gradient(prob, p, w, static_cast<int>(rng.uniform_index(n)));
}

inline Vector ridge_global_minimizer(const Problem& prob) {
  if (prob.kind != ProblemKind::ridge_regression)
    throw std::invalid_argument("ridge_global_minimizer: ridge problems only");
  const int m = prob.dimension;
  Matrix r(m, m);
  Vector c(m, 0.0);
  for (const AgentData& d : prob.data) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) r(i, j) += d.second_moment(i, j);
      c[i] += d.cross_moment[i];
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) r(i, j) /= prob.agents;
    c[i] /= prob.agents;
    r(i, i) += prob.ridge;
  }
  return solve(r, c);  // throws when ridge = 0 and features are rank-deficient
}

inline Vector local_minimizer(const Problem& prob, int p) {
  if (prob.kind != ProblemKind::ridge_regression)
    throw std::invalid_argument("local_minimizer: ridge problems only");
  if (p < 0 || p >= prob.agents) throw std::invalid_argument("agent index out of range");
  const int m = prob.dimension;
  Matrix r = prob.data[p].second_moment;
  for (int i = 0; i < m; ++i) r(i, i) += prob.ridge;
  return solve(r, prob.data[p].cross_moment);
}

// Tightest valid model-drift bound: max_p ||w_global - w_local[p]||.
inline double model_drift(const Problem& prob) {
  double xi = 0.0;
  for (const Vector& wl : prob.w_local) {
    double acc = 0.0;
    for (int k = 0; k < prob.dimension; ++k) {
      const double d = prob.w_global[k] - wl[k];
      acc += d * d;
    }
    xi = std::max(xi, std::sqrt(acc));
  }
  return xi;
}

namespace detail {

inline void fill_moments(AgentData& d) {
  const int n = d.features.rows();
  const int m = d.features.cols();
  d.second_moment = Matrix(m, m);
  d.cross_moment = Vector(m, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* u = d.features.row(i);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) d.second_moment(a, b) += u[a] * u[b];
      d.cross_moment[a] += d.targets[i] * u[a];
    }
  }
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) d.second_moment(a, b) /= n;
    d.cross_moment[a] /= n;
  }
}

inline void fill_ridge_derived(Problem& prob) {
  prob.w_global = ridge_global_minimizer(prob);
  prob.w_local.resize(prob.agents);
  prob.nu = 0.0;
  prob.delta = 0.0;
  for (int p = 0; p < prob.agents; ++p) {
    prob.w_local[p] = local_minimizer(prob, p);
    Matrix h = prob.data[p].second_moment;  // Hessian = 2 (R_p + ridge I)
    for (int i = 0; i < prob.dimension; ++i) h(i, i) += prob.ridge;
    for (auto& x : h.data()) x *= 2.0;
    Vector eig = symmetric_eigenvalues(h);
    if (p == 0 || eig.front() < prob.nu) prob.nu = eig.front();
    if (p == 0 || eig.back() > prob.delta) prob.delta = eig.back();
  }
}

}  // namespace detail

// Ridge problem from raw per-agent data. Derived quantities (minimizers,
// curvature bounds) are filled on request so that rank-deficient instances can
// still be constructed and probed.
inline Problem make_ridge_problem(std::vector<Matrix> features, std::vector<Vector> targets,
                                  double ridge, bool fill_derived = true) {
  if (features.empty() || features.size() != targets.size())
    throw std::invalid_argument("make_ridge_problem: inconsistent agent data");
  Problem prob;
  prob.kind = ProblemKind::ridge_regression;
  prob.agents = static_cast<int>(features.size());
  prob.dimension = features.front().cols();
  prob.ridge = ridge;
  prob.data.resize(prob.agents);
  for (int p = 0; p < prob.agents; ++p) {
    if (features[p].cols() != prob.dimension || features[p].rows() < 1 ||
        features[p].rows() != static_cast<int>(targets[p].size()))
      throw std::invalid_argument("make_ridge_problem: bad agent " + std::to_string(p));
    prob.data[p].features = std::move(features[p]);
    prob.data[p].targets = std::move(targets[p]);
    detail::fill_moments(prob.data[p]);
  }
  if (fill_derived) detail::fill_ridge_derived(prob);
  return prob;
}

// Linear-regression data d = u^T w_star + o with Gaussian features of
// covariance feature_cov and per-agent observation noise levels. Closed-form
// global and local minimizers are filled at construction.
inline Problem generate_regression(int agents, int samples, int dimension,
                                   const Matrix& feature_cov, const Vector& noise_stds,
                                   const Vector& w_star, double ridge, uint64_t seed) {
  if (agents < 1 || samples < 1 || dimension < 1)
    throw std::invalid_argument("generate_regression: bad sizes");
  if (feature_cov.rows() != dimension || feature_cov.cols() != dimension)
    throw std::invalid_argument("generate_regression: feature_cov shape mismatch");
  if (static_cast<int>(noise_stds.size()) != agents)
    throw std::invalid_argument("generate_regression: need one noise level per agent");
  if (static_cast<int>(w_star.size()) != dimension)
    throw std::invalid_argument("generate_regression: w_star dimension mismatch");
  if (ridge < 0.0) throw std::invalid_argument("generate_regression: ridge must be >= 0");
  const Matrix chol = cholesky(feature_cov);  // rejects non-SPD covariances

  Problem prob;
  prob.kind = ProblemKind::ridge_regression;
  prob.agents = agents;
  prob.dimension = dimension;
  prob.ridge = ridge;
  prob.w_star = w_star;
  prob.data.resize(agents);
  for (int p = 0; p < agents; ++p) {
    // Per-agent stream, so one agent's data can be re-drawn independently.
    Rng rng(derive_seed(seed, kStreamData, static_cast<uint64_t>(p), 0));
    AgentData& d = prob.data[p];
    d.noise_std = noise_stds[p];
    d.features = Matrix(samples, dimension);
    d.targets = Vector(samples, 0.0);
    Vector z(dimension);
    for (int i = 0; i < samples; ++i) {
      for (int k = 0; k < dimension; ++k) z[k] = rng.normal();
      double* u = d.features.row(i);
      for (int a = 0; a < dimension; ++a) {
        double acc = 0.0;
        for (int b = 0; b <= a; ++b) acc += chol(a, b) * z[b];
        u[a] = acc;
      }
      double clean = 0.0;
      for (int k = 0; k < dimension; ++k) clean += u[k] * w_star[k];
      d.targets[i] = clean + noise_stds[p] * rng.normal();
    }
    detail::fill_moments(d);
  }
  detail::fill_ridge_derived(prob);
  return prob;
}

// Re-draws the observation noise of a single agent (features kept) and
// refreshes all derived quantities. Produces the "adjacent" problem that the
// sensitivity measurements pair with the original.
inline Problem with_renoised_targets(const Problem& prob, int agent, uint64_t seed) {
  if (prob.kind != ProblemKind::ridge_regression)
    throw std::invalid_argument("with_renoised_targets: ridge problems only");
  if (agent < 0 || agent >= prob.agents)
    throw std::invalid_argument("with_renoised_targets: agent out of range");
  Problem out = prob;
  AgentData& d = out.data[agent];
  Rng rng(derive_seed(seed, kStreamData, static_cast<uint64_t>(agent), 1));
  const int n = d.features.rows();
  for (int i = 0; i < n; ++i) {
    double clean = 0.0;
    for (int k = 0; k < out.dimension; ++k) clean += d.features(i, k) * out.w_star[k];
    d.targets[i] = clean + d.noise_std * rng.normal();
  }
  detail::fill_moments(d);
  detail::fill_ridge_derived(out);
  return out;
}

// Two-class Gaussian blobs with per-agent feature noise and a ridge-regularized
// logistic loss. The reference model w_global is computed numerically by
// full-gradient descent down to gradient norm 1e-8.
inline Problem generate_logistic(int agents, int samples, int dimension, double class_sep,
                                 const Vector& noise_stds, double ridge, uint64_t seed) {
  if (agents < 1 || samples < 1 || dimension < 1)
    throw std::invalid_argument("generate_logistic: bad sizes");
  if (static_cast<int>(noise_stds.size()) != agents)
    throw std::invalid_argument("generate_logistic: need one noise level per agent");
  if (ridge < 0.0) throw std::invalid_argument("generate_logistic: ridge must be >= 0");
  Problem prob;
  prob.kind = ProblemKind::logistic;
  prob.agents = agents;
  prob.dimension = dimension;
  prob.ridge = ridge;
  prob.data.resize(agents);

  Rng dir_rng(derive_seed(seed, kStreamData, 0xd15c, 0));
  Vector dir(dimension);
  double dn = 0.0;
  for (int k = 0; k < dimension; ++k) {
    dir[k] = dir_rng.normal();
    dn += dir[k] * dir[k];
  }
  dn = std::sqrt(dn);
  for (double& x : dir) x /= dn;

  auto draw_sample = [&](Rng& rng, double agent_noise, double* u, double& label) {
    const double y = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    for (int k = 0; k < dimension; ++k)
      u[k] = y * 0.5 * class_sep * dir[k] + rng.normal() + agent_noise * rng.normal();
    label = y;
  };

  for (int p = 0; p < agents; ++p) {
    Rng rng(derive_seed(seed, kStreamData, static_cast<uint64_t>(p), 2));
    AgentData& d = prob.data[p];
    d.noise_std = noise_stds[p];
    d.features = Matrix(samples, dimension);
    d.targets = Vector(samples, 0.0);
    for (int i = 0; i < samples; ++i)
      draw_sample(rng, noise_stds[p], d.features.row(i), d.targets[i]);
    detail::fill_moments(d);
  }

  const int holdout_n = 2000;
  Rng hrng(derive_seed(seed, kStreamData, 0x401d, 3));
  prob.holdout_features = Matrix(holdout_n, dimension);
  prob.holdout_labels = Vector(holdout_n, 0.0);
  for (int i = 0; i < holdout_n; ++i)
    draw_sample(hrng, 0.0, prob.holdout_features.row(i), prob.holdout_labels[i]);

  // Hessian bounds: logistic curvature is at most (1/4) u u^T plus the ridge.
  prob.nu = 2.0 * ridge;
  double dmax = 0.0;
  for (const AgentData& d : prob.data) {
    Matrix s = d.second_moment;
    Vector eig = symmetric_eigenvalues(s);
    dmax = std::max(dmax, 0.25 * eig.back());
  }
  prob.delta = dmax + 2.0 * ridge;

  // Reference model by plain gradient descent with halving on overshoot.
  Vector w(dimension, 0.0);
  double step = 1.0 / std::max(prob.delta, 1e-12);
  auto aggregate_gradient = [&](const Vector& wv) {
    Vector g(dimension, 0.0);
    for (int p = 0; p < agents; ++p) {
      Vector gp = full_gradient(prob, p, wv);
      for (int k = 0; k < dimension; ++k) g[k] += gp[k] / agents;
    }
    return g;
  };
  double gn_prev = -1.0;
  for (int it = 0; it < 500000; ++it) {
    Vector g = aggregate_gradient(w);
    const double gn = norm2(g);
    if (gn <= 1e-8) break;
    if (gn_prev > 0.0 && gn > gn_prev) step *= 0.5;
    gn_prev = gn;
    axpy(-step, g, w);
  }
  prob.w_global = w;
  return prob;
}

// One row "p n u_1 ... u_M d" per sample; 1-based agent and sample labels.
inline void save_dataset(const Problem& prob, std::ostream& out) {
  char buf[64];
  for (int p = 0; p < prob.agents; ++p) {
    const AgentData& d = prob.data[p];
    for (int i = 0; i < d.features.rows(); ++i) {
      out << (p + 1) << ' ' << (i + 1);
      for (int k = 0; k < prob.dimension; ++k) {
        std::snprintf(buf, sizeof(buf), " %.17g", d.features(i, k));
        out << buf;
      }
      std::snprintf(buf, sizeof(buf), " %.17g\n", d.targets[i]);
      out << buf;
    }
  }
}

inline void save_dataset(const Problem& prob, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  save_dataset(prob, out);
}

}  // namespace privnet
