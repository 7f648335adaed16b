#pragma once

// Independent reference computations used as test oracles. Everything here
// deliberately avoids the code paths it is used to check: the Perron oracle is
// a direct nullspace solve, spectral radii come from Jacobi eigenvalues,
// gradients from central differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "privnet/graph.hpp"
#include "privnet/linalg.hpp"

namespace oracles {

using privnet::Matrix;
using privnet::Vector;

// Breadth-first reachability over the undirected skeleton.
inline bool connected(const privnet::Topology& topo) {
  const int n = topo.agents;
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int count = 1;
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop();
    for (int m = 0; m < n; ++m)
      if (!seen[m] && (topo.weights(m, p) > 0.0 || topo.weights(p, m) > 0.0)) {
        seen[m] = 1;
        ++count;
        frontier.push(m);
      }
  }
  return count == n;
}

// Perron vector by direct linear solve: (A - I) q = 0 with the last equation
// replaced by the normalization sum(q) = 1. For a primitive left-stochastic A
// the row dependency of (A - I) is exactly the all-rows sum, so dropping one
// row leaves a well-posed system.
inline Vector perron_nullspace(const Matrix& a) {
  const int n = a.rows();
  Matrix m(n, n);
  Vector b(n, 0.0);
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a(i, j) - (i == j ? 1.0 : 0.0);
  for (int j = 0; j < n; ++j) m(n - 1, j) = 1.0;
  b[n - 1] = 1.0;
  return privnet::solve(m, b);
}

// Spectral radius of a symmetric matrix from its full Jacobi spectrum.
inline double symmetric_spectral_radius(const Matrix& s) {
  Vector eig = privnet::symmetric_eigenvalues(s);
  return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

// Central finite differences of a scalar field.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                         const Vector& w, double h = 1e-5) {
  Vector g(w.size());
  Vector x = w;
  for (size_t k = 0; k < w.size(); ++k) {
    const double save = x[k];
    x[k] = save + h;
    const double fp = f(x);
    x[k] = save - h;
    const double fm = f(x);
    x[k] = save;
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Kolmogorov-Smirnov statistic of a sample against an analytic CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double c = cdf(sample[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

inline double laplace_cdf(double x, double scale) {
  return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

inline double exponential_cdf(double x, double rate) {
  return x < 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
}

inline double uniform01_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

// Ordinary least squares for y ~ a * x + b; returns {a, b}.
inline std::pair<double, double> fit_affine(const Vector& x, const Vector& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace oracles
