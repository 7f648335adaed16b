#pragma once

// Graph topologies and combination matrices for networked learning.
//
// Convention: weights(m, p) is the weight agent p applies to messages coming
// from agent m, so every column of the weight matrix sums to one
// (left-stochastic). Neighbourhoods always contain the agent itself and every
// agent keeps a strictly positive self-weight.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "privnet/linalg.hpp"
#include "privnet/rng.hpp"

namespace privnet {

// Symmetric unweighted neighbour structure (self-loops included).
struct Adjacency {
  int agents = 0;
  std::vector<std::vector<int>> neighbours;  // sorted, includes the agent itself
};

struct Topology {
  int agents = 0;
  std::vector<std::vector<int>> neighbours;  // N_p, sorted, includes p
  Matrix weights;                            // (m, p) -> a_mp
};

enum class Preset { consensus, cta, atc, custom };

inline const char* preset_name(Preset p) {
  switch (p) {
    case Preset::consensus: return "consensus";
    case Preset::cta: return "cta";
    case Preset::atc: return "atc";
    case Preset::custom: return "custom";
  }
  return "?";
}

// The three matrices of the generalized recursion together with the Perron
// vector q of their product A1*A0*A2.
struct CombinationTriple {
  Matrix a0, a1, a2;
  Preset preset = Preset::custom;
  Vector q;
};

inline bool is_left_stochastic(const Matrix& a, double tol = 1e-12) {
  if (!a.square()) return false;
  for (int p = 0; p < a.cols(); ++p) {
    double col = 0.0;
    for (int m = 0; m < a.rows(); ++m) {
      if (a(m, p) < 0.0) return false;
      col += a(m, p);
    }
    if (std::abs(col - 1.0) > tol) return false;
  }
  return true;
}

inline bool is_symmetric(const Matrix& a, double tol = 1e-12) {
  if (!a.square()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

// True iff the non-negative left-stochastic matrix is primitive, i.e. some
// power is entrywise positive. Positivity of A^k propagates to A^(k+1) here,
// so checking the single Wielandt exponent P^2 - 2P + 2 by repeated squaring
// of the sparsity pattern decides the question.
inline bool is_primitive(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("is_primitive: matrix not square");
  const int n = a.rows();
  for (double x : a.data())
    if (x < 0.0) throw std::invalid_argument("is_primitive: negative entry");
  if (!is_left_stochastic(a, 1e-9))
    throw std::invalid_argument("is_primitive: matrix not left-stochastic");
  if (n == 1) return a(0, 0) > 0.0;

  using Pattern = std::vector<char>;
  auto mul = [n](const Pattern& x, const Pattern& y) {
    Pattern z(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (!x[static_cast<size_t>(i) * n + k]) continue;
        for (int j = 0; j < n; ++j)
          if (y[static_cast<size_t>(k) * n + j]) z[static_cast<size_t>(i) * n + j] = 1;
      }
    return z;
  };
  auto all_positive = [n](const Pattern& x) {
    for (char c : x)
      if (!c) return false;
    return true;
  };

  Pattern base(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a(i, j) > 0.0) base[static_cast<size_t>(i) * n + j] = 1;

  long target = static_cast<long>(n) * n - 2L * n + 2;
  Pattern result;
  Pattern sq = base;
  bool first = true;
  long e = target;
  while (e > 0) {
    if (e & 1) {
      result = first ? sq : mul(result, sq);
      first = false;
      if (all_positive(result)) return true;
    }
    e >>= 1;
    if (e > 0) sq = mul(sq, sq);
  }
  return all_positive(result);
}

// Perron eigenvector of a primitive left-stochastic matrix by power iteration
// with per-step normalization. Non-convergence within the iteration budget is
// treated as evidence of non-primitivity.
inline Vector perron_vector(const Matrix& a, double tol = 1e-12) {
  if (!a.square()) throw std::invalid_argument("perron_vector: matrix not square");
  const int n = a.rows();
  if (!is_left_stochastic(a, 1e-9))
    throw std::invalid_argument("perron_vector: matrix not left-stochastic");
  Vector q(n, 1.0 / n);
  const int budget = 100000;
  for (int it = 0; it < budget; ++it) {
    Vector next = a * q;
    double sum = 0.0;
    for (double x : next) sum += x;
    for (double& x : next) x /= sum;
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - q[i]));
    q = std::move(next);
    if (diff <= tol) {
      for (double x : q)
        if (!(x > 0.0))
          throw std::runtime_error("perron_vector: non-positive entry (matrix not primitive?)");
      return q;
    }
  }
  throw std::runtime_error("perron_vector: power iteration did not converge; matrix appears non-primitive");
}

// Spectral radius of the deflated matrix A - q 1^T; strictly below one for a
// primitive A with Perron vector q.
inline double jordan_gap(const Matrix& a, const Vector& q) {
  if (!a.square() || a.rows() != static_cast<int>(q.size()))
    throw std::invalid_argument("jordan_gap: shape mismatch");
  Matrix b = a;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) b(i, j) -= q[i];
  return spectral_radius(b);
}

inline void validate_topology(const Topology& t, double tol = 1e-12) {
  const int n = t.agents;
  if (n < 1) throw std::invalid_argument("topology: agent count must be >= 1");
  if (t.weights.rows() != n || t.weights.cols() != n ||
      static_cast<int>(t.neighbours.size()) != n)
    throw std::invalid_argument("topology: inconsistent sizes");
  for (int p = 0; p < n; ++p) {
    if (t.weights(p, p) <= 0.0)
      throw std::invalid_argument("topology: missing self-loop at agent " + std::to_string(p));
    double col = 0.0;
    for (int m = 0; m < n; ++m) {
      const double w = t.weights(m, p);
      if (w < 0.0) throw std::invalid_argument("topology: negative weight");
      bool is_neighbour = false;
      for (int nb : t.neighbours[p])
        if (nb == m) { is_neighbour = true; break; }
      if (w > 0.0 && !is_neighbour)
        throw std::invalid_argument("topology: weight on a non-edge");
      if (w == 0.0 && is_neighbour && m == p)
        throw std::invalid_argument("topology: zero self-weight");
      col += w;
    }
    if (std::abs(col - 1.0) > tol)
      throw std::invalid_argument("topology: column " + std::to_string(p) + " does not sum to 1");
  }
  if (!is_primitive(t.weights))
    throw std::invalid_argument("topology: combination matrix not primitive");
}

// Erdos-Renyi undirected skeleton plus a random spanning chain, so the result
// is always connected; every agent carries a self-loop.
inline Adjacency random_adjacency(int agents, double edge_density, uint64_t seed) {
  if (agents < 1) throw std::invalid_argument("random_adjacency: agents must be >= 1");
  if (!(edge_density > 0.0) || edge_density > 1.0)
    throw std::invalid_argument("random_adjacency: edge density must lie in (0, 1]");
  Rng rng(derive_seed(seed, kStreamData));
  std::vector<std::vector<char>> edge(agents, std::vector<char>(agents, 0));
  for (int i = 0; i < agents; ++i) edge[i][i] = 1;
  for (int i = 0; i < agents; ++i)
    for (int j = i + 1; j < agents; ++j)
      if (rng.uniform01() < edge_density) edge[i][j] = edge[j][i] = 1;
  // Fisher-Yates permutation defines the spanning chain.
  std::vector<int> order(agents);
  for (int i = 0; i < agents; ++i) order[i] = i;
  for (int i = agents - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  for (int k = 0; k + 1 < agents; ++k)
    edge[order[k]][order[k + 1]] = edge[order[k + 1]][order[k]] = 1;

  Adjacency adj;
  adj.agents = agents;
  adj.neighbours.resize(agents);
  for (int p = 0; p < agents; ++p)
    for (int m = 0; m < agents; ++m)
      if (edge[m][p]) adj.neighbours[p].push_back(m);
  return adj;
}

inline void check_adjacency(const Adjacency& adj) {
  const int n = adj.agents;
  if (n < 1 || static_cast<int>(adj.neighbours.size()) != n)
    throw std::invalid_argument("adjacency: inconsistent sizes");
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  for (int p = 0; p < n; ++p)
    for (int m : adj.neighbours[p]) {
      if (m < 0 || m >= n) throw std::invalid_argument("adjacency: index out of range");
      has[p][m] = 1;
    }
  for (int p = 0; p < n; ++p) {
    if (!has[p][p]) throw std::invalid_argument("adjacency: missing self-loop");
    for (int m = 0; m < n; ++m)
      if (has[p][m] != has[m][p])
        throw std::invalid_argument("adjacency: asymmetric neighbour structure");
  }
}

// Metropolis rule: a_mp = 1 / max(|N_m|, |N_p|) for m != p, self-weight takes
// the remaining mass. Doubly stochastic and symmetric, which the
// graph-homomorphic construction of the privacy module relies on.
inline Topology metropolis_weights(const Adjacency& adj) {
  check_adjacency(adj);
  const int n = adj.agents;
  Topology t;
  t.agents = n;
  t.neighbours = adj.neighbours;
  t.weights = Matrix(n, n);
  for (int p = 0; p < n; ++p) {
    double off = 0.0;
    for (int m : adj.neighbours[p]) {
      if (m == p) continue;
      const double w = 1.0 / static_cast<double>(std::max(adj.neighbours[m].size(),
                                                          adj.neighbours[p].size()));
      t.weights(m, p) = w;
      off += w;
    }
    t.weights(p, p) = 1.0 - off;
  }
  validate_topology(t);
  return t;
}

// Uniform averaging rule: a_mp = 1/|N_p|. Left-stochastic but generally not
// doubly stochastic, so the Perron vector is non-uniform.
inline Topology averaging_weights(const Adjacency& adj) {
  check_adjacency(adj);
  const int n = adj.agents;
  Topology t;
  t.agents = n;
  t.neighbours = adj.neighbours;
  t.weights = Matrix(n, n);
  for (int p = 0; p < n; ++p)
    for (int m : adj.neighbours[p])
      t.weights(m, p) = 1.0 / static_cast<double>(adj.neighbours[p].size());
  validate_topology(t);
  return t;
}

inline Topology random_connected_graph(int agents, double edge_density, uint64_t seed) {
  return metropolis_weights(random_adjacency(agents, edge_density, seed));
}

inline CombinationTriple make_triple(const Topology& topo, Preset preset) {
  validate_topology(topo);
  const int n = topo.agents;
  CombinationTriple triple;
  triple.preset = preset;
  triple.a0 = triple.a1 = triple.a2 = Matrix::identity(n);
  switch (preset) {
    case Preset::consensus: triple.a0 = topo.weights; break;
    case Preset::cta: triple.a1 = topo.weights; break;
    case Preset::atc: triple.a2 = topo.weights; break;
    case Preset::custom:
      throw std::invalid_argument("make_triple: use make_custom_triple for custom matrices");
  }
  triple.q = perron_vector(triple.a1 * triple.a0 * triple.a2);
  return triple;
}

inline CombinationTriple make_custom_triple(Matrix a0, Matrix a1, Matrix a2) {
  CombinationTriple triple;
  triple.preset = Preset::custom;
  for (const Matrix* m : {&a0, &a1, &a2})
    if (!is_left_stochastic(*m))
      throw std::invalid_argument("make_custom_triple: stage matrix not left-stochastic");
  triple.a0 = std::move(a0);
  triple.a1 = std::move(a1);
  triple.a2 = std::move(a2);
  triple.q = perron_vector(triple.a1 * triple.a0 * triple.a2);
  return triple;
}

// Plain-text serialization: header line with the agent count, then one line
// "m p a_mp" (1-based agent labels) per nonzero weight.
inline void save_topology(const Topology& t, std::ostream& out) {
  out << t.agents << "\n";
  char buf[64];
  for (int p = 0; p < t.agents; ++p)
    for (int m = 0; m < t.agents; ++m)
      if (t.weights(m, p) > 0.0) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", m + 1, p + 1, t.weights(m, p));
        out << buf;
      }
}

inline void save_topology(const Topology& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_topology: cannot open " + path);
  save_topology(t, out);
}

inline Topology load_topology(std::istream& in) {
  int n = 0;
  if (!(in >> n) || n < 1) throw std::runtime_error("load_topology: bad header");
  Topology t;
  t.agents = n;
  t.neighbours.resize(n);
  t.weights = Matrix(n, n);
  int m = 0, p = 0;
  double w = 0.0;
  while (in >> m >> p >> w) {
    if (m < 1 || m > n || p < 1 || p > n)
      throw std::runtime_error("load_topology: agent label out of range");
    t.weights(m - 1, p - 1) = w;
  }
  for (int pp = 0; pp < n; ++pp)
    for (int mm = 0; mm < n; ++mm)
      if (t.weights(mm, pp) > 0.0) t.neighbours[pp].push_back(mm);
  validate_topology(t, 1e-9);
  return t;
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_topology: cannot open " + path);
  return load_topology(in);
}

}  // namespace privnet
