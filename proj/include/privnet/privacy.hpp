#pragma once

// The three perturbation schemes, the pairwise key-exchange noise
// construction, and privacy accounting.
//
// Link noise is indexed by (stage, directed edge). Stage j uses the sparsity
// pattern of combination matrix A_j; identity stages carry no noise because no
// message crosses an edge. Self-links carry no noise under the random and
// local schemes; the graph-homomorphic scheme places its balancing term there.

#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "privnet/graph.hpp"
#include "privnet/linalg.hpp"
#include "privnet/rng.hpp"

namespace privnet {

enum class Scheme { none, random, graph_homomorphic, local_graph_homomorphic };
enum class GhVariant { paper_eq41, exact_cancellation };
enum class PartitionRule { parity, alternating };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::random: return "random";
    case Scheme::graph_homomorphic: return "graph_homomorphic";
    case Scheme::local_graph_homomorphic: return "local_graph_homomorphic";
  }
  return "?";
}

struct NoisePlan {
  Scheme scheme = Scheme::none;
  double sigma_g2 = 0.0;
  GhVariant gh_variant = GhVariant::paper_eq41;
  PartitionRule partition_rule = PartitionRule::alternating;
  // Degenerate neighbourhoods under the local scheme fail hard unless this is
  // set, in which case the affected links go out unmasked with a warning.
  bool allow_unmasked_degenerate = false;
};

inline void validate_plan(const NoisePlan& plan) {
  if ((plan.sigma_g2 == 0.0) != (plan.scheme == Scheme::none))
    throw std::invalid_argument("noise plan: sigma_g2 must be 0 exactly for scheme none");
  if (plan.sigma_g2 < 0.0) throw std::invalid_argument("noise plan: sigma_g2 must be >= 0");
}

// ---------------------------------------------------------------------------
// Communication pattern

// Directed-edge layout of one recursion stage, receiver-major. send_* give the
// sender-major view over the same edge ids.
struct StageLinks {
  bool identity = true;
  std::vector<int> recv_offsets;
  std::vector<int> senders;
  std::vector<double> weights;  // weight the receiver applies to this edge
  std::vector<int> send_offsets;
  std::vector<int> receivers;
  std::vector<int> send_edge;

  int edge_count() const { return static_cast<int>(senders.size()); }
};

struct CommPattern {
  int agents = 0;
  std::array<StageLinks, 3> stage;
};

inline StageLinks build_stage_links(const Matrix& a) {
  const int n = a.rows();
  StageLinks s;
  s.identity = true;
  for (int i = 0; i < n && s.identity; ++i)
    for (int j = 0; j < n; ++j)
      if (a(i, j) != (i == j ? 1.0 : 0.0)) {
        s.identity = false;
        break;
      }
  if (s.identity) return s;
  s.recv_offsets.assign(n + 1, 0);
  for (int p = 0; p < n; ++p) {
    for (int m = 0; m < n; ++m)
      if (a(m, p) > 0.0) {
        s.senders.push_back(m);
        s.weights.push_back(a(m, p));
      }
    s.recv_offsets[p + 1] = static_cast<int>(s.senders.size());
  }
  s.send_offsets.assign(n + 1, 0);
  for (int m : s.senders) ++s.send_offsets[m + 1];
  for (int i = 0; i < n; ++i) s.send_offsets[i + 1] += s.send_offsets[i];
  s.receivers.resize(s.senders.size());
  s.send_edge.resize(s.senders.size());
  std::vector<int> cursor(s.send_offsets.begin(), s.send_offsets.end() - 1);
  for (int p = 0; p < n; ++p)
    for (int e = s.recv_offsets[p]; e < s.recv_offsets[p + 1]; ++e) {
      const int m = s.senders[e];
      s.receivers[cursor[m]] = p;
      s.send_edge[cursor[m]] = e;
      ++cursor[m];
    }
  return s;
}

inline CommPattern build_comm_pattern(const CombinationTriple& triple) {
  CommPattern c;
  c.agents = triple.a0.rows();
  c.stage[0] = build_stage_links(triple.a0);
  c.stage[1] = build_stage_links(triple.a1);
  c.stage[2] = build_stage_links(triple.a2);
  return c;
}

// Per-link additive noise for one iteration. Empty stage buffer means no
// noise anywhere on that stage.
struct LinkNoise {
  int dimension = 0;
  std::array<std::vector<double>, 3> stage;

  void reset(const CommPattern& pattern, int dim) {
    dimension = dim;
    for (int j = 0; j < 3; ++j) {
      if (pattern.stage[j].identity)
        stage[j].clear();
      else
        stage[j].assign(static_cast<size_t>(pattern.stage[j].edge_count()) * dim, 0.0);
    }
  }
  double* at(int j, int edge) { return stage[j].data() + static_cast<size_t>(edge) * dimension; }
  const double* at(int j, int edge) const {
    return stage[j].data() + static_cast<size_t>(edge) * dimension;
  }
};

// Stage generation follows execution order of the recursion.
inline constexpr int kStageOrder[3] = {1, 0, 2};

// ---------------------------------------------------------------------------
// Elementary samplers

// Zero-mean Laplace with variance sigma_g2 (scale sigma_g / sqrt(2)).
inline double laplace_sample(double sigma_g2, Rng& rng) {
  if (!(sigma_g2 > 0.0)) throw std::invalid_argument("laplace_sample: sigma_g2 must be > 0");
  const double b = std::sqrt(sigma_g2 / 2.0);
  const double u = rng.uniform01() - 0.5;
  return -b * (u >= 0.0 ? 1.0 : -1.0) * std::log1p(-2.0 * std::abs(u));
}

// ---------------------------------------------------------------------------
// Scheme 1: i.i.d. random perturbations

// Fresh Laplace vectors on every non-self edge of every active stage.
inline void random_noise(const CommPattern& pattern, int dimension, double sigma_g2, Rng& rng,
                         LinkNoise& out) {
  out.reset(pattern, dimension);
  for (int j : kStageOrder) {
    const StageLinks& s = pattern.stage[j];
    if (s.identity) continue;
    for (int p = 0; p < pattern.agents; ++p)
      for (int e = s.recv_offsets[p]; e < s.recv_offsets[p + 1]; ++e) {
        if (s.senders[e] == p) continue;  // self-links stay clean
        double* g = out.at(j, e);
        for (int k = 0; k < dimension; ++k) g[k] = laplace_sample(sigma_g2, rng);
      }
  }
}

// ---------------------------------------------------------------------------
// Scheme 2: graph-homomorphic perturbations

// Each agent draws one base vector per active stage and scales it across its
// outgoing links so that the Perron-weighted network-wide sum vanishes.
//
//   paper_eq41:        g_(p->m) = (a_pm / a_mp) g_p,
//                      g_(p->p) = -(1 - a_pp)/a_pp g_p.
//     Cancels exactly only for symmetric stage matrices; asymmetric input is
//     rejected rather than silently mis-cancelled.
//   exact_cancellation: g_(p->m) = g_p / (q_m a_pm),
//                      g_(p->p) = -(|N_p| - 1) g_p / (q_p a_pp).
//     Per-sender cancellation for arbitrary left-stochastic matrices.
inline void graph_homomorphic_noise(const CommPattern& pattern, const CombinationTriple& triple,
                                    int dimension, double sigma_g2, GhVariant variant, Rng& rng,
                                    LinkNoise& out) {
  out.reset(pattern, dimension);
  const Matrix* mats[3] = {&triple.a0, &triple.a1, &triple.a2};
  std::vector<double> base(dimension);
  for (int j : kStageOrder) {
    const StageLinks& s = pattern.stage[j];
    if (s.identity) continue;
    const Matrix& a = *mats[j];
    if (variant == GhVariant::paper_eq41 && !is_symmetric(a))
      throw std::invalid_argument(
          "graph_homomorphic_noise: paper_eq41 needs a symmetric stage matrix");
    for (int p = 0; p < pattern.agents; ++p)
      if (a(p, p) <= 0.0)
        throw std::invalid_argument("graph_homomorphic_noise: zero self-weight on active stage");
    for (int p = 0; p < pattern.agents; ++p) {
      for (int k = 0; k < dimension; ++k) base[k] = laplace_sample(sigma_g2, rng);
      const int out_deg = s.send_offsets[p + 1] - s.send_offsets[p];  // includes self
      for (int o = s.send_offsets[p]; o < s.send_offsets[p + 1]; ++o) {
        const int m = s.receivers[o];
        double scale;
        if (m == p) {
          scale = (variant == GhVariant::paper_eq41)
                      ? -(1.0 - a(p, p)) / a(p, p)
                      : -static_cast<double>(out_deg - 1) / (triple.q[p] * a(p, p));
        } else {
          scale = (variant == GhVariant::paper_eq41) ? a(p, m) / a(m, p)
                                                     : 1.0 / (triple.q[m] * a(p, m));
        }
        double* g = out.at(j, s.send_edge[o]);
        for (int k = 0; k < dimension; ++k) g[k] = scale * base[k];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Scheme 3: local graph-homomorphic perturbations

struct NeighbourhoodPartition {
  std::vector<int> n_plus;
  std::vector<int> n_minus;
};

// Splits N_p \ {p} into two non-empty halves. The parity rule follows the
// even/odd example of the protocol description (on 1-based agent labels) and
// fails when all neighbours share parity; the alternating rule alternates
// sorted neighbour indices and always succeeds for two or more neighbours.
inline NeighbourhoodPartition partition_neighbourhood(const Topology& topo, int p,
                                                      PartitionRule rule) {
  if (p < 0 || p >= topo.agents)
    throw std::invalid_argument("partition_neighbourhood: agent out of range");
  std::vector<int> others;
  for (int m : topo.neighbours[p])
    if (m != p) others.push_back(m);
  if (others.size() < 2)
    throw std::runtime_error("partition_neighbourhood: agent " + std::to_string(p) +
                             " has fewer than two neighbours; local scheme cannot mask its links");
  NeighbourhoodPartition part;
  if (rule == PartitionRule::parity) {
    for (int m : others)
      ((m + 1) % 2 == 0 ? part.n_plus : part.n_minus).push_back(m);
    if (part.n_plus.empty() || part.n_minus.empty())
      throw std::runtime_error(
          "partition_neighbourhood: parity rule left one side empty; use alternating");
  } else {
    for (size_t i = 0; i < others.size(); ++i)
      (i % 2 == 0 ? part.n_plus : part.n_minus).push_back(others[i]);
  }
  return part;
}

// Fixed large prime for the real-valued modular arithmetic of the pairwise
// construction, and its multiple a = 64 * pi.
inline constexpr double kPairwisePrime = 2147483647.0;  // 2^31 - 1
inline constexpr double kPairwiseMultiple = 64.0 * kPairwisePrime;

enum class PairConvention { paper, variance_matched };

// Pairwise noise from two key pairs: u = (a e^{-v_l v_m} mod pi)/pi and
// likewise u', then scale * ln(u/u'). Over random keys the output is
// zero-mean Laplace; convention variance_matched (scale sigma_g/sqrt(2))
// yields variance sigma_g2, the literal paper scale sqrt(2)/sigma_g is kept
// selectable. Inputs that land exactly on 0 are a measure-zero event and are
// rejected for the caller to re-sample.
inline double local_gh_pair_noise(double v_l, double v_m, double v_l2, double v_m2, double a,
                                  double pi_real, double sigma_g2, PairConvention convention) {
  if (!(sigma_g2 > 0.0)) throw std::invalid_argument("local_gh_pair_noise: sigma_g2 must be > 0");
  if (v_l < 0.0 || v_l > 1.0 || v_l2 < 0.0 || v_l2 > 1.0)
    throw std::invalid_argument("local_gh_pair_noise: uniform keys must lie in [0,1]");
  if (!(v_m > 0.0) || !(v_m2 > 0.0))
    throw std::invalid_argument("local_gh_pair_noise: gamma keys must be positive");
  const double t = a / pi_real;
  if (!(pi_real > 0.0) || !(a > 0.0) || std::abs(t - std::round(t)) > 1e-9)
    throw std::invalid_argument("local_gh_pair_noise: a must be a positive multiple of pi");
  const double u = std::fmod(a * std::exp(-v_l * v_m), pi_real) / pi_real;
  const double u2 = std::fmod(a * std::exp(-v_l2 * v_m2), pi_real) / pi_real;
  if (u == 0.0 || u2 == 0.0)
    throw std::domain_error("local_gh_pair_noise: degenerate key product, re-sample");
  const double sigma_g = std::sqrt(sigma_g2);
  const double scale = convention == PairConvention::paper ? std::sqrt(2.0) / sigma_g
                                                           : sigma_g / std::sqrt(2.0);
  return scale * std::log(u / u2);
}

// Draws one pairwise noise value with fresh keys (uniform for the N+ member,
// Gamma(2,1) for the N- member), re-sampling the measure-zero degenerate case.
inline double draw_pair_noise(double sigma_g2, Rng& rng,
                              PairConvention convention = PairConvention::variance_matched) {
  for (;;) {
    const double v_l = rng.uniform01();
    const double v_m = rng.gamma21();
    const double v_l2 = rng.uniform01();
    const double v_m2 = rng.gamma21();
    try {
      return local_gh_pair_noise(v_l, v_m, v_l2, v_m2, kPairwiseMultiple, kPairwisePrime,
                                 sigma_g2, convention);
    } catch (const std::domain_error&) {
      continue;
    }
  }
}

// Per-sender masks cancelling at one receiver: every (k in N+, l in N-) pair
// generates a fresh vector; k accumulates it positively, l negatively, both
// divided by the weight the receiver will apply. Returns (sender, mask) pairs.
inline std::vector<std::pair<int, Vector>> local_gh_link_noise(
    const Topology& topo, int receiver, const NeighbourhoodPartition& part, int dimension,
    double sigma_g2, Rng& rng) {
  std::vector<std::pair<int, Vector>> masks;
  masks.reserve(part.n_plus.size() + part.n_minus.size());
  for (int k : part.n_plus) masks.emplace_back(k, Vector(dimension, 0.0));
  for (int l : part.n_minus) masks.emplace_back(l, Vector(dimension, 0.0));
  auto mask_of = [&](int agent) -> Vector& {
    for (auto& [who, v] : masks)
      if (who == agent) return v;
    throw std::logic_error("local_gh_link_noise: sender missing");
  };
  for (int k : part.n_plus) {
    Vector& mk = mask_of(k);
    const double wk = topo.weights(k, receiver);
    for (int l : part.n_minus) {
      Vector& ml = mask_of(l);
      const double wl = topo.weights(l, receiver);
      for (int c = 0; c < dimension; ++c) {
        const double g = draw_pair_noise(sigma_g2, rng);
        mk[c] += g / wk;
        ml[c] -= g / wl;
      }
    }
  }
  return masks;
}

// Fills a LinkNoise with local graph-homomorphic masks for every receiver of
// every active stage. Partitions are supplied per receiver (use
// make_partitions below); empty partitions mark receivers whose links go
// unmasked under the degenerate override.
inline void local_gh_noise(const CommPattern& pattern, const Topology& topo,
                           const std::vector<NeighbourhoodPartition>& partitions, int dimension,
                           double sigma_g2, Rng& rng, LinkNoise& out) {
  out.reset(pattern, dimension);
  for (int j : kStageOrder) {
    const StageLinks& s = pattern.stage[j];
    if (s.identity) continue;
    for (int p = 0; p < pattern.agents; ++p) {
      const NeighbourhoodPartition& part = partitions[p];
      if (part.n_plus.empty() && part.n_minus.empty()) continue;  // degenerate override
      auto masks = local_gh_link_noise(topo, p, part, dimension, sigma_g2, rng);
      for (const auto& [sender, mask] : masks) {
        for (int e = s.recv_offsets[p]; e < s.recv_offsets[p + 1]; ++e)
          if (s.senders[e] == sender) {
            double* g = out.at(j, e);
            for (int k = 0; k < dimension; ++k) g[k] = mask[k];
            break;
          }
      }
    }
  }
}

inline std::vector<NeighbourhoodPartition> make_partitions(const Topology& topo,
                                                           const NoisePlan& plan) {
  std::vector<NeighbourhoodPartition> parts(topo.agents);
  for (int p = 0; p < topo.agents; ++p) {
    try {
      parts[p] = partition_neighbourhood(topo, p, plan.partition_rule);
    } catch (const std::runtime_error&) {
      if (!plan.allow_unmasked_degenerate) throw;
      std::cerr << "privnet: warning: agent " << p
                << " has a degenerate neighbourhood; its links stay unmasked\n";
      parts[p] = NeighbourhoodPartition{};
    }
  }
  return parts;
}

// ---------------------------------------------------------------------------
// Diffie-Hellman key agreement (integer demonstration, small moduli)

namespace detail {

inline uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod_u64(result, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool probably_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

}  // namespace detail

// Shared secret b^(secret_a * secret_b) mod pi via two modular
// exponentiations; both evaluation orders agree.
inline uint64_t dh_shared_secret(uint64_t base, uint64_t modulus, uint64_t secret_a,
                                 uint64_t secret_b) {
  if (!detail::probably_prime(modulus))
    throw std::invalid_argument("dh_shared_secret: modulus must be prime");
  if (base <= 1 || base >= modulus)
    throw std::invalid_argument("dh_shared_secret: base must satisfy 1 < b < pi");
  if (secret_a < 1 || secret_a > modulus - 1 || secret_b < 1 || secret_b > modulus - 1)
    throw std::invalid_argument("dh_shared_secret: secrets must lie in [1, pi-1]");
  const uint64_t public_a = detail::powmod_u64(base, secret_a, modulus);
  return detail::powmod_u64(public_a, secret_b, modulus);
}

// ---------------------------------------------------------------------------
// Accounting

struct PrivacyLedger {
  double b = 0.0;        // sensitivity cap B
  double b_prime = 0.0;  // sensitivity cap B'
  double model_gap = 0.0;  // ||w^o - w'^o||
  Vector epsilon_series;
  Vector delta_series;  // empirical Delta(i), when measured
};

// Upper-bound accountant: eps(i) = (sqrt(2) P / sigma_g)(B + B' + sqrt(P) gap) i.
inline double epsilon_budget(int iteration, int agents, double sigma_g2, double b,
                             double b_prime, double model_gap) {
  if (iteration < 0 || agents < 1 || b < 0 || b_prime < 0 || model_gap < 0 || sigma_g2 < 0)
    throw std::invalid_argument("epsilon_budget: arguments must be non-negative");
  if (iteration == 0) return 0.0;
  if (sigma_g2 == 0.0) return std::numeric_limits<double>::infinity();
  const double sigma_g = std::sqrt(sigma_g2);
  return (std::sqrt(2.0) * agents / sigma_g) *
         (b + b_prime + std::sqrt(static_cast<double>(agents)) * model_gap) * iteration;
}

// Mutual information between a Gaussian message of variance sigma_w2 and its
// noised copy, in nats: (1/2) ln(1 + sigma_w2 / sigma_g2).
inline double mutual_information_gaussian(double sigma_w2, double sigma_g2) {
  if (!(sigma_g2 > 0.0))
    throw std::invalid_argument("mutual_information_gaussian: sigma_g2 must be > 0");
  if (sigma_w2 < 0.0)
    throw std::invalid_argument("mutual_information_gaussian: sigma_w2 must be >= 0");
  return 0.5 * std::log1p(sigma_w2 / sigma_g2);
}

}  // namespace privnet
