#include "privnet/graph.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace privnet;

TEST(RandomConnectedGraph, SingleAgent) {
  Topology t = random_connected_graph(1, 1.0, 0);
  EXPECT_EQ(t.agents, 1);
  ASSERT_EQ(t.neighbours[0].size(), 1u);
  EXPECT_EQ(t.neighbours[0][0], 0);
  EXPECT_DOUBLE_EQ(t.weights(0, 0), 1.0);
}

TEST(RandomConnectedGraph, ThirtyAgentsConnected) {
  Topology t = random_connected_graph(30, 0.2, 7);
  EXPECT_TRUE(oracles::connected(t));
  for (int p = 0; p < 30; ++p) EXPECT_GT(t.weights(p, p), 0.0);
  // deterministic per seed
  Topology t2 = random_connected_graph(30, 0.2, 7);
  EXPECT_EQ(t.weights.data(), t2.weights.data());
  Topology t3 = random_connected_graph(30, 0.2, 8);
  EXPECT_NE(t.weights.data(), t3.weights.data());
}

TEST(RandomConnectedGraph, DensityOneIsComplete) {
  Topology t = random_connected_graph(2, 1.0, 3);
  EXPECT_GT(t.weights(0, 1), 0.0);
  EXPECT_GT(t.weights(1, 0), 0.0);
  EXPECT_GT(t.weights(0, 0), 0.0);
  EXPECT_GT(t.weights(1, 1), 0.0);
}

TEST(RandomConnectedGraph, RejectsBadDensity) {
  EXPECT_THROW(random_connected_graph(5, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(random_connected_graph(5, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(random_connected_graph(0, 0.5, 1), std::invalid_argument);
}

namespace {

Adjacency chain3() {
  Adjacency adj;
  adj.agents = 3;
  adj.neighbours = {{0, 1}, {0, 1, 2}, {1, 2}};
  return adj;
}

}  // namespace

TEST(MetropolisWeights, TwoAgentsFullyConnected) {
  Adjacency adj;
  adj.agents = 2;
  adj.neighbours = {{0, 1}, {0, 1}};
  Topology t = metropolis_weights(adj);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(t.weights(i, j), 0.5, 1e-15);
}

TEST(MetropolisWeights, ThreeAgentChain) {
  Topology t = metropolis_weights(chain3());
  EXPECT_NEAR(t.weights(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(1, 2), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(2, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(2, 2), 2.0 / 3.0, 1e-15);
}

TEST(MetropolisWeights, SingleAgent) {
  Adjacency adj;
  adj.agents = 1;
  adj.neighbours = {{0}};
  Topology t = metropolis_weights(adj);
  EXPECT_DOUBLE_EQ(t.weights(0, 0), 1.0);
}

TEST(MetropolisWeights, RejectsAsymmetricAdjacency) {
  Adjacency adj;
  adj.agents = 2;
  adj.neighbours = {{0, 1}, {1}};  // 0 listens to 1, but not vice versa
  EXPECT_THROW(metropolis_weights(adj), std::invalid_argument);
}

TEST(MetropolisWeights, DoublyStochastic) {
  Topology t = random_connected_graph(12, 0.3, 11);
  for (int i = 0; i < 12; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < 12; ++j) {
      row += t.weights(i, j);
      col += t.weights(j, i);
    }
    EXPECT_NEAR(row, 1.0, 1e-12);
    EXPECT_NEAR(col, 1.0, 1e-12);
  }
}

TEST(AveragingWeights, TwoAgents) {
  Adjacency adj;
  adj.agents = 2;
  adj.neighbours = {{0, 1}, {0, 1}};
  Topology t = averaging_weights(adj);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(t.weights(i, j), 0.5, 1e-15);
}

TEST(AveragingWeights, StarHubColumn) {
  Adjacency adj;
  adj.agents = 3;
  adj.neighbours = {{0, 1, 2}, {0, 1}, {0, 2}};  // hub 0, leaves 1 and 2
  Topology t = averaging_weights(adj);
  EXPECT_NEAR(t.weights(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.weights(2, 0), 1.0 / 3.0, 1e-15);
}

TEST(AveragingWeights, SingleAgent) {
  Adjacency adj;
  adj.agents = 1;
  adj.neighbours = {{0}};
  EXPECT_DOUBLE_EQ(averaging_weights(adj).weights(0, 0), 1.0);
}

TEST(IsPrimitive, IdentityIsNot) { EXPECT_FALSE(is_primitive(Matrix::identity(2))); }

TEST(IsPrimitive, PositiveMatrixIs) {
  EXPECT_TRUE(is_primitive(Matrix{{0.5, 0.5}, {0.5, 0.5}}));
}

TEST(IsPrimitive, ChainMetropolisIs) {
  Topology t = metropolis_weights(chain3());
  EXPECT_TRUE(is_primitive(t.weights));
  // oracle: the square is already entrywise positive
  Matrix sq = t.weights * t.weights;
  for (double x : sq.data()) EXPECT_GT(x, 0.0);
}

TEST(IsPrimitive, RejectsBadInput) {
  EXPECT_THROW(is_primitive(Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(is_primitive(Matrix{{1.5, 0.5}, {-0.5, 0.5}}), std::invalid_argument);
}

TEST(PerronVector, DoublyStochasticGivesUniform) {
  Topology t = random_connected_graph(8, 0.4, 5);
  Vector q = perron_vector(t.weights);
  for (double x : q) EXPECT_NEAR(x, 1.0 / 8.0, 1e-10);
}

TEST(PerronVector, SingleAgent) {
  Vector q = perron_vector(Matrix{{1.0}});
  ASSERT_EQ(q.size(), 1u);
  EXPECT_DOUBLE_EQ(q[0], 1.0);
}

TEST(PerronVector, MatchesNullspaceOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    Matrix a(n, n);
    for (int j = 0; j < n; ++j) {
      double col = 0.0;
      for (int i = 0; i < n; ++i) {
        a(i, j) = 0.05 + rng.uniform01();
        col += a(i, j);
      }
      for (int i = 0; i < n; ++i) a(i, j) /= col;
    }
    Vector q = perron_vector(a);
    Vector q_ref = oracles::perron_nullspace(a);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(q[i], q_ref[i], 1e-8);
    Vector aq = a * q;
    for (int i = 0; i < n; ++i) EXPECT_NEAR(aq[i], q[i], 1e-10);
  }
}

TEST(PerronVector, NonPrimitiveFails) {
  // Period-2 permutation: power iteration cannot settle.
  EXPECT_THROW(perron_vector(Matrix{{0.0, 1.0}, {1.0, 0.0}}), std::runtime_error);
}

TEST(JordanGap, RankOneMatrixIsZero) {
  Matrix a{{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_NEAR(jordan_gap(a, {0.5, 0.5}), 0.0, 1e-12);
}

TEST(JordanGap, IdentityFlagsNonPrimitivity) {
  EXPECT_NEAR(jordan_gap(Matrix::identity(2), {0.5, 0.5}), 1.0, 1e-9);
}

TEST(JordanGap, ChainMatchesDenseOracle) {
  Topology t = metropolis_weights(chain3());
  Vector q = perron_vector(t.weights);
  const double got = jordan_gap(t.weights, q);
  Matrix deflated = t.weights;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) deflated(i, j) -= q[i];
  const double expected = oracles::symmetric_spectral_radius(deflated);
  EXPECT_GT(got, 0.0);
  EXPECT_LT(got, 1.0);
  EXPECT_NEAR(got, expected, 1e-6);
}

TEST(JordanGap, BelowOneForGeneratedTopologies) {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Topology t = random_connected_graph(10, 0.3, seed);
    Vector q = perron_vector(t.weights);
    EXPECT_LT(jordan_gap(t.weights, q), 1.0);
  }
}

TEST(MakeTriple, PresetsPlaceTheMatrix) {
  Topology t = random_connected_graph(6, 0.5, 2);
  Vector q_ref = perron_vector(t.weights);

  CombinationTriple atc = make_triple(t, Preset::atc);
  EXPECT_EQ(atc.a2.data(), t.weights.data());
  EXPECT_EQ(atc.a0.data(), Matrix::identity(6).data());
  EXPECT_EQ(atc.a1.data(), Matrix::identity(6).data());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(atc.q[i], q_ref[i], 1e-10);

  CombinationTriple con = make_triple(t, Preset::consensus);
  EXPECT_EQ(con.a0.data(), t.weights.data());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(con.q[i], q_ref[i], 1e-10);

  CombinationTriple cta = make_triple(t, Preset::cta);
  EXPECT_EQ(cta.a1.data(), t.weights.data());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(cta.q[i], 1.0 / 6.0, 1e-10);  // doubly stochastic
}

TEST(MakeTriple, TripleInvariants) {
  Topology t = random_connected_graph(7, 0.4, 9);
  CombinationTriple triple = make_triple(t, Preset::atc);
  for (const Matrix* a : {&triple.a0, &triple.a1, &triple.a2})
    EXPECT_TRUE(is_left_stochastic(*a));
  Matrix prod = triple.a1 * triple.a0 * triple.a2;
  Vector pq = prod * triple.q;
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    EXPECT_NEAR(pq[i], triple.q[i], 1e-10);
    EXPECT_GT(triple.q[i], 0.0);
    sum += triple.q[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(TopologySerialization, RoundTrip) {
  Topology t = random_connected_graph(9, 0.35, 17);
  std::stringstream ss;
  save_topology(t, ss);
  Topology back = load_topology(ss);
  ASSERT_EQ(back.agents, t.agents);
  for (int i = 0; i < t.agents; ++i) {
    EXPECT_EQ(back.neighbours[i], t.neighbours[i]);
    for (int j = 0; j < t.agents; ++j)
      EXPECT_NEAR(back.weights(i, j), t.weights(i, j), 1e-15);
  }
}

TEST(TopologySerialization, RejectsGarbage) {
  std::stringstream ss("not a topology");
  EXPECT_THROW(load_topology(ss), std::runtime_error);
}

TEST(TopologyInvariants, GeneratedTopologiesAreValid) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Topology t = random_connected_graph(15, 0.25, seed);
    EXPECT_NO_THROW(validate_topology(t));
    EXPECT_TRUE(is_primitive(t.weights));
    Adjacency adj = random_adjacency(15, 0.25, seed);
    EXPECT_NO_THROW(validate_topology(averaging_weights(adj)));
  }
}
