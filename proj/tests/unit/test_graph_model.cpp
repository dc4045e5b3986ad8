#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "ergraph/graph_model.hpp"

using namespace ergraph;

namespace {

SampledGraph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, static_cast<Vertex>(i));
  return SampledGraph::from_edges(leaves + 1, e);
}

SampledGraph complete(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return SampledGraph::from_edges(n, e);
}

} // namespace

TEST(Model, HomogeneousDegrees) {
  const auto m = EdgeProbabilityModel::homogeneous(4, 0.5);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m.mean_degree(i), 1.5);
  EXPECT_DOUBLE_EQ(m.p_max(), 0.5);
  EXPECT_DOUBLE_EQ(m.d(), 1.5);
  EXPECT_EQ(m.p(2, 2), 0.0);
}

TEST(Model, BlockDiagonalSbmDegrees) {
  const auto m = EdgeProbabilityModel::sbm({2, 2}, {{1.0, 0.0}, {0.0, 1.0}});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m.mean_degree(i), 1.0);
  EXPECT_EQ(m.p(0, 1), 1.0);
  EXPECT_EQ(m.p(1, 2), 0.0);
}

TEST(Model, AsymmetricGeneralRejected) {
  EXPECT_THROW(EdgeProbabilityModel::general({{0.0, 0.3}, {0.4, 0.0}}), ValidationError);
}

TEST(Model, ProbabilityOutOfRangeRejected) {
  EXPECT_THROW(EdgeProbabilityModel::homogeneous(5, 1.5), ValidationError);
  EXPECT_THROW(EdgeProbabilityModel::homogeneous(5, -0.1), ValidationError);
  EXPECT_THROW(EdgeProbabilityModel::sbm({2, 2}, {{0.1, 0.2}, {0.3, 0.1}}), ValidationError);
}

TEST(Model, GeneralAboveDenseLimitIsCapacityError) {
  std::vector<std::vector<double>> p(6, std::vector<double>(6, 0.1));
  EXPECT_THROW(EdgeProbabilityModel::general(p, false, 5), CapacityError);
}

TEST(Model, CachedStatisticsMatchAccessor) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  const std::size_t n = 9;
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) p[i][j] = p[j][i] = u(rng);
  for (bool loops : {false, true}) {
    const auto m = EdgeProbabilityModel::general(p, loops);
    double d = 0.0, pmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double di = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(m.p(i, j), m.p(j, i));
        di += m.p(i, j);
        if (i != j) pmax = std::max(pmax, m.p(i, j));
      }
      EXPECT_NEAR(m.mean_degree(i), di, 1e-12);
      d = std::max(d, di);
    }
    EXPECT_NEAR(m.d(), d, 1e-12);
    EXPECT_EQ(m.p_max(), pmax);
  }
}

TEST(Hypotheses, SatisfiedInSparseRegime) {
  const std::size_t n = static_cast<std::size_t>(std::round(std::exp(10.0)));
  const auto m = EdgeProbabilityModel::homogeneous(n, 2.0 / static_cast<double>(n - 1));
  const auto h = check_hypotheses(m, 1.0, 0.5);
  EXPECT_TRUE(h.satisfied);
  EXPECT_TRUE(h.violations.empty());
}

TEST(Hypotheses, ZeroDegreeViolatesKappa) {
  const auto h = check_hypotheses(EdgeProbabilityModel::homogeneous(100, 0.0), 1.0, 0.5);
  EXPECT_FALSE(h.satisfied);
  ASSERT_FALSE(h.violations.empty());
  EXPECT_NE(h.violations.front().find("d < kappa"), std::string::npos);
}

TEST(Hypotheses, DenseEntryViolatesPmax) {
  const auto h = check_hypotheses(EdgeProbabilityModel::homogeneous(100, 1.0), 1.0, 0.1);
  EXPECT_FALSE(h.satisfied);
  bool found = false;
  for (const auto& v : h.violations) found = found || v.find("p_max > n^(-1+eta)") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Sampler, ZeroProbabilityGivesEmptyGraph) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(50, 0.0), 1, 0);
  EXPECT_EQ(g.edge_count(), 0u);
  for (std::size_t i = 0; i < g.n(); ++i) EXPECT_EQ(g.degree(i), 0u);
}

TEST(Sampler, UnitProbabilityGivesCompleteGraph) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(4, 1.0), 1, 0);
  EXPECT_EQ(g.edge_count(), 6u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(g.degree(i), 3u);
}

TEST(Sampler, DeterministicPerReplica) {
  const auto m = EdgeProbabilityModel::homogeneous(5000, 3.0 / 4999.0);
  const auto a = sample_graph(m, 42, 3), b = sample_graph(m, 42, 3), c = sample_graph(m, 42, 4);
  EXPECT_TRUE(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end()));
  EXPECT_FALSE(std::equal(a.edges().begin(), a.edges().end(), c.edges().begin(), c.edges().end()));
}

TEST(Sampler, DegreeSumIsTwiceEdgesPlusLoops) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto g = sample_graph(EdgeProbabilityModel::homogeneous(300, 0.02, true), 9, r);
    const auto sum = std::accumulate(g.degrees().begin(), g.degrees().end(), std::size_t{0});
    EXPECT_EQ(sum, 2 * g.edge_count() + g.loops().size());
  }
}

TEST(Sampler, MeanEdgeCountWithinThreeStandardErrors) {
  const std::size_t n = 1000, seeds = 10000;
  const double p = 3.0 / 1000.0;
  const auto m = EdgeProbabilityModel::homogeneous(n, p);
  double sum = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) sum += static_cast<double>(sample_graph(m, 2024, s).edge_count());
  const double pairs = n * (n - 1) / 2.0;
  const double mean = pairs * p, se = std::sqrt(pairs * p * (1.0 - p) / static_cast<double>(seeds));
  EXPECT_NEAR(mean, 1498.5, 1e-9);
  EXPECT_LE(std::abs(sum / static_cast<double>(seeds) - mean), 3.0 * se);
}

// The count-then-place path (forced by a zero per-pair threshold) must
// reproduce the Bernoulli law of the edge set exactly.
TEST(Sampler, FastPathMatchesBernoulliLawChiSquared) {
  constexpr std::size_t n = 4, pairs = 6;
  for (double p : {0.3, 0.7}) {
    const auto m = EdgeProbabilityModel::homogeneous(n, p);
    SamplerOptions opt;
    opt.per_pair_threshold = 0;
    std::map<std::pair<Vertex, Vertex>, int> index;
    int next = 0;
    for (Vertex i = 0; i < n; ++i)
      for (Vertex j = i + 1; j < n; ++j) index[{i, j}] = next++;
    const std::size_t seeds = 100000;
    std::vector<double> observed(1u << pairs, 0.0);
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto g = sample_graph(m, 77, s, opt);
      unsigned mask = 0;
      for (const auto& e : g.edges()) mask |= 1u << index.at(e);
      observed[mask] += 1.0;
    }
    double chi2 = 0.0;
    for (unsigned mask = 0; mask < observed.size(); ++mask) {
      const int k = __builtin_popcount(mask);
      const double expected =
          static_cast<double>(seeds) * std::pow(p, k) * std::pow(1.0 - p, static_cast<double>(pairs) - k);
      chi2 += (observed[mask] - expected) * (observed[mask] - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-3) << "p=" << p << " chi2=" << chi2;
  }
}

TEST(Sampler, SbmBlockEdgeCountsMatchExpectation) {
  const auto m = EdgeProbabilityModel::sbm({600, 400}, {{0.01, 0.002}, {0.002, 0.02}});
  double within0 = 0, within1 = 0, between = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r)
    for (const auto& [i, j] : sample_graph(m, 5, static_cast<std::uint64_t>(r)).edges()) {
      const bool a = i < 600, b = j < 600;
      (a && b ? within0 : (!a && !b ? within1 : between)) += 1.0;
    }
  auto check = [&](double total, double pairs, double q) {
    const double mean = pairs * q, se = std::sqrt(pairs * q * (1 - q) / reps);
    EXPECT_LE(std::abs(total / reps - mean), 4.0 * se);
  };
  check(within0, 600.0 * 599 / 2, 0.01);
  check(within1, 400.0 * 399 / 2, 0.02);
  check(between, 600.0 * 400, 0.002);
}

TEST(Degrees, OrderedExamples) {
  EXPECT_EQ(ordered_degrees(star(5)), (std::vector<std::size_t>{5, 1, 1, 1, 1, 1}));
  EXPECT_EQ(ordered_degrees(complete(4)), (std::vector<std::size_t>{3, 3, 3, 3}));
  EXPECT_EQ(ordered_degrees(SampledGraph::from_edges(3, {})), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Degrees, ThresholdSetExamples) {
  const auto s = threshold_sets(star(5), 2);
  EXPECT_EQ(s.at_least, std::vector<Vertex>{0});
  EXPECT_TRUE(s.equal.empty());
  EXPECT_EQ(threshold_sets(star(5), 0).at_least.size(), 6u);
  const auto k = threshold_sets(complete(4), 3);
  EXPECT_EQ(k.at_least.size(), 4u);
  EXPECT_EQ(k.equal.size(), 4u);
}

TEST(Degrees, OrderStatisticThresholdEquivalence) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto g = sample_graph(EdgeProbabilityModel::homogeneous(400, 0.01), 3, r);
    const auto D = ordered_degrees(g);
    for (std::size_t t = 0; t <= D.front() + 1; ++t) {
      const std::size_t count = threshold_sets(g, t).at_least.size();
      for (std::size_t k = 1; k <= g.n(); ++k) ASSERT_EQ(D[k - 1] >= t, count >= k) << "t=" << t << " k=" << k;
    }
  }
}

TEST(Graph, LoopCountsOnceTowardsDegree) {
  const auto g = SampledGraph::from_edges(3, {{0, 1}}, {1});
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_TRUE(g.has_loop(1));
  EXPECT_THROW(SampledGraph::from_edges(3, {{0, 1}, {1, 0}}), ValidationError);
  EXPECT_THROW(SampledGraph::from_edges(3, {{1, 1}}), ValidationError);
}

TEST(Graph, EdgeListRoundTrip) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(200, 0.02, true), 11, 2);
  std::stringstream ss;
  write_edge_list(ss, g);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "# n=200 seed=11 replica=2");
  ss.seekg(0);
  const auto h = read_edge_list(ss);
  EXPECT_EQ(h.n(), g.n());
  EXPECT_TRUE(std::equal(g.edges().begin(), g.edges().end(), h.edges().begin(), h.edges().end()));
  EXPECT_TRUE(std::equal(g.loops().begin(), g.loops().end(), h.loops().begin(), h.loops().end()));
  EXPECT_EQ(h.seed(), 11u);
  EXPECT_EQ(h.replica_index(), 2u);
}

TEST(Graph, ComponentsPartitionVertices) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(500, 1.2 / 499), 4, 0);
  const auto c = connected_components(g);
  std::set<Vertex> seen;
  for (std::size_t id = 0; id < c.members.size(); ++id)
    for (Vertex v : c.members[id]) {
      EXPECT_TRUE(seen.insert(v).second);
      EXPECT_EQ(c.label[v], id);
    }
  EXPECT_EQ(seen.size(), g.n());
  for (const auto& [i, j] : g.edges()) EXPECT_EQ(c.label[i], c.label[j]);
}
