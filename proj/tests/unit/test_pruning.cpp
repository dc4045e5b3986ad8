#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ergraph/pruning.hpp"
#include "oracles.hpp"

using namespace ergraph;
using namespace ergraph::pruning;

namespace {

// Brute-force overlap straight from adjacency-matrix definitions.
std::vector<std::size_t> brute_overlap(const SampledGraph& g, std::size_t t) {
  const std::size_t n = g.n();
  std::vector<std::vector<int>> A(n, std::vector<int>(n, 0));
  for (auto [i, j] : g.edges()) A[i][j] = A[j][i] = 1;
  for (Vertex v : g.loops()) A[v][v] = 1;
  std::vector<std::size_t> deg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      deg[i] += static_cast<std::size_t>(A[i][j]); // a loop counts once
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] < t) continue;
    std::set<std::size_t> others; // V_t union N(V_t \ {i})
    for (std::size_t c = 0; c < n; ++c) {
      if (deg[c] < t) continue;
      others.insert(c);
      if (c == i) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (A[c][j]) others.insert(j);
    }
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (A[i][j] && others.count(j)) ++count;
    out.push_back(count);
  }
  return out;
}

SampledGraph random_small(std::uint64_t seed, bool loops) {
  Rng rng = make_rng(seed, 0);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = size(rng);
  const double p = 0.1 + 0.5 * u(rng);
  std::vector<Edge> e;
  std::vector<Vertex> l;
  for (Vertex i = 0; i < n; ++i) {
    if (loops && u(rng) < 0.2) l.push_back(i);
    for (Vertex j = i + 1; j < n; ++j)
      if (u(rng) < p) e.emplace_back(i, j);
  }
  return SampledGraph::from_edges(n, e, l);
}

SampledGraph disjoint_stars(const std::vector<std::size_t>& leaves) {
  std::vector<Edge> e;
  Vertex next = 0;
  for (std::size_t D : leaves) {
    const Vertex c = next++;
    for (std::size_t k = 0; k < D; ++k) e.emplace_back(c, next++);
  }
  return SampledGraph::from_edges(next, e);
}

} // namespace

TEST(Neighborhood, Examples) {
  const auto g = SampledGraph::from_edges(5, {{0, 1}, {1, 2}, {3, 4}}, {3});
  const std::vector<Vertex> s1{1};
  EXPECT_EQ(neighborhood(g, s1), (std::vector<Vertex>{0, 2}));
  const std::vector<Vertex> s2{0, 3};
  EXPECT_EQ(neighborhood(g, s2), (std::vector<Vertex>{1, 3, 4}));
  EXPECT_TRUE(neighborhood(g, std::span<const Vertex>{}).empty());
  const std::vector<Vertex> bad{7};
  EXPECT_THROW(neighborhood(g, bad), ValidationError);
}

TEST(Overlap, MatchesBruteForceOnSmallGraphs) {
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto g = random_small(s, s % 2 == 1);
    for (std::size_t t = 1; t <= 5; ++t) {
      const auto ov = overlap_statistic(g, t);
      const auto ref = brute_overlap(g, t);
      ASSERT_EQ(ov.per_center, ref) << "seed " << s << " t " << t;
      const std::size_t mx = ref.empty() ? 0 : *std::max_element(ref.begin(), ref.end());
      EXPECT_EQ(ov.max_overlap, mx);
    }
  }
}

TEST(Overlap, Examples) {
  // Single star: no overlap.
  const auto star = disjoint_stars({5});
  const auto a = overlap_statistic(star, 3);
  EXPECT_EQ(a.centers, (std::vector<Vertex>{0}));
  EXPECT_EQ(a.max_overlap, 0u);
  // Two adjacent centers see each other.
  const auto g = SampledGraph::from_edges(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {4, 5}, {4, 6}, {4, 7}});
  const auto b = overlap_statistic(g, 4);
  EXPECT_EQ(b.centers, (std::vector<Vertex>{0, 4}));
  EXPECT_EQ(b.per_center, (std::vector<std::size_t>{1, 1}));
  // Shared leaf between two centers on 7 vertices.
  const auto h = SampledGraph::from_edges(7, {{0, 1}, {0, 2}, {0, 3}, {4, 3}, {4, 5}, {4, 6}});
  const auto c = overlap_statistic(h, 3);
  EXPECT_EQ(c.per_center, (std::vector<std::size_t>{1, 1}));
  EXPECT_THROW(overlap_statistic(h, 0), DomainError);
}

TEST(Decomposition, PartitionAndStarStructure) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto g = random_small(1000 + s, s % 3 == 0);
    for (std::size_t t = 1; t <= 4; ++t) {
      const auto d = star_decomposition(g, t);
      // Edge partition.
      std::vector<Edge> all;
      for (auto [c, l] : d.star_edges) all.emplace_back(std::min(c, l), std::max(c, l));
      all.insert(all.end(), d.residual_edges.begin(), d.residual_edges.end());
      std::sort(all.begin(), all.end());
      ASSERT_TRUE(std::equal(all.begin(), all.end(), g.edges().begin(), g.edges().end()));
      EXPECT_TRUE(std::equal(d.residual_loops.begin(), d.residual_loops.end(), g.loops().begin(), g.loops().end()));
      // Every star component has exactly one vertex of degree above one, which is a center.
      const auto sg = d.star_graph();
      std::set<Vertex> leaves;
      for (auto [c, l] : d.star_edges) {
        EXPECT_GE(g.degree(c), t);
        EXPECT_LT(g.degree(l), t);
        EXPECT_TRUE(leaves.insert(l).second) << "leaf attached twice";
        EXPECT_EQ(sg.degree(l), 1u);
      }
      // Degree accounting.
      for (std::size_t k = 0; k < d.centers.size(); ++k) {
        EXPECT_EQ(d.degrees[k], g.degree(d.centers[k]));
        EXPECT_EQ(d.degrees[k], d.central_degrees[k] + d.removed_per_center[k]);
        EXPECT_EQ(d.central_degrees[k], sg.degree(d.centers[k]));
      }
      const auto res = d.residual_graph();
      const auto ov = overlap_statistic(g, t);
      for (std::size_t i = 0; i < g.n(); ++i) {
        EXPECT_EQ(sg.degree(i) + res.degree(i), g.degree(i));
        // Non-centers keep degree below t; centers keep only the removed edges.
        const auto it = std::find(d.centers.begin(), d.centers.end(), static_cast<Vertex>(i));
        if (it == d.centers.end())
          EXPECT_LT(res.degree(i), t) << "non-center " << i;
        else
          EXPECT_EQ(res.degree(i), d.removed_per_center[static_cast<std::size_t>(it - d.centers.begin())]);
      }
      // Removed count at a center never exceeds its overlap.
      for (std::size_t k = 0; k < d.centers.size(); ++k)
        EXPECT_LE(d.removed_per_center[k], ov.per_center[k]);
    }
  }
}

TEST(Decomposition, SpectrumMatchesClosedForm) {
  const auto g = disjoint_stars({4, 9, 16});
  const auto d = star_decomposition(g, 3);
  EXPECT_EQ(d.central_degrees, (std::vector<std::size_t>{4, 9, 16}));
  const auto chk = decomposition_spectrum_check(d);
  EXPECT_EQ(chk.closed_form, (std::vector<double>{4, 3, 2, -2, -3, -4}));
  EXPECT_LE(chk.max_discrepancy, 1e-12);
  const auto sg = d.star_graph();
  const auto ref = oracle::jacobi_eigenvalues([&] {
    oracle::Matrix m(g.n(), std::vector<double>(g.n(), 0.0));
    for (auto [a, b] : sg.edges()) m[a][b] = m[b][a] = 1.0;
    return m;
  }());
  EXPECT_NEAR(ref.front(), 4.0, 1e-12);
  EXPECT_NEAR(ref.back(), -4.0, 1e-12);
}

TEST(Decomposition, RandomGraphsSpectrumDiscrepancy) {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto m = EdgeProbabilityModel::homogeneous(2000, 1.0 / 1999.0);
    const auto g = sample_graph(m, 77, r);
    const auto d = star_decomposition(g, 3);
    EXPECT_LE(decomposition_spectrum_check(d).max_discrepancy, 1e-10);
  }
}

TEST(Decomposition, EmptyWhenThresholdExceedsDegrees) {
  const auto g = disjoint_stars({2, 2});
  const auto d = star_decomposition(g, 10);
  EXPECT_TRUE(d.centers.empty());
  EXPECT_TRUE(d.star_edges.empty());
  EXPECT_EQ(d.residual_edges.size(), g.edge_count());
  const auto chk = decomposition_spectrum_check(d);
  EXPECT_TRUE(chk.closed_form.empty());
  EXPECT_EQ(chk.max_discrepancy, 0.0);
}

TEST(ResidualNorm, Examples) {
  // Removing every star from disjoint stars under the empty model leaves zero.
  const auto g = disjoint_stars({5, 6});
  const auto m = EdgeProbabilityModel::homogeneous(g.n(), 0.0);
  const auto r = residual_norm_check(g, m, star_decomposition(g, 3));
  EXPECT_NEAR(r.norm, 0.0, 1e-12);
  EXPECT_EQ(r.d_prime, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
  // Nothing removed: norm of A - E[A] against a dense oracle.
  const auto m2 = EdgeProbabilityModel::homogeneous(120, 0.04);
  const auto g2 = sample_graph(m2, 4, 0);
  const auto r2 = residual_norm_check(g2, m2, star_decomposition(g2, 1000));
  oracle::Matrix M(120, std::vector<double>(120, 0.0));
  for (std::size_t i = 0; i < 120; ++i)
    for (std::size_t j = 0; j < 120; ++j) M[i][j] = -m2.p(i, j);
  for (auto [a, b] : g2.edges()) M[a][b] += 1.0, M[b][a] += 1.0;
  const auto ev = oracle::jacobi_eigenvalues(M);
  EXPECT_NEAR(r2.norm, std::max(ev.front(), -ev.back()), 1e-8);
  EXPECT_NEAR(r2.bound_shape, std::sqrt(120 * 0.04) + std::sqrt(r2.d_prime), 1e-12);
}
