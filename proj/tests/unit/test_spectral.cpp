#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ergraph/spectral/chebyshev.hpp"
#include "ergraph/spectral/components.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/spectral/lanczos.hpp"
#include "ergraph/spectral/operator.hpp"
#include "oracles.hpp"

using namespace ergraph;
using namespace ergraph::spectral;

namespace {

oracle::Matrix dense_adjacency(const SampledGraph& g) {
  oracle::Matrix a(g.n(), std::vector<double>(g.n(), 0.0));
  for (const auto& [i, j] : g.edges()) a[i][j] = a[j][i] = 1.0;
  for (Vertex v : g.loops()) a[v][v] = 1.0;
  return a;
}

oracle::Matrix dense_centered(const SampledGraph& g, const EdgeProbabilityModel& m) {
  auto a = dense_adjacency(g);
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j) a[i][j] -= m.p(i, j);
  return a;
}

SampledGraph path3() { return SampledGraph::from_edges(3, {{0, 1}, {1, 2}}); }

SampledGraph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i <= leaves; ++i) e.emplace_back(0, static_cast<Vertex>(i));
  return SampledGraph::from_edges(leaves + 1, e);
}

void expect_extremes(const SpectralReport& rep, const std::vector<double>& ev, std::size_t nt, std::size_t nb,
                     double tol) {
  ASSERT_EQ(rep.top.size(), nt);
  ASSERT_EQ(rep.bottom.size(), nb);
  for (std::size_t i = 0; i < nt; ++i) EXPECT_NEAR(rep.top[i].value, ev[i], tol) << "top " << i;
  for (std::size_t i = 0; i < nb; ++i) EXPECT_NEAR(rep.bottom[i].value, ev[ev.size() - 1 - i], tol) << "bottom " << i;
}

} // namespace

TEST(Operator, AdjacencyExamples) {
  const auto k3 = SampledGraph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  const Eigen::VectorXd y = adjacency_operator(k3).apply(Eigen::VectorXd::Unit(3, 0));
  EXPECT_EQ(y, (Eigen::VectorXd(3) << 0, 1, 1).finished());
  const auto empty = SampledGraph::from_edges(5, {});
  EXPECT_EQ(adjacency_operator(empty).apply(Eigen::VectorXd::Ones(5)).norm(), 0.0);
  const Eigen::VectorXd s = adjacency_operator(star(4)).apply(Eigen::VectorXd::Ones(5));
  EXPECT_EQ(s, (Eigen::VectorXd(5) << 4, 1, 1, 1, 1).finished());
  const auto loop = SampledGraph::from_edges(2, {}, {1});
  EXPECT_EQ(adjacency_operator(loop).apply(Eigen::VectorXd::Ones(2)), (Eigen::VectorXd(2) << 0, 1).finished());
}

TEST(Operator, ExpectationExamples) {
  const std::size_t n = 50;
  const double p = 0.03;
  const auto E = expectation_operator(EdgeProbabilityModel::homogeneous(n, p));
  EXPECT_LT((E.apply(Eigen::VectorXd::Ones(n)) - (n - 1) * p * Eigen::VectorXd::Ones(n)).norm(), 1e-13);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  v.array() -= v.mean();
  EXPECT_LT((E.apply(v) + p * v).norm(), 1e-13);
}

TEST(Operator, SbmQuotientAction) {
  const auto m = EdgeProbabilityModel::sbm({3, 5}, {{0.2, 0.05}, {0.05, 0.4}});
  const auto E = expectation_operator(m);
  Eigen::VectorXd ind0 = Eigen::VectorXd::Zero(8), ind1 = Eigen::VectorXd::Zero(8);
  ind0.head(3).setOnes();
  ind1.tail(5).setOnes();
  const Eigen::VectorXd y = E.apply(ind0);
  // Block 0 rows: (3 - 1) * 0.2; block 1 rows: 3 * 0.05.
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(y(i), 2 * 0.2, 1e-15);
  for (int i = 3; i < 8; ++i) EXPECT_NEAR(y(i), 3 * 0.05, 1e-15);
  const Eigen::VectorXd z = E.apply(ind1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(z(i), 5 * 0.05, 1e-15);
  for (int i = 3; i < 8; ++i) EXPECT_NEAR(z(i), 4 * 0.4, 1e-15);
}

TEST(Operator, CenteredMatchesDenseOracle) {
  const auto m = EdgeProbabilityModel::homogeneous(200, 0.02);
  const auto g = sample_graph(m, 3, 0);
  const auto op = centered_operator(g, m);
  const auto M = dense_centered(g, m);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(200);
    for (auto& v : x) v = z(rng);
    const Eigen::VectorXd y = op.apply(x);
    for (std::size_t i = 0; i < 200; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < 200; ++j) r += M[i][j] * x(static_cast<Eigen::Index>(j));
      EXPECT_NEAR(y(static_cast<Eigen::Index>(i)), r, 1e-12 * (1.0 + std::abs(r)));
    }
  }
  EXPECT_THROW(centered_operator(g, EdgeProbabilityModel::homogeneous(10, 0.1)), ValidationError);
}

TEST(Operator, CenteredTrivialModelsAreZero) {
  const auto full = EdgeProbabilityModel::homogeneous(6, 1.0);
  EXPECT_LT(centered_operator(sample_graph(full, 1, 0), full).apply(Eigen::VectorXd::LinSpaced(6, 0, 1)).norm(), 1e-15);
  const auto none = EdgeProbabilityModel::homogeneous(6, 0.0);
  EXPECT_EQ(centered_operator(sample_graph(none, 1, 0), none).apply(Eigen::VectorXd::Ones(6)).norm(), 0.0);
}

TEST(Operator, SymmetryAndLinearityProbes) {
  const auto m = EdgeProbabilityModel::sbm({40, 60}, {{0.05, 0.01}, {0.01, 0.08}}, true);
  const auto g = sample_graph(m, 2, 1);
  Eigen::MatrixXd D(100, 100);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) D(i, j) = (i + j) % 7 == 0 ? 0.5 : -0.25 * (i == j);
  const std::vector<SymmetricOperator> ops{adjacency_operator(g), expectation_operator(m), centered_operator(g, m),
                                           dense_operator(D)};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  for (const auto& op : ops)
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd v(100), w(100);
      for (auto& x : v) x = z(rng);
      for (auto& x : w) x = z(rng);
      const double a = op.apply(v).dot(w), b = v.dot(op.apply(w));
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
      const double alpha = z(rng);
      const Eigen::VectorXd lhs = op.apply(Eigen::VectorXd(alpha * v + w));
      const Eigen::VectorXd rhs = alpha * op.apply(v) + op.apply(w);
      EXPECT_LE((lhs - rhs).norm(), 1e-12 * std::max(1.0, rhs.norm()));
    }
}

TEST(Dense, SpectrumExamples) {
  Eigen::MatrixXd diag = Eigen::Vector3d(3, 1, -2).asDiagonal();
  EXPECT_EQ(dense_spectrum(dense_operator(diag)), (std::vector<double>{3, 1, -2}));
  std::vector<Edge> e;
  for (Vertex i = 0; i < 4; ++i)
    for (Vertex j = i + 1; j < 4; ++j) e.emplace_back(i, j);
  const auto ev = dense_spectrum(adjacency_operator(SampledGraph::from_edges(4, e)));
  EXPECT_NEAR(ev[0], 3.0, 1e-12);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev[static_cast<std::size_t>(i)], -1.0, 1e-12);
  EXPECT_THROW(dense_spectrum(adjacency_operator(SampledGraph::from_edges(30, {})), 20), CapacityError);
}

TEST(Dense, TraceAndJacobiAgreement) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  Eigen::MatrixXd M(100, 100);
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j <= i; ++j) M(i, j) = M(j, i) = z(rng);
  const auto ev = dense_spectrum(dense_operator(M));
  double s = 0.0;
  for (double v : ev) s += v;
  EXPECT_NEAR(s, M.trace(), 1e-9);
  oracle::Matrix O(100, std::vector<double>(100));
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) O[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = M(i, j);
  const auto ref = oracle::jacobi_eigenvalues(O);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(ev[i], ref[i], 1e-10);
}

TEST(Dense, SpectralMeasureWeights) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(60, 0.08), 1, 0);
  const Eigen::MatrixXd A = materialize(adjacency_operator(g));
  const Eigen::VectorXd z = Eigen::VectorXd::Ones(60);
  const auto sm = spectral_measure(A, z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  for (Eigen::Index i = 0; i < 60; ++i) {
    EXPECT_NEAR(sm.values(i), es.eigenvalues()(i), 1e-10);
  }
  EXPECT_NEAR(sm.weights.sum(), 60.0, 1e-9);
  // Quadratic form 1^T A 1 = 2 |E| = sum_i w_i lambda_i.
  EXPECT_NEAR(sm.weights.dot(sm.values), 2.0 * static_cast<double>(g.edge_count()), 1e-8);
}

// Trees carry exact zero eigenvalues, which used to stall the QL sweep.
TEST(Dense, SpectralMeasureOnTreesWithZeroEigenvalues) {
  std::vector<SampledGraph> graphs{star(50), path3()};
  std::vector<Edge> caterpillar;
  for (Vertex i = 0; i < 20; ++i) {
    if (i + 1 < 20) caterpillar.emplace_back(i, i + 1);
    caterpillar.emplace_back(i, 20 + 2 * i);
    caterpillar.emplace_back(i, 21 + 2 * i);
  }
  graphs.push_back(SampledGraph::from_edges(60, caterpillar));
  for (const auto& g : graphs) {
    const Eigen::MatrixXd A = materialize(adjacency_operator(g));
    const auto n = static_cast<Eigen::Index>(g.n());
    const auto sm = spectral_measure(A, Eigen::VectorXd::Ones(n));
    double deg2 = 0.0;
    for (auto k : g.degrees()) deg2 += static_cast<double>(k * k);
    EXPECT_NEAR(sm.weights.sum(), static_cast<double>(n), 1e-9);
    EXPECT_NEAR(sm.weights.dot(sm.values), 2.0 * static_cast<double>(g.edge_count()), 1e-9);
    EXPECT_NEAR(sm.weights.dot(sm.values.cwiseProduct(sm.values)), deg2, 1e-8);
    const auto ref = oracle::jacobi_eigenvalues(dense_adjacency(g));
    for (Eigen::Index i = 0; i < n; ++i)
      EXPECT_NEAR(sm.values(i), ref[static_cast<std::size_t>(n - 1 - i)], 1e-12);
  }
}

TEST(Star, ClosedForm) {
  for (long long D : {1LL, 4LL, 9LL, 37LL}) {
    const auto s = star_spectrum(D);
    EXPECT_DOUBLE_EQ(s.positive, std::sqrt(static_cast<double>(D)));
    EXPECT_DOUBLE_EQ(s.negative, -std::sqrt(static_cast<double>(D)));
    EXPECT_EQ(s.zero_multiplicity, static_cast<std::size_t>(D - 1));
    EXPECT_LE(s.eigenvector_residual, 1e-12);
  }
  EXPECT_THROW(star_spectrum(0), DomainError);
}

TEST(Lanczos, SmallClosedForms) {
  const auto s = extreme_eigenvalues(adjacency_operator(star(4)), 1, 1);
  EXPECT_NEAR(s.top[0].value, 2.0, 1e-10);
  EXPECT_NEAR(s.bottom[0].value, -2.0, 1e-10);
  const auto p = extreme_eigenvalues(adjacency_operator(path3()), 2, 1);
  EXPECT_NEAR(p.top[0].value, std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(p.top[1].value, 0.0, 1e-10);
  EXPECT_NEAR(p.bottom[0].value, -std::sqrt(2.0), 1e-10);
  EXPECT_THROW(extreme_eigenvalues(adjacency_operator(path3()), 2, 2), ValidationError);
}

TEST(Lanczos, RandomGraphAgainstJacobi) {
  for (std::uint64_t r = 0; r < 4; ++r) {
    const auto g = sample_graph(EdgeProbabilityModel::homogeneous(300 + 50 * r, 3.0 / (299.0 + 50.0 * r)), 17, r);
    const auto rep = extreme_eigenvalues(adjacency_operator(g), 10, 10);
    EXPECT_TRUE(rep.converged);
    expect_extremes(rep, oracle::jacobi_eigenvalues(dense_adjacency(g)), 10, 10, 1e-8);
    for (const auto& x : rep.top) EXPECT_LE(x.residual, 1e-8);
  }
}

TEST(Lanczos, DeterministicInSeed) {
  const auto g = sample_graph(EdgeProbabilityModel::homogeneous(400, 0.01), 5, 0);
  LanczosOptions o;
  o.start_seed = 12;
  const auto a = extreme_eigenvalues(adjacency_operator(g), 5, 5, o);
  const auto b = extreme_eigenvalues(adjacency_operator(g), 5, 5, o);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.top[i].value, b.top[i].value);
    EXPECT_EQ(a.bottom[i].value, b.bottom[i].value);
  }
}

TEST(Chebyshev, TopBlockAgainstJacobi) {
  const auto m = EdgeProbabilityModel::homogeneous(600, 2.0 / 599.0);
  const auto g = sample_graph(m, 21, 0);
  const auto ref = oracle::jacobi_eigenvalues(dense_adjacency(g));
  ChebyshevOptions opt;
  opt.chunk = 16;
  const auto res = chebyshev_top_eigenvalues(adjacency_operator(g), 80, opt);
  EXPECT_TRUE(res.converged);
  ASSERT_EQ(res.top.size(), 80u);
  for (std::size_t i = 0; i < 80; ++i) EXPECT_NEAR(res.top[i].value, ref[i], 1e-7) << i;
}

TEST(Components, AdjacencyExtremesAgainstJacobi) {
  for (double d : {0.8, 1.5, 3.0}) {
    const auto m = EdgeProbabilityModel::homogeneous(400, d / 399.0);
    const auto g = sample_graph(m, 8, 0);
    const auto ref = oracle::jacobi_eigenvalues(dense_adjacency(g));
    SolverOptions opt;
    opt.component_dense_limit = 50; // forces the iterative path on the giant component
    const auto a = adjacency_extremes(g, 30, 30, opt);
    expect_extremes(a.report, ref, 30, 30, 1e-8);
    const auto b = adjacency_extremes(g, 30, 30);
    expect_extremes(b.report, ref, 30, 30, 1e-9);
  }
}

TEST(Components, CenteredExtremesAgainstJacobi) {
  for (bool loops : {false, true})
    for (double d : {0.6, 1.0, 2.5}) {
      const std::size_t n = 350;
      const auto m = EdgeProbabilityModel::homogeneous(n, d / (n - 1.0), loops);
      const auto g = sample_graph(m, 13, static_cast<std::uint64_t>(d * 10));
      const auto ref = oracle::jacobi_eigenvalues(dense_centered(g, m));
      const auto exact = centered_extremes(g, m, 25, 25);
      EXPECT_EQ(exact.path, SolverPath::component_exact);
      expect_extremes(exact.report, ref, 25, 25, 1e-9);
      SolverOptions opt;
      opt.component_dense_limit = 1;
      const auto it = centered_extremes(g, m, 25, 25, opt);
      EXPECT_EQ(it.path, SolverPath::iterative);
      expect_extremes(it.report, ref, 25, 25, 1e-8);
    }
}

TEST(Components, CenteredSbmFallsBackToIterative) {
  const auto m = EdgeProbabilityModel::sbm({150, 150}, {{0.02, 0.005}, {0.005, 0.02}});
  const auto g = sample_graph(m, 2, 0);
  const auto r = centered_extremes(g, m, 8, 8);
  EXPECT_EQ(r.path, SolverPath::iterative);
  expect_extremes(r.report, oracle::jacobi_eigenvalues(dense_centered(g, m)), 8, 8, 1e-8);
}

TEST(Weyl, CenteringMovesEigenvaluesByAtMostD) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto m = EdgeProbabilityModel::homogeneous(80, 0.05);
    const auto g = sample_graph(m, 31, r);
    const auto a = oracle::jacobi_eigenvalues(dense_adjacency(g));
    const auto c = oracle::jacobi_eigenvalues(dense_centered(g, m));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LE(std::abs(a[k] - c[k]), m.d() + 1e-12);
  }
}

TEST(Norm, MaxOfTopAndNegatedBottom) {
  const auto m = EdgeProbabilityModel::homogeneous(150, 0.03);
  const auto g = sample_graph(m, 6, 0);
  const auto rep = extreme_eigenvalues(centered_operator(g, m), 1, 1);
  const auto ev = oracle::jacobi_eigenvalues(dense_centered(g, m));
  EXPECT_NEAR(std::max(rep.top[0].value, -rep.bottom[0].value), std::max(ev.front(), -ev.back()), 1e-9);
}
