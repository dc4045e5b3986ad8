#pragma once

// Star decomposition of a graph around its high-degree vertices.
//
// Given a threshold t, the centers are V = {i : D_i >= t}. An edge {i, j} is
// a star edge when i is a center, j is not, and j has no other center among
// its neighbours. Star edges form vertex-disjoint stars whose adjacency has
// nonzero spectrum {+-sqrt(D*_i)}; every other edge goes to the residual.
//
// With cnt[j] the number of centers adjacent to j, membership of a neighbour
// j of i in N(V \ {i}) is simply cnt[j] >= 2, so everything below is linear
// in the number of edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/graph_model.hpp"
#include "ergraph/spectral/components.hpp"
#include "ergraph/spectral/lanczos.hpp"
#include "ergraph/spectral/operator.hpp"

namespace ergraph::pruning {

/// N(S) = {j : A_ij = 1 for some i in S}, sorted. A loop at i puts i in N({i}).
inline std::vector<Vertex> neighborhood(const SampledGraph& g, std::span<const Vertex> S) {
  std::vector<char> mark(g.n(), 0);
  for (Vertex i : S) {
    if (i >= g.n()) throw ValidationError("neighborhood: vertex " + std::to_string(i) + " out of range");
    for (Vertex j : g.neighbors(i)) mark[j] = 1;
    if (g.has_loop(i)) mark[i] = 1;
  }
  std::vector<Vertex> out;
  for (std::size_t j = 0; j < g.n(); ++j)
    if (mark[j]) out.push_back(static_cast<Vertex>(j));
  return out;
}

namespace detail {

struct CenterIndex {
  std::vector<char> is_center;
  std::vector<std::uint32_t> center_neighbours; ///< cnt[j]
  std::vector<Vertex> centers;
};

inline CenterIndex index_centers(const SampledGraph& g, std::size_t t) {
  CenterIndex c;
  c.is_center.assign(g.n(), 0);
  c.center_neighbours.assign(g.n(), 0);
  for (std::size_t i = 0; i < g.n(); ++i)
    if (g.degree(i) >= t) {
      c.is_center[i] = 1;
      c.centers.push_back(static_cast<Vertex>(i));
    }
  for (Vertex i : c.centers)
    for (Vertex j : g.neighbors(i)) ++c.center_neighbours[j];
  return c;
}

} // namespace detail

struct OverlapStatistic {
  std::size_t threshold = 0;
  std::size_t max_overlap = 0;
  std::vector<Vertex> centers;
  std::vector<std::size_t> per_center; ///< aligned with `centers`
};

/// For each center i, #[N(i) intersected with (V or N(V \ {i}))].
inline OverlapStatistic overlap_statistic(const SampledGraph& g, std::size_t t) {
  if (t < 1) throw DomainError("overlap_statistic: threshold must be >= 1");
  const auto idx = detail::index_centers(g, t);
  OverlapStatistic out;
  out.threshold = t;
  out.centers = idx.centers;
  for (Vertex i : idx.centers) {
    std::size_t count = g.has_loop(i) ? 1 : 0;
    for (Vertex j : g.neighbors(i))
      if (idx.is_center[j] || idx.center_neighbours[j] >= 2) ++count;
    out.per_center.push_back(count);
    out.max_overlap = std::max(out.max_overlap, count);
  }
  return out;
}

struct StarDecomposition {
  std::size_t n = 0;
  std::size_t threshold = 0;
  std::vector<Vertex> centers;
  std::vector<Edge> star_edges;     ///< (center, leaf)
  std::vector<Edge> residual_edges; ///< canonical (i < j)
  std::vector<Vertex> residual_loops;
  std::vector<std::size_t> degrees;          ///< D_i, aligned with centers
  std::vector<std::size_t> central_degrees;  ///< D*_i
  std::vector<std::size_t> removed_per_center; ///< D_i - D*_i

  SampledGraph star_graph() const {
    std::vector<Edge> e;
    e.reserve(star_edges.size());
    for (auto [a, b] : star_edges) e.emplace_back(std::min(a, b), std::max(a, b));
    return SampledGraph::from_edges(n, std::move(e));
  }
  SampledGraph residual_graph() const { return SampledGraph::from_edges(n, residual_edges, residual_loops); }
};

inline StarDecomposition star_decomposition(const SampledGraph& g, std::size_t t) {
  if (t < 1) throw DomainError("star_decomposition: threshold must be >= 1");
  const auto idx = detail::index_centers(g, t);
  StarDecomposition d;
  d.n = g.n();
  d.threshold = t;
  d.centers = idx.centers;
  d.residual_loops.assign(g.loops().begin(), g.loops().end());
  auto is_star = [&](Vertex center, Vertex leaf) {
    return idx.is_center[center] && !idx.is_center[leaf] && idx.center_neighbours[leaf] == 1;
  };
  for (auto [a, b] : g.edges()) {
    if (is_star(a, b))
      d.star_edges.emplace_back(a, b);
    else if (is_star(b, a))
      d.star_edges.emplace_back(b, a);
    else
      d.residual_edges.emplace_back(a, b);
  }
  std::vector<std::size_t> star_deg(g.n(), 0);
  for (auto [c, leaf] : d.star_edges) ++star_deg[c];
  for (Vertex i : d.centers) {
    d.degrees.push_back(g.degree(i));
    d.central_degrees.push_back(star_deg[i]);
    d.removed_per_center.push_back(g.degree(i) - star_deg[i]);
  }
  return d;
}

struct StarSpectrumCheck {
  std::vector<double> closed_form; ///< nonincreasing
  std::vector<double> numerical;   ///< nonincreasing
  double max_discrepancy = 0.0;
};

/// Nonzero spectrum of the star adjacency, in closed form and numerically.
inline StarSpectrumCheck decomposition_spectrum_check(const StarDecomposition& d) {
  StarSpectrumCheck out;
  for (std::size_t c = 0; c < d.centers.size(); ++c)
    if (d.central_degrees[c] > 0) {
      const double r = std::sqrt(static_cast<double>(d.central_degrees[c]));
      out.closed_form.push_back(r);
      out.closed_form.push_back(-r);
    }
  std::sort(out.closed_form.begin(), out.closed_form.end(), std::greater<>());

  const SampledGraph star = d.star_graph();
  const Components comps = connected_components(star);
  for (const auto& members : comps.members) {
    if (members.size() < 2) continue;
    const spectral::SymEig e = spectral::sym_eig(spectral::detail::dense_component(star, members), false);
    // Star eigenvalues are 0 or at least 1 in magnitude.
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
      if (std::abs(e.values(i)) > 0.5) out.numerical.push_back(e.values(i));
  }
  std::sort(out.numerical.begin(), out.numerical.end(), std::greater<>());

  if (out.numerical.size() != out.closed_form.size()) {
    out.max_discrepancy = std::numeric_limits<double>::infinity();
    return out;
  }
  for (std::size_t i = 0; i < out.numerical.size(); ++i)
    out.max_discrepancy = std::max(out.max_discrepancy, std::abs(out.numerical[i] - out.closed_form[i]));
  return out;
}

struct ResidualNormReport {
  double norm = 0.0;
  double top = 0.0;
  double bottom = 0.0;
  double d_prime = 0.0;     ///< max residual row sum
  double bound_shape = 0.0; ///< sqrt(n p_max) + sqrt(d')
  double ratio = 0.0;       ///< norm / bound_shape
  bool converged = true;
};

/// ||A' - E[A]|| for the residual adjacency A'.
inline ResidualNormReport residual_norm_check(const SampledGraph& g, const EdgeProbabilityModel& model,
                                              const StarDecomposition& d, double tol = 1e-10,
                                              std::uint64_t seed = 1) {
  if (g.n() != model.n() || d.n != g.n()) throw ValidationError("residual_norm_check: size mismatch");
  const SampledGraph residual = d.residual_graph();
  ResidualNormReport out;
  for (std::size_t i = 0; i < residual.n(); ++i)
    out.d_prime = std::max(out.d_prime, static_cast<double>(residual.degree(i)));
  if (g.n() > 0) {
    spectral::LanczosOptions opt;
    opt.tol = tol;
    opt.start_seed = seed;
    const auto rep = spectral::extreme_eigenvalues(spectral::centered_operator(residual, model), 1,
                                                   g.n() > 1 ? 1 : 0, opt);
    out.top = rep.top.empty() ? 0.0 : rep.top.front().value;
    out.bottom = rep.bottom.empty() ? out.top : rep.bottom.front().value;
    out.norm = std::max(std::abs(out.top), std::abs(out.bottom));
    out.converged = rep.converged;
  }
  out.bound_shape = std::sqrt(static_cast<double>(g.n()) * model.p_max()) + std::sqrt(out.d_prime);
  out.ratio = out.bound_shape > 0.0 ? out.norm / out.bound_shape : 0.0;
  return out;
}

} // namespace ergraph::pruning
