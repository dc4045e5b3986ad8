#pragma once

// Extreme eigenvalues of A and of A - E[A] that exploit connected components.
//
// A is block diagonal over components, so its spectrum is the union of the
// component spectra: small components are solved densely, large ones
// iteratively. For the homogeneous model E[A] = p J - s I (s = p without
// loops, 0 with loops), so A - E[A] = (A + s I) - p 1 1^T is a rank-one
// update of a block-diagonal matrix. Its eigenvalues are the eigenvalues of
// A + s I whose eigenspace is orthogonal to 1, and the roots of the secular
// equation
//
//     g(x) = 1 - p * sum_j w_j / (nu_j - x) = 0,
//
// where nu_j runs over the distinct eigenvalues of A + s I and w_j is the
// squared norm of the projection of 1 on the eigenspace. g is decreasing
// between poles, so there is exactly one root in each gap (nu_{j+1}, nu_j)
// and one below the smallest pole.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/graph_model.hpp"
#include "ergraph/spectral/chebyshev.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/spectral/lanczos.hpp"
#include "ergraph/spectral/operator.hpp"

namespace ergraph::spectral {

struct SolverOptions {
  std::size_t component_dense_limit = 4000; ///< components up to this size are solved densely
  std::size_t chebyshev_threshold = 200;    ///< more wanted eigenvalues than this use filtering
  double cluster_tol = 1e-9;                ///< relative gap below which eigenvalues are merged
  LanczosOptions lanczos;
  ChebyshevOptions chebyshev;
};

enum class SolverPath { component_exact, iterative };

struct ExtremeSpectrum {
  SpectralReport report;
  SolverPath path = SolverPath::component_exact;
  std::size_t largest_component = 0;
};

namespace detail {

inline Eigen::MatrixXd dense_component(const SampledGraph& g, std::span<const Vertex> members) {
  const auto m = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Vertex v = members[static_cast<std::size_t>(a)];
    if (g.has_loop(v)) M(a, a) = 1.0;
    for (Vertex w : g.neighbors(v)) {
      const auto it = std::lower_bound(members.begin(), members.end(), w);
      M(a, it - members.begin()) = 1.0;
    }
  }
  return M;
}

/// Backward error of a dense symmetric eigensolve, reported as residual.
inline double dense_residual(double value, double norm_bound, std::size_t m) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return 8.0 * eps * static_cast<double>(std::max<std::size_t>(m, 1)) * std::max(1.0, norm_bound) /
         std::max(1.0, std::abs(value));
}

/// Top `nt` and bottom `nb` of a symmetric operator by the iterative solvers.
inline SpectralReport iterative_extremes(const SymmetricOperator& op, std::size_t nt, std::size_t nb,
                                         const SolverOptions& opt) {
  if (nt + nb <= opt.chebyshev_threshold) return extreme_eigenvalues(op, nt, nb, opt.lanczos);
  SpectralReport rep;
  rep.seed = opt.chebyshev.start_seed;
  rep.converged = true;
  if (nt > 0) {
    const auto r = chebyshev_top_eigenvalues(op, nt, opt.chebyshev);
    rep.top = r.top;
    rep.iterations += r.iterations;
    rep.matvecs += r.matvecs;
    rep.converged = rep.converged && r.converged;
  }
  if (nb > 0) {
    const SymmetricOperator neg(op.dim(), op.kind(), [&op](ConstBlockMap x, BlockMap y) {
      op.apply(x, y);
      y = -y;
    });
    const auto r = chebyshev_top_eigenvalues(neg, nb, opt.chebyshev);
    for (const Ritz& q : r.top) rep.bottom.push_back({-q.value, q.residual});
    rep.iterations += r.iterations;
    rep.matvecs += r.matvecs;
    rep.converged = rep.converged && r.converged;
  }
  return rep;
}

struct Pole {
  double nu = 0.0;
  double weight = 0.0;
};

/// Root of 1 - p sum w_j/(nu_j - x) in (left, right), where `right` is the
/// pole with index `jr` and `left` is the pole with index jr + 1 or a finite
/// lower bracket when jr is the last pole. Returns (root, bracket width).
inline std::pair<double, double> secular_root(const std::vector<Pole>& poles, std::size_t jr, double p) {
  const double right = poles[jr].nu;
  double left;
  if (jr + 1 < poles.size()) {
    left = poles[jr + 1].nu;
  } else {
    double total = 0.0;
    for (const Pole& q : poles) total += q.weight;
    left = right - p * total - 1.0;
  }
  // Evaluate g at origin + delta with differences nu_j - origin formed once.
  auto g = [&](double origin, double delta) {
    double sum = 0.0;
    for (const Pole& q : poles) sum += q.weight / ((q.nu - origin) - delta);
    return 1.0 - p * sum;
  };
  const double mid = 0.5 * (left + right);
  const bool near_right = g(mid, 0.0) > 0.0;
  const double origin = near_right ? right : left;
  double lo = (near_right ? mid : left) - origin;
  double hi = (near_right ? right : mid) - origin;
  const double resolution = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(origin));
  for (int it = 0; it < 200 && hi - lo > resolution; ++it) {
    const double c = 0.5 * (lo + hi);
    if (c <= lo || c >= hi) break;
    if (g(origin, c) > 0.0)
      lo = c;
    else
      hi = c;
  }
  return {origin + 0.5 * (lo + hi), hi - lo};
}

} // namespace detail

/// Top `nt` and bottom `nb` eigenvalues of the adjacency matrix of `g`.
inline ExtremeSpectrum adjacency_extremes(const SampledGraph& g, std::size_t nt, std::size_t nb,
                                          const SolverOptions& opt = {}) {
  if (nt + nb > g.n()) throw ValidationError("adjacency_extremes: num_top + num_bottom exceeds n");
  ExtremeSpectrum out;
  out.report.seed = opt.lanczos.start_seed;
  out.report.converged = true;
  const Components comps = connected_components(g);
  std::vector<Ritz> all_top, all_bottom;
  for (const auto& members : comps.members) {
    const std::size_t m = members.size();
    out.largest_component = std::max(out.largest_component, m);
    if (m <= opt.component_dense_limit) {
      const Eigen::MatrixXd M = detail::dense_component(g, members);
      const SymEig e = sym_eig(M, false);
      const double bound = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
      const std::size_t take_top = std::min(nt, m), take_bottom = std::min(nb, m);
      for (std::size_t i = 0; i < take_top; ++i) {
        const double v = e.values(static_cast<Eigen::Index>(m - 1 - i));
        all_top.push_back({v, detail::dense_residual(v, bound, m)});
      }
      for (std::size_t i = 0; i < take_bottom; ++i) {
        const double v = e.values(static_cast<Eigen::Index>(i));
        all_bottom.push_back({v, detail::dense_residual(v, bound, m)});
      }
      continue;
    }
    const std::size_t ct = std::min(nt, m), cb = std::min(nb, m);
    SpectralReport r;
    if (ct + cb > m) {
      // The request covers the whole component anyway.
      const SymEig e = sym_eig(detail::dense_component(g, members), false);
      for (std::size_t i = 0; i < ct; ++i) r.top.push_back({e.values(static_cast<Eigen::Index>(m - 1 - i)), 0.0});
      for (std::size_t i = 0; i < cb; ++i) r.bottom.push_back({e.values(static_cast<Eigen::Index>(i)), 0.0});
      r.converged = true;
    } else {
      r = detail::iterative_extremes(csr_operator(csr_induced(g, members)), ct, cb, opt);
      out.path = SolverPath::iterative;
    }
    out.report.iterations += r.iterations;
    out.report.matvecs += r.matvecs;
    out.report.converged = out.report.converged && r.converged;
    all_top.insert(all_top.end(), r.top.begin(), r.top.end());
    all_bottom.insert(all_bottom.end(), r.bottom.begin(), r.bottom.end());
  }
  auto by_desc = [](const Ritz& a, const Ritz& b) { return a.value > b.value; };
  auto by_asc = [](const Ritz& a, const Ritz& b) { return a.value < b.value; };
  std::stable_sort(all_top.begin(), all_top.end(), by_desc);
  std::stable_sort(all_bottom.begin(), all_bottom.end(), by_asc);
  all_top.resize(std::min(nt, all_top.size()));
  all_bottom.resize(std::min(nb, all_bottom.size()));
  out.report.top = std::move(all_top);
  out.report.bottom = std::move(all_bottom);
  if (out.report.top.size() < nt || out.report.bottom.size() < nb) out.report.converged = false;
  return out;
}

/// Top `nt` and bottom `nb` eigenvalues of A - E[A] for a homogeneous model.
/// Exact through the secular equation when every component fits the dense
/// limit; otherwise falls back to the iterative solvers on the full operator.
inline ExtremeSpectrum centered_extremes(const SampledGraph& g, const EdgeProbabilityModel& model, std::size_t nt,
                                         std::size_t nb, const SolverOptions& opt = {}) {
  if (g.n() != model.n()) throw ValidationError("centered_extremes: graph and model sizes differ");
  if (nt + nb > g.n()) throw ValidationError("centered_extremes: num_top + num_bottom exceeds n");
  ExtremeSpectrum out;
  const Components comps = connected_components(g);
  for (const auto& c : comps.members) out.largest_component = std::max(out.largest_component, c.size());

  if (model.kind() != ModelKind::homogeneous || out.largest_component > opt.component_dense_limit) {
    out.path = SolverPath::iterative;
    out.report = detail::iterative_extremes(centered_operator(g, model), nt, nb, opt);
    return out;
  }

  const double p = g.n() > 1 ? model.block_probability(0, 0) : 0.0;
  const double shift = model.allow_loops() ? 0.0 : p;
  struct Eig {
    double nu;
    double weight;
    double resid;
  };
  std::vector<Eig> eigs;
  eigs.reserve(g.n());
  for (const auto& members : comps.members) {
    const std::size_t m = members.size();
    if (m == 1) {
      eigs.push_back({(g.has_loop(members[0]) ? 1.0 : 0.0) + shift, 1.0, 0.0});
      continue;
    }
    const Eigen::MatrixXd M = detail::dense_component(g, members);
    const SpectralMeasure sm = spectral_measure(M, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
    const double bound = std::max(std::abs(sm.values(0)), std::abs(sm.values(sm.values.size() - 1)));
    for (Eigen::Index i = 0; i < sm.values.size(); ++i)
      eigs.push_back({sm.values(i) + shift, sm.weights(i), detail::dense_residual(sm.values(i), bound, m)});
  }
  std::stable_sort(eigs.begin(), eigs.end(), [](const Eig& a, const Eig& b) { return a.nu > b.nu; });

  // Merge numerically equal eigenvalues. Each cluster with nonzero weight
  // contributes one pole; its remaining multiplicity stays fixed.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double weight_floor = 1e4 * eps * eps;
  std::vector<detail::Pole> poles;
  std::vector<Ritz> fixed;
  double max_resid = 0.0;
  for (std::size_t a = 0; a < eigs.size();) {
    std::size_t b = a + 1;
    while (b < eigs.size() && eigs[b - 1].nu - eigs[b].nu <= opt.cluster_tol * std::max(1.0, std::abs(eigs[a].nu))) ++b;
    double w = 0.0, res = 0.0, nu = 0.0;
    for (std::size_t i = a; i < b; ++i) {
      w += eigs[i].weight;
      res = std::max(res, eigs[i].resid);
      nu += eigs[i].nu;
    }
    nu /= static_cast<double>(b - a);
    max_resid = std::max(max_resid, res);
    std::size_t mult = b - a;
    if (w > weight_floor * static_cast<double>(mult)) {
      poles.push_back({nu, w});
      --mult;
    }
    for (std::size_t i = 0; i < mult; ++i) fixed.push_back({nu, res});
    a = b;
  }

  std::vector<Ritz> top = fixed, bottom;
  const std::size_t J = poles.size();
  auto root = [&](std::size_t j) {
    const auto [x, width] = detail::secular_root(poles, j, p);
    return Ritz{x, (width + max_resid) / std::max(1.0, std::abs(x))};
  };
  std::vector<char> done(J, 0);
  std::vector<Ritz> roots(J);
  for (std::size_t j = 0; j < std::min(nt, J); ++j) {
    roots[j] = root(j);
    done[j] = 1;
    top.push_back(roots[j]);
  }
  bottom = fixed;
  for (std::size_t i = 0; i < std::min(nb, J); ++i) {
    const std::size_t j = J - 1 - i;
    if (!done[j]) {
      roots[j] = root(j);
      done[j] = 1;
    }
    bottom.push_back(roots[j]);
  }
  std::stable_sort(top.begin(), top.end(), [](const Ritz& a, const Ritz& b) { return a.value > b.value; });
  std::stable_sort(bottom.begin(), bottom.end(), [](const Ritz& a, const Ritz& b) { return a.value < b.value; });
  top.resize(std::min(nt, top.size()));
  bottom.resize(std::min(nb, bottom.size()));
  out.report.top = std::move(top);
  out.report.bottom = std::move(bottom);
  out.report.converged = true;
  out.report.seed = opt.lanczos.start_seed;
  out.path = SolverPath::component_exact;
  return out;
}

} // namespace ergraph::spectral
