#pragma once

// Dense symmetric eigensolvers and closed-form star spectra.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/spectral/operator.hpp"

namespace ergraph::spectral {

inline constexpr std::size_t kDefaultDenseLimit = 2000;

struct SymEig {
  Eigen::VectorXd values;  ///< ascending
  Eigen::MatrixXd vectors; ///< columns, empty unless requested
};

/// Full eigendecomposition of a symmetric matrix (lower triangle is read).
inline SymEig sym_eig(const Eigen::MatrixXd& a, bool want_vectors) {
  if (a.rows() != a.cols()) throw ValidationError("sym_eig: matrix must be square");
  SymEig out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, want_vectors ? Eigen::ComputeEigenvectors
                                                                    : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver did not converge");
  out.values = es.eigenvalues();
  if (want_vectors) out.vectors = es.eigenvectors();
  return out;
}

/// Eigenvalues of a symmetric matrix together with the squared projections
/// of a fixed vector z on the eigenvectors: weights(i) = <u_i, z>^2.
/// Costs one Householder tridiagonalization plus an implicit QL sweep that
/// carries a single row instead of the full eigenvector matrix.
struct SpectralMeasure {
  Eigen::VectorXd values;  ///< ascending
  Eigen::VectorXd weights;
};

namespace detail {

/// Implicit QL on the tridiagonal (d, e), e(i) coupling i and i+1. The
/// rotations are applied to the row vector w, which ends as w^T S.
inline void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::VectorXd& w) {
  const int m = static_cast<int>(d.size());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Relative deflation alone never fires next to an exact zero eigenvalue,
  // so couplings below eps * ||T|| are dropped as well.
  double norm = 0.0;
  for (int i = 0; i < m; ++i)
    norm = std::max(norm, std::abs(d(i)) + std::abs(e(i)) + (i > 0 ? std::abs(e(i - 1)) : 0.0));
  const double floor = eps * norm;
  for (int l = 0; l < m; ++l) {
    int iter = 0;
    int mm = l;
    do {
      for (mm = l; mm < m - 1; ++mm) {
        const double dd = std::abs(d(mm)) + std::abs(d(mm + 1));
        if (std::abs(e(mm)) <= std::max(eps * dd, floor)) break;
      }
      if (mm == l) break;
      if (++iter > 60) throw std::runtime_error("tridiagonal_ql: no convergence");
      double g = (d(l + 1) - d(l)) / (2.0 * e(l));
      double r = std::hypot(g, 1.0);
      g = d(mm) - d(l) + e(l) / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = mm - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e(i);
        const double b = c * e(i);
        r = std::hypot(f, g);
        e(i + 1) = r;
        if (r == 0.0) {
          d(i + 1) -= p;
          e(mm) = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
        const double wf = w(i + 1);
        w(i + 1) = s * w(i) + c * wf;
        w(i) = c * w(i) - s * wf;
      }
      if (underflow) continue;
      d(l) -= p;
      e(l) = g;
      e(mm) = 0.0;
    } while (mm != l);
  }
}

} // namespace detail

inline SpectralMeasure spectral_measure(const Eigen::MatrixXd& a, const Eigen::VectorXd& z) {
  if (a.rows() != a.cols() || z.size() != a.rows()) throw ValidationError("spectral_measure: dimension mismatch");
  SpectralMeasure out;
  const Eigen::Index m = a.rows();
  if (m == 0) return out;
  if (m == 1) {
    out.values = a.diagonal();
    out.weights = z.cwiseAbs2();
    return out;
  }
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(a);
  Eigen::VectorXd d = tri.diagonal();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  e.head(m - 1) = tri.subDiagonal();
  Eigen::VectorXd w = tri.matrixQ().adjoint() * z;
  detail::tridiagonal_ql(d, e, w);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return d(x) < d(y); });
  out.values.resize(m);
  out.weights.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.values(i) = d(order[static_cast<std::size_t>(i)]);
    out.weights(i) = w(order[static_cast<std::size_t>(i)]) * w(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// All eigenvalues of `op`, nonincreasing.
inline std::vector<double> dense_spectrum(const SymmetricOperator& op, std::size_t dense_limit = kDefaultDenseLimit) {
  if (op.dim() > dense_limit)
    throw CapacityError("dense_spectrum: dimension " + std::to_string(op.dim()) + " exceeds dense limit " +
                        std::to_string(dense_limit));
  Eigen::MatrixXd M = materialize(op);
  M = (0.5 * (M + M.transpose())).eval();
  const SymEig e = sym_eig(M, false);
  std::vector<double> v(e.values.data(), e.values.data() + e.values.size());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// Nonzero spectrum {+sqrt(D), -sqrt(D)} of the star with D leaves, and the
/// residual of the eigenvector (sqrt(D), 1, ..., 1) under one matvec.
struct StarSpectrum {
  std::size_t leaves = 0;
  double positive = 0.0;
  double negative = 0.0;
  std::size_t zero_multiplicity = 0;
  double eigenvector_residual = 0.0;
};

inline StarSpectrum star_spectrum(long long leaves) {
  if (leaves < 1) throw DomainError("star_spectrum: need at least one leaf");
  StarSpectrum s;
  s.leaves = static_cast<std::size_t>(leaves);
  const double r = std::sqrt(static_cast<double>(leaves));
  s.positive = r;
  s.negative = -r;
  s.zero_multiplicity = s.leaves - 1;
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= s.leaves; ++i) edges.emplace_back(0, static_cast<Vertex>(i));
  const auto star = SampledGraph::from_edges(s.leaves + 1, std::move(edges));
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(s.leaves + 1));
  v(0) = r;
  s.eigenvector_residual = (adjacency_operator(star).apply(v) - r * v).norm();
  return s;
}

} // namespace ergraph::spectral
