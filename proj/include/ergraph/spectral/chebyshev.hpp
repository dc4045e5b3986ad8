#pragma once

// Chebyshev-filtered subspace iteration for many of the largest eigenvalues.
//
// Used when the number of wanted eigenvalues is in the thousands, where a
// Krylov basis of 4x that width no longer fits in memory. One block of
// K + guard vectors is filtered by a scaled Chebyshev polynomial that damps
// [lower, cut] and amplifies everything above cut, then orthonormalized and
// Rayleigh-Ritz projected. Converged leading Ritz pairs are locked and leave
// the active block.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/rng.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/spectral/lanczos.hpp"
#include "ergraph/spectral/operator.hpp"

namespace ergraph::spectral {

struct ChebyshevOptions {
  double tol = 1e-8;
  std::size_t max_iter = 60;
  std::uint64_t start_seed = 1;
  std::size_t guard = 0;        ///< 0 selects max(20, K/5)
  std::size_t chunk = 64;       ///< columns filtered at a time
  std::size_t max_degree = 40;
  double max_amplification = 1e8;
  std::size_t bound_steps = 40; ///< Lanczos steps for the spectral bounds
};

struct ChebyshevResult {
  std::vector<Ritz> top; ///< nonincreasing
  std::size_t iterations = 0;
  std::size_t matvecs = 0;
  bool converged = false;
};

namespace detail {

struct SpectrumBounds {
  double lower = 0.0;
  double upper = 0.0;
  double middle = 0.0;
};

/// Short Lanczos run: Ritz extremes plus the last off-diagonal give an upper
/// bound on the spectrum.
inline SpectrumBounds lanczos_bounds(const SymmetricOperator& op, std::size_t steps, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(steps), n);
  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) V(i, 0) = gauss(rng);
  V.col(0).normalize();
  double beta = 0.0;
  Eigen::Index used = m;
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd w = op.apply(Eigen::VectorXd(V.col(j)));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * c;
      if (pass == 0) T(j, j) = c(j);
    }
    beta = w.norm();
    if (beta <= 1e-12 * std::max(1.0, std::abs(T(j, j)))) {
      used = j + 1;
      beta = 0.0;
      break;
    }
    V.col(j + 1) = w / beta;
    if (j + 1 < m) T(j + 1, j) = T(j, j + 1) = beta;
  }
  const SymEig e = sym_eig(T.topLeftCorner(used, used), false);
  SpectrumBounds b;
  b.lower = e.values(0) - beta;
  b.upper = e.values(used - 1) + beta;
  b.middle = 0.5 * (e.values(0) + e.values(used - 1));
  return b;
}

/// Chebyshev value |T_m(t)| for real t, in log form to avoid overflow.
inline double log_chebyshev(std::size_t m, double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return 0.0;
  return static_cast<double>(m) * std::acosh(a);
}

/// Orthonormalize the columns of X in place against themselves by Cholesky QR
/// with column scaling, shifted when the Gram matrix is numerically singular.
inline void cholesky_qr(Eigen::Ref<Eigen::MatrixXd> X) {
  const Eigen::Index n = X.rows(), s = X.cols();
  if (s == 0) return;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s, s);
    G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    G = G.selfadjointView<Eigen::Lower>();
    Eigen::VectorXd scale(s);
    for (Eigen::Index i = 0; i < s; ++i) scale(i) = G(i, i) > 0.0 ? 1.0 / std::sqrt(G(i, i)) : 1.0;
    G = scale.asDiagonal() * G * scale.asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    bool shifted = false;
    if (llt.info() != Eigen::Success) {
      const double shift = 11.0 * static_cast<double>(n * s + s * (s + 1)) * eps * G.norm();
      G.diagonal().array() += shift;
      llt.compute(G);
      if (llt.info() != Eigen::Success) throw std::runtime_error("cholesky_qr: Gram matrix not positive definite");
      shifted = true;
    }
    Eigen::MatrixXd Rinv = Eigen::MatrixXd::Identity(s, s);
    llt.matrixU().solveInPlace(Rinv);
    Rinv = scale.asDiagonal() * Rinv;
    constexpr Eigen::Index rows = 4096;
    for (Eigen::Index r0 = 0; r0 < n; r0 += rows) {
      const Eigen::Index h = std::min(rows, n - r0);
      const Eigen::MatrixXd tmp = X.middleRows(r0, h) * Rinv.triangularView<Eigen::Upper>();
      X.middleRows(r0, h) = tmp;
    }
    if (pass >= 1 && !shifted) break;
  }
}

inline void rotate_rows(Eigen::Ref<Eigen::MatrixXd> X, const Eigen::MatrixXd& Q) {
  constexpr Eigen::Index rows = 4096;
  for (Eigen::Index r0 = 0; r0 < X.rows(); r0 += rows) {
    const Eigen::Index h = std::min(rows, X.rows() - r0);
    const Eigen::MatrixXd tmp = X.middleRows(r0, h) * Q;
    X.middleRows(r0, h) = tmp;
  }
}

/// Y = op(X) column chunk by column chunk.
inline void apply_chunked(const SymmetricOperator& op, const Eigen::Ref<const Eigen::MatrixXd>& X,
                          Eigen::Ref<Eigen::MatrixXd> Y, std::size_t chunk) {
  RowBlock x, y;
  for (Eigen::Index c0 = 0; c0 < X.cols(); c0 += static_cast<Eigen::Index>(chunk)) {
    const Eigen::Index w = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), X.cols() - c0);
    x = X.middleCols(c0, w);
    op.apply(x, y);
    Y.middleCols(c0, w) = y;
  }
}

} // namespace detail

/// Largest `k` eigenvalues of `op`. Deterministic in (op, k, options).
inline ChebyshevResult chebyshev_top_eigenvalues(const SymmetricOperator& op, std::size_t k,
                                                 const ChebyshevOptions& opt = {}) {
  const std::size_t n = op.dim();
  if (k > n) throw ValidationError("chebyshev_top_eigenvalues: k exceeds dimension");
  if (!(opt.tol > 0.0)) throw ValidationError("chebyshev_top_eigenvalues: tol must be positive");
  ChebyshevResult res;
  if (k == 0) {
    res.converged = true;
    return res;
  }
  const std::size_t guard = opt.guard ? opt.guard : std::max<std::size_t>(20, k / 5);
  const auto s = static_cast<Eigen::Index>(std::min(n, k + guard));
  const auto N = static_cast<Eigen::Index>(n);

  // A block that covers most of the space gains nothing from filtering.
  if (static_cast<std::size_t>(s) * 2 > n) {
    const Eigen::MatrixXd M = materialize(op);
    const SymEig e = sym_eig(0.5 * (M + M.transpose()), false);
    for (std::size_t i = 0; i < k; ++i) res.top.push_back({e.values(N - 1 - static_cast<Eigen::Index>(i)), 0.0});
    res.converged = true;
    res.matvecs = n;
    return res;
  }

  Rng rng = make_rng(opt.start_seed, 0);
  const detail::SpectrumBounds bounds = detail::lanczos_bounds(op, opt.bound_steps, rng);
  res.matvecs += opt.bound_steps;
  // Ritz extremes after a few steps are estimates, so widen the damped
  // interval slightly below them.
  const double lower = bounds.lower - 0.05 * (bounds.upper - bounds.lower);
  double cut = bounds.middle;
  double top_est = bounds.upper;
  double kth_est = cut;

  Eigen::MatrixXd X(N, s);
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index j = 0; j < s; ++j)
      for (Eigen::Index i = 0; i < N; ++i) X(i, j) = gauss(rng);
  }
  Eigen::MatrixXd AX;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(s);
  Eigen::VectorXd resid = Eigen::VectorXd::Constant(s, std::numeric_limits<double>::infinity());
  Eigen::Index nlock = 0;
  const auto K = static_cast<Eigen::Index>(k);

  for (std::size_t it = 0; it < opt.max_iter && nlock < K; ++it) {
    ++res.iterations;
    const Eigen::Index na = s - nlock;
    auto Xa = X.rightCols(na);

    // Filter degree: as high as allowed while the gain of the top active
    // direction over the K-th stays within max_amplification.
    const double c = 0.5 * (cut + lower);
    const double e = 0.5 * (cut - lower);
    if (!(e > 0.0)) break;
    const double log_cap = std::log(opt.max_amplification);
    std::size_t degree = 1;
    for (std::size_t m = opt.max_degree; m >= 1; --m) {
      const double gain = detail::log_chebyshev(m, (top_est - c) / e) - detail::log_chebyshev(m, (kth_est - c) / e);
      if (gain <= log_cap) {
        degree = m;
        break;
      }
    }
    const double t0 = std::max((top_est - c) / e, 1.0 + 1e-12);

    RowBlock Y0, Y1, Y2;
    for (Eigen::Index c0 = 0; c0 < na; c0 += static_cast<Eigen::Index>(opt.chunk)) {
      const Eigen::Index w = std::min<Eigen::Index>(static_cast<Eigen::Index>(opt.chunk), na - c0);
      Y0 = Xa.middleCols(c0, w);
      double s_prev = 1.0 / t0;
      op.apply(Y0, Y1);
      Y1 = (Y1 - c * Y0) * (s_prev / e);
      for (std::size_t m = 2; m <= degree; ++m) {
        const double s_cur = 1.0 / (2.0 * t0 - s_prev);
        op.apply(Y1, Y2);
        Y2 = (Y2 - c * Y1) * (2.0 * s_cur / e) - (s_cur * s_prev) * Y0;
        std::swap(Y0, Y1);
        std::swap(Y1, Y2);
        s_prev = s_cur;
      }
      Xa.middleCols(c0, w) = Y1;
      res.matvecs += degree * static_cast<std::size_t>(w);
    }

    if (nlock > 0) {
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd C = X.leftCols(nlock).transpose() * Xa;
        constexpr Eigen::Index rows = 4096;
        for (Eigen::Index r0 = 0; r0 < N; r0 += rows) {
          const Eigen::Index h = std::min(rows, N - r0);
          Xa.middleRows(r0, h).noalias() -= X.leftCols(nlock).middleRows(r0, h) * C;
        }
      }
    }
    detail::cholesky_qr(Xa);

    // Rayleigh-Ritz on the active block.
    AX.resize(N, na);
    detail::apply_chunked(op, Xa, AX, opt.chunk);
    res.matvecs += static_cast<std::size_t>(na);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(na, na);
    H.noalias() = Xa.transpose() * AX;
    H = (0.5 * (H + H.transpose())).eval();
    // The first pass starts from random vectors and cannot converge, so only
    // its Ritz values are needed to place the next filter.
    const bool want_vectors = it > 0;
    const SymEig eig = sym_eig(H, want_vectors);
    for (Eigen::Index j = 0; j < na; ++j) theta(nlock + j) = eig.values(na - 1 - j);
    if (want_vectors) {
      const Eigen::MatrixXd Q = eig.vectors.rowwise().reverse();
      detail::rotate_rows(Xa, Q);
      // Residuals only matter for the converged prefix, which is what gets locked.
      const auto step = static_cast<Eigen::Index>(opt.chunk);
      bool prefix = true;
      for (Eigen::Index j0 = 0; j0 < na && prefix; j0 += step) {
        const Eigen::Index w = std::min(step, na - j0);
        const Eigen::MatrixXd R = AX * Q.middleCols(j0, w);
        for (Eigen::Index j = 0; j < w; ++j) {
          const double th = theta(nlock + j0 + j);
          const double r = (R.col(j) - th * Xa.col(j0 + j)).norm() / std::max(1.0, std::abs(th));
          resid(nlock + j0 + j) = r;
          if (r > opt.tol) prefix = false;
        }
      }
    }
    while (nlock < K && resid(nlock) <= opt.tol) ++nlock;
    cut = theta(s - 1);
    top_est = nlock < s ? theta(nlock) : theta(s - 1);
    kth_est = theta(std::min(K, s) - 1);
  }

  res.converged = nlock >= K;
  for (Eigen::Index j = 0; j < K; ++j) res.top.push_back({theta(j), resid(j)});
  std::stable_sort(res.top.begin(), res.top.end(), [](const Ritz& a, const Ritz& b) { return a.value > b.value; });
  return res;
}

} // namespace ergraph::spectral
