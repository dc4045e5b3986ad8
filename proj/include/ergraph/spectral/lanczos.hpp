#pragma once

// Extreme eigenvalues of a symmetric operator by thick-restart Lanczos.
//
// Each run keeps a fully reorthogonalized Krylov basis, restarts from the
// most useful Ritz vectors and locks Ritz pairs once their residual is below
// tolerance. A Krylov space built from a single vector sees one direction per
// eigenspace, so after convergence fresh random starts are run on the
// complement of the locked vectors until no missed eigenvalue turns up.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/rng.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/spectral/operator.hpp"

namespace ergraph::spectral {

struct Ritz {
  double value = 0.0;
  double residual = 0.0; ///< ||M v - value v|| / max(1, |value|)
};

struct SpectralReport {
  std::vector<Ritz> top;    ///< nonincreasing
  std::vector<Ritz> bottom; ///< nondecreasing
  std::size_t iterations = 0;
  std::size_t matvecs = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct LanczosOptions {
  double tol = 1e-10;
  std::size_t max_iter = 2000; ///< restart cycles per run
  std::uint64_t start_seed = 1;
  std::size_t krylov_dim = 0; ///< 0 selects max(4 * wanted, 60)
  std::size_t max_probe_rounds = 256;
  std::size_t probe_size = 4;
};

namespace detail {

/// Orthonormal set of converged eigenvectors used for deflation.
class LockedSet {
public:
  explicit LockedSet(Eigen::Index n) : n_(n) {}

  Eigen::Index size() const noexcept { return count_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& residual_estimates() const noexcept { return residuals_; }
  auto basis() const { return V_.leftCols(count_); }

  void project_out(Eigen::Ref<Eigen::VectorXd> w) const {
    if (count_ == 0) return;
    const Eigen::VectorXd c = basis().transpose() * w;
    w.noalias() -= basis() * c;
  }

  void push(Eigen::VectorXd v, double value, double residual) {
    project_out(v);
    project_out(v);
    v.normalize();
    if (count_ == V_.cols()) V_.conservativeResize(n_, std::max<Eigen::Index>(16, 2 * V_.cols()));
    V_.col(count_) = v;
    values_.push_back(value);
    residuals_.push_back(residual);
    ++count_;
  }

private:
  Eigen::Index n_;
  Eigen::Index count_ = 0;
  Eigen::MatrixXd V_;
  std::vector<double> values_;
  std::vector<double> residuals_;
};

struct RunStats {
  std::size_t restarts = 0;
  std::size_t matvecs = 0;
  bool converged = false;
};

inline void random_orthonormal(Eigen::Ref<Eigen::VectorXd> out, const LockedSet& locked,
                               const Eigen::Ref<const Eigen::MatrixXd>& basis, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = gauss(rng);
    for (int pass = 0; pass < 2; ++pass) {
      locked.project_out(out);
      if (basis.cols() > 0) {
        const Eigen::VectorXd c = basis.transpose() * out;
        out.noalias() -= basis * c;
      }
    }
    const double nrm = out.norm();
    if (nrm > 1e-8) {
      out /= nrm;
      return;
    }
  }
  out.setZero();
}

/// One thick-restart run for `want_top` largest and `want_bottom` smallest
/// eigenvalues of the operator restricted to the complement of `locked`.
/// Converged pairs are appended to `locked`; on failure the best current
/// Ritz pairs are appended anyway and `converged` is false.
inline RunStats krylov_schur(const SymmetricOperator& op, LockedSet& locked, std::size_t want_top,
                             std::size_t want_bottom, std::size_t krylov_dim, double tol,
                             std::size_t max_restarts, Rng& rng) {
  RunStats st;
  const auto n = static_cast<Eigen::Index>(op.dim());
  const Eigen::Index avail = n - locked.size();
  if (avail <= 0 || want_top + want_bottom == 0) {
    st.converged = true;
    return st;
  }
  const auto wanted_total = static_cast<Eigen::Index>(want_top + want_bottom);
  if (wanted_total > avail) {
    const auto excess = static_cast<std::size_t>(wanted_total - avail);
    if (want_bottom >= excess)
      want_bottom -= excess;
    else {
      want_top -= excess - want_bottom;
      want_bottom = 0;
    }
  }
  const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(krylov_dim), avail);

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  random_orthonormal(V.col(0), locked, V.leftCols(0), rng);
  Eigen::VectorXd w(n);
  Eigen::Index k = 0;
  std::size_t found_top = 0, found_bottom = 0;
  double anorm = 0.0;

  for (;; ++st.restarts) {
    Eigen::Index m_eff = m;
    bool exhausted = false;
    for (Eigen::Index j = k; j < m; ++j) {
      w = op.apply(Eigen::VectorXd(V.col(j)));
      ++st.matvecs;
      Eigen::VectorXd h = Eigen::VectorXd::Zero(j + 1);
      // Repeat Gram-Schmidt while a pass removes more than 1/sqrt(2) of the norm.
      double prev = w.norm();
      double beta = prev;
      for (int pass = 0; pass < 5; ++pass) {
        locked.project_out(w);
        const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * w;
        w.noalias() -= V.leftCols(j + 1) * c;
        h += c;
        beta = w.norm();
        if (pass >= 1 && beta > 0.7071 * prev) break;
        prev = beta;
      }
      H.col(j).head(j + 1) = h;
      anorm = std::max({anorm, h.cwiseAbs().maxCoeff(), beta});
      if (locked.size() + j + 1 >= n) {
        m_eff = j + 1;
        exhausted = true;
        break;
      }
      if (beta <= 1e-14 * std::max(anorm, 1e-300)) {
        H(j + 1, j) = 0.0;
        random_orthonormal(V.col(j + 1), locked, V.leftCols(j + 1), rng);
        if (V.col(j + 1).squaredNorm() == 0.0) {
          m_eff = j + 1;
          exhausted = true;
          break;
        }
      } else {
        V.col(j + 1) = w / beta;
        H(j + 1, j) = beta;
      }
    }

    const Eigen::MatrixXd Hm = H.topLeftCorner(m_eff, m_eff);
    const SymEig eig = sym_eig(0.5 * (Hm + Hm.transpose()), true);
    const Eigen::VectorXd& theta = eig.values; // ascending
    const Eigen::MatrixXd& Y = eig.vectors;
    Eigen::RowVectorXd coupling = Eigen::RowVectorXd::Zero(m_eff);
    if (!exhausted) coupling = H.row(m_eff).head(m_eff);
    const Eigen::RowVectorXd bY = coupling * Y;

    const std::size_t rem_top = want_top - found_top;
    const std::size_t rem_bottom = want_bottom - found_bottom;
    std::vector<Eigen::Index> top_idx, bottom_idx;
    for (Eigen::Index i = m_eff - 1; i >= 0 && top_idx.size() < rem_top; --i) top_idx.push_back(i);
    for (Eigen::Index i = 0; i < m_eff && bottom_idx.size() < rem_bottom; ++i)
      if (std::find(top_idx.begin(), top_idx.end(), i) == top_idx.end()) bottom_idx.push_back(i);

    const bool last_chance = st.restarts + 1 >= max_restarts;
    std::vector<char> is_locked(static_cast<std::size_t>(m_eff), 0);
    auto try_lock = [&](Eigen::Index i, std::size_t& counter) {
      const double res = std::abs(bY(i));
      const bool ok = res <= tol * std::max(1.0, std::abs(theta(i)));
      if (ok || exhausted || last_chance) {
        locked.push(V.leftCols(m_eff) * Y.col(i), theta(i), res);
        is_locked[static_cast<std::size_t>(i)] = 1;
        ++counter;
      }
    };
    for (Eigen::Index i : top_idx) try_lock(i, found_top);
    for (Eigen::Index i : bottom_idx) try_lock(i, found_bottom);

    if (found_top >= want_top && found_bottom >= want_bottom) {
      st.converged = true;
      for (Eigen::Index i : top_idx)
        if (std::abs(bY(i)) > tol * std::max(1.0, std::abs(theta(i)))) st.converged = false;
      for (Eigen::Index i : bottom_idx)
        if (std::abs(bY(i)) > tol * std::max(1.0, std::abs(theta(i)))) st.converged = false;
      if (exhausted) st.converged = true;
      ++st.restarts;
      return st;
    }

    // Thick restart: keep unlocked Ritz vectors nearest the wanted ends.
    const std::size_t need_top = want_top - found_top;
    const std::size_t need_bottom = want_bottom - found_bottom;
    std::vector<Eigen::Index> free_desc;
    for (Eigen::Index i = m_eff - 1; i >= 0; --i)
      if (!is_locked[static_cast<std::size_t>(i)]) free_desc.push_back(i);
    const std::size_t cap =
        std::min<std::size_t>(free_desc.size(), static_cast<std::size_t>(std::max<Eigen::Index>(1, m - 1)));
    std::size_t base = need_top + need_bottom;
    std::size_t extra = cap > base ? (cap - base) / 2 : 0;
    std::size_t keep_top = need_top, keep_bottom = need_bottom;
    if (need_top > 0 && need_bottom > 0) {
      keep_top += extra / 2;
      keep_bottom += extra - extra / 2;
    } else if (need_top > 0) {
      keep_top += extra;
    } else {
      keep_bottom += extra;
    }
    std::vector<Eigen::Index> keep;
    for (std::size_t a = 0; a < free_desc.size() && keep.size() < keep_top; ++a) keep.push_back(free_desc[a]);
    for (std::size_t a = free_desc.size(); a-- > 0 && keep.size() < keep_top + keep_bottom;)
      if (std::find(keep.begin(), keep.end(), free_desc[a]) == keep.end()) keep.push_back(free_desc[a]);
    const auto k_new = static_cast<Eigen::Index>(std::min<std::size_t>(keep.size(), static_cast<std::size_t>(m - 1)));
    keep.resize(static_cast<std::size_t>(k_new));

    Eigen::MatrixXd Yk(m_eff, k_new);
    for (Eigen::Index a = 0; a < k_new; ++a) Yk.col(a) = Y.col(keep[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd residual_vec = V.col(m_eff);
    const Eigen::MatrixXd Vk = V.leftCols(m_eff) * Yk;
    V.leftCols(k_new) = Vk;
    V.col(k_new) = residual_vec;
    // Vectors locked in this cycle are orthogonal to the kept Ritz vectors but
    // the residual vector must also stay clear of them.
    {
      Eigen::VectorXd r = V.col(k_new);
      locked.project_out(r);
      const double nr = r.norm();
      if (nr > 1e-8)
        V.col(k_new) = r / nr;
      else
        random_orthonormal(V.col(k_new), locked, V.leftCols(k_new), rng);
    }
    H.setZero();
    for (Eigen::Index a = 0; a < k_new; ++a) {
      H(a, a) = theta(keep[static_cast<std::size_t>(a)]);
      H(k_new, a) = bY(keep[static_cast<std::size_t>(a)]);
    }
    k = k_new;
  }
}

} // namespace detail

/// Largest `num_top` and smallest `num_bottom` eigenvalues with residual
/// certificates. Deterministic in (operator, parameters, start_seed).
inline SpectralReport extreme_eigenvalues(const SymmetricOperator& op, std::size_t num_top, std::size_t num_bottom,
                                          const LanczosOptions& opt = {}) {
  const std::size_t n = op.dim();
  if (num_top + num_bottom > n) throw ValidationError("extreme_eigenvalues: num_top + num_bottom exceeds dim");
  if (!(opt.tol > 0.0)) throw ValidationError("extreme_eigenvalues: tol must be positive");
  SpectralReport rep;
  rep.seed = opt.start_seed;
  if (num_top + num_bottom == 0) {
    rep.converged = true;
    return rep;
  }
  Rng rng = make_rng(opt.start_seed, 0);
  detail::LockedSet locked(static_cast<Eigen::Index>(n));
  const std::size_t m =
      opt.krylov_dim ? opt.krylov_dim : std::max<std::size_t>(4 * (num_top + num_bottom), 60);
  auto st = detail::krylov_schur(op, locked, num_top, num_bottom, m, opt.tol, opt.max_iter, rng);
  rep.iterations += st.restarts;
  rep.matvecs += st.matvecs;
  rep.converged = st.converged;

  auto sorted_values = [&] {
    std::vector<double> v = locked.values();
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
  };
  for (std::size_t round = 0; rep.converged && round < opt.max_probe_rounds; ++round) {
    if (static_cast<std::size_t>(locked.size()) >= n) break;
    const auto vals = sorted_values();
    const double top_bound = num_top ? vals[num_top - 1] : 0.0;
    const double bottom_bound = num_bottom ? vals[vals.size() - num_bottom] : 0.0;
    const std::size_t pt = num_top ? std::min(opt.probe_size, num_top) : 0;
    const std::size_t pb = num_bottom ? std::min(opt.probe_size, num_bottom) : 0;
    const auto before = static_cast<std::size_t>(locked.size());
    const auto pst = detail::krylov_schur(op, locked, pt, pb, std::max<std::size_t>(4 * (pt + pb), 40), opt.tol,
                                          opt.max_iter, rng);
    rep.iterations += pst.restarts;
    rep.matvecs += pst.matvecs;
    if (!pst.converged) rep.converged = false;
    bool improved = false;
    for (std::size_t i = before; i < locked.values().size(); ++i) {
      const double v = locked.values()[i];
      if (num_top && v > top_bound + 10.0 * opt.tol * std::max(1.0, std::abs(top_bound))) improved = true;
      if (num_bottom && v < bottom_bound - 10.0 * opt.tol * std::max(1.0, std::abs(bottom_bound))) improved = true;
    }
    if (!improved) break;
    if (round + 1 == opt.max_probe_rounds) rep.converged = false;
  }

  // Select and certify.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(locked.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return locked.values()[static_cast<std::size_t>(a)] > locked.values()[static_cast<std::size_t>(b)];
  });
  if (order.size() < num_top + num_bottom) {
    rep.converged = false;
    num_top = std::min(num_top, order.size());
    num_bottom = std::min(num_bottom, order.size() - num_top);
  }
  std::vector<Eigen::Index> chosen;
  for (std::size_t a = 0; a < num_top; ++a) chosen.push_back(order[a]);
  for (std::size_t a = 0; a < num_bottom; ++a) chosen.push_back(order[order.size() - 1 - a]);
  RowBlock X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(chosen.size())), AX;
  for (std::size_t c = 0; c < chosen.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = locked.basis().col(chosen[c]);
  op.apply(X, AX);
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    const double theta = locked.values()[static_cast<std::size_t>(chosen[c])];
    const auto ci = static_cast<Eigen::Index>(c);
    const double res = (AX.col(ci) - theta * X.col(ci)).norm() / std::max(1.0, std::abs(theta));
    if (res > opt.tol * 10.0) rep.converged = false;
    (c < num_top ? rep.top : rep.bottom).push_back({theta, res});
  }
  return rep;
}

} // namespace ergraph::spectral
