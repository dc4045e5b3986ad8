#pragma once

// Deterministic predictors for extreme degrees and extreme eigenvalues of
// sparse inhomogeneous random graphs.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ergraph/errors.hpp"
#include "ergraph/graph_model.hpp"

namespace ergraph::theory {

/// h(x) = (1+x) log(1+x) - x on x >= -1.
inline double bennett_h(double x) {
  if (std::isnan(x) || x < -1.0) throw DomainError("bennett_h: x must be >= -1");
  if (x == -1.0) return 1.0;
  if (std::isinf(x)) return x;
  return (1.0 + x) * std::log1p(x) - x;
}

/// h(max(x, 0)).
inline double bennett_h_clamped(double x) { return bennett_h(x > 0.0 ? x : 0.0); }

/// f_d(x) = x log(x/d) - (x - d) + log sqrt(2 pi x), so that a Poisson(d)
/// variable has P(Y = x) = exp(-f_d(x) + O(1/x)) by Stirling. The square-root
/// term enters with a plus sign: with a minus sign that relation fails by a
/// factor 2 pi x and f is no longer increasing on (d, inf).
inline double f_d(double x, double d) {
  if (!(x > 0.0) || !(d > 0.0)) throw DomainError("f_d: arguments must be positive");
  return x * std::log(x / d) - (x - d) + 0.5 * std::log(2.0 * std::numbers::pi * x);
}

/// d/dx f_d(x) = log(x/d) + 1/(2x), positive for x >= d.
inline double f_d_prime(double x, double d) {
  if (!(x > 0.0) || !(d > 0.0)) throw DomainError("f_d_prime: arguments must be positive");
  return std::log(x / d) + 0.5 / x;
}

struct DeltaSolution {
  double k = 0.0;
  double delta = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Predictors at fixed (n, d). n is real so that asymptotic sweeps beyond
/// the integer range are possible.
class TheoryPredictor {
public:
  TheoryPredictor(double n, double d) : n_(n), d_(d) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("TheoryPredictor: n must be >= 1");
    if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("TheoryPredictor: d must be positive");
    log_n_ = std::log(n);
  }

  double n() const noexcept { return n_; }
  double d() const noexcept { return d_; }
  double log_n() const noexcept { return log_n_; }

  double f(double x) const { return f_d(x, d_); }

  /// L_k = log(n/k) / log(log(n)/d); requires d < log n.
  double l_k(double k) const {
    check_rank(k);
    if (!(d_ < log_n_))
      throw DomainError("l_k: requires d < log n (d=" + std::to_string(d_) +
                        ", log n=" + std::to_string(log_n_) + ")");
    return (log_n_ - std::log(k)) / std::log(log_n_ / d_);
  }

  double predicted_eigenvalue(double k) const { return std::sqrt(l_k(k)); }

  /// Root of f(x) = log(n/k) on x >= d; f is increasing there, so the root
  /// is unique. Bisection to unit width, then safeguarded Newton.
  DeltaSolution delta_k(double k, double tol = 1e-10) const {
    check_rank(k);
    if (!(tol > 0.0)) throw DomainError("delta_k: tol must be positive");
    const double target = log_n_ - std::log(k);
    const double f_at_d = f(d_);
    if (!(f_at_d < target))
      throw NoSolutionError("delta_k: f(d) >= log(n/k), no root above d", f_at_d);

    DeltaSolution sol;
    sol.k = k;
    double lo = d_;
    double hi = std::max(2.0 * d_, 8.0 * std::max(target, 1.0));
    while (f(hi) < target) {
      lo = hi;
      hi *= 2.0;
      ++sol.iterations;
    }
    while (hi - lo > 1.0) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < target ? lo : hi) = mid;
      ++sol.iterations;
    }
    double x = hi;
    for (int it = 0; it < 200; ++it) {
      ++sol.iterations;
      const double r = f(x) - target;
      if (std::abs(r) <= tol) break;
      if (r < 0.0)
        lo = x;
      else
        hi = x;
      const double slope = f_d_prime(x, d_);
      double next = slope > 0.0 ? x - r / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == x) break;
      x = next;
    }
    sol.delta = x;
    sol.residual = std::abs(f(x) - target);
    return sol;
  }

  /// n e^{-f(t)}, evaluated as exp(log n - f(t)).
  double predicted_tail_count(double t) const {
    if (!(t > d_)) throw DomainError("predicted_tail_count: t must exceed d");
    return std::exp(log_n_ - f(t));
  }

  /// 2 log(n) n^{1-x^2} x on (0,1).
  double edge_density(double x) const {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("edge_density: x must lie in (0,1)");
    return 2.0 * log_n_ * std::exp((1.0 - x * x) * log_n_) * x;
  }

  /// Integral of edge_density over [a, b] within [0, 1]: n^{1-a^2} - n^{1-b^2}.
  double edge_density_mass(double a, double b) const {
    if (!(a >= 0.0 && b <= 1.0 && a <= b)) throw DomainError("edge_density_mass: need 0 <= a <= b <= 1");
    return std::exp((1.0 - a * a) * log_n_) - std::exp((1.0 - b * b) * log_n_);
  }

private:
  void check_rank(double k) const {
    if (!(k >= 1.0 && k <= n_)) throw DomainError("rank k must lie in [1, n]");
  }

  double n_;
  double d_;
  double log_n_;
};

/// 1 - x^2, the limit of log N(x) / log n; defined on [0, 1].
inline double counting_exponent(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("counting_exponent: x must lie in [0,1]");
  return 1.0 - x * x;
}

/// Max row sum of (p_ij), an upper bound on the norm of the expectation.
inline double gershgorin_bound(const EdgeProbabilityModel& model) { return model.d(); }

/// exp(-k d h(t/d) + k^2 p_max (t/d + 1)^2).
inline double degree_sum_deviation_bound(double k, double t, double d, double p_max) {
  if (!(k >= 1.0) || !(t >= 0.0) || !(d > 0.0) || !(p_max >= 0.0))
    throw DomainError("degree_sum_deviation_bound: invalid arguments");
  const double s = t / d;
  return std::exp(-k * d * bennett_h(s) + k * k * p_max * (s + 1.0) * (s + 1.0));
}

/// E + 3 d n q^2.
inline double variance_bound(double expected_count, double d, double n, double q) {
  if (!(expected_count >= 0.0) || !(q >= 0.0 && q <= 1.0))
    throw DomainError("variance_bound: invalid arguments");
  return expected_count + 3.0 * d * n * q * q;
}

} // namespace ergraph::theory
