#pragma once

// Exact Poisson-binomial law, Poisson and binomial references, and the
// tail comparisons between them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/theory.hpp"

namespace ergraph::pb {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// log(1 - e^a) for a <= 0.
inline double log1m_exp(double a) {
  if (a > -0.6931471805599453) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

/// Law of X = sum of independent Bernoulli(p_i), truncated at k_max.
///
/// The convolution runs in log space over the probabilities sorted
/// increasingly, with one absorbing state for {X > k_max}. Sorting makes the
/// result bit-identical under permutation of the input; p_i = 0 entries are
/// skipped exactly.
class TailDistribution {
public:
  TailDistribution(std::span<const double> probabilities, std::size_t k_max) {
    for (double p : probabilities)
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("exact_pmf: probability outside [0,1]");
    n_ = probabilities.size();
    if (k_max > n_) throw DomainError("exact_pmf: k_max exceeds n");
    k_max_ = k_max;
    std::vector<double> sorted(probabilities.begin(), probabilities.end());
    std::sort(sorted.begin(), sorted.end());
    d_ = 0.0;
    p_max_ = sorted.empty() ? 0.0 : sorted.back();
    for (double p : sorted) d_ += p;

    log_pmf_.assign(k_max_ + 1, kNegInf);
    log_pmf_[0] = 0.0;
    log_tail_ = kNegInf;
    std::size_t reach = 0; // highest state with nonzero mass
    for (double p : sorted) {
      if (p == 0.0) continue;
      const double lp = std::log(p);
      const double lq = p == 1.0 ? kNegInf : std::log1p(-p);
      log_tail_ = log_add_exp(log_tail_, log_pmf_[k_max_] + lp);
      const std::size_t top = std::min(reach + 1, k_max_);
      for (std::size_t k = top; k >= 1; --k)
        log_pmf_[k] = log_add_exp(log_pmf_[k] + lq, log_pmf_[k - 1] + lp);
      log_pmf_[0] += lq;
      reach = top;
    }
    log_sf_.assign(k_max_ + 2, kNegInf);
    log_sf_[k_max_ + 1] = log_tail_;
    for (std::size_t k = k_max_ + 1; k-- > 0;) log_sf_[k] = log_add_exp(log_sf_[k + 1], log_pmf_[k]);
  }

  std::size_t n() const noexcept { return n_; }
  double d() const noexcept { return d_; }
  double p_max() const noexcept { return p_max_; }
  std::size_t k_max() const noexcept { return k_max_; }
  std::span<const double> log_pmf() const noexcept { return log_pmf_; }
  /// log P(X > k_max).
  double log_tail_at_kmax() const noexcept { return log_tail_; }

  double log_pmf(std::size_t k) const {
    if (k > k_max_) throw DomainError("TailDistribution: k beyond truncation");
    return log_pmf_[k];
  }
  double pmf(std::size_t k) const { return std::exp(log_pmf(k)); }
  /// log P(X >= k) for k <= k_max + 1.
  double log_sf(std::size_t k) const {
    if (k > k_max_ + 1) throw DomainError("TailDistribution: k beyond truncation");
    return log_sf_[k];
  }
  double sf(std::size_t k) const { return std::exp(log_sf(k)); }

private:
  std::size_t n_ = 0;
  std::size_t k_max_ = 0;
  double d_ = 0.0;
  double p_max_ = 0.0;
  std::vector<double> log_pmf_;
  std::vector<double> log_sf_;
  double log_tail_ = kNegInf;
};

inline TailDistribution exact_pmf(std::span<const double> probabilities, std::size_t k_max) {
  return TailDistribution(probabilities, k_max);
}

/// log P(W = k) and log P(W >= k) of a reference law.
struct Reference {
  double log_pmf = kNegInf;
  double log_tail = kNegInf;
};

/// Y ~ Poisson(d).
inline Reference poisson_reference(double d, std::size_t k) {
  if (!(d > 0.0)) throw DomainError("poisson_reference: d must be positive");
  const double kd = static_cast<double>(k);
  Reference r;
  r.log_pmf = kd * std::log(d) - d - std::lgamma(kd + 1.0);
  if (k == 0) {
    r.log_tail = 0.0;
  } else if (kd > d) {
    // sum_{j >= k} P(j) = P(k) * sum_m prod_{i=1..m} d/(k+i)
    double term = 1.0, sum = 1.0;
    for (std::size_t j = k + 1; term > 1e-18 * sum; ++j) {
      term *= d / static_cast<double>(j);
      sum += term;
    }
    r.log_tail = r.log_pmf + std::log(sum);
  } else {
    double lower = kNegInf; // log P(Y < k)
    for (std::size_t j = 0; j < k; ++j) {
      const double jd = static_cast<double>(j);
      lower = log_add_exp(lower, jd * std::log(d) - d - std::lgamma(jd + 1.0));
    }
    r.log_tail = lower >= 0.0 ? kNegInf : log1m_exp(lower);
  }
  return r;
}

/// -f_d(k), the Stirling approximation to log P(Y = k).
inline double poisson_stirling_log_pmf(double d, std::size_t k) {
  return -theory::f_d(static_cast<double>(k), d);
}

/// log C(n, k); exact falling-factorial sum for small k.
inline double log_binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return kNegInf;
  k = std::min(k, n - k);
  if (k <= 256) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(static_cast<double>(n - i));
    return s - std::lgamma(static_cast<double>(k) + 1.0);
  }
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

/// Z ~ Bin(n, d/n).
inline Reference binomial_reference(std::size_t n, double d, std::size_t k) {
  const double nd = static_cast<double>(n);
  if (!(d >= 0.0 && d <= nd)) throw DomainError("binomial_reference: need 0 <= d <= n");
  const double p = n == 0 ? 0.0 : d / nd;
  auto log_pmf_at = [&](std::size_t j) {
    if (j > n) return kNegInf;
    const double jd = static_cast<double>(j);
    const double a = j == 0 ? 0.0 : (p == 0.0 ? kNegInf : jd * std::log(p));
    const double b = j == n ? 0.0 : (p == 1.0 ? kNegInf : (nd - jd) * std::log1p(-p));
    return log_binomial_coefficient(n, j) + a + b;
  };
  Reference r;
  r.log_pmf = log_pmf_at(k);
  if (k == 0) {
    r.log_tail = 0.0;
  } else if (k > n) {
    r.log_tail = kNegInf;
  } else if (static_cast<double>(k) > d) {
    double term = 1.0, sum = 1.0;
    const double odds = p / (1.0 - p);
    for (std::size_t j = k; j < n && term > 1e-18 * sum; ++j) {
      term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * odds;
      sum += term;
    }
    r.log_tail = r.log_pmf + std::log(sum);
  } else {
    double lower = kNegInf;
    for (std::size_t j = 0; j < k; ++j) lower = log_add_exp(lower, log_pmf_at(j));
    r.log_tail = lower >= 0.0 ? kNegInf : log1m_exp(lower);
  }
  return r;
}

/// Hard inequality tolerance: relative to the magnitude of the compared terms.
inline constexpr double kHardSlack = 1e-12;

/// One (distribution, k) row comparing the exact law X with Y ~ Poisson(d)
/// and Q = Bin(n, d/n). Tails are P(. > k) unless named *_from_k (P(. >= k)).
struct BoundReport {
  std::size_t n = 0;
  double d = 0.0;
  double p_max = 0.0;
  std::size_t k = 0;
  double exact_pmf = 0.0;
  double exact_tail = 0.0;
  double poisson_pmf = 0.0;
  double poisson_tail = 0.0;
  double ratio_deviation = 0.0;      ///< |P(X=k)/P(Y=k) - 1|
  double pmf_deviation_shape = 0.0;  ///< p_max k^{5/2} / d
  double tail_ratio = 0.0;           ///< P(X>k) / P(X=k)
  double tail_ratio_shape = 0.0;     ///< d/k + p_max k^{5/2} / d
  double exact_tail_from_k = 0.0;    ///< P(X >= k)
  double q_pmf = 0.0;
  double q_tail_from_k = 0.0;
  double bennett_bound = 0.0;        ///< exp(-d h(k/d - 1)) for k >= d, else 1
  double lindeberg_pmf_bound = 0.0;  ///< 2 d p_max exp(-d h(((k-2-d)/d)_+))
  double lindeberg_tail_bound = 0.0; ///< d p_max exp(-d h(((k-2-d)/d)_+))
  bool bennett_holds = true;
  bool lindeberg_pmf_holds = true;
  bool lindeberg_tail_holds = true;
  bool in_regime = false; ///< 2d <= k <= (d/p_max)^{2/5}

  bool hard_inequalities_hold() const { return bennett_holds && lindeberg_pmf_holds && lindeberg_tail_holds; }
};

/// Bound reports for every k in `ks`, sharing one convolution for X and Q.
inline std::vector<BoundReport> bound_reports(std::span<const double> probabilities,
                                              std::span<const std::size_t> ks) {
  std::vector<BoundReport> out;
  if (ks.empty()) return out;
  const std::size_t n = probabilities.size();
  const std::size_t k_top = *std::max_element(ks.begin(), ks.end());
  if (k_top > n) throw DomainError("bound_report: k exceeds n");
  const std::size_t k_max = std::min(n, k_top + 1);
  const TailDistribution X(probabilities, k_max);
  const double d = X.d();
  if (!(d > 0.0)) throw DomainError("bound_report: d must be positive");
  const std::vector<double> q_probs(n, d / static_cast<double>(n));
  const TailDistribution Q(q_probs, k_max);
  const double p_max = X.p_max();

  for (std::size_t k : ks) {
    BoundReport r;
    const double kd = static_cast<double>(k);
    r.n = n;
    r.d = d;
    r.p_max = p_max;
    r.k = k;
    r.exact_pmf = X.pmf(k);
    r.exact_tail = X.sf(k + 1);
    r.exact_tail_from_k = X.sf(k);
    const Reference y = poisson_reference(d, k);
    r.poisson_pmf = std::exp(y.log_pmf);
    r.poisson_tail = std::exp(poisson_reference(d, k + 1).log_tail);
    r.ratio_deviation = std::abs(std::exp(X.log_pmf(k) - y.log_pmf) - 1.0);
    r.pmf_deviation_shape = p_max * std::pow(kd, 2.5) / d;
    r.tail_ratio = r.exact_pmf > 0.0 ? std::exp(X.log_sf(k + 1) - X.log_pmf(k))
                                     : std::numeric_limits<double>::infinity();
    r.tail_ratio_shape = d / kd + r.pmf_deviation_shape;
    r.q_pmf = Q.pmf(k);
    r.q_tail_from_k = Q.sf(k);

    r.bennett_bound = kd >= d ? std::exp(-d * theory::bennett_h(kd / d - 1.0)) : 1.0;
    const double lind = d * p_max * std::exp(-d * theory::bennett_h_clamped((kd - 2.0 - d) / d));
    r.lindeberg_pmf_bound = 2.0 * lind;
    r.lindeberg_tail_bound = lind;

    r.bennett_holds = r.exact_tail_from_k <= r.bennett_bound * (1.0 + kHardSlack);
    const double pmf_scale = std::max({r.lindeberg_pmf_bound, r.exact_pmf, r.q_pmf});
    r.lindeberg_pmf_holds = std::abs(r.exact_pmf - r.q_pmf) <= r.lindeberg_pmf_bound + kHardSlack * pmf_scale;
    const double tail_scale = std::max({r.lindeberg_tail_bound, r.exact_tail_from_k, r.q_tail_from_k});
    r.lindeberg_tail_holds =
        std::abs(r.exact_tail_from_k - r.q_tail_from_k) <= r.lindeberg_tail_bound + kHardSlack * tail_scale;
    r.in_regime = 2.0 * d <= kd && kd <= std::pow(d / p_max, 0.4);
    out.push_back(r);
  }
  return out;
}

inline BoundReport bound_report(std::span<const double> probabilities, std::size_t k) {
  const std::size_t ks[] = {k};
  return bound_reports(probabilities, ks).front();
}

/// P(X >= d(1+t)) versus exp(-d h(t)) for real t >= 0.
struct BennettCheck {
  double t = 0.0;
  double exact = 0.0;
  double bound = 0.0;
  bool holds = true;
};

inline BennettCheck bennett_check(const TailDistribution& X, double t) {
  if (!(t >= 0.0)) throw DomainError("bennett_check: t must be nonnegative");
  BennettCheck c;
  c.t = t;
  const double threshold = X.d() * (1.0 + t);
  const double kc = std::ceil(threshold);
  c.exact = kc > static_cast<double>(X.k_max() + 1) ? 0.0 : X.sf(static_cast<std::size_t>(kc));
  if (kc > static_cast<double>(X.k_max() + 1) && X.k_max() < X.n())
    throw DomainError("bennett_check: threshold beyond truncation");
  c.bound = std::exp(-X.d() * theory::bennett_h(t));
  c.holds = c.exact <= c.bound * (1.0 + kHardSlack);
  return c;
}

enum class FitTarget { pmf_deviation, tail_ratio };

/// Smallest C with measured <= C * shape on every report.
inline double fit_constant(std::span<const BoundReport> reports, FitTarget which) {
  if (reports.empty()) throw ValidationError("fit_constant: empty report list");
  double c = 0.0;
  for (const auto& r : reports) {
    const double measured = which == FitTarget::pmf_deviation ? r.ratio_deviation : r.tail_ratio;
    const double shape = which == FitTarget::pmf_deviation ? r.pmf_deviation_shape : r.tail_ratio_shape;
    if (!(shape > 0.0)) throw DomainError("fit_constant: shape must be positive");
    c = std::max(c, measured / shape);
  }
  return c;
}

} // namespace ergraph::pb
