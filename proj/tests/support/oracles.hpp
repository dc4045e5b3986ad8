#pragma once

// Reference implementations used only by tests. They share no code with the
// library: eigenvalues come from cyclic Jacobi rotations, Poisson-binomial
// laws from explicit enumeration or lgamma closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// All eigenvalues of a symmetric matrix, nonincreasing (cyclic Jacobi).
inline std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-14, int max_sweeps = 100) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (apq == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        a[p][q] = a[q][p] = 0.0;
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Exact law of a sum of independent Bernoullis by enumerating all 2^n outcomes.
inline std::vector<double> enumerate_pmf(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<double> pmf(n + 1, 0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 1.0;
    int ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        w *= p[i];
        ++ones;
      } else {
        w *= 1.0 - p[i];
      }
    }
    pmf[static_cast<std::size_t>(ones)] += w;
  }
  return pmf;
}

/// log P(Bin(n, p) = k) through lgamma.
inline double binomial_log_pmf(std::size_t n, double p, std::size_t k) {
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

/// Sum of independent-Bernoulli law by a plain linear convolution.
inline std::vector<double> convolve_pmf(const std::vector<double>& p) {
  std::vector<double> pmf{1.0};
  for (double q : p) {
    std::vector<double> next(pmf.size() + 1, 0.0);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * (1.0 - q);
      next[k + 1] += pmf[k] * q;
    }
    pmf = std::move(next);
  }
  return pmf;
}

} // namespace oracle
