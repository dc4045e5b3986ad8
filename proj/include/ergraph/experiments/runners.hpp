#pragma once

// The six experiments. Each runner is a pure function of its configuration:
// replicas are independent streams, results land in per-replica slots and
// tables are assembled in replica order, so thread count never changes the
// output bytes.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ergraph/experiments/config.hpp"
#include "ergraph/experiments/output.hpp"
#include "ergraph/graph_model.hpp"
#include "ergraph/poisson_binomial.hpp"
#include "ergraph/pruning.hpp"
#include "ergraph/rng.hpp"
#include "ergraph/spectral/components.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/theory.hpp"

namespace ergraph::experiments {

namespace detail {

/// Runs fn(0) .. fn(count - 1) on up to `threads` workers. The first
/// exception thrown by any job is rethrown after all workers have joined.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double hi = v[h];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

inline double json_number(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

inline spectral::SolverOptions solver_options(const ExperimentConfig& c, std::uint64_t start_seed) {
  spectral::SolverOptions o;
  o.component_dense_limit = c.component_dense_limit;
  o.lanczos.tol = c.eig_tol;
  o.lanczos.max_iter = c.eig_max_iter;
  o.lanczos.start_seed = start_seed;
  o.chebyshev.tol = c.filter_tol;
  o.chebyshev.chunk = std::max<std::size_t>(1, c.filter_chunk);
  o.chebyshev.start_seed = start_seed;
  return o;
}

inline EdgeProbabilityModel homogeneous_model(std::size_t n, double d) {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (!(d > 0.0) || d > static_cast<double>(n - 1)) throw ConfigError("d must lie in (0, n - 1]");
  return EdgeProbabilityModel::homogeneous(n, d / static_cast<double>(n - 1));
}

inline spectral::ExtremeSpectrum extremes(const std::string& op, const SampledGraph& g,
                                          const EdgeProbabilityModel& model, std::size_t nt, std::size_t nb,
                                          const spectral::SolverOptions& opt) {
  if (op == "centered") return spectral::centered_extremes(g, model, nt, nb, opt);
  return spectral::adjacency_extremes(g, nt, nb, opt);
}

inline const char* path_name(spectral::SolverPath p) {
  return p == spectral::SolverPath::component_exact ? "component_exact" : "iterative";
}

inline void require(bool ok, std::vector<std::string>& failures, const std::string& what) {
  if (!ok) failures.push_back(what);
}

} // namespace detail

// ---------------------------------------------------------------------------

/// Right edge of the spectrum, rescaled so that lambda_2 = 1, against the
/// density 2 log(n) n^{1-x^2} x. Also records the counting function
/// N(x) = #{lambda >= x sqrt(L_1)} over the computed eigenvalues.
inline ExperimentResult run_figure1(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "figure1";
  if (c.d_list.empty()) throw ConfigError("figure1: d_list is empty");
  if (c.bins == 0) throw ConfigError("figure1: bins must be positive");
  if (!(c.count_exponent > 0.0 && c.count_exponent < 1.0)) throw ConfigError("figure1: count_exponent must lie in (0,1)");
  for (double x : c.x_list)
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("figure1: x_list entries must lie in [0,1]");

  const double nd = static_cast<double>(c.n);
  const auto K = std::min<std::size_t>(c.n, static_cast<std::size_t>(std::ceil(std::pow(nd, c.count_exponent) - 1e-9)));

  struct Slot {
    spectral::ExtremeSpectrum spec;
    double l1 = 0.0;
  };
  std::vector<Slot> slots(c.d_list.size());
  detail::parallel_for(c.d_list.size(), c.threads, [&](std::size_t i) {
    const auto model = detail::homogeneous_model(c.n, c.d_list[i]);
    const SampledGraph g = sample_graph(model, c.seed, 0);
    slots[i].spec = detail::extremes(c.op, g, model, K, 0, detail::solver_options(c, stream_seed(c.seed, 0)));
    slots[i].l1 = theory::TheoryPredictor(nd, c.d_list[i]).l_k(1.0);
  });

  Table hist{"histogram",
             {"d", "bin", "left", "right", "center", "count", "density", "theory_density", "theory_density_center"}};
  Table eig{"eigenvalues", {"d", "rank", "eigenvalue", "residual", "rescaled"}};
  Table counting{"counting", {"d", "x", "threshold", "count", "log_count_over_log_n", "exponent", "deviation",
                              "truncated"}};
  res.summary["eigenvalues_per_d"] = K;
  res.summary["operator"] = c.op;
  auto& per_d = res.summary["per_d"] = nlohmann::ordered_json::array();

  for (std::size_t i = 0; i < c.d_list.size(); ++i) {
    const double d = c.d_list[i];
    const auto& top = slots[i].spec.report.top;
    const theory::TheoryPredictor pred(nd, d);
    nlohmann::ordered_json s;
    s["d"] = d;
    s["solver_path"] = detail::path_name(slots[i].spec.path);
    s["largest_component"] = slots[i].spec.largest_component;
    s["converged"] = slots[i].spec.report.converged;
    s["computed"] = top.size();
    detail::require(slots[i].spec.report.converged, res.soft_failures,
                    "figure1 d=" + num(d) + ": eigensolver did not converge, output is partial");

    for (std::size_t r = 0; r < top.size(); ++r) {
      const double x = (r >= 1 && top.size() > 1 && top[1].value > 0.0) ? top[r].value / top[1].value
                                                                          : std::numeric_limits<double>::quiet_NaN();
      eig.add(d, r + 1, top[r].value, top[r].residual, r == 0 ? std::numeric_limits<double>::quiet_NaN() : x);
    }

    // Histogram of lambda_r / lambda_2 for r >= 2 over [0, 1].
    std::vector<std::size_t> counts(c.bins, 0);
    std::size_t below_half = 0, above_08 = 0, used = 0, outside = 0;
    const bool scalable = top.size() > 1 && top[1].value > 0.0;
    if (scalable) {
      for (std::size_t r = 1; r < top.size(); ++r) {
        const double x = top[r].value / top[1].value;
        if (!(x >= 0.0 && x <= 1.0)) {
          ++outside;
          continue;
        }
        const auto b = std::min(c.bins - 1, static_cast<std::size_t>(x * static_cast<double>(c.bins)));
        ++counts[b];
        ++used;
        if (x < 0.5) ++below_half;
        if (x > 0.8) ++above_08;
      }
    } else {
      res.soft_failures.push_back("figure1 d=" + num(d) + ": lambda_2 is not positive, nothing to rescale");
    }
    const double width = 1.0 / static_cast<double>(c.bins);
    const double total_theory = pred.edge_density_mass(0.0, 1.0);
    double area = 0.0;
    for (std::size_t b = 0; b < c.bins; ++b) {
      const double left = static_cast<double>(b) * width;
      const double right = b + 1 == c.bins ? 1.0 : static_cast<double>(b + 1) * width;
      const double center = 0.5 * (left + right);
      const double density = used ? static_cast<double>(counts[b]) / (static_cast<double>(used) * width) : 0.0;
      area += density * width;
      const double th = pred.edge_density_mass(left, right) / total_theory / width;
      const double th_center = pred.edge_density(center) / total_theory;
      hist.add(d, b, left, right, center, counts[b], density, th, th_center);
    }
    const double mass_below = used ? static_cast<double>(below_half) / static_cast<double>(used) : 0.0;
    const double mass_above = used ? static_cast<double>(above_08) / static_cast<double>(used) : 0.0;
    s["histogram_area"] = area;
    s["histogram_samples"] = used;
    s["outside_unit_interval"] = outside;
    s["mass_below_0_5"] = mass_below;
    s["mass_above_0_8"] = mass_above;
    s["min_rescaled"] = scalable ? detail::json_number(top.back().value / top[1].value)
                                 : std::numeric_limits<double>::quiet_NaN();
    const bool area_ok = used > 0 && std::abs(area - 1.0) <= 1e-9;
    s["area_ok"] = area_ok;
    s["bulk_mass_ok"] = mass_below > mass_above;
    detail::require(area_ok, res.soft_failures, "figure1 d=" + num(d) + ": histogram area " + num(area) + " != 1");
    detail::require(mass_below > mass_above, res.soft_failures,
                    "figure1 d=" + num(d) + ": mass below 0.5 (" + num(mass_below) + ") does not exceed mass above 0.8 (" +
                        num(mass_above) + ")");

    // Counting exponents.
    const double l1 = slots[i].l1;
    s["sqrt_L1"] = std::sqrt(l1);
    if (!top.empty()) s["lambda_1"] = top.front().value;
    if (top.size() > 1) s["lambda_2"] = top[1].value;
    auto& cs = s["counting"] = nlohmann::ordered_json::array();
    for (double x : c.x_list) {
      const double thr = x * std::sqrt(l1);
      const auto cnt = static_cast<std::size_t>(
          std::count_if(top.begin(), top.end(), [&](const spectral::Ritz& r) { return r.value >= thr; }));
      // All K computed values clear the threshold: N(x) is only a lower bound.
      const bool truncated = cnt == top.size();
      const double ratio = cnt ? std::log(static_cast<double>(cnt)) / std::log(nd) : 0.0;
      const double expo = theory::counting_exponent(x);
      const double dev = std::abs(ratio - expo);
      counting.add(d, x, thr, cnt, ratio, expo, dev, truncated);
      const bool ok = dev <= c.count_tolerance && !truncated;
      cs.push_back({{"x", x}, {"count", cnt}, {"log_count_over_log_n", ratio}, {"exponent", expo},
                    {"deviation", dev}, {"truncated", truncated}, {"pass", ok}});
    }
    per_d.push_back(std::move(s));
  }
  res.tables = {std::move(hist), std::move(eig), std::move(counting)};
  return res;
}

// ---------------------------------------------------------------------------

/// lambda_k and lambda_{n+1-k} against +-sqrt(D_k) and sqrt(L_k).
inline ExperimentResult run_eigen(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "eigen";
  if (c.k_list.empty()) throw ConfigError("eigen: k_list is empty");
  const std::size_t kmax = *std::max_element(c.k_list.begin(), c.k_list.end());
  if (*std::min_element(c.k_list.begin(), c.k_list.end()) < 1) throw ConfigError("eigen: k must be >= 1");
  if (2 * kmax > c.n) throw ConfigError("eigen: 2 * max(k_list) exceeds n");
  const auto model = detail::homogeneous_model(c.n, c.d);
  const double nd = static_cast<double>(c.n);
  const theory::TheoryPredictor pred(nd, c.d);
  const double l1 = pred.l_k(1.0);
  const double shape = std::sqrt(nd * model.p_max()) + c.epsilon * std::sqrt(l1);

  struct Slot {
    spectral::ExtremeSpectrum spec;
    std::vector<std::size_t> degrees;
  };
  std::vector<Slot> slots(c.replicas);
  detail::parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    const SampledGraph g = sample_graph(model, c.seed, r);
    slots[r].spec = detail::extremes(c.op, g, model, kmax, kmax, detail::solver_options(c, stream_seed(c.seed, r)));
    auto deg = ordered_degrees(g);
    deg.resize(kmax);
    slots[r].degrees = std::move(deg);
  });

  Table t{"eigenvalues",
          {"replica", "k", "lambda_top", "lambda_bottom", "sqrt_degree", "sqrt_l_k", "rel_dev_top", "rel_dev_bottom",
           "abs_dev_top", "abs_dev_bottom", "top_over_sqrt_l_k", "residual_top", "residual_bottom"}};
  std::vector<std::vector<double>> dev_top(c.k_list.size()), dev_bottom(c.k_list.size());
  double fitted_c = 0.0;
  bool converged = true, nonnegative = true;
  for (std::size_t r = 0; r < c.replicas; ++r) {
    const auto& rep = slots[r].spec.report;
    converged = converged && rep.converged;
    if (rep.top.size() < kmax || rep.bottom.size() < kmax) {
      res.soft_failures.push_back("eigen replica " + std::to_string(r) + ": fewer eigenvalues than requested");
      continue;
    }
    if (c.op == "centered" && rep.top.front().value < -1e-9) nonnegative = false;
    for (std::size_t ki = 0; ki < c.k_list.size(); ++ki) {
      const std::size_t k = c.k_list[ki];
      const double top = rep.top[k - 1].value, bottom = rep.bottom[k - 1].value;
      const double sd = std::sqrt(static_cast<double>(slots[r].degrees[k - 1]));
      const double sl = std::sqrt(pred.l_k(static_cast<double>(k)));
      const double rt = std::abs(top / sd - 1.0), rb = std::abs(bottom / sd + 1.0);
      const double at = std::abs(top - sd), ab = std::abs(bottom + sd);
      dev_top[ki].push_back(rt);
      dev_bottom[ki].push_back(rb);
      fitted_c = std::max(fitted_c, std::max(at, ab) / shape);
      t.add(r, k, top, bottom, sd, sl, rt, rb, at, ab, top / sl, rep.top[k - 1].residual, rep.bottom[k - 1].residual);
    }
  }
  res.summary["operator"] = c.op;
  res.summary["sqrt_L1"] = std::sqrt(l1);
  res.summary["shape_sqrt_np_plus_eps_sqrt_L1"] = shape;
  res.summary["fitted_C"] = fitted_c;
  res.summary["converged"] = converged;
  res.summary["lambda_1_nonnegative"] = nonnegative;
  detail::require(converged, res.soft_failures, "eigen: eigensolver did not converge on every replica");
  if (c.op == "centered")
    detail::require(nonnegative, res.hard_failures, "eigen: lambda_1 of the centered matrix is negative");
  auto& ks = res.summary["per_k"] = nlohmann::ordered_json::array();
  for (std::size_t ki = 0; ki < c.k_list.size(); ++ki) {
    const double mt = detail::median(dev_top[ki]), mb = detail::median(dev_bottom[ki]);
    const bool ok_t = mt <= c.eigen_tolerance, ok_b = mb <= c.eigen_tolerance;
    ks.push_back({{"k", c.k_list[ki]},
                  {"median_rel_dev_top", detail::json_number(mt)},
                  {"median_rel_dev_bottom", detail::json_number(mb)},
                  {"pass_top", ok_t},
                  {"pass_bottom", ok_b}});
    detail::require(ok_t, res.soft_failures, "eigen k=" + std::to_string(c.k_list[ki]) + ": median top deviation " +
                                                 num(mt) + " > " + num(c.eigen_tolerance));
    detail::require(ok_b, res.soft_failures, "eigen k=" + std::to_string(c.k_list[ki]) +
                                                 ": median bottom deviation " + num(mb) + " > " +
                                                 num(c.eigen_tolerance));
  }
  res.tables.push_back(std::move(t));
  return res;
}

// ---------------------------------------------------------------------------

/// Degree order statistics and threshold counts against n e^{-f(t)}.
inline ExperimentResult run_degrees(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "degrees";
  if (c.k_list.empty()) throw ConfigError("degrees: k_list is empty");
  if (c.replicas < 2) throw ConfigError("degrees: at least 2 replicas are needed for variances");
  const auto model = detail::homogeneous_model(c.n, c.d);
  const double nd = static_cast<double>(c.n);
  const double p = model.p_max();
  const theory::TheoryPredictor pred(nd, c.d);
  const double delta1 = pred.delta_k(1.0).delta;
  const auto zero_t = static_cast<std::size_t>(std::ceil(delta1)) + 2;

  std::vector<std::size_t> ts;
  if (c.t_list.empty()) {
    for (std::size_t t = 0; t <= zero_t + 1; ++t) ts.push_back(t);
  } else {
    for (double t : c.t_list) {
      if (t < 0.0 || t != std::floor(t)) throw ConfigError("degrees: t_list entries must be nonnegative integers");
      ts.push_back(static_cast<std::size_t>(t));
    }
  }
  const std::size_t tmax = std::max(*std::max_element(ts.begin(), ts.end()), zero_t);
  const std::size_t kmax = *std::max_element(c.k_list.begin(), c.k_list.end());
  if (kmax < 1 || kmax > c.n) throw ConfigError("degrees: k must lie in [1, n]");

  struct Slot {
    std::vector<std::size_t> geq, eq; ///< indexed by t in 0..tmax
    std::vector<std::size_t> ordered;
  };
  std::vector<Slot> slots(c.replicas);
  detail::parallel_for(c.replicas, c.threads, [&](std::size_t r) {
    const SampledGraph g = sample_graph(model, c.seed, r);
    Slot& s = slots[r];
    s.eq.assign(tmax + 2, 0);
    for (std::size_t i = 0; i < g.n(); ++i) ++s.eq[std::min(g.degree(i), tmax + 1)];
    s.geq.assign(tmax + 2, 0);
    std::size_t acc = 0;
    for (std::size_t t = tmax + 2; t-- > 0;) {
      acc += s.eq[t];
      s.geq[t] = acc;
    }
    s.ordered = ordered_degrees(g);
    s.ordered.resize(kmax);
  });

  // Exact law of a single degree, Bin(n - 1, p).
  const std::vector<double> probs(c.n - 1, p);
  const pb::TailDistribution D(probs, std::min(c.n - 1, tmax + 1));
  auto exact_sf = [&](std::size_t t) { return t == 0 ? 1.0 : (t > D.k_max() + 1 ? 0.0 : D.sf(t)); };

  Table counts{"counts", {"replica", "t", "count_geq", "count_eq", "predicted"}};
  for (std::size_t r = 0; r < c.replicas; ++r)
    for (std::size_t t : ts)
      counts.add(r, t, slots[r].geq[t], slots[r].eq[t],
                 static_cast<double>(t) > c.d ? pred.predicted_tail_count(static_cast<double>(t))
                                              : std::numeric_limits<double>::quiet_NaN());

  Table order{"order", {"replica", "k", "degree", "delta_k", "window_low", "window_high", "in_window", "l_k"}};
  std::vector<std::size_t> window_hits(c.k_list.size(), 0);
  std::vector<double> delta(c.k_list.size());
  for (std::size_t ki = 0; ki < c.k_list.size(); ++ki) delta[ki] = pred.delta_k(static_cast<double>(c.k_list[ki])).delta;
  for (std::size_t r = 0; r < c.replicas; ++r)
    for (std::size_t ki = 0; ki < c.k_list.size(); ++ki) {
      const double fl = std::floor(delta[ki]);
      const double deg = static_cast<double>(slots[r].ordered[c.k_list[ki] - 1]);
      const bool in = deg >= fl - 1.0 && deg <= fl + 1.0;
      window_hits[ki] += in;
      order.add(r, c.k_list[ki], slots[r].ordered[c.k_list[ki] - 1], delta[ki], fl - 1.0, fl + 1.0, in,
                pred.l_k(static_cast<double>(c.k_list[ki])));
    }

  Table thr{"thresholds", {"t", "mean_count", "sample_variance", "expected_count", "q", "variance_bound",
                           "variance_ratio", "mean_ratio", "zero_frequency", "in_check_range"}};
  const double rn = static_cast<double>(c.replicas);
  const double t_lo = c.ratio_t_low * delta1, t_hi = delta1 - 1.0;
  bool ratio_ok = true, variance_ok = true;
  std::size_t checked = 0;
  auto& checks = res.summary["threshold_checks"] = nlohmann::ordered_json::array();
  for (std::size_t t : ts) {
    double mean = 0.0, zero = 0.0, ratio = 0.0;
    const bool has_pred = static_cast<double>(t) > c.d;
    const double predicted = has_pred ? pred.predicted_tail_count(static_cast<double>(t)) : 0.0;
    for (const Slot& s : slots) {
      mean += static_cast<double>(s.geq[t]);
      zero += s.geq[t] == 0;
      if (has_pred) ratio += static_cast<double>(s.geq[t]) / predicted;
    }
    mean /= rn;
    ratio = has_pred ? ratio / rn : std::numeric_limits<double>::quiet_NaN();
    double var = 0.0;
    for (const Slot& s : slots) var += (static_cast<double>(s.geq[t]) - mean) * (static_cast<double>(s.geq[t]) - mean);
    var /= rn - 1.0;
    const double expected = nd * exact_sf(t);
    const double q = exact_sf(t == 0 ? 0 : t - 1);
    const double bound = theory::variance_bound(expected, c.d, nd, q);
    const bool in_range = static_cast<double>(t) >= t_lo && static_cast<double>(t) <= t_hi;
    thr.add(t, mean, var, expected, q, bound, var / bound, ratio, zero / rn, in_range);
    if (in_range) {
      ++checked;
      const bool r_ok = has_pred && ratio >= c.ratio_low && ratio <= c.ratio_high;
      const bool v_ok = var <= c.variance_factor * bound;
      ratio_ok = ratio_ok && r_ok;
      variance_ok = variance_ok && v_ok;
      checks.push_back({{"t", t}, {"mean_ratio", detail::json_number(ratio)}, {"ratio_ok", r_ok},
                        {"variance_ratio", var / bound}, {"variance_ok", v_ok}});
    }
  }

  double zero_freq = 0.0;
  for (const Slot& s : slots) zero_freq += s.geq[zero_t] == 0;
  zero_freq /= rn;

  res.summary["delta_1"] = delta1;
  res.summary["L_1"] = pred.l_k(1.0);
  res.summary["check_range"] = {t_lo, t_hi};
  res.summary["checked_thresholds"] = checked;
  auto& win = res.summary["window_frequency"] = nlohmann::ordered_json::array();
  for (std::size_t ki = 0; ki < c.k_list.size(); ++ki)
    win.push_back({{"k", c.k_list[ki]}, {"delta_k", delta[ki]},
                   {"frequency", static_cast<double>(window_hits[ki]) / rn}});
  const double w1 = [&] {
    for (std::size_t ki = 0; ki < c.k_list.size(); ++ki)
      if (c.k_list[ki] == 1) return static_cast<double>(window_hits[ki]) / rn;
    return std::numeric_limits<double>::quiet_NaN();
  }();
  res.summary["zero_threshold"] = zero_t;
  res.summary["zero_frequency"] = zero_freq;
  res.summary["pass_window"] = w1 >= c.window_frequency;
  res.summary["pass_ratio"] = ratio_ok && checked > 0;
  res.summary["pass_zero"] = zero_freq >= c.window_frequency;
  res.summary["pass_variance"] = variance_ok && checked > 0;
  detail::require(w1 >= c.window_frequency, res.soft_failures,
                  "degrees: D_1 window frequency " + num(w1) + " < " + num(c.window_frequency));
  detail::require(ratio_ok && checked > 0, res.soft_failures, "degrees: mean ratio outside [" + num(c.ratio_low) +
                                                                  ", " + num(c.ratio_high) + "] or no t checked");
  detail::require(zero_freq >= c.window_frequency, res.soft_failures,
                  "degrees: #V>=" + std::to_string(zero_t) + " = 0 in only " + num(zero_freq) + " of replicas");
  detail::require(variance_ok && checked > 0, res.soft_failures,
                  "degrees: sample variance exceeds " + num(c.variance_factor) + " x variance bound");
  res.tables = {std::move(counts), std::move(order), std::move(thr)};
  return res;
}

// ---------------------------------------------------------------------------

struct SbmTargets {
  double p_in = 0.0;
  double p_out = 0.0;
  std::vector<double> plus;  ///< positive expectation eigenvalues, nonincreasing
  std::vector<double> minus; ///< negative expectation eigenvalues, nondecreasing
};

/// Two blocks of sizes n/2 and n - n/2 with mean degree d in the first
/// block and between/within ratio r. The nonzero eigenvalues of E[A] are
/// those of the 2 x 2 quotient sqrt(s_a s_b) P_ab shifted by -p_in for the
/// missing diagonal.
inline SbmTargets sbm_targets(std::size_t n, double d, double r) {
  const double s1 = static_cast<double>(n / 2), s2 = static_cast<double>(n - n / 2);
  SbmTargets t;
  t.p_in = d / ((s1 - 1.0) + r * s2);
  t.p_out = r * t.p_in;
  if (!(t.p_in <= 1.0)) throw ConfigError("sbm: d too large for n");
  Eigen::Matrix2d q;
  q << s1 * t.p_in, std::sqrt(s1 * s2) * t.p_out, std::sqrt(s1 * s2) * t.p_out, s2 * t.p_in;
  const auto e = spectral::sym_eig(q, false);
  for (Eigen::Index i = 1; i >= 0; --i) {
    const double v = e.values(i) - t.p_in;
    if (v > 0.0)
      t.plus.push_back(v);
    else if (v < 0.0)
      t.minus.insert(t.minus.begin(), v);
  }
  std::sort(t.minus.begin(), t.minus.end());
  return t;
}

inline ExperimentResult run_sbm(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "sbm";
  if (c.sbm_n_list.empty() || c.sbm_d_list.empty()) throw ConfigError("sbm: sbm_n_list and sbm_d_list must be nonempty");
  if (!(c.sbm_ratio >= 0.0 && c.sbm_ratio <= 1.0)) throw ConfigError("sbm: sbm_ratio must lie in [0,1]");
  const std::size_t m = c.sbm_extremes;

  struct Cell {
    std::size_t n;
    double d;
    SbmTargets targets;
    double sqrt_l1;
    std::string regime;
  };
  std::vector<Cell> cells;
  for (std::size_t n : c.sbm_n_list)
    for (double d : c.sbm_d_list) {
      if (2 * m > n) throw ConfigError("sbm: 2 * sbm_extremes exceeds n");
      const double ln = std::log(static_cast<double>(n));
      const double tau = std::sqrt(ln / std::log(ln));
      cells.push_back({n, d, sbm_targets(n, d, c.sbm_ratio),
                       std::sqrt(theory::TheoryPredictor(static_cast<double>(n), d).l_k(1.0)),
                       d >= tau ? "large" : "small"});
    }
  const std::size_t jobs = cells.size() * c.replicas;
  std::vector<spectral::ExtremeSpectrum> spec(jobs);
  detail::parallel_for(jobs, c.threads, [&](std::size_t job) {
    const Cell& cell = cells[job / c.replicas];
    const std::size_t r = job % c.replicas;
    const std::size_t s1 = cell.n / 2;
    const auto model = EdgeProbabilityModel::sbm(
        {s1, cell.n - s1}, {{cell.targets.p_in, cell.targets.p_out}, {cell.targets.p_out, cell.targets.p_in}});
    const SampledGraph g = sample_graph(model, c.seed, r);
    spec[job] = spectral::adjacency_extremes(g, m, m, detail::solver_options(c, stream_seed(c.seed, r)));
  });

  Table ext{"extremes", {"n", "d", "regime", "replica", "side", "rank", "eigenvalue", "nearest_outlier",
                         "outlier_distance", "edge_target", "edge_distance", "classification"}};
  Table reg{"regimes", {"n", "d", "regime", "replica", "lambda_1", "lambda_plus_1", "sqrt_L1", "ratio_to_lambda_plus",
                        "ratio_to_sqrt_L1", "outliers", "agreement"}};
  auto& cs = res.summary["cells"] = nlohmann::ordered_json::array();
  std::vector<double> cell_error(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    const double lp1 = cell.targets.plus.empty() ? std::numeric_limits<double>::quiet_NaN() : cell.targets.plus[0];
    std::size_t agree = 0, outlier_free = 0, top_outliers = 0;
    bool converged = true;
    std::vector<double> errors;
    for (std::size_t r = 0; r < c.replicas; ++r) {
      const auto& rep = spec[ci * c.replicas + r].report;
      converged = converged && rep.converged;
      std::size_t outliers = 0, leading_outliers = 0;
      bool leading = true;
      auto classify = [&](const char* side, std::size_t rank, double v) {
        const auto& targets = v >= 0.0 ? cell.targets.plus : cell.targets.minus;
        double nearest = std::numeric_limits<double>::quiet_NaN(), dout = std::numeric_limits<double>::infinity();
        for (double tv : targets)
          if (std::abs(v - tv) < dout) {
            dout = std::abs(v - tv);
            nearest = tv;
          }
        const double edge = v >= 0.0 ? cell.sqrt_l1 : -cell.sqrt_l1;
        const double dedge = std::abs(v - edge);
        std::string cls = "ambiguous";
        if (dedge >= c.outlier_factor * dout)
          cls = "outlier";
        else if (dout >= c.outlier_factor * dedge)
          cls = "edge";
        if (cls == "outlier") ++outliers;
        if (side[0] == 't') {
          if (cls == "outlier" && leading)
            ++leading_outliers;
          else
            leading = false;
        }
        ext.add(cell.n, cell.d, cell.regime, r, side, rank, v, nearest, dout, edge, dedge, cls);
      };
      for (std::size_t i = 0; i < rep.top.size(); ++i) classify("top", i + 1, rep.top[i].value);
      for (std::size_t i = 0; i < rep.bottom.size(); ++i) classify("bottom", i + 1, rep.bottom[i].value);
      const double l1 = rep.top.empty() ? std::numeric_limits<double>::quiet_NaN() : rep.top[0].value;
      const double ratio_plus = l1 / lp1, ratio_edge = l1 / cell.sqrt_l1;
      bool ok;
      if (cell.regime == "large") {
        ok = ratio_plus >= c.sbm_large_band_low && ratio_plus <= c.sbm_large_band_high;
        errors.push_back(std::abs(ratio_plus - 1.0));
      } else {
        ok = outliers == 0 && ratio_edge >= c.sbm_small_band_low && ratio_edge <= c.sbm_small_band_high;
        errors.push_back(std::abs(ratio_edge - 1.0));
      }
      agree += ok;
      outlier_free += outliers == 0;
      top_outliers += leading_outliers >= cell.targets.plus.size();
      reg.add(cell.n, cell.d, cell.regime, r, l1, lp1, cell.sqrt_l1, ratio_plus, ratio_edge, outliers, ok);
    }
    const double rn = static_cast<double>(std::max<std::size_t>(c.replicas, 1));
    const double freq = static_cast<double>(agree) / rn;
    cell_error[ci] = detail::median(errors);
    nlohmann::ordered_json s;
    s["n"] = cell.n;
    s["d"] = cell.d;
    s["regime"] = cell.regime;
    s["p_in"] = cell.targets.p_in;
    s["p_out"] = cell.targets.p_out;
    s["lambda_plus"] = cell.targets.plus;
    s["lambda_minus"] = cell.targets.minus;
    s["sqrt_L1"] = cell.sqrt_l1;
    s["agreement_frequency"] = freq;
    s["outlier_free_frequency"] = static_cast<double>(outlier_free) / rn;
    s["leading_outlier_frequency"] = static_cast<double>(top_outliers) / rn;
    s["median_relative_error"] = detail::json_number(cell_error[ci]);
    s["converged"] = converged;
    s["pass"] = freq >= c.sbm_frequency;
    cs.push_back(std::move(s));
    detail::require(converged, res.soft_failures, "sbm n=" + std::to_string(cell.n) + " d=" + num(cell.d) +
                                                      ": eigensolver did not converge");
    detail::require(freq >= c.sbm_frequency, res.soft_failures,
                    "sbm n=" + std::to_string(cell.n) + " d=" + num(cell.d) + " (" + cell.regime +
                        "): agreement frequency " + num(freq) + " < " + num(c.sbm_frequency));
  }

  // Trend: the median relative error must not grow from the smallest to the largest n.
  auto& trend = res.summary["trend"] = nlohmann::ordered_json::array();
  const std::size_t nd = c.sbm_d_list.size();
  for (std::size_t di = 0; di < nd && c.sbm_n_list.size() > 1; ++di) {
    const std::size_t first = di, last = (c.sbm_n_list.size() - 1) * nd + di;
    const bool ok = cell_error[last] <= cell_error[first];
    trend.push_back({{"d", c.sbm_d_list[di]},
                     {"error_small_n", detail::json_number(cell_error[first])},
                     {"error_large_n", detail::json_number(cell_error[last])},
                     {"improves", ok}});
    detail::require(ok, res.soft_failures, "sbm d=" + num(c.sbm_d_list[di]) + ": agreement does not improve with n");
  }
  res.tables = {std::move(ext), std::move(reg)};
  return res;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Randomized probability vectors for the hard inequality suite.
inline std::vector<double> hard_instance(std::size_t index, Rng& rng, std::size_t n_max) {
  std::uniform_int_distribution<std::size_t> pick_n(1, std::max<std::size_t>(1, n_max));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = pick_n(rng);
  std::vector<double> p(n);
  switch (index % 5) {
  case 0: { // uniform on (0, a)
    const double a = u(rng);
    for (auto& x : p) x = a * u(rng);
    break;
  }
  case 1: { // sparse, mean degree c
    const double c = 0.5 + 9.5 * u(rng);
    for (auto& x : p) x = std::min(1.0, c / static_cast<double>(n) * 2.0 * u(rng));
    break;
  }
  case 2: // a few large entries among small ones
    for (auto& x : p) x = u(rng) < 0.1 ? 0.5 + 0.5 * u(rng) : 0.05 * u(rng);
    break;
  case 3: { // homogeneous
    const double a = u(rng);
    for (auto& x : p) x = a;
    break;
  }
  default: // with exact zeros and ones
    for (auto& x : p) {
      const double v = u(rng);
      x = v < 0.2 ? 0.0 : (v > 0.9 ? 1.0 : u(rng));
    }
  }
  if (std::all_of(p.begin(), p.end(), [](double x) { return x == 0.0; })) p[0] = 0.5;
  return p;
}

} // namespace detail

/// Poisson-binomial bound reports over the (family, n, d, k) grid and the
/// randomized hard-inequality suite.
inline ExperimentResult run_tails(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "tails";
  if (c.tail_n_list.empty() || c.tail_d_list.empty()) throw ConfigError("tails: tail_n_list and tail_d_list must be nonempty");
  if (!(c.heterogeneity >= 0.0 && c.heterogeneity < 1.0)) throw ConfigError("tails: heterogeneity must lie in [0,1)");

  struct Cell {
    std::string family;
    std::size_t n;
    double d;
    std::vector<pb::BoundReport> reports;
  };
  std::vector<Cell> cells;
  for (const char* family : {"homogeneous", "heterogeneous"})
    for (double d : c.tail_d_list)
      for (std::size_t n : c.tail_n_list) cells.push_back({family, n, d, {}});

  detail::parallel_for(cells.size(), c.threads, [&](std::size_t ci) {
    Cell& cell = cells[ci];
    const double nd = static_cast<double>(cell.n);
    if (!(cell.d > 0.0 && cell.d < nd)) throw ConfigError("tails: d must lie in (0, n)");
    std::vector<double> p(cell.n, cell.d / nd);
    if (cell.family == "heterogeneous") {
      Rng rng = make_rng(c.seed, ci);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double sum = 0.0;
      for (auto& x : p) sum += (x *= 1.0 + c.heterogeneity * u(rng));
      for (auto& x : p) x *= cell.d / sum;
    }
    const double p_max = *std::max_element(p.begin(), p.end());
    const auto k_lo = static_cast<std::size_t>(std::ceil(2.0 * cell.d));
    const double k_hi = std::min(static_cast<double>(c.tail_k_cap), std::floor(std::pow(cell.d / p_max, 0.4)));
    std::vector<std::size_t> ks;
    for (std::size_t k = k_lo; static_cast<double>(k) <= k_hi && k <= cell.n; ++k) ks.push_back(k);
    cell.reports = pb::bound_reports(p, ks);
  });

  Table grid{"grid",
             {"family", "n", "d", "k", "p_max", "exact_pmf", "poisson_pmf", "ratio_deviation", "pmf_deviation_shape",
              "tail_ratio", "tail_ratio_shape", "exact_tail_from_k", "bennett_bound", "q_pmf", "lindeberg_pmf_bound",
              "q_tail_from_k", "lindeberg_tail_bound", "hard_ok", "in_regime"}};
  auto& fits = res.summary["fits"] = nlohmann::ordered_json::array();
  double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
  std::size_t grid_violations = 0;
  for (const Cell& cell : cells) {
    for (const auto& r : cell.reports) {
      grid.add(cell.family, cell.n, cell.d, r.k, r.p_max, r.exact_pmf, r.poisson_pmf, r.ratio_deviation,
               r.pmf_deviation_shape, r.tail_ratio, r.tail_ratio_shape, r.exact_tail_from_k, r.bennett_bound, r.q_pmf,
               r.lindeberg_pmf_bound, r.q_tail_from_k, r.lindeberg_tail_bound, r.hard_inequalities_hold(),
               r.in_regime);
      if (!r.hard_inequalities_hold()) {
        ++grid_violations;
        res.hard_failures.push_back("tails grid " + cell.family + " n=" + std::to_string(cell.n) + " d=" +
                                    num(cell.d) + " k=" + std::to_string(r.k) + ": hard inequality violated");
      }
    }
    nlohmann::ordered_json f{{"family", cell.family}, {"n", cell.n}, {"d", cell.d}, {"k_count", cell.reports.size()}};
    if (!cell.reports.empty()) {
      const double c_pmf = pb::fit_constant(cell.reports, pb::FitTarget::pmf_deviation);
      const double c_tail = pb::fit_constant(cell.reports, pb::FitTarget::tail_ratio);
      f["pmf_deviation_constant"] = c_pmf;
      f["tail_ratio_constant"] = c_tail;
      c_min = std::min(c_min, c_pmf);
      c_max = std::max(c_max, c_pmf);
    }
    fits.push_back(std::move(f));
  }
  const double spread = c_max > 0.0 ? c_max / c_min : std::numeric_limits<double>::quiet_NaN();
  const bool stable = std::isfinite(spread) && spread < c.stability_factor;
  res.summary["pmf_constant_spread"] = detail::json_number(spread);
  res.summary["pmf_constant_stable"] = stable;
  detail::require(stable, res.soft_failures, "tails: fitted pmf-deviation constant spread " + num(spread) + " >= " +
                                                 num(c.stability_factor));

  // Deviation strictly decreasing in n at fixed (family, d, k).
  std::size_t mono_checked = 0, mono_failed = 0;
  for (std::size_t a = 0; a + 1 < cells.size(); ++a) {
    const Cell &lo = cells[a], &hi = cells[a + 1];
    if (lo.family != hi.family || lo.d != hi.d) continue;
    for (const auto& rl : lo.reports)
      for (const auto& rh : hi.reports)
        if (rl.k == rh.k) {
          ++mono_checked;
          if (!(rh.ratio_deviation < rl.ratio_deviation)) {
            ++mono_failed;
            res.soft_failures.push_back("tails " + lo.family + " d=" + num(lo.d) + " k=" + std::to_string(rl.k) +
                                        ": deviation does not decrease from n=" + std::to_string(lo.n) + " to n=" +
                                        std::to_string(hi.n));
          }
        }
  }
  res.summary["monotone_pairs_checked"] = mono_checked;
  res.summary["monotone_pairs_failed"] = mono_failed;

  // Randomized hard suite.
  Table hard{"hard", {"instance", "n", "d", "p_max", "checks", "violations", "worst_margin"}};
  std::vector<std::vector<std::string>> hard_msgs(c.hard_instances);
  struct HardRow {
    std::size_t n = 0, checks = 0, violations = 0;
    double d = 0.0, p_max = 0.0, worst = -std::numeric_limits<double>::infinity();
  };
  std::vector<HardRow> rows(c.hard_instances);
  detail::parallel_for(c.hard_instances, c.threads, [&](std::size_t i) {
    Rng rng = make_rng(c.seed, 1'000'000 + i);
    const auto p = detail::hard_instance(i, rng, c.hard_n_max);
    HardRow& row = rows[i];
    row.n = p.size();
    std::vector<std::size_t> ks(std::min<std::size_t>(p.size(), 60) + 1);
    for (std::size_t k = 0; k < ks.size(); ++k) ks[k] = k;
    const auto reps = pb::bound_reports(p, ks);
    row.d = reps.front().d;
    row.p_max = reps.front().p_max;
    // Margin: how far the measured side sits above (positive) or below its bound, relative.
    auto margin = [](double measured, double bound) {
      return (measured - bound) / std::max({std::abs(bound), std::abs(measured), 1e-300});
    };
    for (const auto& r : reps) {
      row.checks += 3;
      row.worst = std::max({row.worst, margin(r.exact_tail_from_k, r.bennett_bound),
                            margin(std::abs(r.exact_pmf - r.q_pmf), r.lindeberg_pmf_bound),
                            margin(std::abs(r.exact_tail_from_k - r.q_tail_from_k), r.lindeberg_tail_bound)});
      if (!r.hard_inequalities_hold()) {
        ++row.violations;
        hard_msgs[i].push_back("tails hard instance " + std::to_string(i) + " k=" + std::to_string(r.k) +
                               ": hard inequality violated");
      }
    }
    const pb::TailDistribution X(p, p.size());
    for (int s = 0; s <= 20; ++s) {
      const double t = 0.25 * s;
      if (X.d() * (1.0 + t) > static_cast<double>(p.size()) + 1.0) break;
      const auto b = pb::bennett_check(X, t);
      ++row.checks;
      row.worst = std::max(row.worst, margin(b.exact, b.bound));
      if (!b.holds) {
        ++row.violations;
        hard_msgs[i].push_back("tails hard instance " + std::to_string(i) + " t=" + num(t) +
                               ": Bennett bound violated");
      }
    }
  });
  std::size_t total_checks = 0, total_violations = 0;
  for (std::size_t i = 0; i < c.hard_instances; ++i) {
    hard.add(i, rows[i].n, rows[i].d, rows[i].p_max, rows[i].checks, rows[i].violations, rows[i].worst);
    total_checks += rows[i].checks;
    total_violations += rows[i].violations;
    for (auto& m : hard_msgs[i]) res.hard_failures.push_back(std::move(m));
  }
  res.summary["hard_instances"] = c.hard_instances;
  res.summary["hard_checks"] = total_checks;
  res.summary["hard_violations"] = total_violations + grid_violations;
  res.tables = {std::move(grid), std::move(hard)};
  return res;
}

// ---------------------------------------------------------------------------

/// Star decomposition at t = ceil(delta L_1): overlap, star spectra and the
/// residual norm against sqrt(n p_max) + sqrt(d').
inline ExperimentResult run_prune(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "prune";
  if (c.n_list.empty()) throw ConfigError("prune: n_list is empty");
  if (!(c.delta > 0.0)) throw ConfigError("prune: delta must be positive");

  struct Slot {
    std::size_t t = 0;
    pruning::StarDecomposition dec;
    pruning::OverlapStatistic overlap;
    pruning::StarSpectrumCheck star;
    pruning::ResidualNormReport norm;
    std::size_t max_removed = 0;
    bool degree_accounting = true;
    bool residual_degree_ok = true;
  };
  const std::size_t jobs = c.n_list.size() * c.replicas;
  std::vector<Slot> slots(jobs);
  detail::parallel_for(jobs, c.threads, [&](std::size_t job) {
    const std::size_t n = c.n_list[job / c.replicas], r = job % c.replicas;
    const auto model = detail::homogeneous_model(n, c.d);
    const double l1 = theory::TheoryPredictor(static_cast<double>(n), c.d).l_k(1.0);
    Slot& s = slots[job];
    s.t = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.delta * l1)));
    const SampledGraph g = sample_graph(model, c.seed, r);
    s.dec = pruning::star_decomposition(g, s.t);
    s.overlap = pruning::overlap_statistic(g, s.t);
    s.star = pruning::decomposition_spectrum_check(s.dec);
    s.norm = pruning::residual_norm_check(g, model, s.dec, c.eig_tol, stream_seed(c.seed, r));
    const SampledGraph residual = s.dec.residual_graph();
    for (std::size_t ci = 0; ci < s.dec.centers.size(); ++ci) {
      s.max_removed = std::max(s.max_removed, s.dec.removed_per_center[ci]);
      if (residual.degree(s.dec.centers[ci]) != s.dec.degrees[ci] - s.dec.central_degrees[ci])
        s.degree_accounting = false;
    }
    if (s.dec.star_edges.size() + s.dec.residual_edges.size() != g.edges().size()) s.degree_accounting = false;
    s.residual_degree_ok = s.norm.d_prime <= static_cast<double>(std::max(s.t, s.max_removed));
  });

  Table centers{"centers", {"n", "replica", "center", "degree", "star_degree", "overlap"}};
  Table reps{"replicas", {"n", "replica", "threshold", "centers", "star_edges", "residual_edges", "max_overlap",
                          "max_overlap_times_epsilon", "star_discrepancy", "residual_norm", "d_prime", "bound_shape",
                          "ratio", "max_removed", "converged"}};
  auto& per_n = res.summary["per_n"] = nlohmann::ordered_json::array();
  std::vector<std::size_t> overlap_by_n;
  double ratio_min = std::numeric_limits<double>::infinity(), ratio_max = 0.0;
  for (std::size_t ni = 0; ni < c.n_list.size(); ++ni) {
    const std::size_t n = c.n_list[ni];
    std::size_t max_overlap = 0;
    double max_disc = 0.0, rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    bool converged = true;
    for (std::size_t r = 0; r < c.replicas; ++r) {
      const Slot& s = slots[ni * c.replicas + r];
      for (std::size_t ci = 0; ci < s.dec.centers.size(); ++ci)
        centers.add(n, r, s.dec.centers[ci], s.dec.degrees[ci], s.dec.central_degrees[ci], s.overlap.per_center[ci]);
      reps.add(n, r, s.t, s.dec.centers.size(), s.dec.star_edges.size(), s.dec.residual_edges.size(),
               s.overlap.max_overlap, c.epsilon * static_cast<double>(s.overlap.max_overlap), s.star.max_discrepancy,
               s.norm.norm, s.norm.d_prime, s.norm.bound_shape, s.norm.ratio, s.max_removed, s.norm.converged);
      max_overlap = std::max(max_overlap, s.overlap.max_overlap);
      max_disc = std::max(max_disc, s.star.max_discrepancy);
      rmin = std::min(rmin, s.norm.ratio);
      rmax = std::max(rmax, s.norm.ratio);
      converged = converged && s.norm.converged;
      detail::require(s.star.max_discrepancy <= 1e-10, res.hard_failures,
                      "prune n=" + std::to_string(n) + " replica " + std::to_string(r) + ": star spectrum discrepancy " +
                          num(s.star.max_discrepancy));
      detail::require(s.degree_accounting, res.hard_failures,
                      "prune n=" + std::to_string(n) + " replica " + std::to_string(r) + ": degree accounting broken");
      detail::require(s.residual_degree_ok, res.hard_failures,
                      "prune n=" + std::to_string(n) + " replica " + std::to_string(r) +
                          ": residual degree exceeds max(t, removed)");
    }
    overlap_by_n.push_back(max_overlap);
    if (c.replicas > 0) {
      ratio_min = std::min(ratio_min, rmin);
      ratio_max = std::max(ratio_max, rmax);
    }
    detail::require(converged, res.soft_failures, "prune n=" + std::to_string(n) + ": residual norm did not converge");
    per_n.push_back({{"n", n},
                     {"threshold", c.replicas ? slots[ni * c.replicas].t : 0},
                     {"max_overlap", max_overlap},
                     {"max_overlap_times_epsilon", c.epsilon * static_cast<double>(max_overlap)},
                     {"max_star_discrepancy", max_disc},
                     {"ratio_min", detail::json_number(rmin)},
                     {"ratio_max", detail::json_number(rmax)},
                     {"converged", converged}});
  }
  bool bounded = true;
  for (std::size_t i = 1; i < overlap_by_n.size(); ++i) bounded = bounded && overlap_by_n[i] <= overlap_by_n[0];
  const double spread = ratio_max > 0.0 ? ratio_max / ratio_min : std::numeric_limits<double>::quiet_NaN();
  res.summary["overlap_non_growing"] = bounded;
  res.summary["residual_ratio_spread"] = detail::json_number(spread);
  res.summary["residual_ratio_stable"] = std::isfinite(spread) && spread < c.stability_factor;
  detail::require(bounded, res.soft_failures, "prune: max overlap grows with n");
  detail::require(!std::isfinite(spread) || spread < c.stability_factor, res.soft_failures,
                  "prune: residual norm ratio spread " + num(spread) + " >= " + num(c.stability_factor));
  res.tables = {std::move(centers), std::move(reps)};
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "figure1") return run_figure1(c);
  if (c.experiment == "eigen") return run_eigen(c);
  if (c.experiment == "degrees") return run_degrees(c);
  if (c.experiment == "sbm") return run_sbm(c);
  if (c.experiment == "tails") return run_tails(c);
  if (c.experiment == "prune") return run_prune(c);
  throw ConfigError("unknown experiment '" + c.experiment + "'");
}

} // namespace ergraph::experiments
