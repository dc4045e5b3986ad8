#pragma once

// CSV tables and JSON summaries for experiment runs.
//
// CSV files start with '#' comment lines echoing the version and the
// effective configuration, followed by one header row. Numbers are printed
// with a fixed format so reruns produce identical bytes. Timing goes only
// into the JSON summary.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ergraph/experiments/config.hpp"
#include "ergraph/poisson_binomial.hpp"
#include "ergraph/pruning.hpp"
#include "ergraph/spectral/lanczos.hpp"

#ifndef ERGRAPH_VERSION
#define ERGRAPH_VERSION "0.1.0"
#endif

namespace ergraph::experiments {

inline const char* version_string() { return ERGRAPH_VERSION; }

/// Number formatting shared by every CSV column.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string num(bool v) { return v ? "1" : "0"; }

template <class T>
  requires std::is_integral_v<T>
std::string num(T v) {
  return std::to_string(v);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  Table(std::string table_name, std::vector<std::string> column_names)
      : name(std::move(table_name)), columns(std::move(column_names)) {}

  template <class... Ts>
  void add(const Ts&... values) {
    std::vector<std::string> r;
    r.reserve(sizeof...(Ts));
    (r.push_back(to_cell(values)), ...);
    if (r.size() != columns.size()) throw std::logic_error("Table::add: wrong number of cells for " + name);
    rows.push_back(std::move(r));
  }

private:
  static std::string to_cell(const std::string& s) { return s; }
  static std::string to_cell(const char* s) { return s; }
  template <class T>
  static std::string to_cell(const T& v) {
    return num(v);
  }
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<std::string> soft_failures;
  std::vector<std::string> hard_failures;

  int exit_code() const {
    if (!hard_failures.empty()) return 3;
    if (!soft_failures.empty()) return 2;
    return 0;
  }
};

/// rank, eigenvalue, residual, side in {top, bottom}.
inline Table spectral_report_table(const spectral::SpectralReport& rep, std::string name = "spectrum") {
  Table t(std::move(name), {"rank", "eigenvalue", "residual", "side"});
  for (std::size_t i = 0; i < rep.top.size(); ++i) t.add(i + 1, rep.top[i].value, rep.top[i].residual, "top");
  for (std::size_t i = 0; i < rep.bottom.size(); ++i)
    t.add(i + 1, rep.bottom[i].value, rep.bottom[i].residual, "bottom");
  return t;
}

/// One row per (instance, k).
inline Table bound_report_table(std::span<const pb::BoundReport> reports, std::size_t instance = 0,
                                std::string name = "bounds") {
  Table t(std::move(name),
          {"instance", "n", "d", "p_max", "k", "exact_pmf", "exact_tail", "poisson_pmf", "poisson_tail",
           "ratio_deviation", "pmf_deviation_shape", "tail_ratio", "tail_ratio_shape", "bennett_bound",
           "lindeberg_pmf_bound", "lindeberg_tail_bound", "bennett_holds", "lindeberg_pmf_holds",
           "lindeberg_tail_holds", "in_regime"});
  for (const auto& r : reports)
    t.add(instance, r.n, r.d, r.p_max, r.k, r.exact_pmf, r.exact_tail, r.poisson_pmf, r.poisson_tail,
          r.ratio_deviation, r.pmf_deviation_shape, r.tail_ratio, r.tail_ratio_shape, r.bennett_bound,
          r.lindeberg_pmf_bound, r.lindeberg_tail_bound, r.bennett_holds, r.lindeberg_pmf_holds,
          r.lindeberg_tail_holds, r.in_regime);
  return t;
}

/// center, D_i, D_i^star, overlap count.
inline Table decomposition_table(const pruning::StarDecomposition& d, const pruning::OverlapStatistic& o,
                                 std::string name = "decomposition") {
  if (o.centers != d.centers) throw std::invalid_argument("decomposition_table: overlap computed for other centers");
  Table t(std::move(name), {"center", "degree", "star_degree", "overlap"});
  for (std::size_t i = 0; i < d.centers.size(); ++i)
    t.add(d.centers[i], d.degrees[i], d.central_degrees[i], o.per_center[i]);
  return t;
}

inline void write_csv(std::ostream& os, const Table& t, const ExperimentConfig& cfg) {
  os << "# ergraph " << version_string() << '\n';
  os << "# table=" << t.name << '\n';
  for (const auto& [k, v] : cfg.entries()) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

/// Writes `<experiment>_<table>.csv` for every table and
/// `<experiment>_summary.json`. Returns the paths written.
inline std::vector<std::filesystem::path> write_result(const std::filesystem::path& dir, const ExperimentResult& res,
                                                       const ExperimentConfig& cfg, double wall_clock_seconds) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const Table& t : res.tables) {
    const auto p = dir / (res.experiment + "_" + t.name + ".csv");
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    write_csv(os, t, cfg);
    paths.push_back(p);
  }
  nlohmann::ordered_json j;
  j["experiment"] = res.experiment;
  j["version"] = version_string();
  j["config"] = cfg.entries();
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["summary"] = res.summary;
  j["soft_failures"] = res.soft_failures;
  j["hard_failures"] = res.hard_failures;
  j["exit_code"] = res.exit_code();
  const auto p = dir / (res.experiment + "_summary.json");
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
  paths.push_back(p);
  return paths;
}

} // namespace ergraph::experiments
