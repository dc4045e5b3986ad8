#pragma once

// Experiment configuration: a flat key = value text format.
//
//   # comment
//   n = 50000
//   d_list = 0.5, 1.5, 2.5
//
// Every key has a default that depends on the experiment. Unknown keys and
// malformed values are configuration errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace ergraph::experiments {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;

  // Shared.
  std::size_t n = 50000;
  double d = 1.0;
  std::uint64_t seed = 1;
  std::size_t replicas = 1;
  std::size_t threads = 1;
  std::vector<std::size_t> k_list{1, 10, 100};
  std::vector<double> t_list;  ///< empty selects 0 .. ceil(Delta_1) + 3
  std::vector<double> x_list{0.5, 0.7};
  double epsilon = 0.3;
  double delta = 0.25;

  // Eigensolvers.
  double eig_tol = 1e-10;
  std::size_t eig_max_iter = 2000;
  double filter_tol = 1e-8;
  std::size_t filter_chunk = 64;
  std::size_t component_dense_limit = 4000;

  // figure1.
  std::vector<double> d_list{0.5, 1.5, 2.5};
  std::size_t bins = 60;
  double count_exponent = 0.7;
  std::string op = "adjacency"; ///< adjacency | centered
  double count_tolerance = 0.15;

  // eigen.
  double eigen_tolerance = 0.15;

  // degrees.
  double window_frequency = 0.9;
  double ratio_low = 0.5;
  double ratio_high = 2.0;
  double variance_factor = 1.5;
  double ratio_t_low = 0.4; ///< ratio and variance checks use t in [ratio_t_low * Delta_1, Delta_1 - 1]

  // sbm.
  std::vector<double> sbm_d_list{8.0, 0.5};
  std::vector<std::size_t> sbm_n_list{10000, 100000};
  double sbm_ratio = 1.0 / 3.0; ///< between / within probability
  std::size_t sbm_extremes = 5;
  double outlier_factor = 2.0;
  double sbm_large_band_low = 0.7;
  double sbm_large_band_high = 1.3;
  double sbm_small_band_low = 0.7;
  double sbm_small_band_high = 1.4;
  double sbm_frequency = 0.8;

  // tails.
  std::vector<std::size_t> tail_n_list{1000, 10000, 100000};
  std::vector<double> tail_d_list{2.0, 4.0};
  double heterogeneity = 0.5;
  std::size_t tail_k_cap = 30;
  std::size_t hard_instances = 500;
  std::size_t hard_n_max = 300;
  double stability_factor = 3.0;

  // prune.
  std::vector<std::size_t> n_list{2000, 20000};

  /// Effective configuration as sorted key = value lines.
  std::map<std::string, std::string> entries() const;
  void set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_scalar(const std::string& key, const std::string& text);

template <>
inline double parse_scalar<double>(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + text + "'");
  }
  if (pos != text.size() || !std::isfinite(v))
    throw ConfigError("config: key '" + key + "' expects a number, got '" + text + "'");
  return v;
}

template <>
inline std::size_t parse_scalar<std::size_t>(const std::string& key, const std::string& text) {
  // Accept 5e4 style integers as long as they are exact.
  const double v = parse_scalar<double>(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 9.007199254740992e15)
    throw ConfigError("config: key '" + key + "' expects a nonnegative integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + text + "'");
  }
  if (pos != text.size() || text.find('-') != std::string::npos)
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_scalar<T>(key, item));
  }
  return out;
}

template <class T>
std::string format_list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>)
      s += format_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

} // namespace detail

#define ERGRAPH_CONFIG_FIELDS(X)                                                                                      \
  X(n, scalar) X(d, scalar) X(replicas, scalar) X(threads, scalar) X(k_list, list) X(t_list, list)                    \
  X(x_list, list) X(epsilon, scalar) X(delta, scalar) X(eig_tol, scalar) X(eig_max_iter, scalar)                      \
  X(filter_tol, scalar) X(filter_chunk, scalar) X(component_dense_limit, scalar) X(d_list, list) X(bins, scalar)      \
  X(count_exponent, scalar) X(count_tolerance, scalar) X(eigen_tolerance, scalar) X(window_frequency, scalar) X(ratio_low, scalar)               \
  X(ratio_high, scalar) X(variance_factor, scalar) X(ratio_t_low, scalar) X(sbm_d_list, list) X(sbm_n_list, list)     \
  X(sbm_ratio, scalar) X(sbm_extremes, scalar) X(outlier_factor, scalar) X(sbm_large_band_low, scalar)                \
  X(sbm_large_band_high, scalar) X(sbm_small_band_low, scalar) X(sbm_small_band_high, scalar)                         \
  X(sbm_frequency, scalar) X(tail_n_list, list) X(tail_d_list, list) X(heterogeneity, scalar) X(tail_k_cap, scalar)   \
  X(hard_instances, scalar) X(hard_n_max, scalar) X(stability_factor, scalar) X(n_list, list)

inline std::map<std::string, std::string> ExperimentConfig::entries() const {
  std::map<std::string, std::string> m;
  auto put_scalar = [&](const char* k, const auto& v) {
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
      m[k] = detail::format_double(v);
    else
      m[k] = std::to_string(v);
  };
  auto put_list = [&](const char* k, const auto& v) { m[k] = detail::format_list(v); };
#define ERGRAPH_PUT(name, kind) put_##kind(#name, name);
  ERGRAPH_CONFIG_FIELDS(ERGRAPH_PUT)
#undef ERGRAPH_PUT
  m["experiment"] = experiment;
  m["seed"] = std::to_string(seed);
  m["operator"] = op;
  return m;
}

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto set_scalar = [&](auto& field) {
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_floating_point_v<T>)
      field = detail::parse_scalar<double>(key, value);
    else
      field = detail::parse_scalar<std::size_t>(key, value);
  };
  auto set_list = [&](auto& field) {
    using T = typename std::decay_t<decltype(field)>::value_type;
    if constexpr (std::is_floating_point_v<T>)
      field = detail::parse_list<double>(key, value);
    else
      field = detail::parse_list<std::size_t>(key, value);
  };
#define ERGRAPH_SET(name, kind)                                                                                       \
  if (key == #name) {                                                                                                 \
    set_##kind(name);                                                                                                 \
    return;                                                                                                           \
  }
  ERGRAPH_CONFIG_FIELDS(ERGRAPH_SET)
#undef ERGRAPH_SET
  if (key == "seed") {
    seed = detail::parse_u64(key, value);
    return;
  }
  if (key == "operator") {
    if (value != "adjacency" && value != "centered")
      throw ConfigError("config: operator must be 'adjacency' or 'centered', got '" + value + "'");
    op = value;
    return;
  }
  if (key == "experiment") {
    if (value != experiment && !experiment.empty())
      throw ConfigError("config: file is for experiment '" + value + "' but '" + experiment + "' was requested");
    experiment = value;
    return;
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"figure1", "eigen", "degrees", "sbm", "tails", "prune"};
  return names;
}

/// Defaults for one experiment, matching its reference setting.
inline ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "figure1") {
    c.n = 50000;
  } else if (experiment == "eigen") {
    c.n = 50000;
    c.d = 1.0;
    c.replicas = 20;
    c.op = "centered";
  } else if (experiment == "degrees") {
    c.n = 100000;
    c.d = 2.0;
    c.replicas = 50;
    c.k_list = {1, 2, 5, 10};
  } else if (experiment == "sbm") {
    c.replicas = 10;
  } else if (experiment == "tails") {
    c.replicas = 1;
  } else if (experiment == "prune") {
    c.d = 1.0;
    c.replicas = 20;
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

/// Parses key = value lines into `c`.
inline void apply_config_text(ExperimentConfig& c, std::istream& in, const std::string& source = "<config>") {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    try {
      c.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config_text(c, in, path);
}

} // namespace ergraph::experiments
