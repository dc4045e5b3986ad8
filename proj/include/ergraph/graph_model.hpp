#pragma once

// Edge-probability models for inhomogeneous Erdos-Renyi graphs, hypothesis
// checks on the sparsity regime, and reproducible sampling of realizations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/rng.hpp"

namespace ergraph {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

enum class ModelKind { homogeneous, sbm, general };

inline constexpr std::size_t kDefaultDenseModelLimit = 5000;

inline const char* to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::homogeneous: return "homogeneous";
  case ModelKind::sbm: return "sbm";
  case ModelKind::general: return "general";
  }
  return "unknown";
}

/// The symmetric matrix (p_ij) of an inhomogeneous Erdos-Renyi graph.
///
/// Homogeneous and block models are stored through their block structure
/// (a homogeneous model is a single block); a general model stores the full
/// n x n matrix and is limited to `dense_limit` vertices. With loops disabled
/// every diagonal probability reads as zero.
class EdgeProbabilityModel {
public:
  static EdgeProbabilityModel homogeneous(std::size_t n, double p, bool allow_loops = false) {
    if (n == 0) throw ValidationError("homogeneous model: n must be positive");
    check_probability(p, "homogeneous model: p");
    EdgeProbabilityModel m;
    m.kind_ = ModelKind::homogeneous;
    m.n_ = n;
    m.allow_loops_ = allow_loops;
    m.block_sizes_ = {n};
    m.block_matrix_ = {p};
    m.finish_blocks();
    return m;
  }

  static EdgeProbabilityModel sbm(std::vector<std::size_t> block_sizes,
                                  const std::vector<std::vector<double>>& block_matrix,
                                  bool allow_loops = false) {
    const std::size_t r = block_sizes.size();
    if (r == 0) throw ValidationError("sbm model: at least one block required");
    for (std::size_t s : block_sizes)
      if (s == 0) throw ValidationError("sbm model: block sizes must be positive");
    if (block_matrix.size() != r) throw ValidationError("sbm model: block matrix must be r x r");
    EdgeProbabilityModel m;
    m.kind_ = ModelKind::sbm;
    m.allow_loops_ = allow_loops;
    m.block_matrix_.assign(r * r, 0.0);
    for (std::size_t a = 0; a < r; ++a) {
      if (block_matrix[a].size() != r) throw ValidationError("sbm model: block matrix must be r x r");
      for (std::size_t b = 0; b < r; ++b) {
        check_probability(block_matrix[a][b], "sbm model: block probability");
        m.block_matrix_[a * r + b] = block_matrix[a][b];
      }
    }
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = a + 1; b < r; ++b)
        if (block_matrix[a][b] != block_matrix[b][a])
          throw ValidationError("sbm model: block matrix is not symmetric");
    m.n_ = std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
    m.block_sizes_ = std::move(block_sizes);
    m.finish_blocks();
    return m;
  }

  static EdgeProbabilityModel general(const std::vector<std::vector<double>>& p,
                                      bool allow_loops = false,
                                      std::size_t dense_limit = kDefaultDenseModelLimit) {
    const std::size_t n = p.size();
    if (n == 0) throw ValidationError("general model: n must be positive");
    if (n > dense_limit)
      throw CapacityError("general model: n = " + std::to_string(n) + " exceeds dense limit " +
                          std::to_string(dense_limit));
    EdgeProbabilityModel m;
    m.kind_ = ModelKind::general;
    m.n_ = n;
    m.allow_loops_ = allow_loops;
    m.dense_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i].size() != n) throw ValidationError("general model: matrix must be n x n");
      for (std::size_t j = 0; j < n; ++j) {
        check_probability(p[i][j], "general model: p_ij");
        m.dense_[i * n + j] = p[i][j];
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (p[i][j] != p[j][i])
          throw ValidationError("general model: p(" + std::to_string(i) + "," + std::to_string(j) +
                                ") != p(" + std::to_string(j) + "," + std::to_string(i) + ")");
    if (!allow_loops)
      for (std::size_t i = 0; i < n; ++i) m.dense_[i * n + i] = 0.0;
    m.finish_general();
    return m;
  }

  std::size_t n() const noexcept { return n_; }
  ModelKind kind() const noexcept { return kind_; }
  bool allow_loops() const noexcept { return allow_loops_; }

  double p(std::size_t i, std::size_t j) const {
    if (i == j && !allow_loops_) return 0.0;
    if (kind_ == ModelKind::general) return dense_[i * n_ + j];
    return block_probability(block_of(i), block_of(j));
  }

  double mean_degree(std::size_t i) const { return mean_degrees_[i]; }
  std::span<const double> mean_degrees() const noexcept { return mean_degrees_; }
  /// Maximal mean degree d = max_i d_i.
  double d() const noexcept { return d_; }
  /// max_{i != j} p_ij.
  double p_max() const noexcept { return p_max_; }

  bool has_block_structure() const noexcept { return kind_ != ModelKind::general; }
  std::size_t num_blocks() const noexcept { return block_sizes_.size(); }
  std::span<const std::size_t> block_sizes() const noexcept { return block_sizes_; }
  std::size_t block_offset(std::size_t b) const { return block_offsets_[b]; }
  std::size_t block_of(std::size_t i) const {
    auto it = std::upper_bound(block_offsets_.begin(), block_offsets_.end(), i);
    return static_cast<std::size_t>(it - block_offsets_.begin()) - 1;
  }
  double block_probability(std::size_t a, std::size_t b) const {
    return block_matrix_[a * block_sizes_.size() + b];
  }
  /// Row-major n x n storage of a general model (diagonal zeroed without loops).
  std::span<const double> dense_matrix() const noexcept { return dense_; }

private:
  EdgeProbabilityModel() = default;

  static void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError(std::string(what) + " = " + std::to_string(p) + " is outside [0,1]");
  }

  void finish_blocks() {
    const std::size_t r = block_sizes_.size();
    block_offsets_.assign(r, 0);
    for (std::size_t a = 1; a < r; ++a) block_offsets_[a] = block_offsets_[a - 1] + block_sizes_[a - 1];
    std::vector<double> block_degree(r, 0.0);
    p_max_ = 0.0;
    for (std::size_t a = 0; a < r; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < r; ++b) {
        const double q = block_probability(a, b);
        const double others = (a == b) ? static_cast<double>(block_sizes_[b]) - 1.0
                                       : static_cast<double>(block_sizes_[b]);
        s += q * others;
        if (others > 0.0) p_max_ = std::max(p_max_, q);
      }
      if (allow_loops_) s += block_probability(a, a);
      block_degree[a] = s;
    }
    mean_degrees_.resize(n_);
    for (std::size_t a = 0; a < r; ++a)
      std::fill_n(mean_degrees_.begin() + static_cast<std::ptrdiff_t>(block_offsets_[a]),
                  block_sizes_[a], block_degree[a]);
    d_ = *std::max_element(block_degree.begin(), block_degree.end());
  }

  void finish_general() {
    mean_degrees_.assign(n_, 0.0);
    p_max_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        s += dense_[i * n_ + j];
        if (i != j) p_max_ = std::max(p_max_, dense_[i * n_ + j]);
      }
      mean_degrees_[i] = s;
    }
    d_ = *std::max_element(mean_degrees_.begin(), mean_degrees_.end());
  }

  ModelKind kind_ = ModelKind::homogeneous;
  std::size_t n_ = 0;
  bool allow_loops_ = false;
  std::vector<std::size_t> block_sizes_;
  std::vector<std::size_t> block_offsets_;
  std::vector<double> block_matrix_;
  std::vector<double> dense_;
  std::vector<double> mean_degrees_;
  double d_ = 0.0;
  double p_max_ = 0.0;
};

/// Outcome of testing kappa <= d <= eta log n and p_max <= n^{-1+eta}.
struct HypothesisCheck {
  double kappa = 0.0;
  double eta = 0.0;
  bool satisfied = false;
  std::vector<std::string> violations;
};

inline HypothesisCheck check_hypotheses(const EdgeProbabilityModel& model, double kappa, double eta) {
  if (!(kappa > 0.0)) throw DomainError("check_hypotheses: kappa must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("check_hypotheses: eta must lie in (0,1)");
  HypothesisCheck out;
  out.kappa = kappa;
  out.eta = eta;
  const double n = static_cast<double>(model.n());
  const double d = model.d();
  const double upper = eta * std::log(n);
  const double p_bound = std::pow(n, -1.0 + eta);
  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
  };
  if (d < kappa) out.violations.push_back("d < kappa (d=" + fmt(d) + ", kappa=" + fmt(kappa) + ")");
  if (d > upper)
    out.violations.push_back("d > eta*log(n) (d=" + fmt(d) + ", eta*log(n)=" + fmt(upper) + ")");
  if (model.p_max() > p_bound)
    out.violations.push_back("p_max > n^(-1+eta) (p_max=" + fmt(model.p_max()) +
                             ", n^(-1+eta)=" + fmt(p_bound) + ")");
  out.satisfied = out.violations.empty();
  return out;
}

/// One realization of the random graph: sorted edge list plus CSR adjacency.
///
/// Non-loop edges are stored once as (i, j) with i < j. A loop at i counts
/// one towards D_i and contributes a diagonal 1 to the adjacency matrix.
class SampledGraph {
public:
  SampledGraph() = default;

  static SampledGraph from_edges(std::size_t n, std::vector<Edge> edges, std::vector<Vertex> loops = {},
                                 std::uint64_t seed = 0, std::uint64_t replica_index = 0) {
    for (auto& e : edges) {
      if (e.first == e.second) throw ValidationError("from_edges: loop passed as an edge");
      if (e.first >= n || e.second >= n) throw ValidationError("from_edges: vertex out of range");
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw ValidationError("from_edges: duplicate edge");
    for (Vertex v : loops)
      if (v >= n) throw ValidationError("from_edges: loop vertex out of range");
    std::sort(loops.begin(), loops.end());
    if (std::adjacent_find(loops.begin(), loops.end()) != loops.end())
      throw ValidationError("from_edges: duplicate loop");

    SampledGraph g;
    g.n_ = n;
    g.seed_ = seed;
    g.replica_ = replica_index;
    g.edges_ = std::move(edges);
    g.loops_ = std::move(loops);
    g.build();
    return g;
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Vertex> loops() const noexcept { return loops_; }
  std::span<const std::size_t> degrees() const noexcept { return degrees_; }
  std::size_t degree(std::size_t i) const { return degrees_[i]; }
  bool has_loop(std::size_t i) const { return loop_flag_[i] != 0; }
  /// Neighbors j != i in increasing order.
  std::span<const Vertex> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replica_index() const noexcept { return replica_; }

private:
  void build() {
    offsets_.assign(n_ + 1, 0);
    for (const auto& [i, j] : edges_) {
      ++offsets_[i + 1];
      ++offsets_[j + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.assign(offsets_[n_], 0);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [i, j] : edges_) {
      adjacency_[cursor[i]++] = j;
      adjacency_[cursor[j]++] = i;
    }
    for (std::size_t i = 0; i < n_; ++i)
      std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
                adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
    loop_flag_.assign(n_, 0);
    for (Vertex v : loops_) loop_flag_[v] = 1;
    degrees_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) degrees_[i] = offsets_[i + 1] - offsets_[i] + loop_flag_[i];
  }

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<Vertex> loops_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adjacency_;
  std::vector<unsigned char> loop_flag_;
  std::vector<std::size_t> degrees_;
  std::uint64_t seed_ = 0;
  std::uint64_t replica_ = 0;
};

struct SamplerOptions {
  /// Block pairs with at most this many candidate vertex pairs are sampled
  /// pair by pair; larger ones draw the edge count first and then place it.
  std::uint64_t per_pair_threshold = 1024;
  /// Guard for the complement path (edge count above half the candidates).
  std::uint64_t complement_limit = 50'000'000;
};

namespace detail {

inline void place_block_pair(Rng& rng, std::size_t off_a, std::size_t size_a, std::size_t off_b,
                             std::size_t size_b, bool same_block, double q,
                             const SamplerOptions& opt, std::vector<Edge>& out) {
  const std::uint64_t sa = size_a;
  const std::uint64_t sb = size_b;
  const std::uint64_t candidates = same_block ? sa * (sa - 1) / 2 : sa * sb;
  if (candidates == 0 || q <= 0.0) return;

  auto for_each_pair = [&](auto&& fn) {
    if (same_block) {
      for (std::uint64_t x = 0; x < sa; ++x)
        for (std::uint64_t y = x + 1; y < sa; ++y) fn(off_a + x, off_a + y);
    } else {
      for (std::uint64_t x = 0; x < sa; ++x)
        for (std::uint64_t y = 0; y < sb; ++y) fn(off_a + x, off_b + y);
    }
  };
  auto emit = [&](std::uint64_t i, std::uint64_t j) {
    out.emplace_back(static_cast<Vertex>(std::min(i, j)), static_cast<Vertex>(std::max(i, j)));
  };

  if (q >= 1.0) {
    for_each_pair(emit);
    return;
  }
  if (candidates <= opt.per_pair_threshold) {
    std::bernoulli_distribution coin(q);
    for_each_pair([&](std::uint64_t i, std::uint64_t j) {
      if (coin(rng)) emit(i, j);
    });
    return;
  }

  std::binomial_distribution<std::uint64_t> count_dist(candidates, q);
  const std::uint64_t m = count_dist(rng);
  const bool complement = 2 * m > candidates;
  const std::uint64_t draws = complement ? candidates - m : m;
  if (complement && candidates > opt.complement_limit)
    throw CapacityError("sample_graph: dense block pair exceeds the complement limit");

  std::uniform_int_distribution<std::uint64_t> pick_a(0, sa - 1);
  std::uniform_int_distribution<std::uint64_t> pick_b(0, (same_block ? sa - 2 : sb - 1));
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(draws * 2 + 1));
  std::vector<Edge> placed;
  placed.reserve(static_cast<std::size_t>(draws));
  const std::uint64_t stride = same_block ? sa : sb;
  while (placed.size() < draws) {
    std::uint64_t x = pick_a(rng);
    std::uint64_t y = pick_b(rng);
    std::uint64_t i, j;
    if (same_block) {
      if (y >= x) ++y;
      if (x > y) std::swap(x, y);
      i = off_a + x;
      j = off_a + y;
    } else {
      i = off_a + x;
      j = off_b + y;
    }
    if (chosen.insert(x * stride + y).second)
      placed.emplace_back(static_cast<Vertex>(std::min(i, j)), static_cast<Vertex>(std::max(i, j)));
  }
  if (!complement) {
    out.insert(out.end(), placed.begin(), placed.end());
    return;
  }
  std::sort(placed.begin(), placed.end());
  for_each_pair([&](std::uint64_t i, std::uint64_t j) {
    Edge e{static_cast<Vertex>(std::min(i, j)), static_cast<Vertex>(std::max(i, j))};
    if (!std::binary_search(placed.begin(), placed.end(), e)) out.push_back(e);
  });
}

} // namespace detail

/// Draws one realization. The output is a function of (model, seed,
/// replica_index) only. Block models cost O(n + #edges) in expectation.
inline SampledGraph sample_graph(const EdgeProbabilityModel& model, std::uint64_t seed,
                                 std::uint64_t replica_index, const SamplerOptions& opt = {}) {
  Rng rng = make_rng(seed, replica_index);
  const std::size_t n = model.n();
  std::vector<Edge> edges;
  std::vector<Vertex> loops;

  if (model.has_block_structure()) {
    const std::size_t r = model.num_blocks();
    edges.reserve(static_cast<std::size_t>(model.d() * static_cast<double>(n) * 0.5 * 1.1) + 16);
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = a; b < r; ++b)
        detail::place_block_pair(rng, model.block_offset(a), model.block_sizes()[a], model.block_offset(b),
                                 model.block_sizes()[b], a == b, model.block_probability(a, b), opt, edges);
  } else {
    const auto P = model.dense_matrix();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double q = P[i * n + j];
        if (q > 0.0 && (q >= 1.0 || unif(rng) < q))
          edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
      }
  }
  if (model.allow_loops()) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = model.p(i, i);
      if (q > 0.0 && (q >= 1.0 || unif(rng) < q)) loops.push_back(static_cast<Vertex>(i));
    }
  }
  return SampledGraph::from_edges(n, std::move(edges), std::move(loops), seed, replica_index);
}

/// Degrees sorted nonincreasingly (D^down_1 >= D^down_2 >= ...).
inline std::vector<std::size_t> ordered_degrees(const SampledGraph& g) {
  std::vector<std::size_t> d(g.degrees().begin(), g.degrees().end());
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

struct ThresholdSets {
  std::vector<Vertex> at_least; ///< {i : D_i >= t}
  std::vector<Vertex> equal;    ///< {i : D_i == t}
};

inline ThresholdSets threshold_sets(const SampledGraph& g, std::size_t t) {
  ThresholdSets s;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (g.degree(i) >= t) s.at_least.push_back(static_cast<Vertex>(i));
    if (g.degree(i) == t) s.equal.push_back(static_cast<Vertex>(i));
  }
  return s;
}

/// Connected components; component ids ordered by their smallest vertex.
struct Components {
  std::vector<std::uint32_t> label;
  std::vector<std::vector<Vertex>> members; ///< each sorted increasingly
};

inline Components connected_components(const SampledGraph& g) {
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  Components c;
  c.label.assign(g.n(), unset);
  std::vector<Vertex> stack;
  for (std::size_t s = 0; s < g.n(); ++s) {
    if (c.label[s] != unset) continue;
    const auto id = static_cast<std::uint32_t>(c.members.size());
    c.members.emplace_back();
    auto& comp = c.members.back();
    c.label[s] = id;
    stack.push_back(static_cast<Vertex>(s));
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (Vertex w : g.neighbors(v))
        if (c.label[w] == unset) {
          c.label[w] = id;
          stack.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
  }
  return c;
}

/// Edge-list export: header "# n=<n> seed=<seed> replica=<r>", then one
/// 0-based "i j" pair per line (loops as "i i").
inline void write_edge_list(std::ostream& os, const SampledGraph& g) {
  os << "# n=" << g.n() << " seed=" << g.seed() << " replica=" << g.replica_index() << '\n';
  std::size_t li = 0;
  const auto loops = g.loops();
  for (const auto& [i, j] : g.edges()) {
    while (li < loops.size() && loops[li] <= i) {
      os << loops[li] << ' ' << loops[li] << '\n';
      ++li;
    }
    os << i << ' ' << j << '\n';
  }
  for (; li < loops.size(); ++li) os << loops[li] << ' ' << loops[li] << '\n';
}

inline SampledGraph read_edge_list(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# n=", 0) != 0)
    throw ValidationError("read_edge_list: missing '# n=' header");
  std::size_t n = 0;
  std::uint64_t seed = 0, replica = 0;
  if (std::sscanf(line.c_str(), "# n=%zu seed=%lu replica=%lu", &n, &seed, &replica) != 3)
    throw ValidationError("read_edge_list: malformed header: " + line);
  std::vector<Edge> edges;
  std::vector<Vertex> loops;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::uint64_t i = 0, j = 0;
    if (!(ls >> i >> j)) throw ValidationError("read_edge_list: malformed line: " + line);
    if (i == j)
      loops.push_back(static_cast<Vertex>(i));
    else
      edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  }
  return SampledGraph::from_edges(n, std::move(edges), std::move(loops), seed, replica);
}

} // namespace ergraph
