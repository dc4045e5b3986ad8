#pragma once

// Matrix-free symmetric operators: A, E[A], A - E[A], explicit dense.
//
// Operators act on row-major blocks (n x m). Row-major layout keeps the
// sparse kernel contiguous: row i of the output is a sum of rows of the input.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergraph/errors.hpp"
#include "ergraph/graph_model.hpp"

namespace ergraph::spectral {

using RowBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BlockMap = Eigen::Map<RowBlock>;
using ConstBlockMap = Eigen::Map<const RowBlock>;

enum class OperatorKind { adjacency, expectation, centered, dense, reduced };

inline const char* to_string(OperatorKind k) {
  switch (k) {
  case OperatorKind::adjacency: return "adjacency";
  case OperatorKind::expectation: return "expectation";
  case OperatorKind::centered: return "centered";
  case OperatorKind::dense: return "dense";
  case OperatorKind::reduced: return "reduced";
  }
  return "unknown";
}

/// 0/1 symmetric sparse pattern with an optional unit diagonal (loops).
struct Csr {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<Vertex> cols;
  std::vector<unsigned char> diag;

  std::size_t nnz() const { return cols.size(); }

  /// y = (pattern) x on row-major blocks.
  void multiply(ConstBlockMap x, BlockMap y) const {
    for (std::size_t i = 0; i < n; ++i) {
      auto yi = y.row(static_cast<Eigen::Index>(i));
      if (diag[i])
        yi = x.row(static_cast<Eigen::Index>(i));
      else
        yi.setZero();
      for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) yi += x.row(cols[e]);
    }
  }
};

inline Csr csr_from_graph(const SampledGraph& g) {
  Csr c;
  c.n = g.n();
  c.offsets.assign(c.n + 1, 0);
  c.diag.assign(c.n, 0);
  for (std::size_t i = 0; i < c.n; ++i) {
    const auto nb = g.neighbors(i);
    c.offsets[i + 1] = c.offsets[i] + nb.size();
    c.cols.insert(c.cols.end(), nb.begin(), nb.end());
    c.diag[i] = g.has_loop(i) ? 1 : 0;
  }
  return c;
}

/// Induced pattern on a sorted vertex subset; local index = position in `vertices`.
inline Csr csr_induced(const SampledGraph& g, std::span<const Vertex> vertices) {
  Csr c;
  c.n = vertices.size();
  c.offsets.assign(c.n + 1, 0);
  c.diag.assign(c.n, 0);
  for (std::size_t a = 0; a < c.n; ++a) {
    const Vertex v = vertices[a];
    for (Vertex w : g.neighbors(v)) {
      auto it = std::lower_bound(vertices.begin(), vertices.end(), w);
      if (it != vertices.end() && *it == w) c.cols.push_back(static_cast<Vertex>(it - vertices.begin()));
    }
    c.offsets[a + 1] = c.cols.size();
    c.diag[a] = g.has_loop(v) ? 1 : 0;
  }
  return c;
}

/// A symmetric linear map given by its action on row-major blocks.
class SymmetricOperator {
public:
  using BlockFn = std::function<void(ConstBlockMap, BlockMap)>;

  SymmetricOperator(std::size_t dim, OperatorKind kind, BlockFn fn)
      : dim_(dim), kind_(kind), fn_(std::move(fn)) {}

  std::size_t dim() const noexcept { return dim_; }
  OperatorKind kind() const noexcept { return kind_; }

  void apply(ConstBlockMap x, BlockMap y) const {
    if (static_cast<std::size_t>(x.rows()) != dim_ || y.rows() != x.rows() || y.cols() != x.cols())
      throw ValidationError("SymmetricOperator::apply: dimension mismatch");
    fn_(x, y);
  }

  void apply(const RowBlock& x, RowBlock& y) const {
    y.resize(x.rows(), x.cols());
    apply(ConstBlockMap(x.data(), x.rows(), x.cols()), BlockMap(y.data(), y.rows(), y.cols()));
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(ConstBlockMap(x.data(), x.size(), 1), BlockMap(y.data(), y.size(), 1));
    return y;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    apply(ConstBlockMap(x.data(), static_cast<Eigen::Index>(x.size()), 1),
          BlockMap(y.data(), static_cast<Eigen::Index>(y.size()), 1));
    return y;
  }

private:
  std::size_t dim_;
  OperatorKind kind_;
  BlockFn fn_;
};

inline SymmetricOperator csr_operator(Csr csr, OperatorKind kind = OperatorKind::adjacency) {
  auto shared = std::make_shared<const Csr>(std::move(csr));
  const std::size_t n = shared->n;
  return SymmetricOperator(n, kind, [shared](ConstBlockMap x, BlockMap y) { shared->multiply(x, y); });
}

/// Adjacency A; a loop contributes a diagonal 1.
inline SymmetricOperator adjacency_operator(const SampledGraph& g) { return csr_operator(csr_from_graph(g)); }

namespace detail {

/// y (+)= E[A] x for a block-structured model.
struct BlockExpectation {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> sizes;
  Eigen::MatrixXd B;
  bool loops = false;

  void apply(ConstBlockMap x, BlockMap y, double sign, bool accumulate) const {
    const auto r = static_cast<Eigen::Index>(sizes.size());
    RowBlock S(r, x.cols());
    for (Eigen::Index a = 0; a < r; ++a)
      S.row(a) = x.middleRows(static_cast<Eigen::Index>(offsets[a]), static_cast<Eigen::Index>(sizes[a]))
                     .colwise()
                     .sum();
    const RowBlock T = B * S;
    for (Eigen::Index a = 0; a < r; ++a) {
      auto xs = x.middleRows(static_cast<Eigen::Index>(offsets[a]), static_cast<Eigen::Index>(sizes[a]));
      auto ys = y.middleRows(static_cast<Eigen::Index>(offsets[a]), static_cast<Eigen::Index>(sizes[a]));
      if (!accumulate) ys.setZero();
      ys.rowwise() += sign * T.row(a);
      if (!loops) ys -= (sign * B(a, a)) * xs;
    }
  }
};

inline std::shared_ptr<const BlockExpectation> block_expectation(const EdgeProbabilityModel& m) {
  auto e = std::make_shared<BlockExpectation>();
  const std::size_t r = m.num_blocks();
  e->sizes.assign(m.block_sizes().begin(), m.block_sizes().end());
  e->offsets.resize(r);
  e->B.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t a = 0; a < r; ++a) {
    e->offsets[a] = m.block_offset(a);
    for (std::size_t b = 0; b < r; ++b)
      e->B(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m.block_probability(a, b);
  }
  e->loops = m.allow_loops();
  return e;
}

inline std::shared_ptr<const Eigen::MatrixXd> dense_expectation(const EdgeProbabilityModel& m) {
  const auto n = static_cast<Eigen::Index>(m.n());
  auto P = std::make_shared<Eigen::MatrixXd>(n, n);
  const auto src = m.dense_matrix();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) (*P)(i, j) = src[static_cast<std::size_t>(i * n + j)];
  return P;
}

} // namespace detail

/// E[A] = (p_ij); block models cost O(n m + r^2 m) per block of m vectors.
inline SymmetricOperator expectation_operator(const EdgeProbabilityModel& model) {
  if (model.has_block_structure()) {
    auto e = detail::block_expectation(model);
    return SymmetricOperator(model.n(), OperatorKind::expectation,
                             [e](ConstBlockMap x, BlockMap y) { e->apply(x, y, 1.0, false); });
  }
  auto P = detail::dense_expectation(model);
  return SymmetricOperator(model.n(), OperatorKind::expectation,
                           [P](ConstBlockMap x, BlockMap y) { y.noalias() = (*P) * x; });
}

/// A - E[A].
inline SymmetricOperator centered_operator(const SampledGraph& g, const EdgeProbabilityModel& model) {
  if (g.n() != model.n())
    throw ValidationError("centered_operator: graph has " + std::to_string(g.n()) + " vertices, model has " +
                          std::to_string(model.n()));
  auto A = std::make_shared<const Csr>(csr_from_graph(g));
  if (model.has_block_structure()) {
    auto e = detail::block_expectation(model);
    return SymmetricOperator(g.n(), OperatorKind::centered, [A, e](ConstBlockMap x, BlockMap y) {
      A->multiply(x, y);
      e->apply(x, y, -1.0, true);
    });
  }
  auto P = detail::dense_expectation(model);
  return SymmetricOperator(g.n(), OperatorKind::centered, [A, P](ConstBlockMap x, BlockMap y) {
    A->multiply(x, y);
    y.noalias() -= (*P) * x;
  });
}

/// Explicit dense symmetric matrix (symmetry is checked exactly).
inline SymmetricOperator dense_operator(Eigen::MatrixXd M) {
  if (M.rows() != M.cols()) throw ValidationError("dense_operator: matrix must be square");
  if (!(M.transpose() == M)) throw ValidationError("dense_operator: matrix must be symmetric");
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(M));
  return SymmetricOperator(static_cast<std::size_t>(shared->rows()), OperatorKind::dense,
                           [shared](ConstBlockMap x, BlockMap y) { y.noalias() = (*shared) * x; });
}

/// Dense materialization, built column block by column block.
inline Eigen::MatrixXd materialize(const SymmetricOperator& op, std::size_t block = 256) {
  const auto n = static_cast<Eigen::Index>(op.dim());
  Eigen::MatrixXd M(n, n);
  RowBlock X, Y;
  for (Eigen::Index c0 = 0; c0 < n; c0 += static_cast<Eigen::Index>(block)) {
    const Eigen::Index w = std::min<Eigen::Index>(static_cast<Eigen::Index>(block), n - c0);
    X.setZero(n, w);
    for (Eigen::Index j = 0; j < w; ++j) X(c0 + j, j) = 1.0;
    op.apply(X, Y);
    M.middleCols(c0, w) = Y;
  }
  return M;
}

} // namespace ergraph::spectral
