#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/matrix.hpp"
#include "hyperlfh/rng.hpp"

namespace hyperlfh {

/// Reverse-mode autodiff over dense matrices. The graph is rebuilt on every
/// forward pass (hyperedge membership changes as the coefficients move), so
/// a flat append-only tape is the whole story: appending keeps nodes in
/// topological order and backward() is a single reverse sweep that sums
/// gradients at shared nodes.
template <typename T>
class Tape {
 public:
  using Var = int;

  struct Node {
    Mat<T> value;
    Mat<T> grad;  // allocated lazily during backward
    const char* tag;
    std::function<void(Tape&, Node&)> backprop;  // empty for leaves
  };

  const Mat<T>& val(Var v) const { return nodes_[v].value; }

  /// Gradient of the last backward()'s loss w.r.t. v; zeros if v unreached.
  const Mat<T>& grad(Var v) {
    Node& n = nodes_[v];
    if (n.grad.empty()) n.grad = Mat<T>(n.value.rows(), n.value.cols());
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  Var leaf(Mat<T> v, const char* tag = "leaf") {
    nodes_.push_back(Node{std::move(v), {}, tag, {}});
    return static_cast<Var>(nodes_.size() - 1);
  }

  // ---- arithmetic ----

  Var matmul(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    if (A.cols() != B.rows())
      throw std::invalid_argument("matmul: shape mismatch " + A.shape_str() + " * " +
                                  B.shape_str());
    return push(matmul_value(A, B), "matmul", [a, b](Tape& t, Node& n) {
      t.g(a).grad_add(matmul_value(n.grad, transpose_value(t.v(b))));
      t.g(b).grad_add(matmul_value(transpose_value(t.v(a)), n.grad));
    });
  }

  Var add(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    require_same_shape(A, B, "add");
    Mat<T> c = A;
    for (std::size_t k = 0; k < c.size(); ++k) c.at(k) += B.at(k);
    return push(std::move(c), "add", [a, b](Tape& t, Node& n) {
      accumulate(t.gm(a), n.grad, T(1));
      accumulate(t.gm(b), n.grad, T(1));
    });
  }

  Var sub(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    require_same_shape(A, B, "sub");
    Mat<T> c = A;
    for (std::size_t k = 0; k < c.size(); ++k) c.at(k) -= B.at(k);
    return push(std::move(c), "sub", [a, b](Tape& t, Node& n) {
      accumulate(t.gm(a), n.grad, T(1));
      accumulate(t.gm(b), n.grad, T(-1));
    });
  }

  Var hadamard(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    require_same_shape(A, B, "hadamard");
    Mat<T> c = A;
    for (std::size_t k = 0; k < c.size(); ++k) c.at(k) *= B.at(k);
    return push(std::move(c), "hadamard", [a, b](Tape& t, Node& n) {
      Mat<T>&ga = t.gm(a), &gb = t.gm(b);
      const Mat<T>&A2 = t.v(a), &B2 = t.v(b);
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        ga.at(k) += n.grad.at(k) * B2.at(k);
        gb.at(k) += n.grad.at(k) * A2.at(k);
      }
    });
  }

  Var scale(Var a, T c) {
    Mat<T> out = v(a);
    for (std::size_t k = 0; k < out.size(); ++k) out.at(k) *= c;
    return push(std::move(out), "scale", [a, c](Tape& t, Node& n) {
      accumulate(t.gm(a), n.grad, c);
    });
  }

  /// Multiply every entry of a by the 1x1 node s (learnable scalar).
  Var scale_by(Var a, Var s) {
    const Mat<T>& S = v(s);
    if (S.rows() != 1 || S.cols() != 1)
      throw std::invalid_argument("scale_by: scalar operand is " + S.shape_str());
    const T sv = S.at(0);
    Mat<T> out = v(a);
    for (std::size_t k = 0; k < out.size(); ++k) out.at(k) *= sv;
    return push(std::move(out), "scale_by", [a, s](Tape& t, Node& n) {
      const T sv2 = t.v(s).at(0);
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A = t.v(a);
      T ds = T(0);
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        ga.at(k) += n.grad.at(k) * sv2;
        ds += n.grad.at(k) * A.at(k);
      }
      t.gm(s).at(0) += ds;
    });
  }

  Var relu(Var a) {
    Mat<T> out = v(a);
    for (std::size_t k = 0; k < out.size(); ++k)
      if (out.at(k) < T(0)) out.at(k) = T(0);
    return push(std::move(out), "relu", [a](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A = t.v(a);
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        if (A.at(k) > T(0)) ga.at(k) += n.grad.at(k);
    });
  }

  /// Inverted dropout: zero with probability rate, scale survivors by
  /// 1/(1-rate). Identity in eval mode. Draws come from the caller's stream
  /// so repeated forwards with the same stream state reuse the same mask.
  Var dropout(Var a, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
      throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return a;
    const T keep_scale = T(1.0 / (1.0 - rate));
    Mat<T> out = v(a);
    auto mask = std::make_shared<std::vector<char>>(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (rng.uniform() < rate) {
        out.at(k) = T(0);
      } else {
        (*mask)[k] = 1;
        out.at(k) *= keep_scale;
      }
    }
    return push(std::move(out), "dropout", [a, mask, keep_scale](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        if ((*mask)[k]) ga.at(k) += n.grad.at(k) * keep_scale;
    });
  }

  Var dropout(Var a, double rate, bool training, std::uint64_t seed) {
    Rng rng(seed);
    return dropout(a, rate, training, rng);
  }

  // ---- selection / assembly ----

  Var select_columns(Var a, std::vector<int> idx) {
    const Mat<T>& A = v(a);
    Mat<T> out(A.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      check_col(A, idx[j], "select_columns");
      for (std::size_t i = 0; i < A.rows(); ++i) out(i, j) = A(i, idx[j]);
    }
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    return push(std::move(out), "select_columns", [a, ix](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t j = 0; j < ix->size(); ++j)
        for (std::size_t i = 0; i < ga.rows(); ++i) ga(i, (*ix)[j]) += n.grad(i, j);
    });
  }

  /// Place (and sum) the columns of a at positions idx of a wider zero matrix.
  Var scatter_columns(Var a, std::vector<int> idx, std::size_t total_cols) {
    const Mat<T>& A = v(a);
    if (idx.size() != A.cols())
      throw std::invalid_argument("scatter_columns: " + std::to_string(idx.size()) +
                                  " indices for " + A.shape_str());
    Mat<T> out(A.rows(), total_cols);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      check_col(out, idx[j], "scatter_columns");
      for (std::size_t i = 0; i < A.rows(); ++i) out(i, idx[j]) += A(i, j);
    }
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    return push(std::move(out), "scatter_columns", [a, ix](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t j = 0; j < ix->size(); ++j)
        for (std::size_t i = 0; i < ga.rows(); ++i) ga(i, j) += n.grad(i, (*ix)[j]);
    });
  }

  Var select_row(Var a, int r) {
    const Mat<T>& A = v(a);
    if (r < 0 || static_cast<std::size_t>(r) >= A.rows())
      throw std::invalid_argument("select_row: row " + std::to_string(r) + " of " +
                                  A.shape_str());
    Mat<T> out(1, A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) out(0, j) = A(r, j);
    return push(std::move(out), "select_row", [a, r](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t j = 0; j < ga.cols(); ++j) ga(r, j) += n.grad(0, j);
    });
  }

  Var concat_rows(std::vector<Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    std::size_t cols = v(parts[0]).cols(), rows = 0;
    for (Var p : parts) {
      if (v(p).cols() != cols)
        throw std::invalid_argument("concat_rows: column mismatch " + v(p).shape_str());
      rows += v(p).rows();
    }
    Mat<T> out(rows, cols);
    std::size_t r0 = 0;
    for (Var p : parts) {
      const Mat<T>& P = v(p);
      for (std::size_t i = 0; i < P.rows(); ++i)
        for (std::size_t j = 0; j < cols; ++j) out(r0 + i, j) = P(i, j);
      r0 += P.rows();
    }
    auto ps = std::make_shared<std::vector<Var>>(std::move(parts));
    return push(std::move(out), "concat_rows", [ps](Tape& t, Node& n) {
      std::size_t r0b = 0;
      for (Var p : *ps) {
        Mat<T>& gp = t.gm(p);
        for (std::size_t i = 0; i < gp.rows(); ++i)
          for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += n.grad(r0b + i, j);
        r0b += gp.rows();
      }
    });
  }

  /// Build an R x len(columns) matrix column by column from vector nodes:
  /// column j takes the entries of columns[j] at the given row positions,
  /// plus fixed (constant, gradient-free) entries. Used for the per-type
  /// coefficient matrices and the incidence matrix.
  Var assemble_columns(const std::vector<Var>& columns,
                       const std::vector<std::vector<int>>& row_positions,
                       std::size_t out_rows,
                       const std::vector<std::pair<int, T>>& fixed_per_column = {}) {
    if (columns.size() != row_positions.size())
      throw std::invalid_argument("assemble_columns: columns/positions size mismatch");
    if (!fixed_per_column.empty() && fixed_per_column.size() != columns.size())
      throw std::invalid_argument("assemble_columns: fixed entries size mismatch");
    Mat<T> out(out_rows, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const Mat<T>& cj = v(columns[j]);
      if (cj.cols() != 1 || cj.rows() != row_positions[j].size())
        throw std::invalid_argument("assemble_columns: column " + std::to_string(j) +
                                    " is " + cj.shape_str() + ", want " +
                                    std::to_string(row_positions[j].size()) + "x1");
      for (std::size_t r = 0; r < cj.rows(); ++r) {
        check_row(out, row_positions[j][r], "assemble_columns");
        out(row_positions[j][r], j) = cj(r, 0);
      }
      if (!fixed_per_column.empty()) {
        check_row(out, fixed_per_column[j].first, "assemble_columns");
        out(fixed_per_column[j].first, j) = fixed_per_column[j].second;
      }
    }
    auto cols = std::make_shared<std::vector<Var>>(columns);
    auto pos = std::make_shared<std::vector<std::vector<int>>>(row_positions);
    return push(std::move(out), "assemble_columns", [cols, pos](Tape& t, Node& n) {
      for (std::size_t j = 0; j < cols->size(); ++j) {
        Mat<T>& gc = t.gm((*cols)[j]);
        const auto& rp = (*pos)[j];
        for (std::size_t r = 0; r < rp.size(); ++r) gc(r, 0) += n.grad(rp[r], j);
      }
    });
  }

  /// y = x if threshold < x <= 1, min(x,1) above, 0 at or below threshold.
  /// Maps nonnegative coefficients into [0,1] incidence entries.
  Var clip_threshold(Var a, T threshold) {
    const Mat<T>& A = v(a);
    Mat<T> out(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k) {
      T x = A.at(k);
      out.at(k) = (x > threshold) ? std::min(x, T(1)) : T(0);
    }
    return push(std::move(out), "clip_threshold", [a, threshold](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A2 = t.v(a);
      for (std::size_t k = 0; k < n.grad.size(); ++k) {
        T x = A2.at(k);
        if (x > threshold && x <= T(1)) ga.at(k) += n.grad.at(k);
      }
    });
  }

  // ---- reductions ----

  Var sum_all(Var a) {
    const Mat<T>& A = v(a);
    T s = T(0);
    for (std::size_t k = 0; k < A.size(); ++k) s += A.at(k);
    return push(Mat<T>(1, 1, {s}), "sum_all", [a](Tape& t, Node& n) {
      accumulate_scalar(t.gm(a), n.grad.at(0));
    });
  }

  Var column_sums(Var a) {
    const Mat<T>& A = v(a);
    Mat<T> out(1, A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) out(0, j) += A(i, j);
    return push(std::move(out), "column_sums", [a](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t i = 0; i < ga.rows(); ++i)
        for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += n.grad(0, j);
    });
  }

  /// Per-column Euclidean norm, 1 x C. Subgradient 0 at a zero column.
  Var columnwise_l2_norm(Var a) {
    const Mat<T>& A = v(a);
    Mat<T> out(1, A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) {
      T s = T(0);
      for (std::size_t i = 0; i < A.rows(); ++i) s += A(i, j) * A(i, j);
      out(0, j) = std::sqrt(s);
    }
    auto norms = std::make_shared<Mat<T>>(out);
    return push(std::move(out), "columnwise_l2_norm", [a, norms](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A2 = t.v(a);
      for (std::size_t j = 0; j < ga.cols(); ++j) {
        const T nj = (*norms)(0, j);
        if (nj == T(0)) continue;
        const T gj = n.grad(0, j) / nj;
        for (std::size_t i = 0; i < ga.rows(); ++i) ga(i, j) += gj * A2(i, j);
      }
    });
  }

  /// Dot product of corresponding columns, 1 x C.
  Var columnwise_dot(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    require_same_shape(A, B, "columnwise_dot");
    Mat<T> out(1, A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) {
      T s = T(0);
      for (std::size_t i = 0; i < A.rows(); ++i) s += A(i, j) * B(i, j);
      out(0, j) = s;
    }
    return push(std::move(out), "columnwise_dot", [a, b](Tape& t, Node& n) {
      Mat<T>&ga = t.gm(a), &gb = t.gm(b);
      const Mat<T>&A2 = t.v(a), &B2 = t.v(b);
      for (std::size_t j = 0; j < ga.cols(); ++j) {
        const T gj = n.grad(0, j);
        for (std::size_t i = 0; i < ga.rows(); ++i) {
          ga(i, j) += gj * B2(i, j);
          gb(i, j) += gj * A2(i, j);
        }
      }
    });
  }

  /// Multiply column j of a by s(0,j).
  Var scale_columns(Var a, Var s) {
    const Mat<T>&A = v(a), &S = v(s);
    if (S.rows() != 1 || S.cols() != A.cols())
      throw std::invalid_argument("scale_columns: scales " + S.shape_str() + " for " +
                                  A.shape_str());
    Mat<T> out = A;
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) out(i, j) *= S(0, j);
    return push(std::move(out), "scale_columns", [a, s](Tape& t, Node& n) {
      Mat<T>&ga = t.gm(a), &gs = t.gm(s);
      const Mat<T>&A2 = t.v(a), &S2 = t.v(s);
      for (std::size_t i = 0; i < ga.rows(); ++i)
        for (std::size_t j = 0; j < ga.cols(); ++j) {
          ga(i, j) += n.grad(i, j) * S2(0, j);
          gs(0, j) += n.grad(i, j) * A2(i, j);
        }
    });
  }

  Var reciprocal(Var a) {
    const Mat<T>& A = v(a);
    Mat<T> out(A.rows(), A.cols());
    for (std::size_t k = 0; k < A.size(); ++k) out.at(k) = T(1) / A.at(k);
    return push(std::move(out), "reciprocal", [a](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A2 = t.v(a);
      for (std::size_t k = 0; k < n.grad.size(); ++k)
        ga.at(k) -= n.grad.at(k) / (A2.at(k) * A2.at(k));
    });
  }

  /// a + b broadcast across columns; b is R x 1.
  Var add_col_bias(Var a, Var b) {
    const Mat<T>&A = v(a), &B = v(b);
    if (B.cols() != 1 || B.rows() != A.rows())
      throw std::invalid_argument("add_col_bias: bias " + B.shape_str() + " for " +
                                  A.shape_str());
    Mat<T> out = A;
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) out(i, j) += B(i, 0);
    return push(std::move(out), "add_col_bias", [a, b](Tape& t, Node& n) {
      Mat<T>&ga = t.gm(a), &gb = t.gm(b);
      for (std::size_t i = 0; i < ga.rows(); ++i)
        for (std::size_t j = 0; j < ga.cols(); ++j) {
          ga(i, j) += n.grad(i, j);
          gb(i, 0) += n.grad(i, j);
        }
    });
  }

  /// Row-wise softmax within each column group. Groups must partition the
  /// columns; each group is normalized independently per row after
  /// subtracting the group's row max.
  Var softmax_per_group(Var a, const std::vector<std::vector<int>>& groups) {
    const Mat<T>& A = v(a);
    std::vector<char> seen(A.cols(), 0);
    for (const auto& grp : groups) {
      if (grp.empty()) throw std::logic_error("softmax_per_group: empty group");
      for (int j : grp) {
        check_col(A, j, "softmax_per_group");
        if (seen[j]) throw std::logic_error("softmax_per_group: column in two groups");
        seen[j] = 1;
      }
    }
    for (std::size_t j = 0; j < A.cols(); ++j)
      if (!seen[j]) throw std::logic_error("softmax_per_group: column not covered");

    Mat<T> out(A.rows(), A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
      for (const auto& grp : groups) {
        T mx = A(i, grp[0]);
        for (int j : grp) mx = std::max(mx, A(i, j));
        T denom = T(0);
        for (int j : grp) {
          out(i, j) = std::exp(A(i, j) - mx);
          denom += out(i, j);
        }
        for (int j : grp) out(i, j) /= denom;
      }
    }
    auto y = std::make_shared<Mat<T>>(out);
    auto gr = std::make_shared<std::vector<std::vector<int>>>(groups);
    return push(std::move(out), "softmax_per_group", [a, y, gr](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t i = 0; i < ga.rows(); ++i) {
        for (const auto& grp : *gr) {
          T dot = T(0);
          for (int j : grp) dot += n.grad(i, j) * (*y)(i, j);
          for (int j : grp) ga(i, j) += (*y)(i, j) * (n.grad(i, j) - dot);
        }
      }
    });
  }

  /// Sum columns sharing a group id into one output column per group.
  Var sum_columns_by_group(Var a, const std::vector<int>& group_of_col,
                           std::size_t n_groups) {
    const Mat<T>& A = v(a);
    if (group_of_col.size() != A.cols())
      throw std::invalid_argument("sum_columns_by_group: ids for " + A.shape_str());
    Mat<T> out(A.rows(), n_groups);
    for (std::size_t j = 0; j < A.cols(); ++j) {
      int g = group_of_col[j];
      if (g < 0 || static_cast<std::size_t>(g) >= n_groups)
        throw std::invalid_argument("sum_columns_by_group: group id out of range");
      for (std::size_t i = 0; i < A.rows(); ++i) out(i, g) += A(i, j);
    }
    auto ids = std::make_shared<std::vector<int>>(group_of_col);
    return push(std::move(out), "sum_columns_by_group", [a, ids](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      for (std::size_t j = 0; j < ga.cols(); ++j)
        for (std::size_t i = 0; i < ga.rows(); ++i) ga(i, j) += n.grad(i, (*ids)[j]);
    });
  }

  // ---- norms and losses ----

  /// Sum of absolute values, 1x1. Subgradient at 0 is 0.
  Var l1_norm(Var a) {
    const Mat<T>& A = v(a);
    T s = T(0);
    for (std::size_t k = 0; k < A.size(); ++k) s += std::abs(A.at(k));
    return push(Mat<T>(1, 1, {s}), "l1_norm", [a](Tape& t, Node& n) {
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A2 = t.v(a);
      const T g = n.grad.at(0);
      for (std::size_t k = 0; k < ga.size(); ++k) {
        if (A2.at(k) > T(0)) ga.at(k) += g;
        else if (A2.at(k) < T(0)) ga.at(k) -= g;
      }
    });
  }

  /// Euclidean norm of all entries, 1x1. Subgradient 0 at the origin.
  Var l2_norm(Var a) {
    const Mat<T>& A = v(a);
    T s = T(0);
    for (std::size_t k = 0; k < A.size(); ++k) s += A.at(k) * A.at(k);
    const T norm = std::sqrt(s);
    return push(Mat<T>(1, 1, {norm}), "l2_norm", [a, norm](Tape& t, Node& n) {
      if (norm == T(0)) return;
      Mat<T>& ga = t.gm(a);
      const Mat<T>& A2 = t.v(a);
      const T g = n.grad.at(0) / norm;
      for (std::size_t k = 0; k < ga.size(); ++k) ga.at(k) += g * A2.at(k);
    });
  }

  /// Mean negative log-likelihood of class labels under column-wise
  /// log-softmax of the logits (classes x examples). Shift-stabilized.
  Var cross_entropy(Var logits, const std::vector<int>& labels) {
    const Mat<T>& L = v(logits);
    if (labels.size() != L.cols())
      throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                  " labels for logits " + L.shape_str());
    if (labels.empty()) throw std::invalid_argument("cross_entropy: no examples");
    const std::size_t C = L.rows(), n = L.cols();
    auto probs = std::make_shared<Mat<T>>(C, n);
    T loss = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] < 0 || static_cast<std::size_t>(labels[j]) >= C)
        throw std::invalid_argument("cross_entropy: label " + std::to_string(labels[j]) +
                                    " outside [0," + std::to_string(C) + ")");
      T mx = L(0, j);
      for (std::size_t i = 1; i < C; ++i) mx = std::max(mx, L(i, j));
      T denom = T(0);
      for (std::size_t i = 0; i < C; ++i) {
        (*probs)(i, j) = std::exp(L(i, j) - mx);
        denom += (*probs)(i, j);
      }
      for (std::size_t i = 0; i < C; ++i) (*probs)(i, j) /= denom;
      loss -= (L(labels[j], j) - mx) - std::log(denom);
    }
    loss /= static_cast<T>(n);
    auto labs = std::make_shared<std::vector<int>>(labels);
    return push(Mat<T>(1, 1, {loss}), "cross_entropy", [logits, probs, labs](Tape& t, Node& nd) {
      Mat<T>& gl = t.gm(logits);
      const T g = nd.grad.at(0) / static_cast<T>(labs->size());
      for (std::size_t j = 0; j < gl.cols(); ++j) {
        for (std::size_t i = 0; i < gl.rows(); ++i) gl(i, j) += g * (*probs)(i, j);
        gl((*labs)[j], j) -= g;
      }
    });
  }

  // ---- backward ----

  /// Reverse sweep from a scalar loss. Gradients at shared nodes sum.
  void backward(Var loss) {
    const Mat<T>& L = v(loss);
    if (L.rows() != 1 || L.cols() != 1)
      throw std::logic_error("backward: loss must be scalar, got " + L.shape_str());
    gm(loss).at(0) = T(1);
    for (int i = loss; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.backprop || n.grad.empty()) continue;
      n.backprop(*this, n);
    }
  }

  /// Tag of the first node holding a non-finite value, or nullptr.
  const char* first_nonfinite() const {
    for (const Node& n : nodes_)
      if (!n.value.all_finite()) return n.tag;
    return nullptr;
  }

 private:
  std::vector<Node> nodes_;

  const Mat<T>& v(Var i) const { return nodes_[i].value; }

  // Gradient accumulator for node i, allocated on first touch.
  Mat<T>& gm(Var i) {
    Node& n = nodes_[i];
    if (n.grad.empty()) n.grad = Mat<T>(n.value.rows(), n.value.cols());
    return n.grad;
  }

  struct GradRef {
    Mat<T>& m;
    void grad_add(const Mat<T>& delta) {
      for (std::size_t k = 0; k < m.size(); ++k) m.at(k) += delta.at(k);
    }
  };
  GradRef g(Var i) { return GradRef{gm(i)}; }

  static void accumulate(Mat<T>& dst, const Mat<T>& src, T factor) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst.at(k) += factor * src.at(k);
  }
  static void accumulate_scalar(Mat<T>& dst, T g) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst.at(k) += g;
  }

  static void require_same_shape(const Mat<T>& a, const Mat<T>& b, const char* op) {
    if (!a.same_shape(b))
      throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                  " vs " + b.shape_str());
  }
  static void check_col(const Mat<T>& m, int j, const char* op) {
    if (j < 0 || static_cast<std::size_t>(j) >= m.cols())
      throw std::invalid_argument(std::string(op) + ": column " + std::to_string(j) +
                                  " out of range for " + m.shape_str());
  }
  static void check_row(const Mat<T>& m, int i, const char* op) {
    if (i < 0 || static_cast<std::size_t>(i) >= m.rows())
      throw std::invalid_argument(std::string(op) + ": row " + std::to_string(i) +
                                  " out of range for " + m.shape_str());
  }

  Var push(Mat<T> value, const char* tag, std::function<void(Tape&, Node&)> back) {
    nodes_.push_back(Node{std::move(value), {}, tag, std::move(back)});
    return static_cast<Var>(nodes_.size() - 1);
  }
};

}  // namespace hyperlfh
