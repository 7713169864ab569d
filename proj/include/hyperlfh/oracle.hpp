#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyperlfh/hypergen.hpp"
#include "hyperlfh/matrix.hpp"

// Independent straight-line re-implementations used as test oracles. These
// deliberately avoid the tape and every helper of the learning path: plain
// loops over doubles only, so an agreement check means something.

namespace hyperlfh::oracle {

struct OracleAttnParams {
  std::vector<std::vector<Mat<double>>> q_proj;  // [node_type][head]
  std::vector<std::vector<Mat<double>>> k_proj;  // [hyperedge_type][head]
  std::vector<Mat<double>> theta_att;            // [hyperedge_type]
  std::vector<double> mu;                        // [hyperedge_type]
  Mat<double> mlp_w1, mlp_b1, mlp_w2, mlp_b2;
  int heads = 1;
};

/// Literal transcription of the hyperedge-embedding update and the
/// type-specific multi-head attention node update for tiny instances.
inline Mat<double> oracle_forward(const Mat<double>& X, const Mat<double>& H,
                                  const std::vector<int>& node_type,
                                  const HyperedgeIndex& index,
                                  const OracleAttnParams& p) {
  const std::size_t N = X.cols(), M = H.cols(), d = X.rows();
  if (N > 8) throw std::logic_error("oracle_forward: instance larger than 8 nodes");
  const int K = p.heads;
  const std::size_t dk = d / K;

  // E(e) = X H(:,e) / delta(e)
  std::vector<double> delta(M, 0.0);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t i = 0; i < N; ++i) delta[j] += H(i, j);
  Mat<double> E(d, M);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i) s += X(r, i) * H(i, j);
      E(r, j) = s / delta[j];
    }

  // Per-head projections.
  auto project = [&](const Mat<double>& W, const Mat<double>& src, std::size_t col) {
    std::vector<double> out(W.rows(), 0.0);
    for (std::size_t r = 0; r < W.rows(); ++r)
      for (std::size_t c = 0; c < W.cols(); ++c) out[r] += W(r, c) * src(c, col);
    return out;
  };

  Mat<double> Z(d, N);
  for (std::size_t v = 0; v < N; ++v) {
    const auto& cols = index.columns_of_node[v];
    if (cols.empty()) throw std::logic_error("oracle_forward: node masters no hyperedge");
    std::vector<double> concat(d, 0.0);
    for (int h = 0; h < K; ++h) {
      std::vector<double> q = project(p.q_proj[node_type[v]][h], X, v);
      // raw attention per incident hyperedge
      std::vector<double> att(cols.size());
      std::vector<std::vector<double>> keys(cols.size());
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const int e = cols[c];
        const int t = index.etype_of[e];
        keys[c] = project(p.k_proj[t][h], E, e);
        double s = 0.0;
        for (std::size_t a = 0; a < dk; ++a)
          for (std::size_t b = 0; b < dk; ++b)
            s += q[a] * p.theta_att[t](a, b) * keys[c][b];
        att[c] = s * p.mu[t] / std::sqrt(static_cast<double>(d));
      }
      // softmax over the node's hyperedges
      double mx = att[0];
      for (double a : att) mx = std::max(mx, a);
      double denom = 0.0;
      std::vector<double> w(cols.size());
      for (std::size_t c = 0; c < cols.size(); ++c) {
        w[c] = std::exp(att[c] - mx);
        denom += w[c];
      }
      for (double& x : w) x /= denom;
      // attentive aggregation
      for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t a = 0; a < dk; ++a) concat[h * dk + a] += w[c] * keys[c][a];
    }
    // MLP: w2 relu(w1 concat + b1) + b2
    std::vector<double> hidden(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      double s = p.mlp_b1(r, 0);
      for (std::size_t c = 0; c < d; ++c) s += p.mlp_w1(r, c) * concat[c];
      hidden[r] = s > 0.0 ? s : 0.0;
    }
    for (std::size_t r = 0; r < d; ++r) {
      double s = p.mlp_b2(r, 0);
      for (std::size_t c = 0; c < d; ++c) s += p.mlp_w2(r, c) * hidden[c];
      Z(r, v) = s;
    }
  }
  return Z;
}

struct NnlsResult {
  std::vector<double> coeffs;
  double error = 0.0;
};

/// Nonnegative least squares || candidates * p - target ||_2 minimized by
/// iteratively refined grid search down to the requested resolution.
/// Candidates: d x m with m <= 3.
inline NnlsResult oracle_nnls(const Mat<double>& candidates, const Mat<double>& target,
                              double upper = 2.0, double resolution = 1e-3) {
  const std::size_t m = candidates.cols(), d = candidates.rows();
  if (m == 0 || m > 3) throw std::logic_error("oracle_nnls: supports 1 to 3 candidates");
  if (target.rows() != d || target.cols() != 1)
    throw std::logic_error("oracle_nnls: target must be a column of matching dimension");

  auto residual = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double v = -target(r, 0);
      for (std::size_t c = 0; c < m; ++c) v += candidates(r, c) * p[c];
      s += v * v;
    }
    return std::sqrt(s);
  };

  std::vector<double> lo(m, 0.0), hi(m, upper);
  std::vector<double> best(m, 0.0);
  double best_err = residual(best);
  double step = upper / 10.0;
  while (true) {
    // exhaustive grid over [lo, hi] at the current step
    std::vector<std::size_t> steps(m);
    for (std::size_t c = 0; c < m; ++c)
      steps[c] = static_cast<std::size_t>((hi[c] - lo[c]) / step + 0.5) + 1;
    std::vector<std::size_t> ix(m, 0);
    while (true) {
      std::vector<double> p(m);
      for (std::size_t c = 0; c < m; ++c) p[c] = std::max(0.0, lo[c] + ix[c] * step);
      const double err = residual(p);
      if (err < best_err) {
        best_err = err;
        best = p;
      }
      std::size_t c = 0;
      while (c < m && ++ix[c] >= steps[c]) ix[c++] = 0;
      if (c == m) break;
    }
    if (step <= resolution) break;
    for (std::size_t c = 0; c < m; ++c) {
      lo[c] = std::max(0.0, best[c] - step);
      hi[c] = std::min(upper, best[c] + step);
    }
    step /= 10.0;
  }
  return {best, best_err};
}

}  // namespace hyperlfh::oracle
