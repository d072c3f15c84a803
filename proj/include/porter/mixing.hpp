#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "porter/graph.hpp"

namespace porter {

/// Gossip weight matrix with unit row and column sums. alpha is the operator
/// norm of W - (1/n)*11^T; gamma is set when the matrix came out of
/// regularize().
struct MixingMatrix {
  Eigen::MatrixXd W;
  double alpha = 1.0;
  std::optional<double> gamma;

  int n() const { return static_cast<int>(W.rows()); }
};

enum class NormFallback { DenseSvd, Report };

/// Largest singular value of (W - (1/n)*11^T) by power iteration on the Gram
/// matrix A^T A, relative tolerance on successive Rayleigh estimates.
///
/// Two deterministic starts are run and the larger estimate wins. The
/// all-ones-plus-e0 start alone is blind on hub topologies: a star's
/// Metropolis matrix is exactly block diagonal in floating point, so that
/// start has exactly zero overlap with the top singular subspace and the
/// iteration converges inside an invariant subspace. The second start has
/// hashed, pairwise-distinct coordinates. Each run's limit is a lower bound
/// on the true norm, so max is the safe combiner.
///
/// A regularized matrix I + gamma*(W - I) with small gamma compresses the
/// whole spectrum into a near-degenerate cluster that power iteration cannot
/// separate within any reasonable cap. Hitting the cap therefore falls back
/// to a dense SVD by default; NormFallback::Report restores a hard error.
inline double mixing_rate(const Eigen::MatrixXd& W, double rel_tol = 1e-10,
                          int max_iters = 10000,
                          NormFallback fallback = NormFallback::DenseSvd) {
  const auto n = W.rows();
  if (n < 1 || W.cols() != n)
    throw std::invalid_argument("mixing_rate: W must be square");
  const Eigen::MatrixXd A =
      W - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd G = A.transpose() * A;

  double best = 0.0;
  bool capped = false;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    if (attempt == 0) {
      v(0) += 1e-3;
    } else {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (Eigen::Index i = 0; i < n; ++i)
        v(i) += 1e-3 * static_cast<double>(rng::detail::splitmix64(h) >> 11) *
                0x1.0p-53;
    }
    v.normalize();

    // The Rayleigh estimates ascend geometrically with ratio q = (s2/s1)^2.
    // Successive-difference plateaus alone mislead on near-degenerate
    // spectra (the drift is slow, not done). Convergence is declared only
    // when the geometric tail bound drift*q/(1-q), with q the largest drift
    // ratio over a 6-iteration window, falls below tolerance AND q stays
    // under 0.99. Flatter spectra refuse to certify and take the fallback.
    double lambda = 0.0;
    double prev_drift = -1.0;
    double drift_window[6];
    int window_fill = 0;
    int noise_floor_hits = 0;
    bool converged = false;
    bool null_start = false;
    for (int it = 0; it < max_iters; ++it) {
      Eigen::VectorXd gv = G * v;
      const double norm = gv.norm();
      if (norm <= 1e-300) {  // start sits in the null space; contributes 0
        null_start = true;
        break;
      }
      const double estimate = v.dot(gv);
      gv /= norm;
      if (it > 0) {
        const double drift = std::abs(estimate - lambda);
        const double scale = std::max(estimate, 1e-30);
        bool done = drift == 0.0;
        if (!done && prev_drift > 0.0) {
          drift_window[window_fill % 6] = drift / prev_drift;
          ++window_fill;
          if (window_fill >= 6) {
            double q_max = 0.0;
            for (double q : drift_window) q_max = std::max(q_max, q);
            if (q_max <= 0.99 && drift * q_max / (1.0 - q_max) <= rel_tol * scale)
              done = true;
          }
        }
        // Rounding jitter at the noise floor never satisfies the tail bound.
        noise_floor_hits = drift <= 1e-14 * scale ? noise_floor_hits + 1 : 0;
        if (noise_floor_hits >= 3) done = true;
        if (done) {
          best = std::max(best, std::sqrt(std::max(estimate, 0.0)));
          converged = true;
          break;
        }
        prev_drift = drift;
      }
      lambda = estimate;
      v.swap(gv);
    }
    if (!converged && !null_start) capped = true;
  }
  if (capped) {
    if (fallback == NormFallback::Report)
      throw std::runtime_error("mixing_rate: power iteration did not converge");
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  }
  return best;
}

/// Row/column sums must be 1 within tol and the zero pattern must respect the
/// graph when one is given.
inline void validate_mixing_matrix(const Eigen::MatrixXd& W,
                                   const Graph* graph = nullptr,
                                   double tol = 1e-12) {
  const auto n = W.rows();
  if (n < 1 || W.cols() != n)
    throw std::invalid_argument("mixing matrix must be square");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  if (((W * ones).array() - 1.0).abs().maxCoeff() > tol)
    throw std::invalid_argument("mixing matrix: row sums differ from 1");
  if (((W.transpose() * ones).array() - 1.0).abs().maxCoeff() > tol)
    throw std::invalid_argument("mixing matrix: column sums differ from 1");
  if (graph != nullptr) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && W(i, j) != 0.0 && !graph->has_edge(i, j))
          throw std::invalid_argument("mixing matrix: nonzero off the graph");
  }
}

/// Metropolis-Hastings weights: w_ij = 1/(1 + max(deg_i, deg_j)) on edges,
/// diagonal absorbs the remainder. Symmetric, unit row/column sums. Requires
/// a connected graph (otherwise alpha = 1 and the matrix is useless for
/// consensus).
inline MixingMatrix metropolis_weights(const Graph& g) {
  if (!g.connected())
    throw std::invalid_argument("metropolis_weights: graph is disconnected");
  const auto deg = g.degrees();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const auto& [i, j] : g.edges) {
    const double w = 1.0 / (1.0 + static_cast<double>(std::max(
                                      deg[static_cast<std::size_t>(i)],
                                      deg[static_cast<std::size_t>(j)])));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < g.n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  MixingMatrix m;
  m.W = std::move(W);
  m.alpha = mixing_rate(m.W);
  return m;
}

/// W_hat = I + gamma*(W - I). The recomputed mixing rate is checked against
/// the bound alpha_hat <= 1 + gamma*(alpha - 1) + 1e-9, which holds for
/// symmetric mixing matrices.
inline MixingMatrix regularize(const MixingMatrix& m, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("regularize: gamma must be in (0, 1]");
  const auto n = m.W.rows();
  MixingMatrix out;
  out.W = Eigen::MatrixXd::Identity(n, n) + gamma * (m.W - Eigen::MatrixXd::Identity(n, n));
  out.alpha = mixing_rate(out.W);
  out.gamma = gamma;
  const double bound = 1.0 + gamma * (m.alpha - 1.0);
  if (out.alpha > bound + 1e-9)
    throw std::runtime_error("regularize: mixing rate exceeds 1 + gamma*(alpha - 1)");
  return out;
}

}  // namespace porter
