#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/clip.hpp"
#include "porter/compress.hpp"
#include "porter/mixing.hpp"
#include "porter/privacy.hpp"
#include "porter/problems.hpp"
#include "porter/rng.hpp"

namespace porter {

struct HyperParams {
  double eta = 0.0;     // gradient stepsize
  double gamma = 1.0;   // consensus stepsize
  double tau = 0.0;     // clip threshold; unused when the clip mode is none
  int b = 1;            // mini-batch size
  std::int64_t T = 0;   // iterations
  double sigma_p = 0.0; // perturbation noise

  void validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("hyperparams: eta must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw std::invalid_argument("hyperparams: gamma must be in (0, 1]");
    if (b < 1) throw std::invalid_argument("hyperparams: b must be >= 1");
    if (T < 0) throw std::invalid_argument("hyperparams: T must be >= 0");
    if (sigma_p < 0.0)
      throw std::invalid_argument("hyperparams: sigma_p must be >= 0");
  }
};

/// All per-agent state of one run, columns indexed by agent. At t = 0 the
/// gradient-side matrices are zero and Q_x = X = x0 * 1^T.
struct PorterState {
  Eigen::MatrixXd X;        // iterates
  Eigen::MatrixXd V;        // gradient trackers
  Eigen::MatrixXd Q_x;      // compressed surrogate of X
  Eigen::MatrixXd Q_v;      // compressed surrogate of V
  Eigen::MatrixXd G_p_prev; // injected gradients of the previous iteration
  std::int64_t t = 0;
  std::uint64_t bits_communicated = 0;

  int dim() const { return static_cast<int>(X.rows()); }
  int agents() const { return static_cast<int>(X.cols()); }
};

inline PorterState init_state(const Eigen::VectorXd& x0, int n) {
  if (n < 1) throw std::invalid_argument("init_state: need n >= 1");
  PorterState s;
  s.X = x0 * Eigen::RowVectorXd::Ones(n);
  s.Q_x = s.X;
  s.V = Eigen::MatrixXd::Zero(x0.size(), n);
  s.Q_v = s.V;
  s.G_p_prev = s.V;
  return s;
}

struct NumericalError : std::runtime_error {
  std::int64_t iteration;
  explicit NumericalError(std::int64_t t)
      : std::runtime_error("non-finite iterate at iteration " + std::to_string(t)),
        iteration(t) {}
};

namespace detail {

inline Eigen::VectorXd minibatch_indices_grad(
    const Problem& problem, const Dataset& data, const Eigen::VectorXd& x,
    const std::vector<std::size_t>& idx, const ClipMode& per_sample_clip) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(problem.dim());
  Eigen::VectorXd g(problem.dim());
  for (std::size_t r : idx) {
    problem.sample_grad(x, data.features.row(static_cast<Eigen::Index>(r)),
                        data.labels[r], g);
    if (per_sample_clip.kind != ClipKind::None) g = apply_clip(g, per_sample_clip);
    sum += g;
  }
  return sum / static_cast<double>(idx.size());
}

inline std::vector<std::size_t> draw_batch(const Dataset& data, int b,
                                           std::uint64_t master_seed,
                                           std::uint64_t agent,
                                           std::uint64_t iteration) {
  if (b > data.size())
    throw std::invalid_argument("batch size exceeds local sample count");
  auto stream = rng::make_stream(master_seed, rng::Purpose::Batch, agent, iteration);
  return stream.sample_without_replacement(static_cast<std::size_t>(data.size()),
                                           static_cast<std::size_t>(b));
}

}  // namespace detail

/// Option I (PORTER-DP): per-sample clipping at tau, mini-batch average, then
/// N(0, sigma_p^2 I) noise per agent. Clipping is mandatory here; it is what
/// bounds the sensitivity of each column.
inline Eigen::MatrixXd local_gradients_dp(const PorterState& state,
                                          const Problem& problem,
                                          const std::vector<Dataset>& agent_data,
                                          const ClipMode& clip, double sigma_p,
                                          int b, std::uint64_t master_seed,
                                          std::int64_t iteration) {
  if (clip.kind == ClipKind::None)
    throw std::invalid_argument("Option I requires a clipping operator");
  const int n = state.agents();
  Eigen::MatrixXd G(state.dim(), n);
  for (int i = 0; i < n; ++i) {
    const auto idx = detail::draw_batch(agent_data[static_cast<std::size_t>(i)], b,
                                        master_seed, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(iteration));
    G.col(i) = detail::minibatch_indices_grad(
        problem, agent_data[static_cast<std::size_t>(i)], state.X.col(i), idx, clip);
  }
  return gaussian_perturb(G, sigma_p, master_seed,
                          static_cast<std::uint64_t>(iteration));
}

/// Option II (PORTER-GC): mini-batch average, then one clip of the averaged
/// vector. Clip mode none gives the unclipped BEER-style gradient.
inline Eigen::MatrixXd local_gradients_gc(const PorterState& state,
                                          const Problem& problem,
                                          const std::vector<Dataset>& agent_data,
                                          const ClipMode& clip, int b,
                                          std::uint64_t master_seed,
                                          std::int64_t iteration) {
  const int n = state.agents();
  Eigen::MatrixXd G(state.dim(), n);
  for (int i = 0; i < n; ++i) {
    const auto idx = detail::draw_batch(agent_data[static_cast<std::size_t>(i)], b,
                                        master_seed, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(iteration));
    Eigen::VectorXd g = detail::minibatch_indices_grad(
        problem, agent_data[static_cast<std::size_t>(i)], state.X.col(i), idx,
        ClipMode::none());
    G.col(i) = clip.kind == ClipKind::None ? g : apply_clip(g, clip);
  }
  return G;
}

/// One iteration of the update recursion, in this exact order:
///   Q_v <- Q_v + C(V - Q_v)
///   V   <- V + gamma * Q_v (W - I) + G_p - G_p_prev   (fresh Q_v)
///   Q_x <- Q_x + C(X - Q_x)
///   X   <- X + gamma * Q_x (W - I) - eta * V          (fresh Q_x, fresh V)
/// The compression steps read the matrices from before this iteration's
/// updates. With the identity compressor the surrogates are assigned
/// directly so Q_v == V^(t-1) and Q_x == X^(t-1) hold exactly.
///
/// The V update evaluates (V - G_p_prev) first: when V == G_p_prev bitwise
/// (a single node, or the first iteration) the subtraction cancels exactly
/// and V^(t) == G_p^(t), which is what makes the n = 1 path reproduce plain
/// SGD iterates without rounding residue.
inline void step(PorterState& state, const Eigen::MatrixXd& G_p,
                 const MixingMatrix& mix, const HyperParams& hp,
                 const CompressorSpec& spec, std::uint64_t master_seed) {
  const int n = state.agents();
  if (G_p.rows() != state.X.rows() || G_p.cols() != n)
    throw std::invalid_argument("step: G_p dimensions mismatch");
  if (mix.W.rows() != n)
    throw std::invalid_argument("step: mixing matrix size mismatch");
  const std::uint64_t t = static_cast<std::uint64_t>(state.t) + 1;
  const Eigen::MatrixXd Wm = mix.W - Eigen::MatrixXd::Identity(n, n);

  if (spec.kind == CompressorKind::Identity) {
    state.Q_v = state.V;
  } else {
    state.Q_v += compress_matrix(state.V - state.Q_v, spec, master_seed,
                                 rng::Purpose::CompressV, t);
  }
  const Eigen::MatrixXd mix_v = state.Q_v * Wm;
  state.V = (state.V - state.G_p_prev) + hp.gamma * mix_v + G_p;

  if (spec.kind == CompressorKind::Identity) {
    state.Q_x = state.X;
  } else {
    state.Q_x += compress_matrix(state.X - state.Q_x, spec, master_seed,
                                 rng::Purpose::CompressX, t);
  }
  const Eigen::MatrixXd mix_x = state.Q_x * Wm;
  state.X = state.X + hp.gamma * mix_x - hp.eta * state.V;

  state.G_p_prev = G_p;
  state.t = static_cast<std::int64_t>(t);
  state.bits_communicated +=
      2 * static_cast<std::uint64_t>(n) * per_message_bits(spec, state.dim());
}

}  // namespace porter
