#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/rng.hpp"

namespace porter {

enum class CompressorKind { TopK, RandomKBernoulli, RandomKSubset, Identity };

/// Contractive sparsifier with nominal ratio rho = k/d. The random variants
/// satisfy E||C(x) - x||^2 = (1 - k/d)||x||^2 exactly; top-k satisfies the
/// bound deterministically per call.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::Identity;
  int k = 0;  // retained coordinates; ignored for identity

  double rho(int d) const {
    if (kind == CompressorKind::Identity) return 1.0;
    return static_cast<double>(k) / static_cast<double>(d);
  }

  void validate(int d) const {
    if (kind == CompressorKind::Identity) return;
    if (k < 1 || k > d)
      throw std::invalid_argument("compressor: k must be in [1, d]");
  }

  std::string to_string() const {
    switch (kind) {
      case CompressorKind::TopK: return "top_k:" + std::to_string(k);
      case CompressorKind::RandomKBernoulli:
        return "random_k_bernoulli:" + std::to_string(k);
      case CompressorKind::RandomKSubset: return "random_k:" + std::to_string(k);
      case CompressorKind::Identity: return "identity";
    }
    return "identity";
  }
};

/// Accepts "identity", "top_k:K", "random_k:K" (fixed-size subset, the
/// experiment default), "random_k_subset:K", "random_k_bernoulli:K".
inline CompressorSpec parse_compressor(const std::string& text) {
  CompressorSpec spec;
  if (text == "identity") {
    spec.kind = CompressorKind::Identity;
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("compressor spec needs 'kind:k': " + text);
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(arg, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("compressor spec: bad k in '" + text + "'");
  }
  if (used != arg.size() || k < 1)
    throw std::invalid_argument("compressor spec: bad k in '" + text + "'");
  spec.k = k;
  if (kind == "top_k") spec.kind = CompressorKind::TopK;
  else if (kind == "random_k" || kind == "random_k_subset")
    spec.kind = CompressorKind::RandomKSubset;
  else if (kind == "random_k_bernoulli") spec.kind = CompressorKind::RandomKBernoulli;
  else throw std::invalid_argument("unknown compressor kind: " + kind);
  return spec;
}

/// Keep the k entries of largest absolute value, zero the rest. Ties break
/// toward the lower index so the operator is deterministic.
inline Eigen::VectorXd top_k(const Eigen::VectorXd& x, int k) {
  const int d = static_cast<int>(x.size());
  if (k < 1 || k > d) throw std::invalid_argument("top_k: k must be in [1, d]");
  if (k == d) return x;
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [&x](int a, int b) {
                     const double fa = std::abs(x(a));
                     const double fb = std::abs(x(b));
                     if (fa != fb) return fa > fb;
                     return a < b;
                   });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < k; ++i) out(order[static_cast<std::size_t>(i)]) = x(order[static_cast<std::size_t>(i)]);
  return out;
}

/// Bernoulli mask: coordinate i kept independently with probability k/d, no
/// rescaling.
inline Eigen::VectorXd random_k_bernoulli(const Eigen::VectorXd& x, int k,
                                          rng::Stream& stream) {
  const int d = static_cast<int>(x.size());
  if (k < 1 || k > d)
    throw std::invalid_argument("random_k_bernoulli: k must be in [1, d]");
  const double p = static_cast<double>(k) / static_cast<double>(d);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i)
    if (stream.uniform01() < p) out(i) = x(i);
  return out;
}

/// Uniformly random size-k subset of coordinates kept, no rescaling.
inline Eigen::VectorXd random_k_subset(const Eigen::VectorXd& x, int k,
                                       rng::Stream& stream) {
  const int d = static_cast<int>(x.size());
  if (k < 1 || k > d)
    throw std::invalid_argument("random_k_subset: k must be in [1, d]");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (std::size_t i : stream.sample_without_replacement(
           static_cast<std::size_t>(d), static_cast<std::size_t>(k)))
    out(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i));
  return out;
}

inline Eigen::VectorXd compress_vector(const Eigen::VectorXd& x,
                                       const CompressorSpec& spec,
                                       rng::Stream& stream) {
  switch (spec.kind) {
    case CompressorKind::TopK: return top_k(x, spec.k);
    case CompressorKind::RandomKBernoulli:
      return random_k_bernoulli(x, spec.k, stream);
    case CompressorKind::RandomKSubset: return random_k_subset(x, spec.k, stream);
    case CompressorKind::Identity: return x;
  }
  return x;
}

inline int ceil_log2(int d) {
  int bits = 0;
  int v = 1;
  while (v < d) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

/// Reporting cost of one compressed message. Sparsifiers send k values plus
/// k indices; identity sends all d values and no indices. Bernoulli masks are
/// charged their nominal k (the mean nonzero count).
inline std::uint64_t per_message_bits(const CompressorSpec& spec, int d,
                                      int value_bits = 64) {
  if (spec.kind == CompressorKind::Identity)
    return static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(value_bits);
  return static_cast<std::uint64_t>(spec.k) *
         static_cast<std::uint64_t>(value_bits + ceil_log2(d));
}

/// Apply the operator column-by-column with one stream per agent, keyed by
/// (master_seed, purpose, agent, iteration). Column order never affects the
/// result.
inline Eigen::MatrixXd compress_matrix(const Eigen::MatrixXd& M,
                                       const CompressorSpec& spec,
                                       std::uint64_t master_seed,
                                       rng::Purpose purpose,
                                       std::uint64_t iteration) {
  spec.validate(static_cast<int>(M.rows()));
  if (spec.kind == CompressorKind::Identity) return M;
  Eigen::MatrixXd out(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.cols(); ++i) {
    auto stream = rng::make_stream(master_seed, purpose,
                                   static_cast<std::uint64_t>(i), iteration);
    out.col(i) = compress_vector(M.col(i), spec, stream);
  }
  return out;
}

}  // namespace porter
