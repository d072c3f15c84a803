#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace porter {

enum class ClipKind { Smooth, Piecewise, None };

/// Clipping operator selector. tau is required for smooth/piecewise; None
/// passes gradients through untouched (the BEER-style baseline).
struct ClipMode {
  ClipKind kind = ClipKind::None;
  double tau = 0.0;

  static ClipMode none() { return {ClipKind::None, 0.0}; }
  static ClipMode smooth(double tau) { return validated({ClipKind::Smooth, tau}); }
  static ClipMode piecewise(double tau) {
    return validated({ClipKind::Piecewise, tau});
  }

  static ClipMode validated(ClipMode m) {
    if (m.kind != ClipKind::None && !(m.tau > 0.0))
      throw std::invalid_argument("clip: tau must be positive");
    return m;
  }

  std::string kind_name() const {
    switch (kind) {
      case ClipKind::Smooth: return "smooth";
      case ClipKind::Piecewise: return "piecewise";
      case ClipKind::None: return "none";
    }
    return "none";
  }
};

inline ClipKind parse_clip_kind(const std::string& name) {
  if (name == "smooth") return ClipKind::Smooth;
  if (name == "piecewise") return ClipKind::Piecewise;
  if (name == "none") return ClipKind::None;
  throw std::invalid_argument("unknown clip kind: " + name);
}

/// Smooth clipping: x * tau/(tau + ||x||). The output norm is
/// tau*||x||/(tau + ||x||), strictly below tau; zero maps to zero.
inline Eigen::VectorXd smooth_clip(const Eigen::VectorXd& x, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("smooth_clip: tau must be positive");
  return x * (tau / (tau + x.norm()));
}

/// Piece-wise linear clipping: identity inside the tau-ball (boundary
/// inclusive), rescaled to norm exactly tau outside.
inline Eigen::VectorXd piecewise_clip(const Eigen::VectorXd& x, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("piecewise_clip: tau must be positive");
  const double norm = x.norm();
  if (norm <= tau) return x;
  return x * (tau / norm);
}

inline Eigen::VectorXd apply_clip(const Eigen::VectorXd& x, const ClipMode& mode) {
  switch (mode.kind) {
    case ClipKind::Smooth: return smooth_clip(x, mode.tau);
    case ClipKind::Piecewise: return piecewise_clip(x, mode.tau);
    case ClipKind::None: return x;
  }
  return x;
}

/// Column-wise clipping of an agent matrix.
inline Eigen::MatrixXd apply_clip_columns(const Eigen::MatrixXd& M,
                                          const ClipMode& mode) {
  if (mode.kind == ClipKind::None) return M;
  Eigen::MatrixXd out(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.cols(); ++i)
    out.col(i) = apply_clip(M.col(i), mode);
  return out;
}

}  // namespace porter
