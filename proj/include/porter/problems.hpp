#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "porter/data.hpp"
#include "porter/rng.hpp"

namespace porter {

/// Finite-sum objective: per-sample loss/gradient oracles over a Dataset row.
/// Implementations are immutable after construction; evaluation is pure.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual int dim() const = 0;

  virtual double sample_loss(const Eigen::VectorXd& x,
                             const Eigen::RowVectorXd& features,
                             int label) const = 0;

  virtual void sample_grad(const Eigen::VectorXd& x,
                           const Eigen::RowVectorXd& features, int label,
                           Eigen::VectorXd& grad) const = 0;

  /// Predicted class for accuracy reporting.
  virtual int predict(const Eigen::VectorXd& x,
                      const Eigen::RowVectorXd& features) const = 0;

  /// Starting point used when a run does not supply one.
  virtual Eigen::VectorXd default_init(rng::Stream& stream) const {
    (void)stream;
    return Eigen::VectorXd::Zero(dim());
  }

  virtual double dataset_loss(const Eigen::VectorXd& x, const Dataset& ds) const {
    double total = 0.0;
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
      total += sample_loss(x, ds.features.row(r), ds.labels[static_cast<std::size_t>(r)]);
    return total / static_cast<double>(ds.size());
  }

  virtual void dataset_grad(const Eigen::VectorXd& x, const Dataset& ds,
                            Eigen::VectorXd& grad) const {
    grad.setZero(dim());
    Eigen::VectorXd g(dim());
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
      sample_grad(x, ds.features.row(r), ds.labels[static_cast<std::size_t>(r)], g);
      grad += g;
    }
    grad /= static_cast<double>(ds.size());
  }

  double accuracy(const Eigen::VectorXd& x, const Dataset& ds) const {
    std::int64_t correct = 0;
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
      if (predict(x, ds.features.row(r)) == ds.labels[static_cast<std::size_t>(r)])
        ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.size());
  }
};

namespace detail {
// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}
// 1/(1 + exp(-z)).
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}  // namespace detail

/// Binary logistic loss with a nonconvex regularizer:
///   l(x; (f, y)) = log(1 + exp(-y * x^T f)) + lambda * sum_i x_i^2/(1 + x_i^2)
/// with y = 2*label - 1. Labels must be in {0, 1}.
class LogregNonconvex final : public Problem {
 public:
  LogregNonconvex(int dim, double lambda) : dim_(dim), lambda_(lambda) {
    if (dim < 1) throw std::invalid_argument("logreg: dim must be >= 1");
    if (lambda < 0.0) throw std::invalid_argument("logreg: lambda must be >= 0");
  }

  int dim() const override { return dim_; }
  double lambda() const { return lambda_; }

  double sample_loss(const Eigen::VectorXd& x, const Eigen::RowVectorXd& f,
                     int label) const override {
    const double y = label == 1 ? 1.0 : -1.0;
    const double margin = y * f.dot(x.transpose());
    double reg = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double s = x(i) * x(i);
      reg += s / (1.0 + s);
    }
    return detail::softplus(-margin) + lambda_ * reg;
  }

  void sample_grad(const Eigen::VectorXd& x, const Eigen::RowVectorXd& f,
                   int label, Eigen::VectorXd& grad) const override {
    const double y = label == 1 ? 1.0 : -1.0;
    const double margin = y * f.dot(x.transpose());
    const double weight = -y * detail::sigmoid(-margin);
    grad = weight * f.transpose();
    for (int i = 0; i < dim_; ++i) {
      const double denom = 1.0 + x(i) * x(i);
      grad(i) += lambda_ * 2.0 * x(i) / (denom * denom);
    }
  }

  int predict(const Eigen::VectorXd& x,
              const Eigen::RowVectorXd& f) const override {
    return f.dot(x.transpose()) >= 0.0 ? 1 : 0;
  }

  // Whole-dataset paths use one GEMV over the feature matrix instead of a
  // per-sample loop; metrics evaluate these on every stride.
  double dataset_loss(const Eigen::VectorXd& x, const Dataset& ds) const override {
    const Eigen::VectorXd margins = ds.features * x;
    double total = 0.0;
    for (Eigen::Index r = 0; r < margins.size(); ++r) {
      const double y = ds.labels[static_cast<std::size_t>(r)] == 1 ? 1.0 : -1.0;
      total += detail::softplus(-y * margins(r));
    }
    double reg = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double s = x(i) * x(i);
      reg += s / (1.0 + s);
    }
    return total / static_cast<double>(ds.size()) + lambda_ * reg;
  }

  void dataset_grad(const Eigen::VectorXd& x, const Dataset& ds,
                    Eigen::VectorXd& grad) const override {
    const Eigen::VectorXd margins = ds.features * x;
    Eigen::VectorXd weights(margins.size());
    for (Eigen::Index r = 0; r < margins.size(); ++r) {
      const double y = ds.labels[static_cast<std::size_t>(r)] == 1 ? 1.0 : -1.0;
      weights(r) = -y * detail::sigmoid(-y * margins(r));
    }
    grad = ds.features.transpose() * weights / static_cast<double>(ds.size());
    for (int i = 0; i < dim_; ++i) {
      const double denom = 1.0 + x(i) * x(i);
      grad(i) += lambda_ * 2.0 * x(i) / (denom * denom);
    }
  }

 private:
  int dim_;
  double lambda_;
};

inline std::unique_ptr<LogregNonconvex> logreg_nonconvex(int dim, double lambda) {
  return std::make_unique<LogregNonconvex>(dim, lambda);
}

/// One-hidden-layer network: softmax(W2 * sigmoid(W1 f + c1) + c2) under
/// cross-entropy. Parameters are packed as vec(W1, c1, W2, c2) with W1, W2
/// stored column-major. Gradients come from manual backpropagation; the loss
/// uses a log-sum-exp softmax.
class OneHiddenNn final : public Problem {
 public:
  OneHiddenNn(int input, int hidden, int classes)
      : input_(input), hidden_(hidden), classes_(classes) {
    if (input < 1 || hidden < 1 || classes < 2)
      throw std::invalid_argument("nn: bad layer sizes");
  }

  int dim() const override {
    return hidden_ * input_ + hidden_ + classes_ * hidden_ + classes_;
  }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }

  double sample_loss(const Eigen::VectorXd& x, const Eigen::RowVectorXd& f,
                     int label) const override {
    check(x, label);
    const Views v = views(x);
    const Eigen::VectorXd z2 = logits(v, f);
    const double lse = log_sum_exp(z2);
    return lse - z2(label);
  }

  void sample_grad(const Eigen::VectorXd& x, const Eigen::RowVectorXd& f,
                   int label, Eigen::VectorXd& grad) const override {
    check(x, label);
    const Views v = views(x);
    const Eigen::VectorXd z1 = v.W1 * f.transpose() + v.c1;
    const Eigen::VectorXd a = z1.unaryExpr([](double z) { return detail::sigmoid(z); });
    const Eigen::VectorXd z2 = v.W2 * a + v.c2;

    const double lse = log_sum_exp(z2);
    Eigen::VectorXd dz2 = (z2.array() - lse).exp();  // softmax probabilities
    dz2(label) -= 1.0;

    const Eigen::VectorXd da = v.W2.transpose() * dz2;
    const Eigen::VectorXd dz1 =
        da.array() * a.array() * (1.0 - a.array());

    grad.resize(dim());
    auto g = mutable_views(grad);
    g.W1 = dz1 * f;
    g.c1 = dz1;
    g.W2 = dz2 * a.transpose();
    g.c2 = dz2;
  }

  int predict(const Eigen::VectorXd& x,
              const Eigen::RowVectorXd& f) const override {
    const Views v = views(x);
    Eigen::Index best = 0;
    logits(v, f).maxCoeff(&best);
    return static_cast<int>(best);
  }

  /// Layer-scaled Gaussian init: weights and biases drawn with standard
  /// deviation 1/sqrt(fan_in) per layer.
  Eigen::VectorXd default_init(rng::Stream& stream) const override {
    Eigen::VectorXd x(dim());
    auto v = mutable_views(x);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (int c = 0; c < input_; ++c)
      for (int r = 0; r < hidden_; ++r) v.W1(r, c) = s1 * stream.normal();
    for (int r = 0; r < hidden_; ++r) v.c1(r) = s1 * stream.normal();
    for (int c = 0; c < hidden_; ++c)
      for (int r = 0; r < classes_; ++r) v.W2(r, c) = s2 * stream.normal();
    for (int r = 0; r < classes_; ++r) v.c2(r) = s2 * stream.normal();
    return x;
  }

 private:
  struct Views {
    Eigen::Map<const Eigen::MatrixXd> W1, W2;
    Eigen::Map<const Eigen::VectorXd> c1, c2;
  };
  struct MutableViews {
    Eigen::Map<Eigen::MatrixXd> W1, W2;
    Eigen::Map<Eigen::VectorXd> c1, c2;
  };

  Views views(const Eigen::VectorXd& x) const {
    const double* p = x.data();
    return Views{
        {p, hidden_, input_},
        {p + hidden_ * input_ + hidden_, classes_, hidden_},
        {p + hidden_ * input_, hidden_},
        {p + hidden_ * input_ + hidden_ + classes_ * hidden_, classes_}};
  }
  MutableViews mutable_views(Eigen::VectorXd& x) const {
    double* p = x.data();
    return MutableViews{
        {p, hidden_, input_},
        {p + hidden_ * input_ + hidden_, classes_, hidden_},
        {p + hidden_ * input_, hidden_},
        {p + hidden_ * input_ + hidden_ + classes_ * hidden_, classes_}};
  }

  Eigen::VectorXd logits(const Views& v, const Eigen::RowVectorXd& f) const {
    const Eigen::VectorXd z1 = v.W1 * f.transpose() + v.c1;
    const Eigen::VectorXd a =
        z1.unaryExpr([](double z) { return detail::sigmoid(z); });
    return v.W2 * a + v.c2;
  }

  static double log_sum_exp(const Eigen::VectorXd& z) {
    const double zmax = z.maxCoeff();
    return zmax + std::log((z.array() - zmax).exp().sum());
  }

  void check(const Eigen::VectorXd& x, int label) const {
    if (x.size() != dim())
      throw std::invalid_argument("nn: parameter vector length mismatch");
    if (label < 0 || label >= classes_)
      throw std::invalid_argument("nn: label out of class range");
  }

  int input_, hidden_, classes_;
};

inline std::unique_ptr<OneHiddenNn> one_hidden_nn(int input, int hidden,
                                                  int classes) {
  return std::make_unique<OneHiddenNn>(input, hidden, classes);
}

/// Deterministic test problem: standard-normal features, labels from a
/// planted direction with zero noise margin (label = 1 iff x_star^T f >= 0).
/// The planted vector has norm 3 so the classes are well separated.
inline Dataset synthetic_dataset(int d, std::int64_t m_total, std::uint64_t seed,
                                 Eigen::VectorXd* planted_out = nullptr) {
  if (d < 1 || m_total < 1)
    throw std::invalid_argument("synthetic_dataset: d, m_total must be >= 1");
  auto stream = rng::make_stream(seed, rng::Purpose::DataGen);
  Eigen::VectorXd planted(d);
  for (int i = 0; i < d; ++i) planted(i) = stream.normal();
  planted *= 3.0 / planted.norm();
  if (planted_out != nullptr) *planted_out = planted;

  Dataset ds;
  ds.name = "synthetic(d=" + std::to_string(d) + ",m=" + std::to_string(m_total) +
            ",seed=" + std::to_string(seed) + ")";
  ds.features.resize(static_cast<Eigen::Index>(m_total), d);
  ds.labels.resize(static_cast<std::size_t>(m_total));
  for (std::int64_t r = 0; r < m_total; ++r) {
    for (int c = 0; c < d; ++c) ds.features(r, c) = stream.normal();
    ds.labels[static_cast<std::size_t>(r)] =
        ds.features.row(r).dot(planted.transpose()) >= 0.0 ? 1 : 0;
  }
  return ds;
}

inline std::pair<std::unique_ptr<LogregNonconvex>, Dataset> synthetic_problem(
    int d, std::int64_t m_total, std::uint64_t seed, double lambda = 0.2) {
  return {logreg_nonconvex(d, lambda), synthetic_dataset(d, m_total, seed)};
}

/// Smoothness estimate for the logistic objective: largest eigenvalue of the
/// data Gram matrix F^T F / m (by power iteration) divided by 4, plus the
/// regularizer's curvature bound 2*lambda.
inline double estimate_logreg_smoothness(const Dataset& ds, double lambda,
                                         int iters = 200) {
  const double m = static_cast<double>(ds.size());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(ds.dim());
  v(0) += 1e-3;
  v.normalize();
  double eig = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = ds.features.transpose() * (ds.features * v) / m;
    const double norm = w.norm();
    if (norm <= 1e-300) break;
    eig = v.dot(w);
    v = w / norm;
  }
  return eig / 4.0 + 2.0 * lambda;
}

}  // namespace porter
