// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion pins its tolerances in code.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "porter/porter.hpp"

using namespace porter;

namespace {

struct Criterion {
  int failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      notes.push_back(what);
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::VectorXd gaussian_vector(int d, rng::Stream& stream) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = stream.normal();
  return x;
}

// ---------------------------------------------------------------------------
// 1. Operator contracts: compression Definition-3 Monte Carlo suite and the
//    clipping property battery.
void criterion_1(Criterion& c) {
  const int d = 32;
  const int trials = 10000;

  // top_k: the bound holds deterministically per call.
  {
    auto gen = rng::make_stream(101, rng::Purpose::Generic);
    for (int t = 0; t < trials; ++t) {
      const Eigen::VectorXd x = gaussian_vector(d, gen);
      const int k = 1 + static_cast<int>(gen.below(d));
      const double rho = static_cast<double>(k) / d;
      const double err = (top_k(x, k) - x).squaredNorm();
      if (err > (1.0 - rho) * x.squaredNorm() + 1e-12) {
        c.expect(false, "top_k bound violated");
        return;
      }
    }
  }

  // random_k (both variants): empirical mean within 3 standard errors.
  for (auto kind : {CompressorKind::RandomKBernoulli, CompressorKind::RandomKSubset}) {
    const int k = 8;
    const double rho = static_cast<double>(k) / d;
    const CompressorSpec spec{kind, k};
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto gen = rng::make_stream(103, rng::Purpose::Generic, 1,
                                  static_cast<std::uint64_t>(t));
      const Eigen::VectorXd x = gaussian_vector(d, gen);
      auto stream = rng::make_stream(105, rng::Purpose::Generic, 2,
                                     static_cast<std::uint64_t>(t));
      const double ratio =
          (compress_vector(x, spec, stream) - x).squaredNorm() / x.squaredNorm();
      sum += ratio;
      sum_sq += ratio * ratio;
    }
    const double mean = sum / trials;
    const double se =
        std::sqrt((sum_sq / trials - mean * mean) / static_cast<double>(trials));
    c.expect(mean <= (1.0 - rho) + 3.0 * se,
             spec.to_string() + " contract mean " + std::to_string(mean));
  }

  // Clipping properties on 1000 random vectors.
  auto gen = rng::make_stream(107, rng::Purpose::Generic);
  const double tau = 1.3;
  for (int t = 0; t < 1000; ++t) {
    Eigen::VectorXd x = 4.0 * gaussian_vector(8, gen);
    if (x.norm() == 0.0) continue;
    const Eigen::VectorXd s = smooth_clip(x, tau);
    const Eigen::VectorXd p = piecewise_clip(x, tau);
    bool ok = s.norm() < tau && p.norm() <= tau * (1.0 + 1e-15);
    ok = ok && s.norm() <= x.norm() && p.norm() <= x.norm() * (1.0 + 1e-15);
    // Direction: output is a nonnegative multiple of the input.
    ok = ok && s.dot(x) >= 0.0 &&
         std::abs(s.dot(x) - s.norm() * x.norm()) <= 1e-9 * x.squaredNorm() &&
         std::abs(p.dot(x) - p.norm() * x.norm()) <= 1e-9 * x.squaredNorm();
    // Monotonicity in the input norm.
    ok = ok && smooth_clip(1.5 * x, tau).norm() > s.norm() &&
         piecewise_clip(1.5 * x, tau).norm() >= p.norm() * (1.0 - 1e-12);
    if (!ok) {
      c.expect(false, "clip property violated at trial " + std::to_string(t));
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// 2. Mixing suite: Definition-1 sums at 1e-12, power iteration vs dense SVD
//    at 1e-8 for n <= 12, regularized-rate bound on 100 random pairs.
void criterion_2(Criterion& c) {
  auto svd_rate = [](const Eigen::MatrixXd& W) {
    const auto n = W.rows();
    const Eigen::MatrixXd A =
        W - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  };

  std::vector<MixingMatrix> generated;
  for (int n = 2; n <= 12; ++n) {
    for (auto kind : {NamedTopology::Ring, NamedTopology::Complete,
                      NamedTopology::Path, NamedTopology::Star})
      generated.push_back(metropolis_weights(build_named_graph(kind, n)));
    if (n >= 4)
      generated.push_back(metropolis_weights(
          build_er_graph_connected(n, 0.6, static_cast<std::uint64_t>(200 + n))));
  }
  for (const auto& m : generated) {
    const auto n = m.W.rows();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    c.expect(((m.W * ones).array() - 1.0).abs().maxCoeff() <= 1e-12,
             "row sums off at n=" + std::to_string(n));
    c.expect(((m.W.transpose() * ones).array() - 1.0).abs().maxCoeff() <= 1e-12,
             "column sums off at n=" + std::to_string(n));
    c.expect(std::abs(m.alpha - svd_rate(m.W)) <= 1e-8,
             "mixing rate disagrees with SVD at n=" + std::to_string(n));
  }

  auto stream = rng::make_stream(301, rng::Purpose::Generic);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(stream.below(8));
    const double p = 0.3 + 0.6 * stream.uniform01();
    const MixingMatrix m = metropolis_weights(
        build_er_graph_connected(n, p, static_cast<std::uint64_t>(400 + trial)));
    double gamma = stream.uniform01();
    if (gamma <= 0.0) gamma = 0.5;
    const MixingMatrix r = regularize(m, gamma);
    c.expect(r.alpha <= 1.0 + gamma * (m.alpha - 1.0) + 1e-9,
             "regularized rate bound violated at trial " + std::to_string(trial));
    if (c.failures > 0) return;
  }
}

// ---------------------------------------------------------------------------
// 3. Tracking invariants across compressors x topologies x options x sizes.
void criterion_3(Criterion& c) {
  const int d = 20;
  const std::int64_t T = 200;

  for (int n : {5, 10}) {
    const Dataset full = synthetic_dataset(d, 50 * n, 900 + n);
    const auto data = partition(full, n, 17);
    const auto problem = logreg_nonconvex(d, 0.2);

    std::vector<std::pair<std::string, Graph>> graphs;
    graphs.emplace_back("ring", build_named_graph(NamedTopology::Ring, n));
    graphs.emplace_back("er", build_er_graph_connected(n, 0.8, 77));
    graphs.emplace_back("complete", build_named_graph(NamedTopology::Complete, n));

    const int k = d / 20;  // 5%
    std::vector<std::pair<std::string, CompressorSpec>> specs;
    specs.emplace_back("top_k", CompressorSpec{CompressorKind::TopK, k});
    specs.emplace_back("random_k", CompressorSpec{CompressorKind::RandomKSubset, k});
    specs.emplace_back("identity", CompressorSpec{CompressorKind::Identity, 0});

    for (const auto& [gname, graph] : graphs) {
      const MixingMatrix W = metropolis_weights(graph);
      for (const auto& [sname, spec] : specs) {
        for (bool dp : {true, false}) {
          HyperParams hp;
          hp.eta = 0.05;
          hp.gamma = 0.3;
          hp.b = dp ? 1 : 5;
          hp.sigma_p =
              dp ? compute_sigma_p(static_cast<double>(T), 1.0, 50.0, 0.1, 1e-3)
                 : 0.0;
          const ClipMode clip = ClipMode::smooth(1.0);
          const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(n);

          PorterState s = init_state(Eigen::VectorXd::Zero(d), n);
          for (std::int64_t t = 1; t <= T; ++t) {
            const Eigen::MatrixXd G =
                dp ? local_gradients_dp(s, *problem, data, clip, hp.sigma_p,
                                        hp.b, seed, t)
                   : local_gradients_gc(s, *problem, data, clip, hp.b, seed, t);
            const Eigen::VectorXd x_bar_prev = s.X.rowwise().mean();
            step(s, G, W, hp, spec, seed);

            const Eigen::VectorXd v_bar = s.V.rowwise().mean();
            const Eigen::VectorXd g_bar = G.rowwise().mean();
            const double tr_err = (v_bar - g_bar).cwiseAbs().maxCoeff();
            if (tr_err > 1e-9 * std::max(1.0, G.norm())) {
              c.expect(false, "tracking identity broke: n=" + std::to_string(n) +
                                  " " + gname + " " + sname +
                                  (dp ? " dp" : " gc") + " t=" + std::to_string(t));
              return;
            }
            const Eigen::VectorXd x_bar = s.X.rowwise().mean();
            const double mean_err =
                (x_bar - (x_bar_prev - hp.eta * v_bar)).cwiseAbs().maxCoeff();
            if (mean_err > 1e-9 * std::max(1.0, x_bar.cwiseAbs().maxCoeff())) {
              c.expect(false, "mean recursion broke: n=" + std::to_string(n) +
                                  " " + gname + " " + sname +
                                  (dp ? " dp" : " gc") + " t=" + std::to_string(t));
              return;
            }
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 4. Oracle equivalence: identity compressor + gamma = 1 matches a directly
//    coded gradient-tracking loop bit for bit; n = 1 matches plain SGD.
void criterion_4(Criterion& c) {
  const int d = 10, n = 5, b = 10;
  const std::int64_t T = 100;
  const std::uint64_t seed = 2024;
  const auto problem = logreg_nonconvex(d, 0.2);
  const auto data = partition(synthetic_dataset(d, 40 * n, 12), n, 5);
  const MixingMatrix W = metropolis_weights(build_named_graph(NamedTopology::Ring, n));
  const Eigen::MatrixXd Wm = W.W - Eigen::MatrixXd::Identity(n, n);

  HyperParams hp;
  hp.eta = 0.05;
  hp.gamma = 1.0;
  const CompressorSpec identity{CompressorKind::Identity, 0};

  auto shared_batch_grad = [&](const Eigen::MatrixXd& X, std::int64_t t) {
    Eigen::MatrixXd G(d, n);
    for (int i = 0; i < n; ++i) {
      auto stream = rng::make_stream(seed, rng::Purpose::Batch,
                                     static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(t));
      const auto idx = stream.sample_without_replacement(
          static_cast<std::size_t>(data[static_cast<std::size_t>(i)].size()),
          static_cast<std::size_t>(b));
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
      Eigen::VectorXd g(d);
      for (auto r : idx) {
        problem->sample_grad(
            X.col(i),
            data[static_cast<std::size_t>(i)].features.row(
                static_cast<Eigen::Index>(r)),
            data[static_cast<std::size_t>(i)].labels[r], g);
        sum += g;
      }
      G.col(i) = sum / static_cast<double>(b);
    }
    return G;
  };

  PorterState s = init_state(Eigen::VectorXd::Zero(d), n);
  // Reference gradient tracking without the error-feedback machinery:
  // V <- V W + G - G_prev, X <- X W - eta V, written with the same
  // cancellation order the engine uses.
  Eigen::MatrixXd Xr = Eigen::MatrixXd::Zero(d, n);
  Eigen::MatrixXd Vr = Eigen::MatrixXd::Zero(d, n);
  Eigen::MatrixXd Gprev = Eigen::MatrixXd::Zero(d, n);

  for (std::int64_t t = 1; t <= T; ++t) {
    const Eigen::MatrixXd G =
        local_gradients_gc(s, *problem, data, ClipMode::none(), b, seed, t);
    step(s, G, W, hp, identity, seed);

    const Eigen::MatrixXd Gr = shared_batch_grad(Xr, t);
    const Eigen::MatrixXd mixv = Vr * Wm;
    Vr = (Vr - Gprev) + mixv + Gr;
    const Eigen::MatrixXd mixx = Xr * Wm;
    Xr = Xr + mixx - hp.eta * Vr;
    Gprev = Gr;

    if ((s.X - Xr).norm() != 0.0 || (s.V - Vr).norm() != 0.0) {
      c.expect(false, "engine diverged from the reference at t=" + std::to_string(t));
      return;
    }
  }

  // n = 1: plain SGD, exactly.
  const std::vector<Dataset> one{synthetic_dataset(d, 30, 13)};
  MixingMatrix W1;
  W1.W = Eigen::MatrixXd::Ones(1, 1);
  W1.alpha = 0.0;
  PorterState s1 = init_state(Eigen::VectorXd::Zero(d), 1);
  Eigen::VectorXd x_sgd = Eigen::VectorXd::Zero(d);
  for (std::int64_t t = 1; t <= T; ++t) {
    const Eigen::MatrixXd G =
        local_gradients_gc(s1, *problem, one, ClipMode::none(), 3, seed, t);
    step(s1, G, W1, hp, identity, seed);

    auto stream = rng::make_stream(seed, rng::Purpose::Batch, 0,
                                   static_cast<std::uint64_t>(t));
    const auto idx = stream.sample_without_replacement(30, 3);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd g(d);
    for (auto r : idx) {
      problem->sample_grad(x_sgd, one[0].features.row(static_cast<Eigen::Index>(r)),
                           one[0].labels[r], g);
      sum += g;
    }
    x_sgd -= hp.eta * (sum / 3.0);
    if ((s1.X.col(0) - x_sgd).norm() != 0.0) {
      c.expect(false, "n=1 differs from plain SGD at t=" + std::to_string(t));
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Gradient correctness by central finite differences.
void criterion_5(Criterion& c) {
  // Logistic objective: full gradient vs finite differences at 10 points.
  {
    const int d = 8;
    const auto prob = logreg_nonconvex(d, 0.2);
    const Dataset ds = synthetic_dataset(d, 12, 31);
    auto stream = rng::make_stream(501, rng::Purpose::Generic);
    Eigen::VectorXd g(d);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = gaussian_vector(d, stream);
      const auto row = static_cast<Eigen::Index>(stream.below(12));
      const Eigen::RowVectorXd f = ds.features.row(row);
      const int label = ds.labels[static_cast<std::size_t>(row)];
      prob->sample_grad(x, f, label, g);
      Eigen::VectorXd fd(d);
      const double h = 1e-5;
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        fd(i) = (prob->sample_loss(xp, f, label) - prob->sample_loss(xm, f, label)) /
                (2.0 * h);
      }
      c.expect((g - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()),
               "logreg gradient off at trial " + std::to_string(trial));
    }
  }

  // 64-hidden-unit network on 784 inputs, 20 random coordinates.
  {
    const auto prob = one_hidden_nn(784, 64, 10);
    auto stream = rng::make_stream(503, rng::Purpose::Generic);
    Eigen::VectorXd x(prob->dim());
    for (int i = 0; i < x.size(); ++i) x(i) = 0.2 * stream.normal();
    Eigen::RowVectorXd f(784);
    for (int i = 0; i < 784; ++i) f(i) = stream.uniform01();
    const int label = 3;
    Eigen::VectorXd g(prob->dim());
    prob->sample_grad(x, f, label, g);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
      const auto coord = static_cast<Eigen::Index>(
          stream.below(static_cast<std::uint64_t>(prob->dim())));
      Eigen::VectorXd xp = x, xm = x;
      xp(coord) += h;
      xm(coord) -= h;
      const double fd =
          (prob->sample_loss(xp, f, label) - prob->sample_loss(xm, f, label)) /
          (2.0 * h);
      c.expect(std::abs(g(coord) - fd) <= 1e-4 * std::max(std::abs(fd), 1e-3),
               "nn gradient off at coordinate " + std::to_string(coord));
    }
  }
}

// ---------------------------------------------------------------------------
// 6. Privacy calculators against direct formula evaluation; certificate and
//    violation detection.
void criterion_6(Criterion& c) {
  auto stream = rng::make_stream(601, rng::Purpose::Generic);
  for (int trial = 0; trial < 50; ++trial) {
    const double T = 1.0 + stream.below(1000000);
    const double tau = 0.1 + 9.9 * stream.uniform01();
    const double m = 1.0 + stream.below(10000);
    const double eps = std::pow(10.0, -3.0 + 4.0 * stream.uniform01());
    const double delta = std::pow(10.0, -6.0 + 5.8 * stream.uniform01());

    // Direct evaluation through a different algebraic arrangement.
    const double direct_sigma =
        tau * std::sqrt(T) * std::sqrt(std::log(1.0 / delta)) / (m * eps);
    const double sigma = compute_sigma_p(T, tau, m, eps, delta);
    c.expect(std::abs(sigma - direct_sigma) <= 1e-12 * direct_sigma,
             "sigma_p mismatch at trial " + std::to_string(trial));

    const double dim = 1.0 + stream.below(100000);
    const double direct_phi =
        std::sqrt(dim) * std::sqrt(std::log(1.0 / delta)) / (m * eps);
    const double phi = compute_phi_m(dim, m, eps, delta);
    c.expect(std::abs(phi - direct_phi) <= 1e-12 * direct_phi,
             "phi_m mismatch at trial " + std::to_string(trial));
  }

  // Documented feasible tuple: all three lambda inequalities hold at
  // lambda = 6 (and conditions (a), (b) pass).
  const auto good = check_privacy_feasibility(1e-4, 0.99975, 1600, 300, 1.0, 80.0);
  c.expect(good.epsilon_vs_iterations_ok, "certificate tuple fails (a)");
  c.expect(good.sampling_ratio_ok, "certificate tuple fails (b)");
  c.expect(good.certificate_found() && *good.certificate_lambda == 6,
           "certificate search did not return lambda = 6");

  // epsilon > T/m^2 must be flagged.
  const auto bad = check_privacy_feasibility(
      PrivacyBudget::make(1.0, 1e-3, 100, 100, 1.0, 10));
  c.expect(!bad.epsilon_vs_iterations_ok, "epsilon > T/m^2 not flagged");
}

// ---------------------------------------------------------------------------
// Shared setup for criteria 7 and 8: the synthetic thm4 configuration.
struct DeskSetup {
  int d = 50;
  int n = 10;
  std::int64_t T = 2000;
  std::int64_t m_total = 20000;
  Dataset full;
  Graph graph;
  MixingMatrix W;
  double rho = 0.0;
  double L = 0.0;
  CompressorSpec spec;
  std::shared_ptr<LogregNonconvex> problem;

  DeskSetup() {
    full = synthetic_dataset(d, m_total, 777);
    graph = build_er_graph_connected(n, 0.8, 99);
    W = metropolis_weights(graph);
    const int k = d / 20;  // 5% sparsifier
    spec = CompressorSpec{CompressorKind::RandomKSubset, k};
    rho = spec.rho(d);
    L = estimate_logreg_smoothness(full, 0.2);
    problem = std::make_shared<LogregNonconvex>(d, 0.2);
  }
};

// 7. Desk-scale convergence in the thm4 regime: the min-so-far gradient norm
//    at T falls below 20% of its t = 1 value (median over 5 seeds) and is
//    monotone over T in {500, 1000, 2000}.
void criterion_7(Criterion& c, const DeskSetup& setup) {
  ScheduleInputs in;
  in.rho = setup.rho;
  in.alpha = setup.W.alpha;
  in.L = setup.L;
  in.T = setup.T;
  in.sigma_g = 1.0;  // variance estimate for this dataset
  in.nu = 2.4;       // target gradient norm; b = (24*1/2.4)^2 = 100
  const ScheduleResult sched = theoretical_hyperparams(Schedule::Thm4, in);
  HyperParams hp = sched.hp;
  const ClipMode clip = ClipMode::smooth(hp.tau);

  std::vector<double> ratio_at_T, min_at_500, min_at_1000, min_at_2000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = partition(setup.full, setup.n, seed);
    PorterState s = init_state(Eigen::VectorXd::Zero(setup.d), setup.n);
    Eigen::VectorXd grad(setup.d);

    double g1 = 0.0;
    double min_so_far = std::numeric_limits<double>::infinity();
    double at500 = 0.0, at1000 = 0.0;
    for (std::int64_t t = 1; t <= setup.T; ++t) {
      const Eigen::MatrixXd G =
          local_gradients_gc(s, *setup.problem, data, clip, hp.b, seed, t);
      step(s, G, setup.W, hp, setup.spec, seed);

      if (t == 1 || t % 25 == 0) {
        const Eigen::VectorXd x_bar = s.X.rowwise().mean();
        setup.problem->dataset_grad(x_bar, setup.full, grad);
        min_so_far = std::min(min_so_far, grad.norm());
        if (t == 1) g1 = grad.norm();
      }
      if (t == 500) at500 = min_so_far;
      if (t == 1000) at1000 = min_so_far;
    }
    ratio_at_T.push_back(min_so_far / g1);
    min_at_500.push_back(at500);
    min_at_1000.push_back(at1000);
    min_at_2000.push_back(min_so_far);
  }

  const double med_ratio = median(ratio_at_T);
  c.expect(med_ratio < 0.2, "median min-so-far ratio at T is " +
                                std::to_string(med_ratio) + " (need < 0.2)");
  c.expect(median(min_at_1000) <= median(min_at_500) &&
               median(min_at_2000) <= median(min_at_1000),
           "min gradient norm is not monotone over T in {500, 1000, 2000}");
}

// 8. Privacy-utility monotonicity: Option I at epsilon = 1e-1 attains train
//    utility no worse than at epsilon = 1e-2 (mean over 5 seeds each).
void criterion_8(Criterion& c, const DeskSetup& setup) {
  ScheduleInputs in;
  in.rho = setup.rho;
  in.alpha = setup.W.alpha;
  in.L = setup.L;
  in.T = setup.T;
  in.sigma_g = 1.0;
  in.nu = 2.4;
  const HyperParams base = theoretical_hyperparams(Schedule::Thm4, in).hp;
  const std::int64_t m_local = setup.m_total / setup.n;
  const double delta = 1e-3;

  auto mean_utility = [&](double epsilon) {
    const double sigma_p =
        compute_sigma_p(static_cast<double>(setup.T), base.tau,
                        static_cast<double>(m_local), epsilon, delta);
    HyperParams hp = base;
    hp.b = 1;  // Theorem-1 batch size
    hp.sigma_p = sigma_p;
    const ClipMode clip = ClipMode::smooth(hp.tau);

    double total = 0.0;
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
      const auto data = partition(setup.full, setup.n, seed);
      PorterState s = init_state(Eigen::VectorXd::Zero(setup.d), setup.n);
      Eigen::VectorXd grad(setup.d);
      double sum_sq = 0.0;
      int measured = 0;
      for (std::int64_t t = 1; t <= setup.T; ++t) {
        const Eigen::MatrixXd G = local_gradients_dp(
            s, *setup.problem, data, clip, hp.sigma_p, hp.b, seed, t);
        step(s, G, setup.W, hp, setup.spec, seed);
        if (t % 10 == 0) {
          const Eigen::VectorXd x_bar = s.X.rowwise().mean();
          setup.problem->dataset_grad(x_bar, setup.full, grad);
          sum_sq += grad.squaredNorm();
          ++measured;
        }
      }
      total += sum_sq / measured;
    }
    return total / 5.0;
  };

  const double utility_loose = mean_utility(0.1);   // weaker privacy
  const double utility_tight = mean_utility(0.01);  // stronger privacy
  c.expect(utility_loose <= utility_tight,
           "utility at eps=0.1 (" + std::to_string(utility_loose) +
               ") exceeds utility at eps=0.01 (" + std::to_string(utility_tight) +
               ")");
}

// ---------------------------------------------------------------------------
// 9. Determinism: repeated runs with one master seed give byte-identical
//    metrics CSV output.
void criterion_9(Criterion& c) {
  std::istringstream cfg_text(R"([problem]
kind = synthetic
d = 12
m_total = 200
seed = 4
lambda = 0.2
[topology]
kind = er
n = 5
p = 0.8
seed = 2
[compressor]
spec = random_k:1
[run]
option = dp
clip = smooth
tau = 1.0
T = 60
b = 2
stride = 5
seed = 31
out = unused
[privacy]
epsilon = 0.1
delta = 0.001
[hyper]
schedule = none
eta = 0.05
gamma = 0.4
)");
  const RunConfig config = RunConfig::from_map(parse_config_text(cfg_text));

  auto csv_of = [](const RunResult& result) {
    std::ostringstream out;
    write_metrics_csv(result.records, out);
    return out.str();
  };
  const std::string a = csv_of(run(config));
  const std::string b = csv_of(run(config));
  c.expect(!a.empty() && a == b, "same seed did not reproduce the CSV");

  RunConfig other = config;
  other.master_seed = 32;
  c.expect(a != csv_of(run(other)), "different seed left the CSV unchanged");
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<void(Criterion&)> fn;
  };

  DeskSetup desk;

  const std::vector<Entry> entries = {
      {"1 operator contracts (compression + clipping)", criterion_1},
      {"2 mixing suite (sums, SVD oracle, regularized bound)", criterion_2},
      {"3 tracking invariants across the grid", criterion_3},
      {"4 oracle equivalence (gradient tracking, SGD)", criterion_4},
      {"5 gradient correctness (finite differences)", criterion_5},
      {"6 privacy calculators and feasibility checks", criterion_6},
      {"7 desk-scale convergence (thm4 regime)",
       [&desk](Criterion& c) { criterion_7(c, desk); }},
      {"8 privacy-utility monotonicity", [&desk](Criterion& c) { criterion_8(c, desk); }},
      {"9 determinism (byte-identical metrics)", criterion_9},
  };

  int failed = 0;
  for (const auto& entry : entries) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    try {
      entry.fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.failures == 0) {
      std::printf("[PASS] criterion %s (%.1fs)\n", entry.name, secs);
    } else {
      ++failed;
      std::printf("[FAIL] criterion %s (%.1fs)\n", entry.name, secs);
      for (const auto& note : c.notes) std::printf("       %s\n", note.c_str());
    }
  }
  if (failed > 0) std::printf("%d criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
