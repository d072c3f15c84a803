#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "porter/config.hpp"
#include "porter/data.hpp"
#include "porter/engine.hpp"
#include "porter/metrics.hpp"
#include "porter/mixing.hpp"
#include "porter/privacy.hpp"
#include "porter/problems.hpp"
#include "porter/schedules.hpp"

namespace porter {

/// A RunConfig turned into live objects, with schedules and derived values
/// pinned. resolved.to_text() re-parses and re-resolves to itself.
struct ResolvedRun {
  RunConfig resolved;
  Graph graph;
  MixingMatrix mixing;
  std::shared_ptr<Problem> problem;
  std::vector<Dataset> agent_data;
  std::optional<Dataset> test_data;
  HyperParams hp;
  ClipMode clip;
  CompressorSpec compressor;
  double smoothness = 0.0;
  std::optional<PrivacyBudget> budget;
  std::optional<FeasibilityReport> feasibility;
  std::vector<std::string> schedule_violations;
};

namespace detail {

inline Graph build_topology(const RunConfig& c) {
  if (c.topology_kind == "er") {
    if (c.require_connected)
      return build_er_graph_connected(c.n, c.edge_probability, c.topology_seed);
    Graph g = build_er_graph(c.n, c.edge_probability, c.topology_seed);
    if (!g.connected())
      throw ConfigError("config: sampled ER graph is disconnected "
                        "(set topology.require_connected = true to resample)");
    return g;
  }
  return build_named_graph(parse_topology_kind(c.topology_kind), c.n);
}

inline std::shared_ptr<Problem> build_problem(const RunConfig& c, Dataset& train,
                                              std::optional<Dataset>& test) {
  if (c.problem_kind == "synthetic") {
    train = synthetic_dataset(c.synthetic_d, c.synthetic_m_total, c.data_seed);
    return std::make_shared<LogregNonconvex>(c.synthetic_d, c.lambda);
  }
  if (c.problem_kind == "logreg") {
    train = parse_libsvm(c.train_path);
    if (!c.test_path.empty()) test = parse_libsvm(c.test_path);
    if (test && test->dim() != train.dim()) {
      // Sparse text files can under-report the trailing dimension.
      const int d = std::max(train.dim(), test->dim());
      train.features.conservativeResize(Eigen::NoChange, d);
      test->features.conservativeResize(Eigen::NoChange, d);
    }
    return std::make_shared<LogregNonconvex>(train.dim(), c.lambda);
  }
  train = parse_idx(c.train_path, c.train_labels_path);
  if (!c.test_path.empty()) {
    if (c.test_labels_path.empty())
      throw ConfigError("config: problem.test_labels is required with problem.test");
    test = parse_idx(c.test_path, c.test_labels_path);
  }
  return std::make_shared<OneHiddenNn>(train.dim(), c.nn_hidden, c.nn_classes);
}

}  // namespace detail

inline ResolvedRun resolve(const RunConfig& config) {
  config.validate();
  ResolvedRun r;
  r.resolved = config;

  r.graph = detail::build_topology(config);
  r.mixing = metropolis_weights(r.graph);
  r.compressor = parse_compressor(config.compressor);

  Dataset train;
  r.problem = detail::build_problem(config, train, r.test_data);
  r.compressor.validate(r.problem->dim());
  if (train.size() < config.n)
    throw ConfigError("config: dataset smaller than agent count");
  r.agent_data = partition(train, config.n, config.master_seed);
  const std::int64_t m_local = r.agent_data.front().size();

  if (config.smoothness == "auto") {
    if (config.problem_kind == "nn")
      throw ConfigError("config: problem.smoothness must be numeric for nn "
                        "(no closed-form heuristic)");
    r.smoothness = estimate_logreg_smoothness(train, config.lambda);
    r.resolved.smoothness = detail::fmt_double(r.smoothness);
  } else {
    r.smoothness = detail::to_double("problem.smoothness", config.smoothness);
  }

  // Hyper-parameters: explicit values or a theorem schedule, pinned into the
  // resolved config either way.
  r.clip = ClipMode::validated(
      {parse_clip_kind(config.clip_kind), config.tau});
  if (config.schedule == "none") {
    r.hp.eta = config.eta;
    r.hp.gamma = config.gamma;
    r.hp.tau = config.tau;
    r.hp.b = config.b;
    r.hp.T = config.T;
  } else {
    ScheduleInputs in;
    in.rho = r.compressor.rho(r.problem->dim());
    in.alpha = r.mixing.alpha;
    in.L = r.smoothness;
    in.tau = config.tau;
    in.d = r.problem->dim();
    in.sigma_g = config.sigma_g;
    in.nu = config.nu;
    in.T = config.T;
    if (config.option == RunOption::Dp)
      in.phi_m = compute_phi_m(static_cast<double>(r.problem->dim()),
                               static_cast<double>(m_local), config.epsilon,
                               config.delta);
    auto sched = theoretical_hyperparams(parse_schedule(config.schedule), in);
    r.hp = sched.hp;
    r.schedule_violations = std::move(sched.violated_constraints);
    r.clip = ClipMode::validated({parse_clip_kind(config.clip_kind), r.hp.tau});
    r.resolved.schedule = "none";
    r.resolved.schedule_origin = config.schedule;
    r.resolved.eta = r.hp.eta;
    r.resolved.gamma = r.hp.gamma;
    r.resolved.tau = r.hp.tau;
    r.resolved.b = r.hp.b;
    r.resolved.T = r.hp.T;
  }
  if (r.hp.T != r.resolved.T) r.resolved.T = r.hp.T;

  if (config.option == RunOption::Dp) {
    r.budget = PrivacyBudget::make(config.epsilon, config.delta, m_local,
                                   std::max<std::int64_t>(r.hp.T, 1), r.hp.tau,
                                   r.problem->dim());
    r.hp.sigma_p = r.budget->sigma_p;
    r.feasibility = check_privacy_feasibility(*r.budget);
    r.feasibility->batch_size_warning = r.hp.b > 1;
  } else {
    r.hp.sigma_p = 0.0;
  }
  if (r.hp.b > m_local)
    throw ConfigError("config: run.b exceeds the per-agent sample count " +
                      std::to_string(m_local));
  r.hp.validate();
  return r;
}

struct RunResult {
  RunConfig resolved;
  std::vector<MetricsRecord> records;
  Summary summary;
  Eigen::VectorXd x_out;       // uniform sample over all {x_i^(t)}
  Eigen::VectorXd x_bar_final; // column mean at T
  std::string hash;
  double wall_seconds = 0.0;
  std::optional<FeasibilityReport> feasibility;
  std::optional<PrivacyBudget> budget;
  std::vector<std::string> schedule_violations;
  double mixing_alpha = 0.0;
  double smoothness = 0.0;
};

/// Execute the configured run: T iterations, metrics every `stride`
/// iterations (plus t = 0 and t = T), reservoir-sampled x_out. Fully
/// deterministic per master seed. Non-finite iterates abort with the
/// offending iteration.
inline RunResult run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ResolvedRun r = resolve(config);
  const std::uint64_t seed = config.master_seed;

  auto init_stream = rng::make_stream(seed, rng::Purpose::Init);
  const Eigen::VectorXd x0 = r.problem->default_init(init_stream);
  PorterState state = init_state(x0, config.n);

  RunResult result;
  result.resolved = r.resolved;
  result.hash = config_hash(r.resolved);
  result.feasibility = r.feasibility;
  result.budget = r.budget;
  result.schedule_violations = r.schedule_violations;
  result.mixing_alpha = r.mixing.alpha;
  result.smoothness = r.smoothness;

  const Dataset* test = r.test_data ? &*r.test_data : nullptr;
  result.records.push_back(measure(state, *r.problem, r.agent_data, test));

  Eigen::VectorXd reservoir = x0;
  std::uint64_t seen = 0;

  for (std::int64_t t = 1; t <= r.hp.T; ++t) {
    Eigen::MatrixXd G_p;
    if (config.option == RunOption::Dp)
      G_p = local_gradients_dp(state, *r.problem, r.agent_data, r.clip,
                               r.hp.sigma_p, r.hp.b, seed, t);
    else
      G_p = local_gradients_gc(state, *r.problem, r.agent_data, r.clip, r.hp.b,
                               seed, t);
    step(state, G_p, r.mixing, r.hp, r.compressor, seed);
    if (!state.X.allFinite() || !state.V.allFinite()) throw NumericalError(t);

    auto out_stream = rng::make_stream(seed, rng::Purpose::Output, 0,
                                       static_cast<std::uint64_t>(t));
    for (int i = 0; i < config.n; ++i) {
      ++seen;
      if (out_stream.uniform01() * static_cast<double>(seen) < 1.0)
        reservoir = state.X.col(i);
    }

    if (t % config.stride == 0 || t == r.hp.T)
      result.records.push_back(measure(state, *r.problem, r.agent_data, test));
  }

  result.x_out = reservoir;
  result.x_bar_final = state.X.rowwise().mean();
  result.summary = summarize(result.records);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

/// Human-readable sidecar describing a finished run: resolved config,
/// derived quantities, feasibility report, summary.
inline std::string run_metadata_text(const RunResult& result) {
  std::ostringstream out;
  out << "# porter run metadata\n";
  out << "config_hash = " << result.hash << "\n";
  out << "wall_seconds = " << result.wall_seconds << "\n";
  out << "mixing_alpha = " << detail::fmt_double(result.mixing_alpha) << "\n";
  out << "smoothness = " << detail::fmt_double(result.smoothness) << "\n";
  if (result.budget) {
    out << "sigma_p = " << detail::fmt_double(result.budget->sigma_p) << "\n";
    out << "phi_m = " << detail::fmt_double(result.budget->phi_m) << "\n";
    if (result.budget->phi_m_warning())
      out << "warning = phi_m >= 1 (analysis assumes phi_m < 1)\n";
  }
  for (const auto& v : result.schedule_violations)
    out << "schedule_constraint = " << v << "\n";
  if (result.feasibility) out << result.feasibility->to_text();
  out << "summary.avg_grad_norm_sq = "
      << detail::fmt_double(result.summary.avg_grad_norm_sq) << "\n";
  out << "summary.min_grad_norm = "
      << detail::fmt_double(result.summary.min_grad_norm) << "\n";
  out << "summary.final_loss = " << detail::fmt_double(result.summary.final_loss)
      << "\n";
  if (result.summary.final_accuracy)
    out << "summary.final_accuracy = "
        << detail::fmt_double(*result.summary.final_accuracy) << "\n";
  out << "summary.total_bits = " << result.summary.total_bits << "\n";
  out << "\n# resolved config\n" << result.resolved.to_text();
  return out.str();
}

}  // namespace porter
