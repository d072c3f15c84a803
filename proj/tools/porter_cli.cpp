// porter: experiment driver for decentralized clipped-and-compressed SGD.
//
// Subcommands:
//   run            execute one experiment from a config file
//   sweep          repeat a run across values of one scalar parameter
//   check-privacy  print sigma_p, phi_m and the feasibility report
//   topology       inspect a communication graph and its mixing rate
//
// Exit codes: 0 success, 2 config/usage error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "porter/porter.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

porter::RunConfig load_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw porter::ConfigError("cannot open config file: " + path);
  porter::ConfigMap map = porter::parse_config_text(in);
  porter::apply_overrides(map, overrides);
  porter::RunConfig config = porter::RunConfig::from_map(map);
  if (const char* env_out = std::getenv("PORTER_OUT"))
    config.out_dir = env_out;
  config.validate();
  return config;
}

void write_run_outputs(const porter::RunResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "metrics.csv", std::ios::binary);
    porter::write_metrics_csv(result.records, csv);
  }
  {
    std::ofstream meta(dir / "meta.txt");
    meta << porter::run_metadata_text(result);
  }
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides) {
  porter::RunConfig config = load_config(config_path, overrides);
  porter::RunResult result = porter::run(config);
  write_run_outputs(result, config.out_dir);
  for (const auto& v : result.schedule_violations)
    std::cerr << "warning: schedule constraint: " << v << "\n";
  if (result.budget && result.budget->phi_m_warning())
    std::cerr << "warning: phi_m = " << result.budget->phi_m
              << " >= 1; the analysis assumes phi_m < 1\n";
  std::cout << "run " << result.hash << " finished: T=" << result.resolved.T
            << " avg|grad|^2=" << result.summary.avg_grad_norm_sq
            << " min|grad|=" << result.summary.min_grad_norm
            << " bits=" << result.summary.total_bits << "\n";
  std::cout << "wrote " << (fs::path(config.out_dir) / "metrics.csv").string()
            << "\n";
  return kExitOk;
}

void apply_axis(porter::RunConfig& config, const std::string& axis, double value) {
  if (axis == "epsilon") {
    config.epsilon = value;
  } else if (axis == "eta") {
    config.eta = value;
  } else if (axis == "gamma") {
    config.gamma = value;
  } else if (axis == "tau") {
    config.tau = value;
  } else if (axis == "k") {
    porter::CompressorSpec spec = porter::parse_compressor(config.compressor);
    if (spec.kind == porter::CompressorKind::Identity)
      throw porter::ConfigError("sweep: axis k needs a sparsifying compressor");
    spec.k = static_cast<int>(value);
    config.compressor = spec.to_string();
  } else if (axis == "p") {
    config.edge_probability = value;
  } else if (axis == "n") {
    config.n = static_cast<int>(value);
  } else {
    throw porter::ConfigError(
        "sweep: unknown axis '" + axis +
        "' (sweepable: epsilon, eta, gamma, tau, k, p, n)");
  }
}

std::string axis_value_name(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  std::string name = buf;
  for (char& c : name)
    if (c == '.' || c == '+' || c == '-') c = '_';
  return name;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values,
              const std::vector<std::string>& overrides) {
  if (values.empty()) throw porter::ConfigError("sweep: empty value list");
  porter::RunConfig base = load_config(config_path, overrides);
  const fs::path root = base.out_dir;
  fs::create_directories(root);
  std::ofstream summary(root / "sweep_summary.csv", std::ios::binary);
  summary << "axis,value,avg_grad_norm_sq,min_grad_norm,final_loss,"
             "final_accuracy,total_bits\n";
  for (double value : values) {
    porter::RunConfig config = base;
    apply_axis(config, axis, value);
    config.out_dir = (root / (axis + "=" + axis_value_name(value))).string();
    config.validate();
    porter::RunResult result = porter::run(config);
    write_run_outputs(result, config.out_dir);
    summary << axis << "," << porter::detail::fmt_double(value) << ","
            << porter::detail::fmt_double(result.summary.avg_grad_norm_sq) << ","
            << porter::detail::fmt_double(result.summary.min_grad_norm) << ","
            << porter::detail::fmt_double(result.summary.final_loss) << ",";
    if (result.summary.final_accuracy)
      summary << porter::detail::fmt_double(*result.summary.final_accuracy);
    summary << "," << result.summary.total_bits << "\n";
    std::cout << axis << "=" << value << " done (" << result.hash << ")\n";
  }
  std::cout << "wrote " << (root / "sweep_summary.csv").string() << "\n";
  return kExitOk;
}

int cmd_check_privacy(double epsilon, double delta, std::int64_t m,
                      std::int64_t T, double tau, std::int64_t d,
                      std::optional<double> sigma_override) {
  const double sigma_p =
      sigma_override ? *sigma_override
                     : porter::compute_sigma_p(static_cast<double>(T), tau,
                                               static_cast<double>(m), epsilon,
                                               delta);
  const double phi_m = porter::compute_phi_m(
      static_cast<double>(d), static_cast<double>(m), epsilon, delta);
  std::cout << "sigma_p = " << porter::detail::fmt_double(sigma_p) << "\n";
  std::cout << "phi_m = " << porter::detail::fmt_double(phi_m)
            << (d == 1 ? "  (for d = 1; pass --d for your dimension)" : "")
            << "\n";
  if (phi_m >= 1.0)
    std::cout << "warning: phi_m >= 1 (analysis assumes phi_m < 1)\n";
  const auto report =
      porter::check_privacy_feasibility(epsilon, delta, m, T, tau, sigma_p);
  std::cout << report.to_text();
  return kExitOk;  // the report is advisory
}

int cmd_topology(const std::string& kind, int n, double p, std::uint64_t seed,
                 double gamma, const std::string& edges_out) {
  porter::Graph g = kind == "er"
                        ? porter::build_er_graph(n, p, seed)
                        : porter::build_named_graph(
                              porter::parse_topology_kind(kind), n);
  std::cout << "n = " << g.n << "\n";
  std::cout << "edges = " << g.edges.size() << "\n";
  std::cout << "connected = " << (g.connected() ? "true" : "false") << "\n";
  if (!edges_out.empty()) {
    std::ofstream out(edges_out);
    porter::write_edge_list(g, out);
    std::cout << "wrote " << edges_out << "\n";
  }
  if (!g.connected()) {
    std::cout << "warning: graph is disconnected; no mixing rate "
                 "(alpha would be 1)\n";
    return kExitOk;
  }
  porter::MixingMatrix mix = porter::metropolis_weights(g);
  std::cout << "alpha = " << porter::detail::fmt_double(mix.alpha) << "\n";
  porter::MixingMatrix reg = porter::regularize(mix, gamma);
  std::cout << "alpha_hat(gamma=" << gamma
            << ") = " << porter::detail::fmt_double(reg.alpha) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PORTER decentralized optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run_cmd = app.add_subcommand("run", "execute one experiment");
  run_cmd->add_option("config", config_path, "config file")->required();
  run_cmd->add_option("--set", overrides,
                      "override as section.key=value (repeatable)");

  std::string axis;
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "run across parameter values");
  sweep_cmd->add_option("config", config_path, "config file")->required();
  sweep_cmd->add_option("--axis", axis, "parameter to sweep")->required();
  sweep_cmd->add_option("--values", values, "values for the axis");
  sweep_cmd->add_option("--set", overrides,
                        "override as section.key=value (repeatable)");

  double epsilon = 0.0, delta = 0.0, tau = 1.0;
  std::int64_t m = 0, T = 0, d = 1;
  std::optional<double> sigma_override;
  auto* priv_cmd =
      app.add_subcommand("check-privacy", "privacy calculators and checks");
  priv_cmd->add_option("--epsilon", epsilon)->required();
  priv_cmd->add_option("--delta", delta)->required();
  priv_cmd->add_option("--m", m, "local sample size")->required();
  priv_cmd->add_option("--T", T, "iterations")->required();
  priv_cmd->add_option("--tau", tau, "clipping threshold")->required();
  priv_cmd->add_option("--d", d, "problem dimension (for phi_m)");
  double sigma_value = 0.0;
  auto* sigma_opt = priv_cmd->add_option(
      "--sigma-p", sigma_value,
      "check this sigma_p instead of the derived one");

  std::string kind = "er";
  int n = 0;
  double p = 0.8, gamma = 1.0;
  std::uint64_t seed = 1;
  std::string edges_out;
  auto* topo_cmd = app.add_subcommand("topology", "inspect a graph");
  topo_cmd->add_option("--kind", kind, "er|ring|complete|path|star");
  topo_cmd->add_option("--n", n, "agent count")->required();
  topo_cmd->add_option("--p", p, "ER edge probability");
  topo_cmd->add_option("--seed", seed, "ER seed");
  topo_cmd->add_option("--gamma", gamma, "consensus stepsize for alpha_hat");
  topo_cmd->add_option("--edges-out", edges_out, "write the edge list here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, overrides);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, axis, values, overrides);
    if (priv_cmd->parsed()) {
      if (sigma_opt->count() > 0) sigma_override = sigma_value;
      return cmd_check_privacy(epsilon, delta, m, T, tau, d, sigma_override);
    }
    if (topo_cmd->parsed()) return cmd_topology(kind, n, p, seed, gamma, edges_out);
  } catch (const porter::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
