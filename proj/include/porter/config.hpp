#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/clip.hpp"
#include "porter/compress.hpp"
#include "porter/graph.hpp"

namespace porter {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
}

inline std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Flat "[section]\nkey = value" text, one nesting level, '#'/';' full-line
/// comments. Keys are addressed as "section.key".
using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config_text(std::istream& in) {
  ConfigMap map;
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config: bad section at line " + std::to_string(lineno));
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("config: empty section at line " + std::to_string(lineno));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " +
                        std::to_string(lineno));
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at line " + std::to_string(lineno));
    if (section.empty())
      throw ConfigError("config: key outside any section at line " +
                        std::to_string(lineno));
    map[section + "." + key] = value;
  }
  return map;
}

/// "--section.key=value" overrides, applied before validation.
inline void apply_overrides(ConfigMap& map,
                            const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    std::string body = item;
    if (body.rfind("--", 0) == 0) body = body.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be --section.key=value: " + item);
    const std::string key = detail::trim(body.substr(0, eq));
    if (key.find('.') == std::string::npos)
      throw ConfigError("override key needs a section path: " + item);
    map[key] = detail::trim(body.substr(eq + 1));
  }
}

enum class RunOption { Dp, Gc };

/// Full experiment description. Parsed from the flat config map; resolve()
/// in runner.hpp turns it into live objects.
struct RunConfig {
  // [problem]
  std::string problem_kind = "synthetic";  // synthetic | logreg | nn
  int synthetic_d = 10;
  std::int64_t synthetic_m_total = 100;
  std::uint64_t data_seed = 1;
  double lambda = 0.2;
  std::string smoothness = "auto";  // "auto" or a number
  std::string train_path;
  std::string train_labels_path;
  std::string test_path;
  std::string test_labels_path;
  int nn_hidden = 64;
  int nn_classes = 10;

  // [topology]
  std::string topology_kind = "complete";  // er | ring | complete | path | star
  int n = 4;
  double edge_probability = 0.8;
  std::uint64_t topology_seed = 1;
  bool require_connected = true;

  // [compressor]
  std::string compressor = "identity";

  // [run]
  RunOption option = RunOption::Gc;
  std::string clip_kind = "none";
  double tau = 0.0;
  std::int64_t T = 100;
  int b = 1;
  std::int64_t stride = 1;
  std::uint64_t master_seed = 42;
  std::string out_dir = "porter_out";

  // [privacy] (dp only)
  bool has_privacy = false;
  double epsilon = 0.0;
  double delta = 0.0;

  // [hyper]
  std::string schedule = "none";  // none | thm2 | thm3 | thm4
  std::string schedule_origin = "none";  // schedule a resolved config came from
  double eta = 0.0;
  double gamma = 1.0;
  double sigma_g = 0.0;
  double nu = 0.0;

  static RunConfig from_map(const ConfigMap& map);
  ConfigMap to_map() const;
  std::string to_text() const;
  void validate() const;
};

inline RunConfig RunConfig::from_map(const ConfigMap& map) {
  RunConfig c;
  ConfigMap rest = map;
  auto take = [&rest](const char* key) -> std::optional<std::string> {
    auto it = rest.find(key);
    if (it == rest.end()) return std::nullopt;
    std::string v = it->second;
    rest.erase(it);
    return v;
  };

  if (auto v = take("problem.kind")) c.problem_kind = *v;
  if (auto v = take("problem.d")) c.synthetic_d = static_cast<int>(detail::to_int("problem.d", *v));
  if (auto v = take("problem.m_total"))
    c.synthetic_m_total = detail::to_int("problem.m_total", *v);
  if (auto v = take("problem.seed"))
    c.data_seed = static_cast<std::uint64_t>(detail::to_int("problem.seed", *v));
  if (auto v = take("problem.lambda")) c.lambda = detail::to_double("problem.lambda", *v);
  if (auto v = take("problem.smoothness")) c.smoothness = *v;
  if (auto v = take("problem.train")) c.train_path = *v;
  if (auto v = take("problem.train_labels")) c.train_labels_path = *v;
  if (auto v = take("problem.test")) c.test_path = *v;
  if (auto v = take("problem.test_labels")) c.test_labels_path = *v;
  if (auto v = take("problem.hidden")) c.nn_hidden = static_cast<int>(detail::to_int("problem.hidden", *v));
  if (auto v = take("problem.classes")) c.nn_classes = static_cast<int>(detail::to_int("problem.classes", *v));

  if (auto v = take("topology.kind")) c.topology_kind = *v;
  if (auto v = take("topology.n")) c.n = static_cast<int>(detail::to_int("topology.n", *v));
  if (auto v = take("topology.p")) c.edge_probability = detail::to_double("topology.p", *v);
  if (auto v = take("topology.seed"))
    c.topology_seed = static_cast<std::uint64_t>(detail::to_int("topology.seed", *v));
  if (auto v = take("topology.require_connected"))
    c.require_connected = detail::to_bool("topology.require_connected", *v);

  if (auto v = take("compressor.spec")) c.compressor = *v;

  if (auto v = take("run.option")) {
    if (*v == "dp") c.option = RunOption::Dp;
    else if (*v == "gc") c.option = RunOption::Gc;
    else throw ConfigError("config: run.option must be dp or gc, got '" + *v + "'");
  }
  if (auto v = take("run.clip")) c.clip_kind = *v;
  if (auto v = take("run.tau")) c.tau = detail::to_double("run.tau", *v);
  if (auto v = take("run.T")) c.T = detail::to_int("run.T", *v);
  if (auto v = take("run.b")) c.b = static_cast<int>(detail::to_int("run.b", *v));
  if (auto v = take("run.stride")) c.stride = detail::to_int("run.stride", *v);
  if (auto v = take("run.seed"))
    c.master_seed = static_cast<std::uint64_t>(detail::to_int("run.seed", *v));
  if (auto v = take("run.out")) c.out_dir = *v;

  if (auto v = take("privacy.epsilon")) {
    c.epsilon = detail::to_double("privacy.epsilon", *v);
    c.has_privacy = true;
  }
  if (auto v = take("privacy.delta")) {
    c.delta = detail::to_double("privacy.delta", *v);
    c.has_privacy = true;
  }

  if (auto v = take("hyper.schedule")) c.schedule = *v;
  if (auto v = take("hyper.schedule_origin")) c.schedule_origin = *v;
  if (auto v = take("hyper.eta")) c.eta = detail::to_double("hyper.eta", *v);
  if (auto v = take("hyper.gamma")) c.gamma = detail::to_double("hyper.gamma", *v);
  if (auto v = take("hyper.sigma_g")) c.sigma_g = detail::to_double("hyper.sigma_g", *v);
  if (auto v = take("hyper.nu")) c.nu = detail::to_double("hyper.nu", *v);

  if (!rest.empty())
    throw ConfigError("config: unknown key '" + rest.begin()->first + "'");
  return c;
}

inline ConfigMap RunConfig::to_map() const {
  ConfigMap m;
  m["problem.kind"] = problem_kind;
  if (problem_kind == "synthetic") {
    m["problem.d"] = std::to_string(synthetic_d);
    m["problem.m_total"] = std::to_string(synthetic_m_total);
    m["problem.seed"] = std::to_string(data_seed);
  }
  if (problem_kind == "synthetic" || problem_kind == "logreg")
    m["problem.lambda"] = detail::fmt_double(lambda);
  m["problem.smoothness"] = smoothness;
  if (!train_path.empty()) m["problem.train"] = train_path;
  if (!train_labels_path.empty()) m["problem.train_labels"] = train_labels_path;
  if (!test_path.empty()) m["problem.test"] = test_path;
  if (!test_labels_path.empty()) m["problem.test_labels"] = test_labels_path;
  if (problem_kind == "nn") {
    m["problem.hidden"] = std::to_string(nn_hidden);
    m["problem.classes"] = std::to_string(nn_classes);
  }

  m["topology.kind"] = topology_kind;
  m["topology.n"] = std::to_string(n);
  if (topology_kind == "er") {
    m["topology.p"] = detail::fmt_double(edge_probability);
    m["topology.seed"] = std::to_string(topology_seed);
    m["topology.require_connected"] = require_connected ? "true" : "false";
  }

  m["compressor.spec"] = compressor;

  m["run.option"] = option == RunOption::Dp ? "dp" : "gc";
  m["run.clip"] = clip_kind;
  if (clip_kind != "none") m["run.tau"] = detail::fmt_double(tau);
  m["run.T"] = std::to_string(T);
  m["run.b"] = std::to_string(b);
  m["run.stride"] = std::to_string(stride);
  m["run.seed"] = std::to_string(master_seed);
  m["run.out"] = out_dir;

  if (has_privacy) {
    m["privacy.epsilon"] = detail::fmt_double(epsilon);
    m["privacy.delta"] = detail::fmt_double(delta);
  }

  m["hyper.schedule"] = schedule;
  if (schedule_origin != "none") m["hyper.schedule_origin"] = schedule_origin;
  if (schedule == "none") {
    m["hyper.eta"] = detail::fmt_double(eta);
    m["hyper.gamma"] = detail::fmt_double(gamma);
  }
  if (schedule == "thm3" || schedule == "thm4" || sigma_g != 0.0)
    m["hyper.sigma_g"] = detail::fmt_double(sigma_g);
  if (schedule == "thm4" || nu != 0.0) m["hyper.nu"] = detail::fmt_double(nu);
  return m;
}

inline std::string RunConfig::to_text() const {
  const ConfigMap m = to_map();
  // Emit sections in a fixed order; std::map keeps keys sorted within each.
  const char* sections[] = {"problem", "topology", "compressor",
                            "run",     "privacy",  "hyper"};
  std::ostringstream out;
  for (const char* section : sections) {
    const std::string prefix = std::string(section) + ".";
    bool open = false;
    for (const auto& [key, value] : m) {
      if (key.rfind(prefix, 0) != 0) continue;
      if (!open) {
        out << "[" << section << "]\n";
        open = true;
      }
      out << key.substr(prefix.size()) << " = " << value << "\n";
    }
    if (open) out << "\n";
  }
  return out.str();
}

inline void RunConfig::validate() const {
  if (problem_kind != "synthetic" && problem_kind != "logreg" && problem_kind != "nn")
    throw ConfigError("config: unknown problem.kind '" + problem_kind + "'");
  if (problem_kind == "synthetic") {
    if (synthetic_d < 1 || synthetic_m_total < 1)
      throw ConfigError("config: synthetic problem needs d >= 1 and m_total >= 1");
  } else if (train_path.empty()) {
    throw ConfigError("config: problem.train path is required for " + problem_kind);
  }
  if (problem_kind == "nn" && train_labels_path.empty())
    throw ConfigError("config: problem.train_labels is required for nn");
  if (lambda < 0.0) throw ConfigError("config: problem.lambda must be >= 0");
  if (smoothness != "auto") detail::to_double("problem.smoothness", smoothness);

  if (topology_kind != "er") parse_topology_kind(topology_kind);
  if (n < 2) throw ConfigError("config: topology.n must be >= 2");
  if (topology_kind == "er" && (edge_probability < 0.0 || edge_probability > 1.0))
    throw ConfigError("config: topology.p must be in [0, 1]");

  parse_compressor(compressor);

  const ClipKind ck = parse_clip_kind(clip_kind);
  if (ck != ClipKind::None && !(tau > 0.0))
    throw ConfigError("config: run.tau must be > 0 when clipping is enabled");
  if (T < 0) throw ConfigError("config: run.T must be >= 0");
  if (b < 1) throw ConfigError("config: run.b must be >= 1");
  if (stride < 1) throw ConfigError("config: run.stride must be >= 1");

  if (option == RunOption::Dp) {
    if (ck == ClipKind::None)
      throw ConfigError("config: option dp requires run.clip != none "
                        "(clipping bounds the sensitivity)");
    if (!has_privacy)
      throw ConfigError("config: option dp requires a [privacy] section");
    if (!(epsilon > 0.0))
      throw ConfigError("config: privacy.epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0))
      throw ConfigError("config: privacy.delta must be in (0, 1)");
  } else if (has_privacy) {
    throw ConfigError("config: option gc forbids sigma_p > 0; drop the "
                      "[privacy] section");
  }

  if (schedule != "none" && schedule != "thm2" && schedule != "thm3" &&
      schedule != "thm4")
    throw ConfigError("config: unknown hyper.schedule '" + schedule + "'");
  if (schedule == "none") {
    if (!(eta > 0.0)) throw ConfigError("config: hyper.eta must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw ConfigError("config: hyper.gamma must be in (0, 1]");
  }
  if ((schedule == "thm2" || schedule == "thm3") && option != RunOption::Dp)
    throw ConfigError("config: schedules thm2/thm3 require option dp");
  if (schedule == "thm4") {
    if (option != RunOption::Gc)
      throw ConfigError("config: schedule thm4 requires option gc");
    if (!(nu > 0.0)) throw ConfigError("config: schedule thm4 needs hyper.nu > 0");
    if (sigma_g < 0.0) throw ConfigError("config: hyper.sigma_g must be >= 0");
    if (T < 1) throw ConfigError("config: schedule thm4 needs run.T >= 1");
  }
  if (schedule == "thm3" && sigma_g < 0.0)
    throw ConfigError("config: hyper.sigma_g must be >= 0");
}

/// FNV-1a over the canonical text; the run's content-addressed identity.
inline std::string config_hash(const RunConfig& config) {
  const std::string text = config.to_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace porter
