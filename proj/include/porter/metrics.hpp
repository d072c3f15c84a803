#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/engine.hpp"
#include "porter/problems.hpp"

namespace porter {

/// Per-iteration measurements against the exact full gradient at the average
/// iterate. consensus_*/quant_* are the squared Frobenius error vectors of
/// the analysis (X vs its mean, Q vs its target).
struct MetricsRecord {
  std::int64_t t = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double grad_norm_sq = 0.0;
  double consensus_x = 0.0;
  double quant_x = 0.0;
  double consensus_v = 0.0;
  double quant_v = 0.0;
  std::optional<double> test_accuracy;
  std::uint64_t bits = 0;
};

/// Exact (non-stochastic) measurement on a consistent state snapshot; the
/// state is read-only here.
inline MetricsRecord measure(const PorterState& state, const Problem& problem,
                             const std::vector<Dataset>& agent_data,
                             const Dataset* test_set = nullptr) {
  MetricsRecord rec;
  rec.t = state.t;
  rec.bits = state.bits_communicated;

  const int n = state.agents();
  const Eigen::VectorXd x_bar = state.X.rowwise().mean();
  const Eigen::VectorXd v_bar = state.V.rowwise().mean();

  double loss = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.dim());
  Eigen::VectorXd g(state.dim());
  for (int i = 0; i < n; ++i) {
    const Dataset& ds = agent_data[static_cast<std::size_t>(i)];
    loss += problem.dataset_loss(x_bar, ds);
    problem.dataset_grad(x_bar, ds, g);
    grad += g;
  }
  rec.loss = loss / n;
  grad /= n;
  rec.grad_norm = grad.norm();
  rec.grad_norm_sq = grad.squaredNorm();

  rec.consensus_x = (state.X - x_bar * Eigen::RowVectorXd::Ones(n)).squaredNorm();
  rec.quant_x = (state.Q_x - state.X).squaredNorm();
  rec.consensus_v = (state.V - v_bar * Eigen::RowVectorXd::Ones(n)).squaredNorm();
  rec.quant_v = (state.Q_v - state.V).squaredNorm();

  if (test_set != nullptr) rec.test_accuracy = problem.accuracy(x_bar, *test_set);
  return rec;
}

/// Stream-level aggregate: the average squared gradient norm and the minimum
/// gradient norm over t >= 1 (the two utility notions of the analysis), plus
/// final loss/accuracy and total bits. Records at t = 0 are excluded from
/// the utility aggregates whenever later records exist.
struct Summary {
  double avg_grad_norm_sq = 0.0;
  double min_grad_norm = 0.0;
  double final_loss = 0.0;
  std::optional<double> final_accuracy;
  std::uint64_t total_bits = 0;
};

inline Summary summarize(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: empty stream");
  bool any_positive_t = false;
  for (const auto& r : records)
    if (r.t >= 1) any_positive_t = true;

  Summary s;
  double sum_sq = 0.0;
  double min_norm = std::numeric_limits<double>::infinity();
  std::size_t counted = 0;
  for (const auto& r : records) {
    if (any_positive_t && r.t < 1) continue;
    sum_sq += r.grad_norm_sq;
    min_norm = std::min(min_norm, r.grad_norm);
    ++counted;
  }
  s.avg_grad_norm_sq = sum_sq / static_cast<double>(counted);
  s.min_grad_norm = min_norm;
  s.final_loss = records.back().loss;
  s.final_accuracy = records.back().test_accuracy;
  s.total_bits = records.back().bits;
  return s;
}

namespace detail {
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline constexpr const char* kMetricsCsvHeader =
    "t,loss,grad_norm,grad_norm_sq,consensus_x,quant_x,consensus_v,quant_v,"
    "test_accuracy,bits";

/// 17-significant-digit CSV so write-then-parse reproduces records exactly.
/// Missing accuracy is an empty field.
inline void write_metrics_csv(const std::vector<MetricsRecord>& records,
                              std::ostream& out) {
  out << kMetricsCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.t << "," << detail::format_g17(r.loss) << ","
        << detail::format_g17(r.grad_norm) << ","
        << detail::format_g17(r.grad_norm_sq) << ","
        << detail::format_g17(r.consensus_x) << ","
        << detail::format_g17(r.quant_x) << ","
        << detail::format_g17(r.consensus_v) << ","
        << detail::format_g17(r.quant_v) << ",";
    if (r.test_accuracy) out << detail::format_g17(*r.test_accuracy);
    out << "," << r.bits << "\n";
  }
}

inline std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("metrics csv: missing header");
  if (line != kMetricsCsvHeader)
    throw std::runtime_error("metrics csv: unexpected header: " + line);
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto pos = line.find(',', start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 10)
      throw std::runtime_error("metrics csv: bad field count in: " + line);
    MetricsRecord r;
    r.t = std::stoll(fields[0]);
    r.loss = std::stod(fields[1]);
    r.grad_norm = std::stod(fields[2]);
    r.grad_norm_sq = std::stod(fields[3]);
    r.consensus_x = std::stod(fields[4]);
    r.quant_x = std::stod(fields[5]);
    r.consensus_v = std::stod(fields[6]);
    r.quant_v = std::stod(fields[7]);
    if (!fields[8].empty()) r.test_accuracy = std::stod(fields[8]);
    r.bits = std::stoull(fields[9]);
    records.push_back(r);
  }
  return records;
}

}  // namespace porter
