#ifndef MARGINLAB_TRAJECTORY_HPP
#define MARGINLAB_TRAJECTORY_HPP

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "marginlab/errors.hpp"

namespace marginlab {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

/// One logged step of a training run. Optional fields are the Adam moment
/// diagnostics; they are absent (NA in the CSV) for GD/GDM runs and whenever
/// a ratio denominator underflowed.
struct TrajectoryRecord {
  std::int64_t t = 0;
  double eta = 0.0;
  double loss = 0.0;
  double g_value = 0.0;
  double min_margin = 0.0;
  double winf = 0.0;
  double w2 = 0.0;
  double norm_margin_inf = 0.0;
  double norm_margin_2 = 0.0;
  std::optional<double> moment_ratio_max;
  std::optional<double> gap_m_ratio;
  std::optional<double> gap_v_ratio;
  double grad_scale_log = 0.0;
};

inline constexpr const char* kTrajectoryCsvHeader =
    "t,eta,loss,g_value,min_margin,winf,w2,norm_margin_inf,norm_margin_2,"
    "moment_ratio_max,gap_m_ratio,gap_v_ratio,grad_scale_log";

inline std::string trajectory_csv_row(const TrajectoryRecord& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
  };
  std::string row;
  row += std::to_string(r.t);
  row += ',';
  row += format_double(r.eta);
  row += ',';
  row += format_double(r.loss);
  row += ',';
  row += format_double(r.g_value);
  row += ',';
  row += format_double(r.min_margin);
  row += ',';
  row += format_double(r.winf);
  row += ',';
  row += format_double(r.w2);
  row += ',';
  row += format_double(r.norm_margin_inf);
  row += ',';
  row += format_double(r.norm_margin_2);
  row += ',';
  row += opt(r.moment_ratio_max);
  row += ',';
  row += opt(r.gap_m_ratio);
  row += ',';
  row += opt(r.gap_v_ratio);
  row += ',';
  row += format_double(r.grad_scale_log);
  return row;
}

/// strtod-based parse: unlike std::stod it does not throw on subnormal
/// results (underflowed loss values are legitimate CSV content).
inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || end != s.c_str() + s.size())
    throw InvalidInputError("bad numeric field: " + s);
  return v;
}

inline std::vector<TrajectoryRecord> read_trajectory_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open trajectory CSV: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryCsvHeader)
    throw InvalidInputError("unexpected trajectory CSV header in " + path);

  std::vector<TrajectoryRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 13)
      throw InvalidInputError("malformed trajectory row: " + line);
    auto num = [](const std::string& s) { return parse_double(s); };
    auto opt = [&num](const std::string& s) -> std::optional<double> {
      if (s == "NA") return std::nullopt;
      return num(s);
    };
    TrajectoryRecord r;
    r.t = std::stoll(fields[0]);
    r.eta = num(fields[1]);
    r.loss = num(fields[2]);
    r.g_value = num(fields[3]);
    r.min_margin = num(fields[4]);
    r.winf = num(fields[5]);
    r.w2 = num(fields[6]);
    r.norm_margin_inf = num(fields[7]);
    r.norm_margin_2 = num(fields[8]);
    r.moment_ratio_max = opt(fields[9]);
    r.gap_m_ratio = opt(fields[10]);
    r.gap_v_ratio = opt(fields[11]);
    r.grad_scale_log = num(fields[12]);
    records.push_back(r);
  }
  return records;
}

}  // namespace marginlab

#endif  // MARGINLAB_TRAJECTORY_HPP
