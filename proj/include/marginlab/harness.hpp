#ifndef MARGINLAB_HARNESS_HPP
#define MARGINLAB_HARNESS_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "marginlab/dataset.hpp"
#include "marginlab/datagen.hpp"
#include "marginlab/diagnostics.hpp"
#include "marginlab/errors.hpp"
#include "marginlab/loss.hpp"
#include "marginlab/margins.hpp"
#include "marginlab/optimizer.hpp"
#include "marginlab/rng.hpp"
#include "marginlab/schedule.hpp"
#include "marginlab/svg_plot.hpp"
#include "marginlab/trajectory.hpp"

namespace marginlab {

/// Writes content to path through a temp file plus rename, so readers never
/// observe a partially written artifact.
inline void write_file_atomic(const std::string& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset load_dataset(const std::string& path) {
  return Dataset::from_json(nlohmann::json::parse(read_file(path)));
}

inline void save_dataset(const Dataset& data, const std::string& path) {
  write_file_atomic(path, data.to_json().dump(2) + "\n");
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

/// Which update rule a run uses, with its hyperparameters.
struct OptimizerSpec {
  enum class Kind { kAdam, kGd, kGdm };
  Kind kind = Kind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 0.0;
  double momentum = 0.9;

  AdamConfig adam_config() const { return AdamConfig(beta1, beta2, epsilon); }
  BaselineConfig baseline_config() const {
    return kind == Kind::kGdm ? BaselineConfig::gdm(momentum)
                              : BaselineConfig::gd();
  }

  std::string label() const {
    switch (kind) {
      case Kind::kGd:
        return "gd";
      case Kind::kGdm:
        return "gdm(mu=" + format_double(momentum) + ")";
      case Kind::kAdam:
      default:
        return std::string("adam(eps=") + format_double(epsilon) + ")";
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["type"] = kind == Kind::kAdam ? "adam" : (kind == Kind::kGd ? "gd" : "gdm");
    if (kind == Kind::kAdam) {
      j["beta1"] = beta1;
      j["beta2"] = beta2;
      j["epsilon"] = epsilon;
    } else if (kind == Kind::kGdm) {
      j["momentum"] = momentum;
    }
    return j;
  }

  static OptimizerSpec from_json(const nlohmann::json& j) {
    OptimizerSpec spec;
    const std::string type = j.at("type").get<std::string>();
    if (type == "adam") {
      spec.kind = Kind::kAdam;
      if (j.contains("beta1")) spec.beta1 = j.at("beta1").get<double>();
      if (j.contains("beta2")) spec.beta2 = j.at("beta2").get<double>();
      if (j.contains("epsilon")) spec.epsilon = j.at("epsilon").get<double>();
    } else if (type == "gd") {
      spec.kind = Kind::kGd;
    } else if (type == "gdm") {
      spec.kind = Kind::kGdm;
      if (j.contains("momentum")) spec.momentum = j.at("momentum").get<double>();
    } else {
      throw InvalidInputError("unknown optimizer type: " + type);
    }
    return spec;
  }
};

inline nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  if (s.rule() == Schedule::Rule::kConstant) {
    j["rule"] = "constant";
    j["eta"] = s.constant_eta();
  } else {
    j["rule"] = "power_decay";
    j["a"] = s.decay_exponent();
    j["c"] = s.scale();
  }
  return j;
}

inline Schedule schedule_from_json(const nlohmann::json& j) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "constant") return Schedule::constant(j.at("eta").get<double>());
  if (rule == "power_decay")
    return Schedule::power_decay(j.at("a").get<double>(),
                                 j.contains("c") ? j.at("c").get<double>() : 1.0);
  throw InvalidInputError("unknown schedule rule: " + rule);
}

/// Full description of one training run.
struct RunConfig {
  std::string dataset_path;
  LossKind loss = LossKind::kLogistic;
  OptimizerSpec optimizer;
  Schedule schedule = Schedule::power_decay(0.5);
  std::int64_t steps = 1;
  double log_stride = 1.1;  // geometric logging grid factor
  std::int64_t w0_seed = 0;
  std::string output_path;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dataset"] = dataset_path;
    j["loss"] = to_string(loss);
    j["optimizer"] = optimizer.to_json();
    j["schedule"] = schedule_to_json(schedule);
    j["steps"] = steps;
    j["log_stride"] = log_stride;
    j["w0_seed"] = w0_seed;
    j["output"] = output_path;
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.dataset_path = j.at("dataset").get<std::string>();
    cfg.loss = loss_kind_from_string(j.at("loss").get<std::string>());
    cfg.optimizer = OptimizerSpec::from_json(j.at("optimizer"));
    cfg.schedule = schedule_from_json(j.at("schedule"));
    cfg.steps = j.at("steps").get<std::int64_t>();
    if (j.contains("log_stride")) cfg.log_stride = j.at("log_stride").get<double>();
    cfg.w0_seed = j.at("w0_seed").get<std::int64_t>();
    cfg.output_path = j.at("output").get<std::string>();
    return cfg;
  }
};

/// Geometric logging grid: 0, then each next index at least one step and at
/// most a factor `stride` further, and always steps-1.
inline std::vector<std::int64_t> log_grid(std::int64_t steps, double stride) {
  if (steps < 1) throw InvalidInputError("log_grid: steps must be >= 1");
  if (!(stride > 1.0)) throw InvalidInputError("log_grid: stride must exceed 1");
  std::vector<std::int64_t> grid;
  std::int64_t t = 0;
  while (t < steps - 1) {
    grid.push_back(t);
    t = std::max(t + 1, static_cast<std::int64_t>(
                            static_cast<double>(t) * stride));
  }
  grid.push_back(steps - 1);
  return grid;
}

/// Outcome of run_experiment beyond the files on disk.
struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::vector<double> final_iterate;
  double gamma_linf = 0.0;
  double gamma_l2 = 0.0;
  double rho_hat = 0.0;
  bool assumption2_ok = false;
  std::string dataset_hash;
};

/// Executes one configured run: draws w0, trains for cfg.steps iterations
/// with per-step rescale management (Adam only; baselines use raw gradients),
/// writes the trajectory CSV and a metadata JSON at output_path(.meta.json).
/// The MARGINLAB_SEED environment variable, when set, overrides cfg.w0_seed.
inline RunResult run_experiment(const RunConfig& cfg) {
  if (cfg.steps < 1) throw InvalidInputError("run_experiment: steps >= 1");
  const Dataset data = load_dataset(cfg.dataset_path);
  const std::size_t d = data.d();

  std::int64_t w0_seed = cfg.w0_seed;
  if (const char* env = std::getenv("MARGINLAB_SEED")) {
    w0_seed = std::stoll(env);
  }

  const MarginCertificate linf = linf_max_margin(data);
  const MarginCertificate l2 = l2_max_margin(data);
  const SimplexL1Dual dual = simplex_l1_dual(data);

  Xoshiro256 rng(static_cast<std::uint64_t>(w0_seed));
  std::vector<double> w0(d);
  for (auto& x : w0) x = rng.normal();

  const Assumption2Report a2 = check_assumption2(data, w0, cfg.loss);
  if (!a2.ok)
    std::cerr << "warning: gradient has a zero coordinate at w0 "
                 "(rho_hat = 0); continuing\n";

  const bool is_adam = cfg.optimizer.kind == OptimizerSpec::Kind::kAdam;
  const std::optional<AdamConfig> adam_cfg =
      is_adam ? std::optional<AdamConfig>(cfg.optimizer.adam_config())
              : std::nullopt;
  const BaselineConfig base_cfg = cfg.optimizer.baseline_config();

  const std::vector<std::int64_t> grid = log_grid(cfg.steps, cfg.log_stride);

  OptimizerState state(w0);
  RunResult result;
  result.gamma_linf = linf.gamma;
  result.gamma_l2 = l2.gamma;
  result.rho_hat = a2.rho_hat;
  result.assumption2_ok = a2.ok;
  result.dataset_hash = hash_hex(data.content_hash());
  result.records.reserve(grid.size());

  LossEval eval;
  std::size_t next_log = 0;
  for (std::int64_t t = 0; t < cfg.steps; ++t) {
    const double eta = schedule_eta(cfg.schedule, t);
    eval = evaluate(state.w, data, cfg.loss, /*rescale=*/is_adam);

    const bool logged = next_log < grid.size() && grid[next_log] == t;
    TrajectoryRecord rec;
    if (logged) {
      ++next_log;
      rec.t = t;
      rec.eta = eta;
      rec.loss = eval.value;
      rec.g_value = eval.g_value;
      rec.grad_scale_log = eval.scale_log;
      const std::vector<double> margins = per_sample_margins(state.w, data);
      double min_margin = margins[0];
      for (double m : margins) min_margin = std::min(min_margin, m);
      double winf = 0.0, w2 = 0.0;
      for (double x : state.w) {
        winf = std::max(winf, std::fabs(x));
        w2 += x * x;
      }
      rec.min_margin = min_margin;
      rec.winf = winf;
      rec.w2 = std::sqrt(w2);
      rec.norm_margin_inf = min_margin / winf;
      rec.norm_margin_2 = min_margin / rec.w2;
    }

    std::vector<double> pre_w;
    if (logged && is_adam) pre_w = state.w;

    if (is_adam)
      state = adam_step(std::move(state), eval, eta, *adam_cfg);
    else
      state = baseline_step(std::move(state), eval, eta, base_cfg);

    if (logged) {
      if (is_adam) {
        const InvariantReport inv =
            collect(pre_w, state, eval, eta, *adam_cfg, data);
        rec.moment_ratio_max = inv.moment_ratio_max;
        rec.gap_m_ratio = inv.gap_m_ratio;
        rec.gap_v_ratio = inv.gap_v_ratio;
      }
      result.records.push_back(std::move(rec));
    }
  }
  result.final_iterate = state.w;

  std::string csv = kTrajectoryCsvHeader;
  csv += '\n';
  for (const auto& rec : result.records) {
    csv += trajectory_csv_row(rec);
    csv += '\n';
  }
  write_file_atomic(cfg.output_path, csv);

  nlohmann::json meta;
  meta["config"] = cfg.to_json();
  meta["label"] = cfg.optimizer.label() + "/" + to_string(cfg.loss) + "/" +
                  cfg.schedule.describe();
  meta["w0_seed_used"] = w0_seed;
  meta["dataset_hash"] = result.dataset_hash;
  meta["gamma_linf"] = linf.gamma;
  meta["gamma_l2"] = l2.gamma;
  meta["duality_gap"] = std::fabs(dual.value - linf.gamma);
  meta["rho_hat"] = a2.rho_hat;
  meta["assumption2_ok"] = a2.ok;
  const TrajectoryRecord& last = result.records.back();
  meta["final"] = {{"t", last.t},
                   {"loss", last.loss},
                   {"g_value", last.g_value},
                   {"norm_margin_inf", last.norm_margin_inf},
                   {"norm_margin_2", last.norm_margin_2},
                   {"winf", last.winf},
                   {"w2", last.w2},
                   {"grad_scale_log", last.grad_scale_log}};
  meta["final_iterate"] = result.final_iterate;
  write_file_atomic(cfg.output_path + ".meta.json", meta.dump(2) + "\n");
  return result;
}

/// Certifies both margins of a dataset and writes them with the LP duality
/// gap. Returns false when the data is non-separable (flags are still
/// written).
inline bool certify(const std::string& dataset_path,
                    const std::string& out_path) {
  const Dataset data = load_dataset(dataset_path);
  const MarginCertificate linf = linf_max_margin(data);
  const SimplexL1Dual dual = simplex_l1_dual(data);
  const MarginCertificate l2 = l2_max_margin(data);
  nlohmann::json j;
  j["dataset_hash"] = hash_hex(data.content_hash());
  j["linf"] = linf.to_json();
  j["l2"] = l2.to_json();
  j["duality_gap"] = std::fabs(dual.value - linf.gamma);
  j["simplex_dual_value"] = dual.value;
  j["simplex_dual_r"] = dual.r;
  write_file_atomic(out_path, j.dump(2) + "\n");
  return linf.separable;
}

/// Comparison across runs sharing one dataset: margin-vs-step plots for both
/// norms with the certified optima as reference lines, a log-log plot of the
/// l_inf margin gap, a merged CSV and a JSON summary.
inline void compare(const std::vector<std::string>& run_paths,
                    const std::string& certificates_path,
                    const std::string& out_dir) {
  if (run_paths.empty())
    throw InvalidInputError("compare: need at least one run");
  const nlohmann::json certs = nlohmann::json::parse(read_file(certificates_path));
  const double gamma = certs.at("linf").at("gamma").get<double>();
  const double gamma2 = certs.at("l2").at("gamma").get<double>();
  const std::string cert_hash =
      certs.contains("dataset_hash") ? certs.at("dataset_hash").get<std::string>()
                                     : std::string();

  struct Run {
    std::string label;
    std::vector<TrajectoryRecord> records;
  };
  std::vector<Run> runs;
  std::string expected_hash = cert_hash;
  for (const auto& path : run_paths) {
    const nlohmann::json meta =
        nlohmann::json::parse(read_file(path + ".meta.json"));
    const std::string hash = meta.at("dataset_hash").get<std::string>();
    if (expected_hash.empty()) expected_hash = hash;
    if (hash != expected_hash)
      throw IncompatibleRunsError("dataset hash mismatch for " + path + ": " +
                                  hash + " vs " + expected_hash);
    runs.push_back({meta.at("label").get<std::string>(),
                    read_trajectory_csv(path)});
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  SvgLinePlot plot_inf("normalized l-inf margin", "iteration t",
                       "min margin / ||w||_inf");
  plot_inf.set_log_x(true);
  SvgLinePlot plot_l2("normalized l2 margin", "iteration t",
                      "min margin / ||w||_2");
  plot_l2.set_log_x(true);
  SvgLinePlot plot_gap("l-inf margin gap", "iteration t",
                       "gamma - normalized margin");
  plot_gap.set_log_x(true);
  plot_gap.set_log_y(true);

  for (const auto& run : runs) {
    std::vector<std::pair<double, double>> inf_pts, l2_pts, gap_pts;
    for (const auto& rec : run.records) {
      const double t = static_cast<double>(rec.t) + 1.0;  // log axis at t=0
      inf_pts.emplace_back(t, rec.norm_margin_inf);
      l2_pts.emplace_back(t, rec.norm_margin_2);
      gap_pts.emplace_back(t, gamma - rec.norm_margin_inf);
    }
    plot_inf.add_series(run.label, std::move(inf_pts));
    plot_l2.add_series(run.label, std::move(l2_pts));
    plot_gap.add_series(run.label, std::move(gap_pts));
  }
  plot_inf.add_hline(gamma, "gamma (max l-inf margin)");
  plot_l2.add_hline(gamma2, "gamma_2 (max l2 margin)");

  write_file_atomic(out_dir + "/margins_linf.svg", plot_inf.render());
  write_file_atomic(out_dir + "/margins_l2.svg", plot_l2.render());
  write_file_atomic(out_dir + "/margin_gap_loglog.svg", plot_gap.render());

  std::string merged = std::string("run,") + kTrajectoryCsvHeader + "\n";
  for (const auto& run : runs)
    for (const auto& rec : run.records)
      merged += run.label + "," + trajectory_csv_row(rec) + "\n";
  write_file_atomic(out_dir + "/merged.csv", merged);

  nlohmann::json report;
  report["gamma_linf"] = gamma;
  report["gamma_l2"] = gamma2;
  report["dataset_hash"] = expected_hash;
  nlohmann::json finals = nlohmann::json::array();
  for (const auto& run : runs) {
    const auto& last = run.records.back();
    finals.push_back({{"label", run.label},
                      {"t", last.t},
                      {"norm_margin_inf", last.norm_margin_inf},
                      {"norm_margin_2", last.norm_margin_2}});
  }
  report["final"] = finals;
  write_file_atomic(out_dir + "/comparison.json", report.dump(2) + "\n");
}

}  // namespace marginlab

#endif  // MARGINLAB_HARNESS_HPP
