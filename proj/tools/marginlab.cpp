// Command-line front end: dataset generation, margin certification, training
// runs, run comparison, schedule checks and the lemma property suite.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "marginlab/datagen.hpp"
#include "marginlab/diagnostics.hpp"
#include "marginlab/harness.hpp"
#include "marginlab/loss.hpp"
#include "marginlab/margins.hpp"
#include "marginlab/optimizer.hpp"
#include "marginlab/rng.hpp"
#include "marginlab/schedule.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonSeparable = 4;

struct ScheduleFlags {
  std::string rule = "power_decay";
  double eta = 0.01;
  double a = 0.5;
  double c = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--schedule", rule, "constant | power_decay")
        ->check(CLI::IsMember({"constant", "power_decay"}));
    cmd->add_option("--eta", eta, "learning rate (constant rule)");
    cmd->add_option("--a", a, "decay exponent in (0,1] (power_decay rule)");
    cmd->add_option("--c", c, "scale factor (power_decay rule)");
  }

  marginlab::Schedule build() const {
    if (rule == "constant") return marginlab::Schedule::constant(eta);
    return marginlab::Schedule::power_decay(a, c);
  }
};

int run_lemma_suite(std::uint64_t seed) {
  using namespace marginlab;
  Xoshiro256 rng(seed);
  bool all_ok = true;
  auto report = [&all_ok](const std::string& name, bool ok,
                          const std::string& detail = "") {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    all_ok = all_ok && ok;
  };

  // pointwise loss inequalities over random points in [-50, 50]
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double z1 = (rng.uniform01() - 0.5) * 100.0;
    const double z2 = (rng.uniform01() - 0.5) * 100.0;
    for (const LossKind kind : {LossKind::kLogistic, LossKind::kExponential})
      if (!loss_property_check(z1, z2, kind).holds) ++violations;
  }
  report("loss-pointwise-inequalities", violations == 0,
         std::to_string(violations) + " violations / 10000 draws");

  // G/R lower bound for logistic loss on random instances
  violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.next() % 10);
    const std::size_t dd = 1 + static_cast<std::size_t>(rng.next() % 5);
    std::vector<double> z(n * dd);
    for (auto& v : z) v = rng.normal();
    const Dataset data(n, dd, std::move(z));
    std::vector<double> w(dd);
    for (auto& v : w) v = rng.normal() * 2.0;
    if (!ratio_log_check(w, data).holds) ++violations;
  }
  report("g-over-r-lower-bound", violations == 0,
         std::to_string(violations) + " violations / 1000 instances");

  // schedule tail-ratio boundedness
  {
    const double beta = 0.9, c1 = 1.0;
    const auto constant = check_assumption4(
        Schedule::constant((1.0 - beta) / (2.0 * c1)), beta, c1, 10000);
    const double const_bound = 2.0 * c1 / ((1.0 - beta) * (1.0 - beta));
    report("schedule-ratio-constant", constant.tail_sup <= const_bound,
           "tail sup " + format_double(constant.tail_sup) + " <= " +
               format_double(const_bound));
    const auto half = check_assumption4(Schedule::power_decay(0.5), beta, c1, 10000);
    const double half_bound =
        8.0 * c1 / ((1.0 - beta) * (1.0 - beta) * (1.0 - 0.5));
    report("schedule-ratio-a0.5", std::isfinite(half.tail_sup) &&
                                       half.tail_sup <= half_bound,
           "tail sup " + format_double(half.tail_sup));
    const auto one = check_assumption4(Schedule::power_decay(1.0), beta, c1, 10000);
    report("schedule-ratio-a1", std::isfinite(one.tail_sup),
           "tail sup " + format_double(one.tail_sup));
  }
  return all_ok ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"max-margin implicit-bias experiment harness"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a Gaussian dataset");
  std::size_t gen_n = 50, gen_d = 50, candidates = 1;
  std::int64_t gen_seed = 1;
  std::string gen_out = "dataset.json", gen_report;
  gen->add_option("--n", gen_n, "sample count");
  gen->add_option("--d", gen_d, "feature dimension");
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--candidates", candidates,
                  "when > 1, pick the candidate maximizing the angle between "
                  "the l2 and l-inf optimal directions");
  gen->add_option("--out", gen_out, "output dataset JSON path");
  gen->add_option("--report", gen_report, "selection report JSON path");

  // certify
  auto* cert = app.add_subcommand("certify", "certify both maximum margins");
  std::string cert_data, cert_out = "certificates.json";
  cert->add_option("--data", cert_data, "dataset JSON path")->required();
  cert->add_option("--out", cert_out, "output certificates path");

  // train
  auto* train = app.add_subcommand("train", "run one optimizer trajectory");
  std::string train_config;
  marginlab::RunConfig run_cfg;
  std::string train_optimizer = "adam", train_loss = "logistic";
  double beta1 = 0.9, beta2 = 0.99, epsilon = 0.0, momentum = 0.9;
  ScheduleFlags train_schedule;
  train->add_option("--config", train_config, "load RunConfig from JSON");
  train->add_option("--data", run_cfg.dataset_path, "dataset JSON path");
  train->add_option("--loss", train_loss, "logistic | exponential")
      ->check(CLI::IsMember({"logistic", "exponential"}));
  train->add_option("--optimizer", train_optimizer, "adam | gd | gdm")
      ->check(CLI::IsMember({"adam", "gd", "gdm"}));
  train->add_option("--beta1", beta1, "adam beta1");
  train->add_option("--beta2", beta2, "adam beta2");
  train->add_option("--epsilon", epsilon, "adam stability constant");
  train->add_option("--mu", momentum, "gdm momentum");
  train_schedule.attach(train);
  train->add_option("--steps", run_cfg.steps, "iteration count");
  train->add_option("--log-stride", run_cfg.log_stride,
                    "geometric logging factor (> 1)");
  train->add_option("--w0-seed", run_cfg.w0_seed,
                    "initialization seed (MARGINLAB_SEED overrides)");
  train->add_option("--out", run_cfg.output_path, "trajectory CSV path");

  // compare
  auto* cmp = app.add_subcommand("compare", "merge runs and emit plots");
  std::vector<std::string> cmp_runs;
  std::string cmp_certs, cmp_out = "comparison";
  cmp->add_option("--run", cmp_runs, "trajectory CSV path (repeatable)")
      ->required();
  cmp->add_option("--certificates", cmp_certs, "certificates JSON path")
      ->required();
  cmp->add_option("--out-dir", cmp_out, "output directory");

  // check-assumption
  auto* chk = app.add_subcommand(
      "check-assumption", "schedule ratio condition or initialization check");
  int which = 4;
  double chk_beta = 0.9, chk_c1 = 1.0;
  std::int64_t horizon = 10000;
  std::string chk_data, chk_loss = "logistic", chk_out;
  std::int64_t chk_w0_seed = 0;
  ScheduleFlags chk_schedule;
  chk->add_option("--which", which, "4 = schedule ratios, 2 = initialization")
      ->check(CLI::IsMember({2, 4}));
  chk->add_option("--beta", chk_beta, "geometric decay in (0,1)");
  chk->add_option("--c1", chk_c1, "exponent constant");
  chk->add_option("--horizon", horizon, "number of steps to probe");
  chk_schedule.attach(chk);
  chk->add_option("--data", chk_data, "dataset path (initialization check)");
  chk->add_option("--loss", chk_loss, "loss for the initialization check");
  chk->add_option("--w0-seed", chk_w0_seed, "initialization seed");
  chk->add_option("--out", chk_out, "write the JSON report here");

  // lemma-suite
  auto* lemmas =
      app.add_subcommand("lemma-suite", "run the property sweeps and report");
  std::uint64_t lemma_seed = 20240901;
  lemmas->add_option("--seed", lemma_seed, "sweep seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (candidates <= 1) {
        marginlab::save_dataset(
            marginlab::generate_gaussian(gen_n, gen_d, gen_seed), gen_out);
      } else {
        auto sel =
            marginlab::select_adversarial(candidates, gen_n, gen_d, gen_seed);
        marginlab::save_dataset(sel.dataset, gen_out);
        const std::string report_path =
            gen_report.empty() ? gen_out + ".selection.json" : gen_report;
        marginlab::write_file_atomic(report_path, sel.report().dump(2) + "\n");
        std::cout << "selected candidate " << sel.chosen_index
                  << " with gap angle " << sel.gap_angle << " rad\n";
      }
      std::cout << "wrote " << gen_out << "\n";
      return kExitOk;
    }
    if (cert->parsed()) {
      const bool separable = marginlab::certify(cert_data, cert_out);
      std::cout << "wrote " << cert_out << "\n";
      if (!separable) {
        std::cerr << "dataset is not linearly separable\n";
        return kExitNonSeparable;
      }
      return kExitOk;
    }
    if (train->parsed()) {
      if (!train_config.empty()) {
        run_cfg = marginlab::RunConfig::from_json(
            nlohmann::json::parse(marginlab::read_file(train_config)));
      } else {
        run_cfg.loss = marginlab::loss_kind_from_string(train_loss);
        run_cfg.schedule = train_schedule.build();
        marginlab::OptimizerSpec spec;
        if (train_optimizer == "adam") {
          spec.kind = marginlab::OptimizerSpec::Kind::kAdam;
          spec.beta1 = beta1;
          spec.beta2 = beta2;
          spec.epsilon = epsilon;
        } else if (train_optimizer == "gd") {
          spec.kind = marginlab::OptimizerSpec::Kind::kGd;
        } else {
          spec.kind = marginlab::OptimizerSpec::Kind::kGdm;
          spec.momentum = momentum;
        }
        run_cfg.optimizer = spec;
      }
      if (run_cfg.dataset_path.empty() || run_cfg.output_path.empty())
        throw marginlab::InvalidInputError("train needs --data and --out");
      const auto result = marginlab::run_experiment(run_cfg);
      std::cout << "wrote " << run_cfg.output_path << " ("
                << result.records.size() << " rows)\n";
      return kExitOk;
    }
    if (cmp->parsed()) {
      marginlab::compare(cmp_runs, cmp_certs, cmp_out);
      std::cout << "wrote " << cmp_out << "/\n";
      return kExitOk;
    }
    if (chk->parsed()) {
      nlohmann::json out;
      if (which == 4) {
        const auto rep = marginlab::check_assumption4(chk_schedule.build(),
                                                      chk_beta, chk_c1, horizon);
        out["tail_sup"] = rep.tail_sup;
        out["horizon"] = horizon;
        out["ratios_tail"] = std::vector<double>(
            rep.ratios.end() - std::min<std::size_t>(rep.ratios.size(), 20),
            rep.ratios.end());
        std::cout << "tail sup ratio: " << rep.tail_sup << "\n";
      } else {
        if (chk_data.empty())
          throw marginlab::InvalidInputError(
              "check-assumption --which 2 needs --data");
        const auto data = marginlab::load_dataset(chk_data);
        marginlab::Xoshiro256 rng(static_cast<std::uint64_t>(chk_w0_seed));
        std::vector<double> w0(data.d());
        for (auto& x : w0) x = rng.normal();
        const auto rep = marginlab::check_assumption2(
            data, w0, marginlab::loss_kind_from_string(chk_loss));
        out["rho_hat"] = rep.rho_hat;
        out["ok"] = rep.ok;
        std::cout << "rho_hat = " << rep.rho_hat
                  << (rep.ok ? " (ok)" : " (zero coordinate!)") << "\n";
      }
      if (!chk_out.empty())
        marginlab::write_file_atomic(chk_out, out.dump(2) + "\n");
      return kExitOk;
    }
    if (lemmas->parsed()) return run_lemma_suite(lemma_seed);
  } catch (const marginlab::NonSeparableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonSeparable;
  } catch (const marginlab::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const marginlab::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}
