#pragma once

// Command-line front end: flag parsing and validation into a CliConfig,
// and the runners that produce result CSVs plus a reproducibility manifest.

#include <CLI11.hpp>
#include <cstdlib>

#include "rsma/io.hpp"

namespace rsma::cli {

struct CliConfig {
  std::string subcommand;  // solve | region | sumrate | dump-channels
  ExperimentConfig experiment;
  std::string output = "rsma_out";
  int verbosity = 0;
  int realization = 0;  // solve subcommand
};

/// Parse and fully validate argv; throws std::invalid_argument naming the
/// offending flag on any error. No computation happens here.
inline CliConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"RSMA precoder optimization for cooperative multi-cell downlink"};
  app.require_subcommand(1);

  CliConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    auto& e = cfg.experiment;
    sub->add_option("--topology", e.topology)
        ->check(CLI::IsMember({"two-cell", "three-cell"}));
    sub->add_option("--alpha", e.alpha)->check(CLI::Range(1e-12, 1.0));
    sub->add_option("--beta", e.beta)->check(CLI::Range(1e-12, 1.0));
    sub->add_option("--snr-db", e.snr_db)->delimiter(',');
    sub->add_option("--schemes", e.schemes)->delimiter(',');
    sub->add_option("--realizations", e.realizations)->check(CLI::PositiveNumber);
    sub->add_option("--seed", e.seed);
    sub->add_option("--weights-grid", e.u2_exponents)->delimiter(',');
    sub->add_option("--qos", e.qos_schedule)->delimiter(',');
    sub->add_option("--tolerance", e.tolerance)->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", e.max_iters)->check(CLI::PositiveNumber);
    sub->add_option("--threads", e.threads)->check(CLI::PositiveNumber);
    sub->add_option("--output", cfg.output);
    sub->add_flag("-v,--verbose", cfg.verbosity);
  };

  auto* solve = app.add_subcommand("solve", "single-instance WMMSE solve");
  add_common(solve);
  solve->add_option("--realization", cfg.realization)->check(CLI::NonNegativeNumber);
  auto* region = app.add_subcommand("region", "rate-region weight sweep");
  add_common(region);
  auto* sumrate = app.add_subcommand("sumrate", "sum rate vs SNR");
  add_common(sumrate);
  auto* dump = app.add_subcommand("dump-channels", "write channel realizations");
  add_common(dump);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(std::string("usage error: ") + e.what());
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  if (cfg.experiment.threads == 1) {
    if (const char* env = std::getenv("RSMA_COMP_THREADS")) {
      const int t = std::atoi(env);
      if (t >= 1) cfg.experiment.threads = t;
    }
  }
  // full validation before any computation
  if (cfg.subcommand == "sumrate" && cfg.experiment.qos_schedule.size() == 1)
    cfg.experiment.qos_schedule.assign(cfg.experiment.snr_db.size(),
                                       cfg.experiment.qos_schedule.front());
  for (double q : cfg.experiment.qos_schedule)
    if (q < 0.0) throw std::invalid_argument("usage error: --qos entries must be >= 0");
  cfg.experiment.validate();
  if (cfg.subcommand == "region" && cfg.experiment.num_users() != 2)
    throw std::invalid_argument("usage error: region requires --topology two-cell");
  return cfg;
}

inline nlohmann::json solution_json(const Solution& sol, const ProblemInstance& inst) {
  nlohmann::json j;
  j["status"] = sol.status == ConvergeStatus::converged   ? "converged"
                : sol.status == ConvergeStatus::infeasible ? "infeasible"
                                                           : "max-iter";
  j["iterations"] = sol.iterations;
  j["wsr"] = sol.report.wsr;
  std::vector<double> rates(sol.report.user_total.data(),
                            sol.report.user_total.data() + sol.report.user_total.size());
  j["user_rates"] = rates;
  std::vector<double> power(sol.per_bs_power.data(),
                            sol.per_bs_power.data() + sol.per_bs_power.size());
  j["per_bs_power"] = power;
  std::vector<double> limits(inst.per_bs_power.data(),
                             inst.per_bs_power.data() + inst.per_bs_power.size());
  j["per_bs_limit"] = limits;
  j["monotone_warning"] = sol.monotone_warning;
  j["solver_failures"] = sol.solver_failures;
  return j;
}

inline std::string trace_csv(const Solution& sol) {
  std::ostringstream os;
  os << "iteration,wsr,max_power_residual,max_qos_residual\n";
  for (const auto& rec : sol.trace)
    os << rec.iteration << "," << io::num(rec.wsr) << ","
       << io::num(rec.max_power_residual) << "," << io::num(rec.max_qos_residual)
       << "\n";
  return os.str();
}

/// Execute the parsed command; writes the result files and the manifest.
/// Returns the process exit status.
inline int run(const CliConfig& cfg) {
  const auto& e = cfg.experiment;
  if (cfg.subcommand == "region") {
    const auto result = rate_region(e);
    io::write_file(cfg.output + ".csv", io::region_csv(result, e));
    io::write_file(cfg.output + "_hull.csv", io::hull_csv(result));
  } else if (cfg.subcommand == "sumrate") {
    const auto rows = sum_rate_vs_snr(e);
    io::write_file(cfg.output + ".csv", io::sumrate_csv(rows, e));
  } else if (cfg.subcommand == "dump-channels") {
    io::write_file(cfg.output + ".csv", io::channels_csv(e));
  } else if (cfg.subcommand == "solve") {
    const int K = e.num_users();
    const int M = K;
    const double ptot = std::pow(10.0, e.snr_db.front() / 10.0);
    const double qos = e.qos_schedule.empty() ? 0.0 : e.qos_schedule.front();
    const auto inst = ProblemInstance::make(M, K, Vec::Constant(M, ptot / M),
                                            Vec::Constant(K, qos), Vec::Ones(K));
    const ChannelState ch = e.channel(cfg.realization);
    const auto layout = scheme_variants(e.schemes.front(), K).front().layout;
    const auto sol = ao_solve(inst, layout, ch, e.ao_options());
    nlohmann::json j = solution_json(sol, inst);
    io::write_file(cfg.output + ".json", j.dump(2) + "\n");
    io::write_file(cfg.output + "_trace.csv", trace_csv(sol));
  } else {
    throw std::invalid_argument("unknown subcommand " + cfg.subcommand);
  }
  io::write_file(cfg.output + ".manifest.json",
                 io::manifest(e, cfg.subcommand).dump(2) + "\n");
  return 0;
}

}  // namespace rsma::cli
