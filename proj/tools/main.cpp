#include "ietmfc/app/commands.hpp"
#include "ietmfc/app/config.hpp"
#include "ietmfc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace app = ietmfc::app;

int main(int argc, char** argv) {
  CLI::App cli{"Population games with erroneous initial information"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", IETMFC_VERSION_STRING);

  app::SimulateRequest sim;
  std::string regime, mod_points, recenter, k_list;
  std::uint64_t seed = 0;
  auto* simulate = cli.add_subcommand("simulate", "Simulate a population and write traces");
  simulate->add_option("--config", sim.config, "Scenario JSON (default: reference scenario)");
  simulate->add_option("--regime", regime, "complete | erroneous | iet-dmfc");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--seeds", sim.seeds, "Number of consecutive seeds to sweep")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--mod-points", mod_points,
                       "Modification instants in observation steps, e.g. 5,50");
  simulate->add_option("--recenter", recenter, "on | off")
      ->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--k-list", k_list, "Window counts for the estimate sweep");

  app::EstimateRequest est;
  std::string est_k_list;
  auto* estimate = cli.add_subcommand("estimate", "Re-estimate errors from a simulated trace");
  estimate->add_option("--config", est.config, "Scenario JSON (default: from the trace)");
  estimate->add_option("--trace", est.trace, "Run directory written by simulate")->required();
  estimate->add_option("--k-list", est_k_list, "Window counts, e.g. 10,25,50,100")->required();
  estimate->add_option("--out", est.out, "Output directory")->required();

  std::vector<std::filesystem::path> runs;
  std::filesystem::path report_out;
  auto* report = cli.add_subcommand("report", "Aggregate run directories into report.json");
  report->add_option("runs", runs, "Run directories")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(cli, argc, argv);

  try {
    if (simulate->parsed()) {
      if (simulate->count("--regime")) {
        auto r = ietmfc::parse_regime(regime);
        if (!r) throw app::ConfigError("unknown regime '" + regime + "'");
        sim.regime = *r;
      }
      if (simulate->count("--seed")) sim.seed = seed;
      if (simulate->count("--mod-points")) sim.mod_points = app::parse_int_list(mod_points);
      if (simulate->count("--recenter")) sim.recenter = recenter == "on";
      if (simulate->count("--k-list")) sim.k_list = app::parse_int_list(k_list);
      return app::cmd_simulate(sim, std::cerr);
    }
    if (estimate->parsed()) {
      est.k_list = app::parse_int_list(est_k_list);
      return app::cmd_estimate(est, std::cerr);
    }
    return app::cmd_report(runs, report_out, std::cerr);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::ExitCode::config_error;
  } catch (const ietmfc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return app::ExitCode::numerical_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::ExitCode::config_error;
  }
}
