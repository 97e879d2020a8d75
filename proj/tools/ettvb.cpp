#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ettvb/harness.hpp"
#include "ettvb/presets.hpp"
#include "ettvb/report.hpp"
#include "ettvb/serialization.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kConfigFailure = 2;

ettvb::HeadingWrap parse_wrap(const std::string& name) {
  if (name == "axial") return ettvb::HeadingWrap::Axial;
  if (name == "none") return ettvb::HeadingWrap::None;
  throw ettvb::ConfigError("heading wrap must be 'axial' or 'none'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational-Bayes extended target tracker with explicit orientation"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::string out_dir = "results";
  int workers = 1;
  std::string trace_path;
  std::string wrap_name = "axial";

  auto* run = app.add_subcommand("run", "Monte-Carlo campaign over a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "master seed (overrides the file)");
  run->add_option("--runs", runs, "number of runs (overrides the file)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);
  run->add_option("--trace", trace_path, "write per-sweep diagnostics of run 0 as JSON lines");
  run->add_option("--heading-wrap", wrap_name, "axial (default) or none");

  std::size_t samples = 1'000'000;
  std::string oracle_out;
  std::string dump_path;
  auto* oracle = app.add_subcommand("oracle", "Compare one VB update with a sampled posterior");
  oracle->add_option("scenario", scenario_path, "scenario JSON file")->required();
  oracle->add_option("--samples", samples, "importance samples")->required()->check(CLI::PositiveNumber);
  oracle->add_option("--seed", seed, "master seed (overrides the file)");
  oracle->add_option("--workers", workers, "sampling threads")->check(CLI::PositiveNumber);
  oracle->add_option("--out", oracle_out, "write the comparison JSON here instead of stdout");
  oracle->add_option("--dump", dump_path, "write the weighted samples as CSV");

  std::string results_dir;
  auto* plot = app.add_subcommand("plot", "Redraw SVG plots from a results directory");
  plot->add_option("results", results_dir, "directory written by 'run'")->required();

  std::string preset_name;
  std::string preset_out;
  auto* preset = app.add_subcommand("preset", "Print a built-in scenario as JSON");
  preset->add_option("name", preset_name, "cv-gaussian | cv-uniform | turns-uniform | turns-gaussian | single-update-oracle")
      ->required();
  preset->add_option("--out", preset_out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  try {
    if (*run) {
      ettvb::ScenarioSpec spec = ettvb::load_scenario(scenario_path);
      if (seed) spec.seed = *seed;
      if (runs) spec.runs = *runs;
      if (spec.runs < 1) throw ettvb::ConfigError("a campaign needs at least one run");
      ettvb::CampaignOptions options;
      options.workers = workers;
      options.wrap = parse_wrap(wrap_name);

      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot write " + trace_path);
        options.trace = [&trace](int step, const ettvb::SweepRecord& r) {
          nlohmann::json line{{"step", step},
                              {"iteration", r.iteration},
                              {"theta_mean", r.theta_mean},
                              {"theta_var", r.theta_variance},
                              {"alpha", {r.alpha(0), r.alpha(1)}},
                              {"beta", {r.beta(0), r.beta(1)}},
                              {"elbo", r.elbo}};
          trace << line.dump() << '\n';
        };
      }

      const ettvb::CampaignReport report = ettvb::run_campaign(spec, options);
      ettvb::emit_report(report, out_dir);
      const auto& a = report.aggregate;
      std::printf("%s: %d runs, mean GW %.4f m (center %.4f, extent %.4f), heading RMSE %.3f deg\n",
                  spec.name.c_str(), spec.runs, a.gw.mean, a.center_term.mean, a.extent_term.mean,
                  a.heading_rmse_deg.mean);
      std::printf("results in %s\n", out_dir.c_str());
    } else if (*oracle) {
      ettvb::ScenarioSpec spec = ettvb::load_scenario(scenario_path);
      if (seed) spec.seed = *seed;
      const ettvb::OracleComparison cmp = ettvb::compare_with_oracle(spec, samples, workers, dump_path);
      const std::string text = ettvb::oracle_json(cmp).dump(2);
      if (oracle_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream out(oracle_out);
        if (!out) throw std::runtime_error("cannot write " + oracle_out);
        out << text << '\n';
      }
    } else if (*plot) {
      ettvb::plot_results(results_dir);
    } else if (*preset) {
      const ettvb::ScenarioSpec spec = ettvb::make_preset(preset_name);
      if (preset_out.empty()) {
        std::cout << ettvb::scenario_to_json(spec).dump(2) << '\n';
      } else {
        ettvb::save_scenario(spec, preset_out);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
