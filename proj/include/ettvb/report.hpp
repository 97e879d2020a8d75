#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ettvb/harness.hpp"

namespace ettvb {

/// Aggregate summary. Every float is rounded to 15 significant digits and no
/// timing is included, so equal campaigns give byte-identical text.
nlohmann::json summary_json(const CampaignReport& report);

/// Writes into out_dir (created if needed):
///   summary.json    aggregate and per-run statistics
///   runs.csv        one row per (run, step), full precision
///   timing.csv      wall time per run
///   truth.csv       ground truth of run 0
///   trajectory.svg  truth path of run 0 with true and estimated ellipses
///   gw.svg          GW distance versus step, mean over runs
/// Throws std::invalid_argument for an empty campaign (nothing is written) and
/// std::runtime_error when a file cannot be written.
void emit_report(const CampaignReport& report, const std::filesystem::path& out_dir);

/// Regenerates the SVG plots from summary.json and runs.csv in results_dir.
void plot_results(const std::filesystem::path& results_dir);

nlohmann::json oracle_json(const OracleComparison& cmp);

}  // namespace ettvb
