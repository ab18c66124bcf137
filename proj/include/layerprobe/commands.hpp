#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "layerprobe/dimred.hpp"
#include "layerprobe/report.hpp"
#include "layerprobe/synthgen.hpp"

namespace layerprobe {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitDataError = 1, kExitUsage = 2 };

/// Writes tensor.npy and labels.csv into `out_dir` (created if needed) and
/// returns a one-line shape summary.
std::string cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir);

struct GdvOptions {
  std::filesystem::path tensor;
  std::filesystem::path labels;
  std::vector<std::string> kinds;  // empty: every kind in the labels file
  std::vector<Space> spaces;       // empty: raw only
  std::optional<std::filesystem::path> breakdown;
};

/// Returns the report CSV; optionally writes the per-class breakdown CSV.
std::string cmd_gdv(const GdvOptions& options, std::ostream& warnings);

/// Writes one `point,x,y` CSV per layer into `out_dir`; returns the paths.
std::vector<std::filesystem::path> cmd_project(const std::filesystem::path& tensor,
                                               ProjectionMethod method,
                                               const std::filesystem::path& out_dir,
                                               std::ostream& warnings);

struct PlotOptions {
  /// A directory of layer CSVs (scatter grid) or a report CSV (trend chart).
  std::filesystem::path input;
  std::optional<std::filesystem::path> labels;  // required for scatter grids
  std::vector<std::string> kinds;  // scatter: exactly one; trend: optional filter
  std::filesystem::path out;
};

void cmd_plot(const PlotOptions& options);

/// Full analysis: report.csv and breakdown.csv over raw/pca2d/mds2d for every
/// kind, coords/{pca,mds}/layer_*.csv, scatter_{pca,mds}_<kind>.svg and
/// gdv_trend.svg. Nothing is written unless every step succeeds; if writing
/// itself fails, files already written by this run are removed.
std::vector<std::filesystem::path> cmd_pipeline(const std::filesystem::path& tensor,
                                                const std::filesystem::path& labels,
                                                const std::filesystem::path& out_dir,
                                                std::ostream& warnings);

/// Parses `args` (without the program name) and dispatches. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace layerprobe
