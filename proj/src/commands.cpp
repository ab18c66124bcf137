#include "layerprobe/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "layerprobe/errors.hpp"
#include "layerprobe/svg_plot.hpp"
#include "layerprobe/tensor_store.hpp"

namespace fs = std::filesystem;

namespace layerprobe {

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void spill(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
}

void report_warnings(const std::vector<Projection2D>& projections, std::ostream& warnings) {
  for (std::size_t l = 0; l < projections.size(); ++l)
    for (const auto& w : projections[l].warnings)
      warnings << fmt::format("warning: layer {} ({}): {}\n", l,
                              to_string(projections[l].method), w);
}

std::vector<std::string> resolve_kinds(const LabelTable& labels,
                                       const std::vector<std::string>& requested) {
  return requested.empty() ? labels.kind_names() : requested;
}

// Files are staged in memory and written in one go.
class OutputSet {
 public:
  void add(fs::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }

  std::vector<fs::path> commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) ensure_dir(path.parent_path());
        spill(path, content);
        written.push_back(path);
      }
    } catch (...) {
      for (const auto& p : written) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw;
    }
    return written;
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::vector<double> parse_schedule(const std::string& text, std::size_t layers,
                                   const char* flag) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size())
      throw UsageError(fmt::format("{}: '{}' is not a number", flag, s));
    return v;
  };
  if (auto colon = text.find(':'); colon != std::string::npos)
    return linear_schedule(layers, number(text.substr(0, colon)), number(text.substr(colon + 1)));
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) values.push_back(number(item));
  if (values.size() == 1) return std::vector<double>(layers, values[0]);
  if (values.size() != layers)
    throw UsageError(fmt::format("{} has {} entries but --layers is {}", flag, values.size(),
                                 layers));
  return values;
}

}  // namespace

std::string cmd_synth(const SynthSpec& spec, const fs::path& out_dir) {
  auto [tensor, labels] = generate(spec);
  ensure_dir(out_dir);
  write_tensor(tensor, out_dir / "tensor.npy");
  write_labels(labels, out_dir / "labels.csv");
  return fmt::format("wrote {} with shape ({}, {}, {}) and {} (kinds: {})",
                     (out_dir / "tensor.npy").string(), tensor.layers(), tensor.points(),
                     tensor.dims(), (out_dir / "labels.csv").string(),
                     fmt::join(labels.kind_names(), ", "));
}

std::string cmd_gdv(const GdvOptions& options, std::ostream& warnings) {
  const auto tensor = read_tensor(options.tensor);
  const auto labels = read_labels(options.labels, tensor.points());
  const auto spaces = options.spaces.empty() ? std::vector<Space>{Space::kRaw} : options.spaces;
  const auto analysis = analyze(tensor, labels, resolve_kinds(labels, options.kinds), spaces);
  for (const auto& [method, proj] : analysis.projections) report_warnings(proj, warnings);
  if (options.breakdown) spill(*options.breakdown, format_breakdown_csv(analysis.breakdown));
  return format_report_csv(analysis.rows);
}

std::vector<fs::path> cmd_project(const fs::path& tensor_path, ProjectionMethod method,
                                  const fs::path& out_dir, std::ostream& warnings) {
  const auto tensor = read_tensor(tensor_path);
  const auto projections = project_layers(tensor, method);
  report_warnings(projections, warnings);
  OutputSet outputs;
  for (std::size_t l = 0; l < projections.size(); ++l)
    outputs.add(out_dir / coords_file_name(l, projections.size()),
                format_coords_csv(projections[l].coords));
  return outputs.commit();
}

void cmd_plot(const PlotOptions& options) {
  if (fs::is_directory(options.input)) {
    if (options.kinds.size() != 1)
      throw UsageError("scatter plots need exactly one --kind");
    if (!options.labels) throw UsageError("scatter plots need --labels");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options.input)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("layer_") && name.ends_with(".csv"))
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ConsistencyError(
          fmt::format("no layer_*.csv files in '{}'", options.input.string()));
    std::vector<Matrix> layers;
    for (const auto& f : files) {
      try {
        layers.push_back(parse_coords_csv(slurp(f)));
      } catch (const Error&) {
        rethrow_with_context(f.string());
      }
    }
    const auto labels = read_labels(*options.labels, layers.front().rows());
    const LabelKind& kind = require_kind(labels, options.kinds[0], layers.front().rows());
    const auto svg = render_scatter_grid(
        layers, kind,
        fmt::format("{} coloured by {}", options.input.filename().string(), kind.name));
    spill(options.out, svg);
    return;
  }

  auto rows = parse_report_csv(slurp(options.input));
  if (!options.kinds.empty()) {
    std::erase_if(rows, [&](const GdvReportRow& r) {
      return std::find(options.kinds.begin(), options.kinds.end(), r.label_kind) ==
             options.kinds.end();
    });
    if (rows.empty()) throw ConsistencyError("no report rows match the requested kinds");
  }
  spill(options.out, render_gdv_trend(rows, "Layerwise GDV"));
}

std::vector<fs::path> cmd_pipeline(const fs::path& tensor_path, const fs::path& labels_path,
                                   const fs::path& out_dir, std::ostream& warnings) {
  const auto tensor = read_tensor(tensor_path);
  const auto labels = read_labels(labels_path, tensor.points());
  const auto kinds = labels.kind_names();
  const auto analysis =
      analyze(tensor, labels, kinds, {Space::kRaw, Space::kPca2d, Space::kMds2d});

  OutputSet outputs;
  outputs.add(out_dir / "report.csv", format_report_csv(analysis.rows));
  outputs.add(out_dir / "breakdown.csv", format_breakdown_csv(analysis.breakdown));
  for (const auto& [method, projections] : analysis.projections) {
    report_warnings(projections, warnings);
    const std::string name = to_string(method);
    std::vector<Matrix> coords;
    for (std::size_t l = 0; l < projections.size(); ++l) {
      outputs.add(out_dir / "coords" / name / coords_file_name(l, projections.size()),
                  format_coords_csv(projections[l].coords));
      coords.push_back(projections[l].coords);
    }
    for (const auto& kind : kinds) {
      std::string upper = name;
      std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
      outputs.add(out_dir / fmt::format("scatter_{}_{}.svg", name, kind),
                  render_scatter_grid(coords, *labels.find(kind),
                                      fmt::format("{} projection coloured by {}", upper, kind)));
    }
  }
  outputs.add(out_dir / "gdv_trend.svg", render_gdv_trend(analysis.rows, "Layerwise GDV"));
  return outputs.commit();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layerwise cluster analysis of labelled embedding tensors", "layerprobe"};
  app.require_subcommand(1);

  std::string tensor, labels, out_path, method = "pca";
  std::vector<std::string> kinds, spaces;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic layered, dual-labelled tensor");
  SynthSpec spec;
  std::string content_sep = "0:4", style_sep = "0.2";
  synth->add_option("--layers", spec.layers, "Layer count")->default_val(13);
  synth->add_option("--dims", spec.dims, "Dimensions per point")->default_val(768);
  synth->add_option("--content", spec.n_content, "Content classes")->default_val(10);
  synth->add_option("--style", spec.n_style, "Style classes")->default_val(10);
  synth->add_option("--reps", spec.reps, "Repetitions per (content, style) cell")
      ->default_val(10);
  synth->add_option("--content-sep", content_sep,
                    "Content separation per layer: FIRST:LAST ramp, one value, or a list")
      ->default_val("0:4");
  synth->add_option("--style-sep", style_sep, "Style separation per layer (same forms)")
      ->default_val("0.2");
  synth->add_option("--noise", spec.noise_sigma, "Within-cluster noise sigma")->default_val(1.0);
  synth->add_option("--seed", spec.seed, "RNG seed")->default_val(0);
  synth->add_option("-o,--out", out_path, "Output directory")->required();

  auto* gdv_cmd = app.add_subcommand("gdv", "Layerwise GDV report as CSV");
  std::string breakdown;
  gdv_cmd->add_option("--tensor", tensor, "Tensor .npy")->required();
  gdv_cmd->add_option("--labels", labels, "Labels .csv")->required();
  gdv_cmd->add_option("--kind", kinds, "Label kind (repeatable; default: all)");
  gdv_cmd->add_option("--space", spaces, "raw | pca2d | mds2d (repeatable; default: raw)")
      ->check(CLI::IsMember({"raw", "pca2d", "mds2d"}));
  gdv_cmd->add_option("-o,--out", out_path, "Report path (default: stdout)");
  gdv_cmd->add_option("--breakdown", breakdown, "Also write per-class mean distances here");

  auto* project_cmd = app.add_subcommand("project", "Per-layer 2-D coordinates");
  project_cmd->add_option("--tensor", tensor, "Tensor .npy")->required();
  project_cmd->add_option("--method", method, "pca | mds")
      ->required()
      ->check(CLI::IsMember({"pca", "mds"}));
  project_cmd->add_option("-o,--out", out_path, "Output directory")->required();

  auto* plot_cmd = app.add_subcommand("plot", "Render a scatter grid or GDV trend as SVG");
  std::string coords_dir, report_path;
  auto* coords_opt = plot_cmd->add_option("--coords", coords_dir, "Directory from `project`");
  auto* report_opt = plot_cmd->add_option("--report", report_path, "Report CSV from `gdv`");
  coords_opt->excludes(report_opt);
  plot_cmd->add_option("--labels", labels, "Labels .csv (scatter grids)");
  plot_cmd->add_option("--kind", kinds, "Label kind to colour by / series filter");
  plot_cmd->add_option("-o,--out", out_path, "Output .svg")->required();

  auto* pipeline_cmd = app.add_subcommand("pipeline", "Report, coordinates and all figures");
  pipeline_cmd->add_option("--tensor", tensor, "Tensor .npy")->required();
  pipeline_cmd->add_option("--labels", labels, "Labels .csv")->required();
  pipeline_cmd->add_option("-o,--out", out_path, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      spec.content_sep = parse_schedule(content_sep, spec.layers, "--content-sep");
      spec.style_sep = parse_schedule(style_sep, spec.layers, "--style-sep");
      try {
        validate(spec);
      } catch (const SpecError& e) {
        throw UsageError(e.what());
      }
      out << cmd_synth(spec, out_path) << '\n';
    } else if (gdv_cmd->parsed()) {
      GdvOptions opts{tensor, labels, kinds, {}, std::nullopt};
      for (const auto& s : spaces) opts.spaces.push_back(parse_space(s));
      if (!breakdown.empty()) opts.breakdown = breakdown;
      const auto csv = cmd_gdv(opts, err);
      if (out_path.empty())
        out << csv;
      else
        spill(out_path, csv);
    } else if (project_cmd->parsed()) {
      const auto files = cmd_project(tensor, parse_projection_method(method), out_path, err);
      out << fmt::format("wrote {} layer files to {}\n", files.size(), out_path);
    } else if (plot_cmd->parsed()) {
      if (coords_dir.empty() == report_path.empty())
        throw UsageError("plot needs exactly one of --coords or --report");
      PlotOptions opts;
      opts.input = coords_dir.empty() ? fs::path(report_path) : fs::path(coords_dir);
      if (!labels.empty()) opts.labels = labels;
      opts.kinds = kinds;
      opts.out = out_path;
      if (!coords_dir.empty() && !fs::is_directory(opts.input))
        throw UsageError(fmt::format("--coords '{}' is not a directory", coords_dir));
      cmd_plot(opts);
      out << fmt::format("wrote {}\n", out_path);
    } else if (pipeline_cmd->parsed()) {
      const auto files = cmd_pipeline(tensor, labels, out_path, err);
      out << fmt::format("wrote {} files to {}\n", files.size(), out_path);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace layerprobe
