#include "layerprobe/report.hpp"

#include <charconv>
#include <cstdlib>
#include <cmath>
#include <string_view>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"
#include "layerprobe/parallel.hpp"

namespace layerprobe {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::size_t to_size(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConsistencyError(fmt::format("line {}: bad integer '{}'", line, s));
  return v;
}

double to_double(std::string_view s, std::size_t line) {
  // strtod instead of from_chars<double>: the latter is missing from older
  // libstdc++ releases.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v))
    throw ConsistencyError(fmt::format("line {}: bad number '{}'", line, s));
  return v;
}

Space space_at(std::string_view s, std::size_t line) {
  try {
    return parse_space(std::string(s));
  } catch (const UsageError&) {
    throw ConsistencyError(fmt::format("line {}: unknown space '{}'", line, s));
  }
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header,
                   const char* what) {
  if (lines.empty()) throw ConsistencyError(fmt::format("{} is empty", what));
  if (lines[0] != header)
    throw ConsistencyError(fmt::format("{} header must be '{}'", what, header));
}

constexpr std::string_view kReportHeader = "layer,label_kind,space,gdv,n_classes,n_points";
constexpr std::string_view kBreakdownHeader =
    "layer,label_kind,space,dims,term,class_a,class_b,mean_distance";
constexpr std::string_view kCoordsHeader = "point,x,y";

}  // namespace

std::string to_string(Space space) {
  switch (space) {
    case Space::kRaw: return "raw";
    case Space::kPca2d: return "pca2d";
    case Space::kMds2d: return "mds2d";
  }
  return "raw";
}

Space parse_space(const std::string& name) {
  if (name == "raw") return Space::kRaw;
  if (name == "pca2d") return Space::kPca2d;
  if (name == "mds2d") return Space::kMds2d;
  throw UsageError(fmt::format("unknown space '{}' (expected raw, pca2d or mds2d)", name));
}

Analysis analyze(const ActivationTensor& tensor, const LabelTable& labels,
                 const std::vector<std::string>& kinds,
                 const std::vector<Space>& spaces) {
  std::vector<const LabelKind*> resolved;
  for (const auto& k : kinds) resolved.push_back(&require_kind(labels, k, tensor.points()));

  Analysis out;
  for (Space space : spaces) {
    if (space == Space::kRaw) continue;
    const auto method = space == Space::kPca2d ? ProjectionMethod::kPca : ProjectionMethod::kMds;
    if (!out.projections.contains(method))
      out.projections[method] = project_layers(tensor, method);
  }

  for (Space space : spaces) {
    const std::vector<Projection2D>* proj = nullptr;
    if (space != Space::kRaw)
      proj = &out.projections.at(space == Space::kPca2d ? ProjectionMethod::kPca
                                                        : ProjectionMethod::kMds);
    for (const LabelKind* kind : resolved) {
      std::vector<GdvBreakdown> per_layer(tensor.layers());
      parallel_for_index(tensor.layers(), [&](std::size_t layer) {
        try {
          const MatrixView points =
              proj ? (*proj)[layer].coords.view() : tensor.layer(layer);
          per_layer[layer] = gdv(points, kind->assignment);
        } catch (const Error&) {
          rethrow_with_context(fmt::format("layer {}, kind '{}', space {}", layer,
                                           kind->name, to_string(space)));
        }
      });
      for (std::size_t layer = 0; layer < tensor.layers(); ++layer) {
        const GdvBreakdown& b = per_layer[layer];
        out.rows.push_back({layer, kind->name, space, b.gdv, b.class_count(), b.points});
        auto name = [&](std::size_t c) {
          return kind->classes[static_cast<std::size_t>(b.class_ids[c])];
        };
        for (std::size_t l = 0; l < b.class_count(); ++l)
          out.breakdown.push_back(
              {layer, kind->name, space, b.dims, true, name(l), "", b.intra[l]});
        for (std::size_t l = 0; l < b.class_count(); ++l)
          for (std::size_t m = l + 1; m < b.class_count(); ++m)
            out.breakdown.push_back(
                {layer, kind->name, space, b.dims, false, name(l), name(m), b.inter(l, m)});
      }
    }
  }
  return out;
}

std::string format_report_csv(const std::vector<GdvReportRow>& rows) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{:.9f},{},{}\n", r.layer, r.label_kind, to_string(r.space),
                       r.gdv, r.n_classes, r.n_points);
  return out;
}

std::vector<GdvReportRow> parse_report_csv(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, kReportHeader, "GDV report");
  if (lines.size() == 1) throw ConsistencyError("GDV report has no rows");
  std::vector<GdvReportRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    if (f.size() != 6)
      throw ConsistencyError(fmt::format("line {}: expected 6 fields", i + 1));
    rows.push_back({to_size(f[0], i + 1), std::string(f[1]), space_at(f[2], i + 1),
                    to_double(f[3], i + 1), to_size(f[4], i + 1), to_size(f[5], i + 1)});
  }
  return rows;
}

std::string format_breakdown_csv(const std::vector<BreakdownRow>& rows) {
  std::string out(kBreakdownHeader);
  out += '\n';
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{:.17g}\n", r.layer, r.label_kind,
                       to_string(r.space), r.dims, r.intra ? "intra" : "inter", r.class_a,
                       r.class_b, r.mean_distance);
  return out;
}

std::vector<BreakdownRow> parse_breakdown_csv(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, kBreakdownHeader, "GDV breakdown");
  std::vector<BreakdownRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    if (f.size() != 8)
      throw ConsistencyError(fmt::format("line {}: expected 8 fields", i + 1));
    if (f[4] != "intra" && f[4] != "inter")
      throw ConsistencyError(fmt::format("line {}: unknown term '{}'", i + 1, f[4]));
    rows.push_back({to_size(f[0], i + 1), std::string(f[1]), space_at(f[2], i + 1),
                    to_size(f[3], i + 1), f[4] == "intra", std::string(f[5]),
                    std::string(f[6]), to_double(f[7], i + 1)});
  }
  return rows;
}

std::string format_coords_csv(const Matrix& coords) {
  std::string out(kCoordsHeader);
  out += '\n';
  for (std::size_t i = 0; i < coords.rows(); ++i)
    out += fmt::format("{},{:.17g},{:.17g}\n", i, coords(i, 0), coords(i, 1));
  return out;
}

Matrix parse_coords_csv(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, kCoordsHeader, "coordinates file");
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    if (f.size() != 3)
      throw ConsistencyError(fmt::format("line {}: expected 3 fields", i + 1));
    if (to_size(f[0], i + 1) != i - 1)
      throw ConsistencyError(fmt::format("line {}: point index out of order", i + 1));
    values.push_back(to_double(f[1], i + 1));
    values.push_back(to_double(f[2], i + 1));
  }
  const std::size_t n = values.size() / 2;
  return Matrix(n, 2, std::move(values));
}

std::string coords_file_name(std::size_t layer, std::size_t layer_count) {
  const std::size_t width =
      std::max<std::size_t>(2, std::to_string(layer_count > 0 ? layer_count - 1 : 0).size());
  return fmt::format("layer_{:0{}}.csv", layer, width);
}

}  // namespace layerprobe
