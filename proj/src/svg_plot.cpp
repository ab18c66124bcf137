#include "layerprobe/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"

namespace layerprobe {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;
  double span() const { return hi - lo; }
};

Range padded(double lo, double hi, double pad_fraction, double fallback) {
  if (!(hi > lo)) return {lo - fallback, hi + fallback};
  const double pad = (hi - lo) * pad_fraction;
  return {lo - pad, hi + pad};
}

std::string marker(std::size_t cls, double x, double y) {
  const std::string_view color = kPalette[cls % kPalette.size()];
  const double r = 2.5;
  switch ((cls / kPalette.size()) % 4) {
    case 0:
      return fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"{}\"/>", x, y,
                         r, color);
    case 1:
      return fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                         "fill=\"{}\"/>",
                         x - r, y - r, 2 * r, 2 * r, color);
    case 2:
      return fmt::format("<polygon points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}\" "
                         "fill=\"{}\"/>",
                         x, y - r * 1.2, x - r, y + r, x + r, y + r, color);
    default:
      return fmt::format("<polygon points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} "
                         "{:.2f},{:.2f}\" fill=\"{}\"/>",
                         x, y - r * 1.3, x + r * 1.3, y, x, y + r * 1.3, x - r * 1.3, y, color);
  }
}

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
  return step * mag;
}

std::string svg_open(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height, width, height);
}

}  // namespace

std::string render_scatter_grid(const std::vector<Matrix>& layers, const LabelKind& kind,
                                const std::string& title) {
  if (layers.empty()) throw ConsistencyError("no layers to plot");
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (layers[l].rows() != kind.assignment.size() || layers[l].cols() < 2)
      throw ConsistencyError(fmt::format(
          "layer {} has {} points, labels '{}' cover {}", l, layers[l].rows(), kind.name,
          kind.assignment.size()));

  constexpr double kPanel = 240, kGap = 16, kHeader = 44, kInset = 10, kTitle = 22;
  constexpr double kLegendItem = 110, kLegendRow = 20;
  const std::size_t cols =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(layers.size()))));
  const std::size_t rows = (layers.size() + cols - 1) / cols;
  const double width = kGap + static_cast<double>(cols) * (kPanel + kGap);
  const std::size_t legend_per_row =
      std::max<std::size_t>(1, static_cast<std::size_t>((width - 2 * kGap) / kLegendItem));
  const std::size_t legend_rows = (kind.class_count() + legend_per_row - 1) / legend_per_row;
  const double grid_bottom = kHeader + static_cast<double>(rows) * (kPanel + kGap);
  const double height = grid_bottom + static_cast<double>(legend_rows) * kLegendRow + kGap;

  std::string svg = svg_open(width, height);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">{}"
                     "</text>\n",
                     width / 2, escape(title));

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Matrix& c = layers[l];
    const double px = kGap + static_cast<double>(l % cols) * (kPanel + kGap);
    const double py = kHeader + static_cast<double>(l / cols) * (kPanel + kGap);
    svg += fmt::format("<g id=\"layer-{}\">\n", l);
    svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.0f}\" height=\"{:.0f}\" "
                       "fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n",
                       px, py, kPanel, kPanel);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" "
                       "text-anchor=\"middle\">layer {}</text>\n",
                       px + kPanel / 2, py + 16, l);

    double xlo = c(0, 0), xhi = c(0, 0), ylo = c(0, 1), yhi = c(0, 1);
    for (std::size_t i = 0; i < c.rows(); ++i) {
      xlo = std::min(xlo, c(i, 0));
      xhi = std::max(xhi, c(i, 0));
      ylo = std::min(ylo, c(i, 1));
      yhi = std::max(yhi, c(i, 1));
    }
    const Range xr = padded(xlo, xhi, 0.05, 1.0);
    const Range yr = padded(ylo, yhi, 0.05, 1.0);
    const double ax = px + kInset, aw = kPanel - 2 * kInset;
    const double ay = py + kTitle, ah = kPanel - kTitle - kInset;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      const double x = ax + (c(i, 0) - xr.lo) / xr.span() * aw;
      const double y = ay + ah - (c(i, 1) - yr.lo) / yr.span() * ah;
      svg += marker(static_cast<std::size_t>(kind.assignment[i]), x, y);
      svg += '\n';
    }
    svg += "</g>\n";
  }

  svg += "<g id=\"legend\">\n";
  for (std::size_t k = 0; k < kind.class_count(); ++k) {
    const double lx = kGap + static_cast<double>(k % legend_per_row) * kLegendItem;
    const double ly = grid_bottom + static_cast<double>(k / legend_per_row) * kLegendRow + 6;
    svg += marker(k, lx + 6, ly);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{}</text>\n", lx + 14,
                       ly + 4, escape(kind.classes[k]));
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string render_gdv_trend(const std::vector<GdvReportRow>& rows, const std::string& title) {
  if (rows.empty()) throw ConsistencyError("GDV report has no rows");

  struct Series {
    std::string kind;
    Space space;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series;
  double xlo = static_cast<double>(rows[0].layer), xhi = xlo;
  double ylo = 0.0, yhi = 0.0;
  for (const auto& r : rows) {
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) {
      return s.kind == r.label_kind && s.space == r.space;
    });
    if (it == series.end()) {
      series.push_back({r.label_kind, r.space, {}});
      it = series.end() - 1;
    }
    it->points.emplace_back(static_cast<double>(r.layer), r.gdv);
    xlo = std::min(xlo, static_cast<double>(r.layer));
    xhi = std::max(xhi, static_cast<double>(r.layer));
    ylo = std::min(ylo, r.gdv);
    yhi = std::max(yhi, r.gdv);
  }
  for (auto& s : series) std::stable_sort(s.points.begin(), s.points.end());

  constexpr double kWidth = 760, kHeight = 460;
  constexpr double kLeft = 80, kRight = 190, kTop = 48, kBottom = 56;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const Range xr = padded(xlo, xhi, 0.0, 0.5);
  const Range yr = padded(ylo, yhi, 0.06, 0.1);
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / xr.span() * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - yr.lo) / yr.span() * ph; };

  std::string svg = svg_open(kWidth, kHeight);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">{}"
                     "</text>\n",
                     kLeft + pw / 2, escape(title));
  svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                     "fill=\"none\" stroke=\"#444\"/>\n",
                     kLeft, kTop, pw, ph);

  // axes and ticks
  const double ystep = nice_step(yr.span(), 6);
  for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi + 1e-12; t += ystep) {
    const double v = std::abs(t) < ystep * 1e-9 ? 0.0 : t;
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                       "stroke=\"#ddd\"/>\n",
                       kLeft, sy(v), kLeft + pw, sy(v));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" "
                       "text-anchor=\"end\">{:g}</text>\n",
                       kLeft - 6, sy(v) + 4, v);
  }
  const double xstep = std::max(1.0, nice_step(std::max(xr.span(), 1.0), 12));
  for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi + 1e-12; t += xstep) {
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" "
                       "text-anchor=\"middle\">{:g}</text>\n",
                       sx(t), kTop + ph + 16, t);
  }
  if (yr.lo < 0.0 && yr.hi > 0.0)
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                       "stroke=\"#888\" stroke-dasharray=\"3 3\"/>\n",
                       kLeft, sy(0.0), kLeft + pw, sy(0.0));
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" "
                     "text-anchor=\"middle\">layer</text>\n",
                     kLeft + pw / 2, kHeight - 16);
  svg += fmt::format("<text x=\"18\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 18 {:.2f})\">GDV (lower is better)</text>\n",
                     kTop + ph / 2, kTop + ph / 2);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const std::string_view color = kPalette[s % kPalette.size()];
    const char* dash = ser.space == Space::kRaw     ? ""
                       : ser.space == Space::kPca2d ? " stroke-dasharray=\"6 4\""
                                                    : " stroke-dasharray=\"2 3\"";
    std::string pts;
    for (const auto& [x, y] : ser.points) {
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", sx(x), sy(y));
    }
    svg += fmt::format("<g id=\"series-{}\">\n", s);
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" "
                       "stroke-width=\"2\"{}/>\n",
                       pts, color, dash);
    for (const auto& [x, y] : ser.points)
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", sx(x),
                         sy(y), color);
    const double ly = kTop + 12 + static_cast<double>(s) * 20;
    const double lx = kLeft + pw + 16;
    svg += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                       "stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                       lx, ly, lx + 24, ly, color, dash);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{} ({})</text>\n",
                       lx + 30, ly + 4, escape(ser.kind), to_string(ser.space));
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace layerprobe
