#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "layerprobe/dimred.hpp"
#include "layerprobe/gdv.hpp"
#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

/// Where the GDV is measured: the raw activations or a 2-D projection.
enum class Space { kRaw, kPca2d, kMds2d };

std::string to_string(Space space);
/// Accepts raw, pca2d, mds2d; throws UsageError otherwise.
Space parse_space(const std::string& name);

struct GdvReportRow {
  std::size_t layer = 0;
  std::string label_kind;
  Space space = Space::kRaw;
  double gdv = 0.0;
  std::size_t n_classes = 0;
  std::size_t n_points = 0;
};

/// Mean distances behind one report row, with class names resolved.
struct BreakdownRow {
  std::size_t layer = 0;
  std::string label_kind;
  Space space = Space::kRaw;
  std::size_t dims = 0;
  bool intra = true;
  std::string class_a;
  std::string class_b;  // empty for intra rows
  double mean_distance = 0.0;
};

struct Analysis {
  /// Ordered by (space, label_kind, layer) following the requested order.
  std::vector<GdvReportRow> rows;
  std::vector<BreakdownRow> breakdown;
  /// Per-layer projections for every projected space that was requested.
  std::map<ProjectionMethod, std::vector<Projection2D>> projections;
};

/// Runs the layerwise GDV for each (space, kind) pair. Kinds are validated
/// up front (UsageError for unknown names, DegenerateLabelsError for
/// single-class kinds). Projections are fitted once per layer and shared by
/// all kinds.
Analysis analyze(const ActivationTensor& tensor, const LabelTable& labels,
                 const std::vector<std::string>& kinds,
                 const std::vector<Space>& spaces);

/// `layer,label_kind,space,gdv,n_classes,n_points`; gdv with 9 decimals.
std::string format_report_csv(const std::vector<GdvReportRow>& rows);
/// Throws ConsistencyError on an empty or malformed report.
std::vector<GdvReportRow> parse_report_csv(const std::string& text);

/// `layer,label_kind,space,dims,term,class_a,class_b,mean_distance`.
std::string format_breakdown_csv(const std::vector<BreakdownRow>& rows);
std::vector<BreakdownRow> parse_breakdown_csv(const std::string& text);

/// `point,x,y`, full double precision.
std::string format_coords_csv(const Matrix& coords);
/// Throws ConsistencyError on malformed input.
Matrix parse_coords_csv(const std::string& text);

/// File name for a layer's coordinates, zero-padded to at least 2 digits
/// and to the width of the largest layer index.
std::string coords_file_name(std::size_t layer, std::size_t layer_count);

}  // namespace layerprobe
