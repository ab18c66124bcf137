#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "layerprobe/matrix.hpp"
#include "layerprobe/report.hpp"
#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

/// Class colours, cycled with a marker change every 10 classes:
/// circle, square, triangle, diamond.
inline constexpr std::array<std::string_view, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

/// One panel per layer (titled with the layer index), points coloured by
/// class of `kind`. Throws ConsistencyError if any panel's point count
/// differs from the label table, or if there are no panels.
std::string render_scatter_grid(const std::vector<Matrix>& layers, const LabelKind& kind,
                                const std::string& title);

/// GDV against layer, one polyline per (label_kind, space) in order of first
/// appearance. Throws ConsistencyError on an empty report.
std::string render_gdv_trend(const std::vector<GdvReportRow>& rows, const std::string& title);

}  // namespace layerprobe
