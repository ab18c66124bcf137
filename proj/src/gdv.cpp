#include "layerprobe/gdv.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "layerprobe/errors.hpp"
#include "layerprobe/parallel.hpp"

namespace layerprobe {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double euclidean(const double* a, const double* b, std::size_t dims) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t d = 0;
  for (; d + 4 <= dims; d += 4) {
    const double t0 = a[d] - b[d];
    const double t1 = a[d + 1] - b[d + 1];
    const double t2 = a[d + 2] - b[d + 2];
    const double t3 = a[d + 3] - b[d + 3];
    s0 += t0 * t0;
    s1 += t1 * t1;
    s2 += t2 * t2;
    s3 += t3 * t3;
  }
  for (; d < dims; ++d) {
    const double t = a[d] - b[d];
    s0 += t * t;
  }
  return std::sqrt((s0 + s1) + (s2 + s3));
}

void require_finite(MatrixView points) {
  for (std::size_t i = 0; i < points.data().size(); ++i) {
    if (!std::isfinite(points.data()[i]))
      throw DataError(fmt::format("non-finite value at point {}, dim {}",
                                  i / points.cols(), i % points.cols()));
  }
}

struct ClassIndex {
  std::vector<int> ids;                            // first-appearance order
  std::vector<std::vector<std::size_t>> members;   // per class
};

ClassIndex index_classes(std::span<const int> labels) {
  ClassIndex idx;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    auto it = std::find(idx.ids.begin(), idx.ids.end(), labels[n]);
    std::size_t c = static_cast<std::size_t>(it - idx.ids.begin());
    if (it == idx.ids.end()) {
      idx.ids.push_back(labels[n]);
      idx.members.emplace_back();
    }
    idx.members[c].push_back(n);
  }
  return idx;
}

}  // namespace

RescaledPoints rescale(MatrixView points) {
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();
  if (n < 2)
    throw InsufficientDataError(
        fmt::format("rescaling needs at least 2 points, got {}", n));
  require_finite(points);

  RescaledPoints out{Matrix(n, dims), std::vector<double>(dims, 0.0),
                     std::vector<double>(dims, 0.0)};
  for (std::size_t d = 0; d < dims; ++d) {
    CompensatedSum sum;
    double lo = points(0, d), hi = points(0, d);
    for (std::size_t i = 0; i < n; ++i) {
      sum.add(points(i, d));
      lo = std::min(lo, points(i, d));
      hi = std::max(hi, points(i, d));
    }
    const double mean = sum.value() / static_cast<double>(n);
    out.mean[d] = mean;
    if (lo == hi) continue;  // constant column stays zero

    CompensatedSum sq;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = points(i, d) - mean;
      sq.add(t * t);
    }
    const double sd = std::sqrt(sq.value() / static_cast<double>(n));
    out.stddev[d] = sd;
    const double scale = 0.5 / sd;
    for (std::size_t i = 0; i < n; ++i)
      out.points(i, d) = (points(i, d) - mean) * scale;
  }
  return out;
}

double mean_intra_class_distance(const RescaledPoints& rescaled,
                                 std::span<const std::size_t> members) {
  const std::size_t size = members.size();
  if (size < 2)
    throw SingletonClassError(fmt::format(
        "intra-class distance needs at least 2 members, got {}", size));
  const std::size_t dims = rescaled.points.cols();
  CompensatedSum total;
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double* a = rescaled.points.row(members[i]).data();
    double row = 0.0;
    for (std::size_t j = i + 1; j < size; ++j)
      row += euclidean(a, rescaled.points.row(members[j]).data(), dims);
    total.add(row);
  }
  const double pairs = 0.5 * static_cast<double>(size) *
                       static_cast<double>(size - 1);
  return total.value() / pairs;
}

double mean_inter_class_distance(const RescaledPoints& rescaled,
                                 std::span<const std::size_t> members_l,
                                 std::span<const std::size_t> members_m) {
  if (members_l.empty() || members_m.empty())
    throw EmptyClassError("inter-class distance needs two non-empty classes");
  const std::size_t dims = rescaled.points.cols();
  CompensatedSum total;
  for (std::size_t i : members_l) {
    const double* a = rescaled.points.row(i).data();
    double row = 0.0;
    for (std::size_t j : members_m)
      row += euclidean(a, rescaled.points.row(j).data(), dims);
    total.add(row);
  }
  return total.value() / (static_cast<double>(members_l.size()) *
                          static_cast<double>(members_m.size()));
}

double gdv_from_means(std::span<const double> intra, const Matrix& inter,
                      std::size_t dims) {
  const std::size_t classes = intra.size();
  CompensatedSum intra_sum;
  for (double v : intra) intra_sum.add(v);
  CompensatedSum inter_sum;
  for (std::size_t l = 0; l + 1 < classes; ++l)
    for (std::size_t m = l + 1; m < classes; ++m) inter_sum.add(inter(l, m));
  const double L = static_cast<double>(classes);
  const double intra_mean = intra_sum.value() / L;
  const double inter_mean = inter_sum.value() * 2.0 / (L * (L - 1.0));
  return (intra_mean - inter_mean) / std::sqrt(static_cast<double>(dims));
}

GdvBreakdown gdv(MatrixView points, std::span<const int> labels) {
  if (labels.size() != points.rows())
    throw MismatchError(fmt::format("{} labels for {} points", labels.size(),
                                    points.rows()));
  ClassIndex classes = index_classes(labels);
  if (classes.ids.size() < 2)
    throw DegenerateLabelsError(fmt::format(
        "GDV needs at least 2 classes, got {}", classes.ids.size()));
  std::vector<int> singletons;
  for (std::size_t c = 0; c < classes.ids.size(); ++c)
    if (classes.members[c].size() < 2) singletons.push_back(classes.ids[c]);
  if (!singletons.empty())
    throw SingletonClassError(
        fmt::format("classes with a single point: {}", fmt::join(singletons, ", ")));

  const RescaledPoints rescaled = rescale(points);
  const std::size_t L = classes.ids.size();

  GdvBreakdown out;
  out.class_ids = classes.ids;
  out.dims = points.cols();
  out.points = points.rows();
  out.intra.resize(L);
  out.inter = Matrix(L, L);
  for (std::size_t l = 0; l < L; ++l) {
    out.class_sizes.push_back(classes.members[l].size());
    out.intra[l] = mean_intra_class_distance(rescaled, classes.members[l]);
    for (std::size_t m = l + 1; m < L; ++m) {
      const double d = mean_inter_class_distance(rescaled, classes.members[l],
                                                 classes.members[m]);
      out.inter(l, m) = d;
      out.inter(m, l) = d;
    }
  }
  out.gdv = gdv_from_means(out.intra, out.inter, out.dims);
  return out;
}

const LabelKind& require_kind(const LabelTable& labels, const std::string& kind,
                              std::size_t points) {
  if (labels.point_count() != points)
    throw MismatchError(fmt::format("labels cover {} points, tensor has {}",
                                    labels.point_count(), points));
  const LabelKind* found = labels.find(kind);
  if (found == nullptr)
    throw UsageError(fmt::format("unknown label kind '{}'; available: {}", kind,
                                 fmt::join(labels.kind_names(), ", ")));
  if (found->degenerate())
    throw DegenerateLabelsError(
        fmt::format("label kind '{}' has a single class", kind));
  return *found;
}

std::vector<GdvBreakdown> layerwise_gdv_breakdown(const ActivationTensor& tensor,
                                                  const LabelTable& labels,
                                                  const std::string& kind) {
  const LabelKind& k = require_kind(labels, kind, tensor.points());
  std::vector<GdvBreakdown> out(tensor.layers());
  parallel_for_index(tensor.layers(), [&](std::size_t layer) {
    try {
      out[layer] = gdv(tensor.layer(layer), k.assignment);
    } catch (const Error&) {
      rethrow_with_context(fmt::format("layer {}, kind '{}'", layer, kind));
    }
  });
  return out;
}

std::vector<double> layerwise_gdv(const ActivationTensor& tensor,
                                  const LabelTable& labels,
                                  const std::string& kind) {
  std::vector<double> values;
  for (const auto& b : layerwise_gdv_breakdown(tensor, labels, kind))
    values.push_back(b.gdv);
  return values;
}

}  // namespace layerprobe
