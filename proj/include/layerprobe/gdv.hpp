#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "layerprobe/matrix.hpp"
#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

/// Per-dimension z-scored points multiplied by 1/2:
///   s[n][d] = 0.5 * (x[n][d] - mean[d]) / stddev[d]
/// with the population standard deviation (divisor N). Columns whose values
/// are all identical have stddev 0 and become zero columns.
struct RescaledPoints {
  Matrix points;
  std::vector<double> mean;
  std::vector<double> stddev;
};

RescaledPoints rescale(MatrixView points);

/// Mean Euclidean distance over the unordered pairs of `members`.
/// Throws SingletonClassError for fewer than two members.
double mean_intra_class_distance(const RescaledPoints& rescaled,
                                 std::span<const std::size_t> members);

/// Mean Euclidean distance over all cross pairs of two disjoint classes.
/// Throws EmptyClassError if either class is empty.
double mean_inter_class_distance(const RescaledPoints& rescaled,
                                 std::span<const std::size_t> members_l,
                                 std::span<const std::size_t> members_m);

struct GdvBreakdown {
  /// Original label values, in order of first appearance. Index c of the
  /// vectors below refers to class_ids[c].
  std::vector<int> class_ids;
  std::vector<std::size_t> class_sizes;
  /// Mean intra-class distance per class.
  std::vector<double> intra;
  /// Symmetric L x L matrix of mean inter-class distances; zero diagonal.
  Matrix inter;
  std::size_t dims = 0;
  std::size_t points = 0;
  double gdv = 0.0;

  std::size_t class_count() const { return class_ids.size(); }
};

/// GDV = (1/sqrt(D)) * [ mean_l intra(l) - mean_{l<m} inter(l, m) ].
/// Class means are combined in index order with compensated summation.
double gdv_from_means(std::span<const double> intra, const Matrix& inter,
                      std::size_t dims);

/// Generalized Discrimination Value of one labelling. `labels[n]` is an
/// arbitrary class id for point n.
///
/// Throws DegenerateLabelsError for fewer than two classes,
/// SingletonClassError (listing the offending ids) if any class has a single
/// point, MismatchError if labels and points disagree in length, DataError on
/// non-finite input.
GdvBreakdown gdv(MatrixView points, std::span<const int> labels);

/// Literal O(N^2 D) evaluation of the GDV definition, used as a
/// verification oracle for gdv(). Shares no code with it.
GdvBreakdown gdv_bruteforce(MatrixView points, std::span<const int> labels);

/// One GdvBreakdown per layer, computed independently.
std::vector<GdvBreakdown> layerwise_gdv_breakdown(const ActivationTensor& tensor,
                                                  const LabelTable& labels,
                                                  const std::string& kind);

/// The gdv values of layerwise_gdv_breakdown.
std::vector<double> layerwise_gdv(const ActivationTensor& tensor,
                                  const LabelTable& labels,
                                  const std::string& kind);

/// Resolves a label kind for analysis: throws MismatchError if the table
/// does not cover `points`, UsageError listing the available kinds if `kind`
/// is absent, DegenerateLabelsError if it has a single class.
const LabelKind& require_kind(const LabelTable& labels, const std::string& kind,
                              std::size_t points);

}  // namespace layerprobe
