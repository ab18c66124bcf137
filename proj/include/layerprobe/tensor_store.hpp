#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "layerprobe/matrix.hpp"

namespace layerprobe {

/// Layered activations of shape (layers, points, dims), held in double
/// precision. Stored on disk as little-endian float32 NPY v1.0.
///
/// The constructor enforces the invariants: layers >= 1, points >= 2,
/// dims >= 1, payload length == layers * points * dims, every value finite.
class ActivationTensor {
 public:
  ActivationTensor(std::size_t layers, std::size_t points, std::size_t dims,
                   std::vector<double> values);

  std::size_t layers() const { return layers_; }
  std::size_t points() const { return points_; }
  std::size_t dims() const { return dims_; }

  const std::vector<double>& values() const { return values_; }
  double at(std::size_t layer, std::size_t point, std::size_t dim) const {
    return values_[(layer * points_ + point) * dims_ + dim];
  }

  /// The N x D activation slice of one layer.
  MatrixView layer(std::size_t index) const;

  bool operator==(const ActivationTensor&) const = default;

 private:
  std::size_t layers_;
  std::size_t points_;
  std::size_t dims_;
  std::vector<double> values_;
};

ActivationTensor read_tensor(const std::filesystem::path& path);

/// Values are rounded to float32. Throws DataError (and writes nothing) if
/// any value is non-finite or overflows float32.
void write_tensor(const ActivationTensor& tensor,
                  const std::filesystem::path& path);

/// Serialises to the exact bytes write_tensor would put on disk.
std::string encode_npy(const ActivationTensor& tensor);
ActivationTensor decode_npy(const std::string& bytes);

/// One categorical labelling of the point axis.
struct LabelKind {
  std::string name;
  /// Class names in order of first appearance.
  std::vector<std::string> classes;
  /// Per point, an index into `classes`.
  std::vector<int> assignment;

  std::size_t class_count() const { return classes.size(); }
  std::vector<std::size_t> class_sizes() const;
  /// Fewer than two distinct classes; analysis operations reject these.
  bool degenerate() const { return classes.size() < 2; }
};

class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::size_t point_count) : point_count_(point_count) {}

  /// Adds a kind from per-point class names. Throws MismatchError if the
  /// length differs from point_count, FormatError on a duplicate kind name.
  void add_kind(const std::string& name,
                const std::vector<std::string>& per_point);

  std::size_t point_count() const { return point_count_; }
  const std::vector<LabelKind>& kinds() const { return kinds_; }
  std::vector<std::string> kind_names() const;

  /// nullptr if absent.
  const LabelKind* find(const std::string& name) const;

 private:
  std::size_t point_count_ = 0;
  std::vector<LabelKind> kinds_;
};

/// Reads `index,<kind1>,<kind2>,...` CSV. Row i must carry index i.
LabelTable read_labels(const std::filesystem::path& path,
                       std::size_t expected_points);
LabelTable parse_labels(const std::string& text, std::size_t expected_points);

void write_labels(const LabelTable& labels, const std::filesystem::path& path);
std::string format_labels(const LabelTable& labels);

}  // namespace layerprobe
