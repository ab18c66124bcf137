#include "layerprobe/tensor_store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"

namespace layerprobe {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreambleLen = kMagicLen + 2 + 2;  // magic, version, len
constexpr std::size_t kAlign = 64;
// numpy reserves room for the leading axis to grow in place.
constexpr std::size_t kGrowthAxisDigits = 21;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  }
  return v;
}

void check_finite(std::span<const double> values, std::size_t points,
                  std::size_t dims) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      const std::size_t layer = i / (points * dims);
      const std::size_t point = (i / dims) % points;
      const std::size_t dim = i % dims;
      throw DataError(fmt::format(
          "non-finite value at (layer {}, point {}, dim {})", layer, point,
          dim));
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\n' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Extracts the raw text of the value stored under `key` in the header dict.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  for (char quote : {'\'', '"'}) {
    const std::string needle = std::string(1, quote) + std::string(key) + quote;
    auto pos = dict.find(needle);
    if (pos == std::string_view::npos) continue;
    pos = dict.find(':', pos + needle.size());
    if (pos == std::string_view::npos) break;
    auto rest = trim(dict.substr(pos + 1));
    std::size_t end = 0;
    if (!rest.empty() && rest.front() == '(') {
      end = rest.find(')');
      if (end == std::string_view::npos) break;
      return rest.substr(0, end + 1);
    }
    if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
      end = rest.find(rest.front(), 1);
      if (end == std::string_view::npos) break;
      return rest.substr(0, end + 1);
    }
    end = rest.find_first_of(",}");
    return trim(rest.substr(0, end));
  }
  throw FormatError(fmt::format("NPY header has no '{}' entry", key));
}

std::vector<std::size_t> parse_shape(std::string_view tuple) {
  if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')')
    throw FormatError("NPY header shape is not a tuple");
  std::vector<std::size_t> shape;
  auto body = tuple.substr(1, tuple.size() - 2);
  while (!body.empty()) {
    auto comma = body.find(',');
    auto item = trim(body.substr(0, comma));
    if (!item.empty()) {
      std::size_t value = 0;
      for (char c : item) {
        if (c < '0' || c > '9')
          throw FormatError(fmt::format("bad NPY shape entry '{}'", item));
        value = value * 10 + static_cast<std::size_t>(c - '0');
      }
      shape.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return shape;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

}  // namespace

ActivationTensor::ActivationTensor(std::size_t layers, std::size_t points,
                                   std::size_t dims,
                                   std::vector<double> values)
    : layers_(layers), points_(points), dims_(dims), values_(std::move(values)) {
  if (layers_ < 1 || points_ < 2 || dims_ < 1)
    throw ShapeError(fmt::format(
        "tensor shape ({}, {}, {}) needs layers >= 1, points >= 2, dims >= 1",
        layers_, points_, dims_));
  if (values_.size() != layers_ * points_ * dims_)
    throw ShapeError(fmt::format("payload has {} values, shape ({}, {}, {}) "
                                 "needs {}",
                                 values_.size(), layers_, points_, dims_,
                                 layers_ * points_ * dims_));
  check_finite(values_, points_, dims_);
}

MatrixView ActivationTensor::layer(std::size_t index) const {
  const std::size_t stride = points_ * dims_;
  return MatrixView(std::span<const double>(values_).subspan(index * stride, stride),
                    points_, dims_);
}

std::string encode_npy(const ActivationTensor& tensor) {
  std::vector<float> payload(tensor.values().size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const double v = tensor.values()[i];
    payload[i] = static_cast<float>(v);
  }
  {
    std::vector<double> widened(payload.begin(), payload.end());
    check_finite(widened, tensor.points(), tensor.dims());
  }

  std::string header = fmt::format(
      "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}, {}), }}",
      tensor.layers(), tensor.points(), tensor.dims());
  const std::size_t lead_digits = std::to_string(tensor.layers()).size();
  if (lead_digits < kGrowthAxisDigits)
    header.append(kGrowthAxisDigits - lead_digits, ' ');
  const std::size_t unpadded = kPreambleLen + header.size() + 1;
  header.append((kAlign - unpadded % kAlign) % kAlign, ' ');
  header.push_back('\n');
  if (header.size() > std::numeric_limits<std::uint16_t>::max())
    throw FormatError("NPY v1.0 header too long");

  std::string out;
  out.reserve(kPreambleLen + header.size() + payload.size() * 4);
  out.append(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto hlen = static_cast<std::uint16_t>(header.size());
  out.push_back(static_cast<char>(hlen & 0xff));
  out.push_back(static_cast<char>(hlen >> 8));
  out += header;
  for (float f : payload) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
    char raw[4];
    std::memcpy(raw, &bits, 4);
    out.append(raw, 4);
  }
  return out;
}

ActivationTensor decode_npy(const std::string& bytes) {
  if (bytes.size() < kPreambleLen ||
      std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw FormatError("missing NPY magic bytes");
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0)
    throw FormatError(fmt::format("unsupported NPY version {}.{}", major, minor));
  const std::size_t hlen = static_cast<unsigned char>(bytes[8]) |
                           (static_cast<std::size_t>(
                                static_cast<unsigned char>(bytes[9]))
                            << 8);
  if (bytes.size() < kPreambleLen + hlen)
    throw FormatError("truncated NPY header");
  const std::string_view dict =
      trim(std::string_view(bytes).substr(kPreambleLen, hlen));
  if (dict.empty() || dict.front() != '{' || dict.back() != '}')
    throw FormatError("NPY header is not a dict literal");

  const auto descr = dict_value(dict, "descr");
  if (descr != "'<f4'" && descr != "\"<f4\"")
    throw ShapeError(fmt::format("element type {} is not little-endian float32",
                                 descr));
  const auto order = dict_value(dict, "fortran_order");
  if (order == "True")
    throw ShapeError("Fortran-ordered NPY payloads are not supported");
  if (order != "False")
    throw FormatError(fmt::format("bad fortran_order value '{}'", order));
  const auto shape = parse_shape(dict_value(dict, "shape"));
  if (shape.size() != 3)
    throw ShapeError(fmt::format("expected 3 axes, got {}", shape.size()));

  const std::size_t count = shape[0] * shape[1] * shape[2];
  const std::size_t payload_bytes = bytes.size() - kPreambleLen - hlen;
  if (payload_bytes != count * 4)
    throw ShapeError(fmt::format(
        "payload is {} bytes, shape ({}, {}, {}) needs {}", payload_bytes,
        shape[0], shape[1], shape[2], count * 4));

  std::vector<double> values(count);
  const char* src = bytes.data() + kPreambleLen + hlen;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, src + 4 * i, 4);
    values[i] = static_cast<double>(std::bit_cast<float>(to_little(bits)));
  }
  return ActivationTensor(shape[0], shape[1], shape[2], std::move(values));
}

ActivationTensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_npy(read_file(path));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ShapeError& e) {
    throw ShapeError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_tensor(const ActivationTensor& tensor,
                  const std::filesystem::path& path) {
  write_file(path, encode_npy(tensor));
}

// ---------------------------------------------------------------------------
// Labels

std::vector<std::size_t> LabelKind::class_sizes() const {
  std::vector<std::size_t> sizes(classes.size(), 0);
  for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];
  return sizes;
}

void LabelTable::add_kind(const std::string& name,
                          const std::vector<std::string>& per_point) {
  if (per_point.size() != point_count_)
    throw MismatchError(fmt::format("label kind '{}' has {} entries, expected {}",
                                    name, per_point.size(), point_count_));
  if (find(name) != nullptr)
    throw FormatError(fmt::format("duplicate label kind '{}'", name));
  LabelKind kind{name, {}, {}};
  kind.assignment.reserve(per_point.size());
  for (const auto& cls : per_point) {
    std::size_t idx = 0;
    while (idx < kind.classes.size() && kind.classes[idx] != cls) ++idx;
    if (idx == kind.classes.size()) kind.classes.push_back(cls);
    kind.assignment.push_back(static_cast<int>(idx));
  }
  kinds_.push_back(std::move(kind));
}

std::vector<std::string> LabelTable::kind_names() const {
  std::vector<std::string> names;
  for (const auto& k : kinds_) names.push_back(k.name);
  return names;
}

const LabelKind* LabelTable::find(const std::string& name) const {
  for (const auto& k : kinds_)
    if (k.name == name) return &k;
  return nullptr;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  while (true) {
    auto comma = line.find(',');
    fields.emplace_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

}  // namespace

LabelTable parse_labels(const std::string& text, std::size_t expected_points) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    auto line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("labels file is empty");

  const auto header = split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "index")
    throw FormatError("labels header must be 'index,<kind>[,<kind>...]'");
  for (std::size_t k = 1; k < header.size(); ++k)
    if (header[k].empty()) throw FormatError("empty label kind name in header");

  const std::size_t rows = lines.size() - 1;
  if (rows != expected_points)
    throw MismatchError(fmt::format("labels file has {} rows, expected {}",
                                    rows, expected_points));

  const std::size_t kinds = header.size() - 1;
  std::vector<std::vector<std::string>> columns(kinds);
  std::vector<bool> seen(rows, false);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto fields = split_csv_line(lines[r + 1]);
    if (fields.size() != header.size())
      throw FormatError(fmt::format("row {} has {} fields, header has {}", r + 1,
                                    fields.size(), header.size()));
    std::size_t index = 0;
    std::size_t consumed = 0;
    try {
      index = std::stoul(fields[0], &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == 0 || consumed != fields[0].size())
      throw FormatError(fmt::format("row {}: bad index '{}'", r + 1, fields[0]));
    if (index < rows && seen[index])
      throw FormatError(fmt::format("duplicate index {}", index));
    if (index != r)
      throw FormatError(fmt::format("row {}: expected index {}, found {} "
                                    "(missing or out-of-order index)",
                                    r + 1, r, index));
    seen[index] = true;
    for (std::size_t k = 0; k < kinds; ++k) {
      if (fields[k + 1].empty())
        throw FormatError(fmt::format("row {}: missing '{}' label", r + 1,
                                      header[k + 1]));
      columns[k].push_back(fields[k + 1]);
    }
  }

  LabelTable table(rows);
  for (std::size_t k = 0; k < kinds; ++k) table.add_kind(header[k + 1], columns[k]);
  return table;
}

LabelTable read_labels(const std::filesystem::path& path,
                       std::size_t expected_points) {
  try {
    return parse_labels(read_file(path), expected_points);
  } catch (const MismatchError& e) {
    throw MismatchError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string format_labels(const LabelTable& labels) {
  std::string out = "index";
  for (const auto& k : labels.kinds()) out += "," + k.name;
  out += '\n';
  for (std::size_t i = 0; i < labels.point_count(); ++i) {
    out += std::to_string(i);
    for (const auto& k : labels.kinds())
      out += "," + k.classes[static_cast<std::size_t>(k.assignment[i])];
    out += '\n';
  }
  return out;
}

void write_labels(const LabelTable& labels, const std::filesystem::path& path) {
  write_file(path, format_labels(labels));
}

}  // namespace layerprobe
