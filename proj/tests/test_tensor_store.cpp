#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "layerprobe/errors.hpp"
#include "layerprobe/tensor_store.hpp"
#include "test_util.hpp"

using namespace layerprobe;
using layerprobe::testing::TempDir;

namespace {

// Builds an NPY v1.0 file by hand, independent of encode_npy.
std::string handmade_npy(const std::string& dict, const std::vector<float>& payload,
                         char major = 1) {
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string out = "\x93NUMPY";
  out += major;
  out += '\0';
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>(header.size() >> 8);
  out += header;
  for (float f : payload) {
    char raw[4];
    std::memcpy(raw, &f, 4);
    out.append(raw, 4);
  }
  return out;
}

ActivationTensor random_tensor(std::size_t l, std::size_t n, std::size_t d,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 3.0f);
  std::vector<double> values(l * n * d);
  for (double& v : values) v = static_cast<double>(normal(rng));
  return ActivationTensor(l, n, d, std::move(values));
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("minimal (1, 2, 1) tensor decodes to its two scalars") {
  const auto bytes = handmade_npy(
      "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 1), }", {0.0f, 1.0f});
  const auto t = decode_npy(bytes);
  CHECK(t.layers() == 1);
  CHECK(t.points() == 2);
  CHECK(t.dims() == 1);
  CHECK(t.at(0, 0, 0) == 0.0);
  CHECK(t.at(0, 1, 0) == 1.0);
}

TEST_CASE("header shape (13, 1000, 768) is parsed") {
  std::vector<float> payload(13 * 1000 * 768, 0.25f);
  const auto t = decode_npy(handmade_npy(
      "{'descr': '<f4', 'fortran_order': False, 'shape': (13, 1000, 768), }", payload));
  CHECK(t.layers() == 13);
  CHECK(t.points() == 1000);
  CHECK(t.dims() == 768);
}

TEST_CASE("header keys in any order and with double quotes are accepted") {
  const auto t = decode_npy(handmade_npy(
      "{\"shape\": (1,2,1), \"fortran_order\": False, \"descr\": \"<f4\"}", {2.0f, 3.0f}));
  CHECK(t.at(0, 1, 0) == 3.0);
}

TEST_CASE("payload length mismatch is a shape error") {
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 2), }",
                      {0.0f, 1.0f, 2.0f})),
                  ShapeError);
}

TEST_CASE("wrong element type or axis count is a shape error") {
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2, 1), }",
                      {0.0f, 0.0f, 0.0f, 0.0f})),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 1), }",
                      {0.0f, 1.0f})),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f4', 'fortran_order': True, 'shape': (1, 2, 1), }",
                      {0.0f, 1.0f})),
                  ShapeError);
}

TEST_CASE("malformed headers are format errors") {
  CHECK_THROWS_AS(decode_npy("not an npy file"), FormatError);
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 1), }",
                      {0.0f, 1.0f}, /*major=*/2)),
                  FormatError);
  CHECK_THROWS_AS(decode_npy(handmade_npy("{'descr': '<f4', 'fortran_order': False}",
                                          {0.0f, 1.0f})),
                  FormatError);
  CHECK_THROWS_AS(decode_npy(handmade_npy(
                      "{'descr': '<f4', 'fortran_order': False, 'shape': (1, x, 1), }",
                      {0.0f, 1.0f})),
                  FormatError);
  auto truncated = handmade_npy(
      "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 1), }", {0.0f, 1.0f});
  CHECK_THROWS_AS(decode_npy(truncated.substr(0, 20)), FormatError);
}

TEST_CASE("non-finite payload names the first offending element") {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  std::vector<float> payload(2 * 3 * 2, 1.0f);
  payload[(1 * 3 + 2) * 2 + 1] = nan;  // layer 1, point 2, dim 1
  try {
    decode_npy(handmade_npy(
        "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3, 2), }", payload));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("layer 1, point 2, dim 1") != std::string::npos);
  }
  payload[1] = inf;
  CHECK_THROWS_WITH_AS(
      decode_npy(handmade_npy(
          "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3, 2), }", payload)),
      doctest::Contains("layer 0, point 0, dim 1"), DataError);
}

TEST_CASE("tensor constructor enforces shape invariants") {
  CHECK_THROWS_AS(ActivationTensor(0, 2, 1, {}), ShapeError);
  CHECK_THROWS_AS(ActivationTensor(1, 1, 1, {0.0}), ShapeError);
  CHECK_THROWS_AS(ActivationTensor(1, 2, 1, {0.0}), ShapeError);
  CHECK_THROWS_AS(ActivationTensor(1, 2, 1, {0.0, std::nan("")}), DataError);
}

TEST_CASE("write/read round trip reproduces float32 values bit-exactly") {
  TempDir dir("npy");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = random_tensor(2, 3, 4, seed);
    write_tensor(t, dir / "t.npy");
    const auto back = read_tensor(dir / "t.npy");
    CHECK(back == t);
  }
}

TEST_CASE("repeated writes produce identical bytes and aligned headers") {
  TempDir dir("npy");
  const auto t = random_tensor(3, 5, 7, 9);
  write_tensor(t, dir / "a.npy");
  write_tensor(t, dir / "b.npy");
  const auto a = read_bytes(dir / "a.npy");
  CHECK(a == read_bytes(dir / "b.npy"));
  const std::size_t hlen = static_cast<unsigned char>(a[8]) |
                           (static_cast<unsigned char>(a[9]) << 8);
  CHECK((10 + hlen) % 64 == 0);
  CHECK(a[10 + hlen - 1] == '\n');
  CHECK(a.size() == 10 + hlen + 3 * 5 * 7 * 4);
}

TEST_CASE("writing a non-finite tensor fails without creating a file") {
  TempDir dir("npy");
  // 1e39 is finite as a double but overflows float32.
  const ActivationTensor t(1, 2, 1, {0.0, 1e39});
  CHECK_THROWS_AS(write_tensor(t, dir / "bad.npy"), DataError);
  CHECK_FALSE(std::filesystem::exists(dir / "bad.npy"));
}

TEST_CASE("unwritable path is an I/O error") {
  const ActivationTensor t(1, 2, 1, {0.0, 1.0});
  CHECK_THROWS_AS(write_tensor(t, "/nonexistent-dir/x/t.npy"), IoError);
  CHECK_THROWS_AS(read_tensor("/nonexistent-dir/x/t.npy"), IoError);
}

TEST_CASE("read_tensor reports errors with the file path") {
  TempDir dir("npy");
  write_bytes(dir / "junk.npy", "junk");
  CHECK_THROWS_WITH_AS(read_tensor(dir / "junk.npy"), doctest::Contains("junk.npy"),
                       FormatError);
}

TEST_CASE("labels: minimal single-kind table") {
  const auto table = parse_labels("index,kind\n0,A\n1,A\n2,B\n3,B\n", 4);
  REQUIRE(table.kinds().size() == 1);
  const auto& k = table.kinds()[0];
  CHECK(k.name == "kind");
  CHECK(k.class_count() == 2);
  CHECK(k.class_sizes() == std::vector<std::size_t>{2, 2});
  CHECK(k.assignment == std::vector<int>{0, 0, 1, 1});
  CHECK_FALSE(k.degenerate());
}

TEST_CASE("labels: 1000 rows with two 10-class kinds") {
  std::string text = "index,content,style\n";
  for (int i = 0; i < 1000; ++i)
    text += std::to_string(i) + ",n" + std::to_string(i / 100) + ",a" +
            std::to_string((i / 10) % 10) + "\n";
  const auto table = parse_labels(text, 1000);
  CHECK(table.find("content")->class_count() == 10);
  CHECK(table.find("style")->class_count() == 10);
  CHECK(table.find("content")->assignment[999] == 9);
  CHECK(table.find("missing") == nullptr);
}

TEST_CASE("labels: row count mismatch") {
  CHECK_THROWS_AS(parse_labels("index,k\n0,A\n1,A\n2,B\n3,B\n4,B\n", 4), MismatchError);
  CHECK_THROWS_AS(parse_labels("index,k\n0,A\n1,A\n2,B\n", 4), MismatchError);
}

TEST_CASE("labels: duplicate, missing and malformed indices") {
  CHECK_THROWS_WITH_AS(parse_labels("index,k\n0,A\n0,A\n2,B\n3,B\n", 4),
                       doctest::Contains("duplicate"), FormatError);
  CHECK_THROWS_AS(parse_labels("index,k\n0,A\n2,A\n3,B\n4,B\n", 4), FormatError);
  CHECK_THROWS_AS(parse_labels("index,k\n0,A\nx,A\n2,B\n3,B\n", 4), FormatError);
  CHECK_THROWS_AS(parse_labels("id,k\n0,A\n1,A\n", 2), FormatError);
  CHECK_THROWS_AS(parse_labels("index,k\n0,A\n1,\n", 2), FormatError);
  CHECK_THROWS_AS(parse_labels("index,k\n0,A,B\n1,A\n", 2), FormatError);
  CHECK_THROWS_AS(parse_labels("", 2), FormatError);
}

TEST_CASE("labels: single-class kind is flagged, not rejected") {
  const auto table = parse_labels("index,a,b\n0,X,p\n1,X,q\n", 2);
  CHECK(table.find("a")->degenerate());
  CHECK_FALSE(table.find("b")->degenerate());
}

TEST_CASE("labels: CRLF tolerated and format/parse round trip preserves order") {
  const auto table = parse_labels("index,k,j\r\n0,B,x\r\n1,A,y\r\n2,B,y\r\n", 3);
  CHECK(table.find("k")->classes == std::vector<std::string>{"B", "A"});
  CHECK(format_labels(table) == "index,k,j\n0,B,x\n1,A,y\n2,B,y\n");
  TempDir dir("labels");
  write_labels(table, dir / "l.csv");
  const auto back = read_labels(dir / "l.csv", 3);
  CHECK(back.find("j")->assignment == table.find("j")->assignment);
}
