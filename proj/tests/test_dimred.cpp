#include <doctest.h>

#include <cmath>
#include <random>

#include "layerprobe/dimred.hpp"
#include "layerprobe/errors.hpp"
#include "test_util.hpp"

using namespace layerprobe;
using layerprobe::testing::random_matrix;

namespace {

double distance(const Matrix& m, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < m.cols(); ++d) s += std::pow(m(i, d) - m(j, d), 2);
  return std::sqrt(s);
}

// Max |a - s_j b| after choosing each axis sign s_j to best align b with a.
double sign_aligned_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) dot += a(i, j) * b(i, j);
    const double s = dot < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
      worst = std::max(worst, std::abs(a(i, j) - s * b(i, j)));
  }
  return worst;
}

// Points in a random 2-D affine subspace of R^dims.
Matrix planar_points(std::size_t n, std::size_t dims, std::mt19937_64& rng) {
  const auto basis = random_matrix(2, dims, rng);
  const auto offset = random_matrix(1, dims, rng, 5.0);
  const auto coeff = random_matrix(n, 2, rng, 3.0);
  Matrix x(n, dims);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d)
      x(i, d) = offset(0, d) + coeff(i, 0) * basis(0, d) + coeff(i, 1) * basis(1, d);
  return x;
}

void check_centered(const Projection2D& p) {
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < p.coords.rows(); ++i) mean += p.coords(i, j);
    CHECK(std::abs(mean / static_cast<double>(p.coords.rows())) <= 1e-9);
  }
  CHECK(p.eigenvalues[0] >= p.eigenvalues[1]);
  CHECK(p.eigenvalues[1] >= 0.0);
}

}  // namespace

TEST_CASE("pca: collinear points") {
  const Matrix x(3, 2, std::vector<double>{0, 0, 1, 1, 2, 2});
  const auto p = pca_2d(x);
  // covariance [[2/3, 2/3], [2/3, 2/3]] -> lambda = 4/3 along (1, 1)/sqrt 2
  CHECK(p.eigenvalues[0] == doctest::Approx(4.0 / 3.0));
  CHECK(p.eigenvalues[1] == 0.0);
  CHECK(p.variance_ratio[0] == doctest::Approx(1.0));
  const double r2 = std::sqrt(2.0);
  CHECK(p.coords(0, 0) == doctest::Approx(-r2));
  CHECK(p.coords(1, 0) == doctest::Approx(0.0));
  CHECK(p.coords(2, 0) == doctest::Approx(r2));
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.coords(i, 1) == 0.0);
}

TEST_CASE("pca: axis-aligned points") {
  const Matrix x(3, 2, std::vector<double>{-1, 0, 0, 0, 1, 0});
  const auto p = pca_2d(x);
  CHECK(p.coords(0, 0) == doctest::Approx(-1.0));
  CHECK(p.coords(1, 0) == doctest::Approx(0.0));
  CHECK(p.coords(2, 0) == doctest::Approx(1.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.coords(i, 1) == 0.0);
}

TEST_CASE("pca: score variance equals eigenvalue") {
  std::mt19937_64 rng(100);
  auto x = random_matrix(100, 10, rng);
  for (std::size_t i = 0; i < 100; ++i) x(i, 2) *= 4.0, x(i, 7) *= 2.5;
  const auto p = pca_2d(x);
  check_centered(p);
  for (std::size_t j = 0; j < 2; ++j) {
    double var = 0.0;
    for (std::size_t i = 0; i < 100; ++i) var += p.coords(i, j) * p.coords(i, j);
    var /= 100.0;
    CHECK(std::abs(var - p.eigenvalues[j]) <= 1e-8 * p.eigenvalues[j]);
  }
  CHECK(p.variance_ratio[0] > p.variance_ratio[1]);
  CHECK(p.variance_ratio[0] + p.variance_ratio[1] < 1.0);
}

TEST_CASE("pca: single dimension is padded and flagged") {
  const auto p = pca_2d(layerprobe::testing::column({1.0, 2.0, 4.0}));
  CHECK(p.padded);
  CHECK_FALSE(p.warnings.empty());
  for (std::size_t i = 0; i < 3; ++i) CHECK(p.coords(i, 1) == 0.0);
  CHECK(p.coords(2, 0) == doctest::Approx(4.0 - 7.0 / 3.0));
}

TEST_CASE("insufficient data") {
  const Matrix two(2, 3);
  CHECK_THROWS_AS(pca_2d(two), InsufficientDataError);
  CHECK_THROWS_AS(mds_classical_2d(two), InsufficientDataError);
}

TEST_CASE("mds: two points at distance d embed to -d/2, +d/2") {
  const double d = 3.0;
  // third point at the midpoint keeps the configuration one-dimensional
  const Matrix x(3, 2, std::vector<double>{1, 1, 1 + d / 2, 1, 1 + d, 1});
  const auto p = mds_classical_2d(x);
  CHECK(p.eigenvalues[0] == doctest::Approx(d * d / 2));
  CHECK(p.eigenvalues[1] == 0.0);
  CHECK(std::abs(std::abs(p.coords(0, 0)) - d / 2) <= 1e-12);
  CHECK(std::abs(p.coords(0, 0) + p.coords(2, 0)) <= 1e-12);
  CHECK(std::abs(p.coords(1, 0)) <= 1e-12);
}

TEST_CASE("mds: equilateral triangle in 5-D keeps unit distances") {
  Matrix x(3, 5);
  x(0, 0) = 1.0 / std::sqrt(2.0);
  x(1, 1) = 1.0 / std::sqrt(2.0);
  x(2, 2) = 1.0 / std::sqrt(2.0);
  for (std::size_t d = 0; d < 5; ++d) x(0, d) += 0.3, x(1, d) += 0.3, x(2, d) += 0.3;
  const auto p = mds_classical_2d(x);
  CHECK(std::abs(distance(p.coords, 0, 1) - 1.0) <= 1e-9);
  CHECK(std::abs(distance(p.coords, 0, 2) - 1.0) <= 1e-9);
  CHECK(std::abs(distance(p.coords, 1, 2) - 1.0) <= 1e-9);
  CHECK_FALSE(p.warnings.empty());  // the two eigenvalues are tied
}

TEST_CASE("mds: identical points collapse to the origin") {
  const Matrix x(4, 3, 2.5);
  const auto p = mds_classical_2d(x);
  for (double c : p.coords.data()) CHECK(c == 0.0);
  CHECK(p.eigenvalues == std::array<double, 2>{0.0, 0.0});
}

TEST_CASE("pca and mds agree up to per-axis sign on Euclidean data") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_matrix(100, 10, rng);
    const auto p = pca_2d(x);
    const auto m = mds_classical_2d(x);
    check_centered(p);
    check_centered(m);
    CHECK(sign_aligned_gap(p.coords, m.coords) <= 1e-6);
    CHECK(std::abs(m.eigenvalues[0] - 100.0 * p.eigenvalues[0]) <= 1e-8 * m.eigenvalues[0]);
  }
}

TEST_CASE("mds preserves distances of planar data") {
  std::mt19937_64 rng(12);
  const auto x = planar_points(60, 10, rng);
  const auto p = mds_classical_2d(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = i + 1; j < 60; ++j) {
      const double orig = distance(x, i, j);
      worst = std::max(worst, std::abs(distance(p.coords, i, j) - orig) / orig);
    }
  CHECK(worst <= 1e-6);
}

TEST_CASE("pca is invariant to rigid motions up to axis sign") {
  std::mt19937_64 rng(21);
  auto x = random_matrix(80, 3, rng);
  for (std::size_t i = 0; i < 80; ++i) x(i, 0) *= 3.0, x(i, 1) *= 2.0;
  // rotation about z by 0.7 rad, then about x by -1.1 rad, then translate
  const double a = 0.7, b = -1.1;
  Matrix moved(80, 3);
  for (std::size_t i = 0; i < 80; ++i) {
    const double u = std::cos(a) * x(i, 0) - std::sin(a) * x(i, 1);
    const double v = std::sin(a) * x(i, 0) + std::cos(a) * x(i, 1);
    const double w = x(i, 2);
    moved(i, 0) = u + 10.0;
    moved(i, 1) = std::cos(b) * v - std::sin(b) * w - 4.0;
    moved(i, 2) = std::sin(b) * v + std::cos(b) * w + 0.5;
  }
  const auto p = pca_2d(x);
  const auto q = pca_2d(moved);
  CHECK(std::abs(p.eigenvalues[0] - q.eigenvalues[0]) <= 1e-8 * p.eigenvalues[0]);
  CHECK(std::abs(p.eigenvalues[1] - q.eigenvalues[1]) <= 1e-8 * p.eigenvalues[0]);
  CHECK(sign_aligned_gap(p.coords, q.coords) <= 1e-8);
}

TEST_CASE("projection is deterministic") {
  std::mt19937_64 rng(1);
  const auto x = random_matrix(50, 6, rng);
  CHECK(pca_2d(x).coords == pca_2d(x).coords);
  CHECK(mds_classical_2d(x).coords == mds_classical_2d(x).coords);
}

TEST_CASE("project_layers keeps layer order and annotates errors") {
  std::mt19937_64 rng(2);
  const auto a = random_matrix(20, 4, rng);
  const auto b = random_matrix(20, 4, rng, 10.0);
  std::vector<double> values(a.data().begin(), a.data().end());
  values.insert(values.end(), b.data().begin(), b.data().end());
  const ActivationTensor t(2, 20, 4, values);
  const auto proj = project_layers(t, ProjectionMethod::kPca);
  REQUIRE(proj.size() == 2);
  CHECK(proj[0].coords == pca_2d(a).coords);
  CHECK(proj[1].coords == pca_2d(b).coords);

  const ActivationTensor single(1, 20, 4, std::vector<double>(a.data().begin(), a.data().end()));
  CHECK(project_layers(single, ProjectionMethod::kMds).size() == 1);

  const ActivationTensor tiny(2, 2, 2, std::vector<double>(8, 1.0));
  CHECK_THROWS_WITH_AS(project_layers(tiny, ProjectionMethod::kMds),
                       doctest::Contains("layer 0"), InsufficientDataError);
}

TEST_CASE("method names") {
  CHECK(parse_projection_method("pca") == ProjectionMethod::kPca);
  CHECK(parse_projection_method("mds") == ProjectionMethod::kMds);
  CHECK(to_string(ProjectionMethod::kMds) == "mds");
  CHECK_THROWS_AS(parse_projection_method("tsne"), UsageError);
}
