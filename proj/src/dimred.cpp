#include "layerprobe/dimred.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"
#include "layerprobe/parallel.hpp"

namespace layerprobe {

namespace {

void require_projectable(MatrixView points, const char* method) {
  if (points.rows() < 3)
    throw InsufficientDataError(fmt::format(
        "{} needs at least 3 points, got {}", method, points.rows()));
  for (std::size_t i = 0; i < points.data().size(); ++i)
    if (!std::isfinite(points.data()[i]))
      throw DataError(fmt::format("non-finite value at point {}, dim {}",
                                  i / points.cols(), i % points.cols()));
}

double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

// Eigenvalues within rounding of zero relative to the leading one.
double zero_tolerance(const EigenDecomposition& eig, std::size_t n) {
  const double lead = std::max(eig.pairs.front().value, 0.0);
  return static_cast<double>(n) * std::numeric_limits<double>::epsilon() * lead;
}

}  // namespace

std::string to_string(ProjectionMethod method) {
  return method == ProjectionMethod::kPca ? "pca" : "mds";
}

ProjectionMethod parse_projection_method(const std::string& name) {
  if (name == "pca") return ProjectionMethod::kPca;
  if (name == "mds") return ProjectionMethod::kMds;
  throw UsageError(fmt::format("unknown projection method '{}' (expected pca or mds)", name));
}

Projection2D pca_2d(MatrixView points) {
  require_projectable(points, "PCA");
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();

  std::vector<double> mean(dims, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d) mean[d] += points(i, d);
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix centered(n, dims);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d) centered(i, d) = points(i, d) - mean[d];

  Matrix cov(dims, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = centered.row(i);
    for (std::size_t a = 0; a < dims; ++a) {
      const double xa = r[a];
      double* out = cov.row(a).data();
      for (std::size_t b = a; b < dims; ++b) out[b] += xa * r[b];
    }
  }
  for (std::size_t a = 0; a < dims; ++a) {
    for (std::size_t b = a; b < dims; ++b) {
      cov(a, b) /= static_cast<double>(n);
      cov(b, a) = cov(a, b);
    }
  }

  const std::size_t k = std::min<std::size_t>(2, dims);
  EigenDecomposition eig = eigh_topk(cov, k);

  Projection2D proj;
  proj.method = ProjectionMethod::kPca;
  proj.coords = Matrix(n, 2);
  proj.warnings = std::move(eig.warnings);
  proj.padded = dims < 2;
  if (proj.padded)
    proj.warnings.push_back("input has a single dimension; second axis is zero padding");

  const double tol = zero_tolerance(eig, std::max(n, dims));
  const double total = trace(cov);
  for (std::size_t j = 0; j < k; ++j) {
    double lambda = eig.pairs[j].value;
    if (lambda <= tol) continue;  // numerically rank-deficient axis stays zero
    proj.eigenvalues[j] = lambda;
    proj.variance_ratio[j] = total > 0 ? lambda / total : 0.0;
    const auto& v = eig.pairs[j].vector;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = centered.row(i);
      double s = 0.0;
      for (std::size_t d = 0; d < dims; ++d) s += r[d] * v[d];
      proj.coords(i, j) = s;
    }
  }
  return proj;
}

Projection2D mds_classical_2d(MatrixView points) {
  require_projectable(points, "MDS");
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();

  // Squared Euclidean distances, from coordinate differences.
  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = points.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* b = points.row(j).data();
      double s0 = 0.0, s1 = 0.0;
      std::size_t d = 0;
      for (; d + 2 <= dims; d += 2) {
        const double t0 = a[d] - b[d];
        const double t1 = a[d + 1] - b[d + 1];
        s0 += t0 * t0;
        s1 += t1 * t1;
      }
      if (d < dims) {
        const double t = a[d] - b[d];
        s0 += t * t;
      }
      sq(i, j) = sq(j, i) = s0 + s1;
    }
  }

  // B = -1/2 J sq J
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += sq(i, j);
    row_mean[i] = s / static_cast<double>(n);
    grand += row_mean[i];
  }
  grand /= static_cast<double>(n);
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      gram(i, j) = gram(j, i) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);

  EigenDecomposition eig = eigh_topk(gram, 2);

  Projection2D proj;
  proj.method = ProjectionMethod::kMds;
  proj.coords = Matrix(n, 2);
  proj.warnings = std::move(eig.warnings);

  const double tol = zero_tolerance(eig, n);
  const double total = trace(gram);
  for (std::size_t j = 0; j < 2; ++j) {
    const double lambda = eig.pairs[j].value;
    if (lambda < -tol)
      proj.warnings.push_back(fmt::format(
          "Gram eigenvalue {} is negative ({:.3e}); clamped to 0", j, lambda));
    if (lambda <= tol) continue;
    proj.eigenvalues[j] = lambda;
    proj.variance_ratio[j] = total > 0 ? lambda / total : 0.0;
    const double root = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i)
      proj.coords(i, j) = eig.pairs[j].vector[i] * root;
  }
  return proj;
}

Projection2D project(MatrixView points, ProjectionMethod method) {
  return method == ProjectionMethod::kPca ? pca_2d(points) : mds_classical_2d(points);
}

std::vector<Projection2D> project_layers(const ActivationTensor& tensor,
                                         ProjectionMethod method) {
  std::vector<Projection2D> out(tensor.layers());
  parallel_for_index(tensor.layers(), [&](std::size_t layer) {
    try {
      out[layer] = project(tensor.layer(layer), method);
    } catch (const Error&) {
      rethrow_with_context(fmt::format("layer {} ({})", layer, to_string(method)));
    }
  });
  return out;
}

}  // namespace layerprobe
