#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "layerprobe/matrix.hpp"
#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit norm
};

struct EigenDecomposition {
  /// Descending by value. Each vector's largest-magnitude component is
  /// positive (lowest index wins a magnitude tie). Eigenvalues closer than
  /// 1e-10 (relative) are ordered by the index of that component.
  std::vector<EigenPair> pairs;
  /// max_j ||A v_j - lambda_j v_j||_2 over the returned pairs.
  double max_residual = 0.0;
  double frobenius_norm = 0.0;
  std::vector<std::string> warnings;
};

/// Top-k eigenpairs of a symmetric matrix via Householder tridiagonalisation
/// followed by implicit QL with Wilkinson shifts.
///
/// Throws ContractError if `a` is not square, not symmetric to 1e-10
/// relative, or k is outside [1, M]; ConvergenceError if the QL iteration
/// stalls or the residual contract ||A v - lambda v|| <= 1e-8 ||A||_F fails.
EigenDecomposition eigh_topk(const Matrix& a, std::size_t k);

enum class ProjectionMethod { kPca, kMds };

std::string to_string(ProjectionMethod method);
/// Accepts "pca" and "mds"; throws UsageError otherwise.
ProjectionMethod parse_projection_method(const std::string& name);

struct Projection2D {
  Matrix coords;  // N x 2
  ProjectionMethod method = ProjectionMethod::kPca;
  /// PCA: leading covariance eigenvalues. MDS: leading eigenvalues of the
  /// double-centred Gram matrix. Non-negative, descending.
  std::array<double, 2> eigenvalues{};
  /// eigenvalue / trace of the decomposed matrix.
  std::array<double, 2> variance_ratio{};
  /// Set when the input has a single dimension and the second axis is zero
  /// padding.
  bool padded = false;
  std::vector<std::string> warnings;
};

/// Principal components of the mean-centred data (covariance divisor N).
/// Throws InsufficientDataError for fewer than 3 points.
Projection2D pca_2d(MatrixView points);

/// Classical (Torgerson) scaling of the pairwise Euclidean distances.
/// Throws InsufficientDataError for fewer than 3 points.
Projection2D mds_classical_2d(MatrixView points);

Projection2D project(MatrixView points, ProjectionMethod method);

/// Fits one projection per layer, independently.
std::vector<Projection2D> project_layers(const ActivationTensor& tensor,
                                         ProjectionMethod method);

}  // namespace layerprobe
