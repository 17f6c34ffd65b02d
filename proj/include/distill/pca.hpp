#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "distill/linalg.hpp"

namespace distill {

struct PcaModel {
  Vector mean;
  std::vector<Vector> components;  // k orthonormal rows, dim D each
  std::vector<double> eigenvalues;  // non-increasing, non-negative

  std::size_t input_dim() const { return mean.size(); }
  std::size_t output_dim() const { return components.size(); }
};

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// `matrix` is row-major n x n. Returns eigenvalues (unsorted, in diagonal
// order) and eigenvectors as rows.
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<Vector> vectors;
};
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n);

// Principal components of the sample covariance (divisor N-1). The
// decomposition runs on the D x D covariance when D <= N, otherwise on the
// N x N Gram matrix of the centred data; both give the same eigenpairs.
// Each component's largest-magnitude coordinate is made positive.
//
// Requires |X| >= 2 and 1 <= k <= min(|X| - 1, D).
PcaModel pca_fit(std::span<const Vector> X, std::size_t k);

// y = components * (x - mean) for each x.
std::vector<Vector> pca_transform(const PcaModel& model, std::span<const Vector> X);

// Inverse map back to input space: mean + components^T * y.
Vector pca_reconstruct(const PcaModel& model, VectorView y);

}  // namespace distill
