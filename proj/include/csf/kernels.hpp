#pragma once

#include <filesystem>

#include "csf/types.hpp"

namespace csf {

// Dense symmetric kernel matrix. psd_checked records whether positive
// semi-definiteness has been established (by construction or by assert_psd);
// consumers that require a Mercer kernel should check the flag.
struct Kernel {
  Matrix matrix;
  bool psd_checked = false;

  int n() const { return static_cast<int>(matrix.rows()); }
};

struct EigenSystem {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, same order
};

// Symmetric eigendecomposition; throws on solver failure.
EigenSystem eigendecompose(const Kernel& k);
EigenSystem eigendecompose(const Matrix& m);

// Validates symmetry and min eigenvalue >= -tol, returns a checked kernel
// (stored symmetrized). Throws with the offending eigenvalue otherwise.
Kernel assert_psd(const Matrix& m, double tol = 1e-8);

// K (K + a3 I)^{-1}; symmetric with eigenvalues lambda_i / (lambda_i + a3).
Matrix gamma_operator(const Kernel& k, double a3);

// Full Gaussian similarity exp(-||xi-xj||^2 / h) with bandwidth
// h = (mean pairwise distance)^2. Diagonal is 1.
Matrix gaussian_similarity(const Matrix& x);

struct GaussianKnnOptions {
  // KNN sparsification plus renormalization generally leaves the matrix
  // indefinite; negative eigenvalues down to -clip_limit are projected to
  // zero, anything below is a hard error. The normalized matrix cannot go
  // below -1, so the default accepts every structurally possible spectrum.
  double clip_limit = 1.0;
};

// The sparsified, symmetrized, renormalized KNN similarity matrix before the
// PSD projection: per-row top_k off-diagonal similarities, entrywise-max
// symmetrization, unit diagonal, then D^{-1/2} K D^{-1/2}.
Matrix gaussian_knn_normalized(const Matrix& x, int top_k);

// Gaussian KNN kernel over node attributes: gaussian_knn_normalized followed
// by spectral projection onto the PSD cone.
Kernel gaussian_knn_kernel(const Matrix& x, int top_k, const GaussianKnnOptions& opts = {});

// 17-significant-digit TSV dump; round-trip exact for 64-bit floats.
void save_kernel_tsv(const Kernel& k, const std::filesystem::path& file);
Kernel load_kernel_tsv(const std::filesystem::path& file);

}  // namespace csf
