#include "csf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "csf/tsv.hpp"

namespace csf {

namespace {

void require_square_symmetric(const Matrix& m, double tol, const char* what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
  }
}

}  // namespace

EigenSystem eigendecompose(const Matrix& m) {
  if (!m.allFinite()) throw std::runtime_error("eigendecompose: matrix has non-finite entries");
  require_square_symmetric(m, 1e-10, "eigendecompose");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed to converge on a " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " matrix (norm " + std::to_string(m.norm()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

EigenSystem eigendecompose(const Kernel& k) { return eigendecompose(k.matrix); }

Kernel assert_psd(const Matrix& m, double tol) {
  require_square_symmetric(m, tol, "assert_psd");
  EigenSystem es = eigendecompose(m);
  double min_eig = es.eigenvalues.size() > 0 ? es.eigenvalues(0) : 0.0;
  if (min_eig < -tol) {
    throw std::runtime_error("matrix is not PSD: min eigenvalue " + std::to_string(min_eig));
  }
  return Kernel{(m + m.transpose()) / 2.0, true};
}

Matrix gamma_operator(const Kernel& k, double a3) {
  if (a3 <= 0.0) throw std::invalid_argument("gamma_operator: a3 must be positive");
  if (!k.matrix.allFinite()) {
    throw std::runtime_error("gamma_operator: kernel has non-finite entries");
  }
  const int n = k.n();
  Matrix shifted = k.matrix + a3 * Matrix::Identity(n, n);
  // (K + a3 I)^{-1} K is symmetric for symmetric K; solve then symmetrize
  // the floating-point remainder.
  Matrix g = shifted.llt().solve(k.matrix);
  if (!g.allFinite()) throw std::runtime_error("gamma_operator: solve produced non-finite values");
  return (g + g.transpose()) / 2.0;
}

Matrix gaussian_similarity(const Matrix& x) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) throw std::invalid_argument("gaussian_similarity needs at least 2 points");
  Vector sq = x.rowwise().squaredNorm();
  Matrix d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * (x * x.transpose());
  d2 = d2.cwiseMax(0.0);
  double mean_dist = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) mean_dist += std::sqrt(d2(i, j));
  }
  mean_dist /= 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double h = mean_dist * mean_dist;
  if (h <= 0.0) throw std::runtime_error("degenerate bandwidth: all points identical");
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double v = std::exp(-d2(i, j) / h);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

Matrix gaussian_knn_normalized(const Matrix& x, int top_k) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) throw std::invalid_argument("gaussian_knn_kernel needs at least 2 points");
  if (top_k < 1 || top_k >= n) {
    throw std::invalid_argument("top_k must be in [1, n_nodes): got " + std::to_string(top_k));
  }
  Matrix s = gaussian_similarity(x);

  // Keep the top_k largest off-diagonal entries per row; ties break toward
  // the smaller index so the result is deterministic.
  Matrix w = Matrix::Zero(n, n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + i);
    std::partial_sort(order.begin(), order.begin() + top_k, order.end(), [&](int a, int b) {
      if (s(i, a) != s(i, b)) return s(i, a) > s(i, b);
      return a < b;
    });
    for (int t = 0; t < top_k; ++t) w(i, order[t]) = s(i, order[t]);
  }
  w = w.cwiseMax(w.transpose().eval());
  w.diagonal().setOnes();

  Vector rowsum = w.rowwise().sum();
  Vector dinv = rowsum.array().sqrt().inverse();
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = w(i, j) * dinv(i) * dinv(j);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Kernel gaussian_knn_kernel(const Matrix& x, int top_k, const GaussianKnnOptions& opts) {
  Matrix k = gaussian_knn_normalized(x, top_k);
  EigenSystem es = eigendecompose(k);
  double min_eig = es.eigenvalues(0);
  if (min_eig < -opts.clip_limit) {
    throw std::runtime_error("gaussian_knn_kernel: spectrum too far from PSD (min eigenvalue " +
                             std::to_string(min_eig) + ")");
  }
  if (min_eig < 0.0) {
    // spectral projection onto the PSD cone
    Vector clipped = es.eigenvalues.cwiseMax(0.0);
    k = es.eigenvectors * clipped.asDiagonal() * es.eigenvectors.transpose();
    k = ((k + k.transpose()) / 2.0).eval();
  }
  return Kernel{std::move(k), true};
}

void save_kernel_tsv(const Kernel& k, const std::filesystem::path& file) {
  write_tsv_matrix(k.matrix, file, /*full_precision=*/true);
}

Kernel load_kernel_tsv(const std::filesystem::path& file) {
  Matrix m = read_tsv_matrix(file);
  require_square_symmetric(m, 1e-10, "load_kernel_tsv");
  return Kernel{std::move(m), false};
}

}  // namespace csf
