#include "csf/nystrom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "csf/util.hpp"

namespace csf {

namespace {

constexpr double kPinvTolerance = 1e-10;

// Top rank_k eigenpairs of Q by eigenvalue (Q is a principal submatrix of a
// PSD kernel, so eigenvalues are nonnegative up to noise).
struct TruncatedEig {
  Vector values;  // descending, length rank_k
  Matrix vectors;
};

TruncatedEig truncated_eig(const Matrix& q, int rank_k) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(q);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("nystrom: eigendecomposition of Q failed");
  }
  const int m = static_cast<int>(q.rows());
  TruncatedEig out;
  out.values.resize(rank_k);
  out.vectors.resize(m, rank_k);
  for (int t = 0; t < rank_k; ++t) {
    out.values(t) = solver.eigenvalues()(m - 1 - t);
    out.vectors.col(t) = solver.eigenvectors().col(m - 1 - t);
  }
  return out;
}

// Factor F with C Qk^+ C^T = F F^T, dropping eigenvalues below the
// pseudo-inverse tolerance.
Matrix nystrom_factor(const NystromSketch& s) {
  TruncatedEig eig = truncated_eig(s.q, s.rank_k);
  double cutoff = kPinvTolerance * std::max(1.0, eig.values.size() ? eig.values(0) : 0.0);
  int kept = 0;
  for (Eigen::Index t = 0; t < eig.values.size(); ++t) {
    if (eig.values(t) > cutoff) ++kept;
  }
  Matrix f(s.c.rows(), kept);
  for (int t = 0; t < kept; ++t) {
    f.col(t) = (s.c * eig.vectors.col(t)) / std::sqrt(eig.values(t));
  }
  return f;
}

}  // namespace

NystromSketch sketch(const Kernel& k, int m, int rank_k, std::uint64_t seed) {
  const int n = k.n();
  if (m > n) throw std::invalid_argument("nystrom sketch: m exceeds kernel size");
  if (m < 1) throw std::invalid_argument("nystrom sketch: m must be at least 1");
  if (rank_k < 1 || rank_k > m) {
    throw std::invalid_argument("nystrom sketch: rank_k must lie in [1, m]");
  }
  Rng rng(seed);
  NystromSketch s;
  s.sampled_cols = rng.sample_without_replacement(n, m);
  s.rank_k = rank_k;
  s.c.resize(n, m);
  s.q.resize(m, m);
  for (int a = 0; a < m; ++a) {
    s.c.col(a) = k.matrix.col(s.sampled_cols[a]);
    for (int b = 0; b < m; ++b) s.q(a, b) = k.matrix(s.sampled_cols[a], s.sampled_cols[b]);
  }
  return s;
}

Matrix approx_kernel(const NystromSketch& s) {
  Matrix f = nystrom_factor(s);
  Matrix result = f * f.transpose();
  return (result + result.transpose()) / 2.0;
}

Matrix approx_inverse(const NystromSketch& s) {
  TruncatedEig eig = truncated_eig(s.q, s.rank_k);
  Matrix qk = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
  Eigen::BDCSVD<Matrix> svd(s.c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double cutoff =
      kPinvTolerance * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  Vector inv_sv = svd.singularValues();
  for (Eigen::Index i = 0; i < inv_sv.size(); ++i) {
    inv_sv(i) = inv_sv(i) > cutoff ? 1.0 / inv_sv(i) : 0.0;
  }
  // C1 = V S^+ U^T, so C1^T Qk C1 = U S^+ V^T Qk V S^+ U^T.
  Matrix inner = svd.matrixV().transpose() * qk * svd.matrixV();
  Matrix result = svd.matrixU() * inv_sv.asDiagonal() * inner * inv_sv.asDiagonal() *
                  svd.matrixU().transpose();
  return (result + result.transpose()) / 2.0;
}

Kernel attr_highpass_kernel_nystrom(const Kernel& k, double a2, double a3,
                                    const NystromConfig& cfg) {
  if (a2 <= 0.0 || a3 <= 0.0) {
    throw std::invalid_argument("attr_highpass_kernel_nystrom: a2 and a3 must be positive");
  }
  const int n = k.n();
  const int rank = cfg.rank_k > 0 ? cfg.rank_k : cfg.m;
  NystromSketch s = sketch(k, cfg.m, rank, cfg.seed);
  Matrix f = nystrom_factor(s);  // K ~= F F^T
  const int r = static_cast<int>(f.cols());

  if (cfg.mode == NystromMode::kernel_sketch) {
    // Khat = a3 (FF^T + a3 I)^{-1} = I - F (a3 I_r + F^T F)^{-1} F^T, and
    // (I + Khat/a2)^{-1} follows from a second Woodbury identity; every
    // dense product is O(r N^2) or cheaper.
    Matrix b = a3 * Matrix::Identity(r, r) + f.transpose() * f;
    Matrix g = b.llt().solve(f.transpose());  // r x N
    const double c = 1.0 + 1.0 / a2;
    Matrix inner = Matrix::Identity(r, r) - (1.0 / (c * a2)) * (g * f);
    Matrix attr = (1.0 / c) * Matrix::Identity(n, n) +
                  (1.0 / (c * c * a2)) * f * inner.llt().solve(g);
    return Kernel{(attr + attr.transpose()) / 2.0, true};
  }

  // final_inverse: materialize M = I + Khat/a2 from the sketched kernel and
  // apply the column-sampled inverse approximation to M itself.
  Matrix b = a3 * Matrix::Identity(r, r) + f.transpose() * f;
  Matrix g = b.llt().solve(f.transpose());
  Matrix m_dense = (1.0 + 1.0 / a2) * Matrix::Identity(n, n) - (1.0 / a2) * (f * g);
  Kernel m_kernel{(m_dense + m_dense.transpose()) / 2.0, true};
  NystromSketch ms = sketch(m_kernel, cfg.m, rank, cfg.seed + 1);
  Matrix attr = approx_inverse(ms);
  return Kernel{(attr + attr.transpose()) / 2.0, true};
}

}  // namespace csf
