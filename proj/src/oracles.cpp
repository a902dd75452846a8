#include "csf/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "csf/spectral.hpp"

namespace csf {

namespace {

Matrix symmetric_normalized_adjacency(const Graph& g) {
  const int n = g.n_nodes();
  Matrix a = g.adjacency(false);
  Vector deg = a.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (deg(i) <= 0.0) {
      throw std::runtime_error("label_propagation: isolated node " + std::to_string(i));
    }
  }
  Vector dinv = deg.array().sqrt().inverse();
  return dinv.asDiagonal() * a * dinv.asDiagonal();
}

void require_gamma(double gamma) {
  if (gamma < 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("label propagation gamma must lie in [0, 1)");
  }
}

std::vector<int> complement_indices(int n, const std::vector<int>& labeled_idx) {
  std::vector<char> is_labeled(n, 0);
  for (int i : labeled_idx) {
    if (i < 0 || i >= n) throw std::invalid_argument("labeled index out of range");
    is_labeled[i] = 1;
  }
  std::vector<int> unlabeled;
  for (int i = 0; i < n; ++i) {
    if (!is_labeled[i]) unlabeled.push_back(i);
  }
  return unlabeled;
}

}  // namespace

RidgeSolution ridge_fit(const Matrix& x, const Matrix& y, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("ridge_fit: lambda must be positive");
  if (!x.allFinite() || !y.allFinite()) {
    throw std::runtime_error("ridge_fit: non-finite input");
  }
  if (x.rows() != y.rows()) throw std::invalid_argument("ridge_fit: row count mismatch");
  const Eigen::Index p = x.cols();
  Matrix normal = x.transpose() * x + lambda * Matrix::Identity(p, p);
  RidgeSolution sol;
  sol.beta = normal.llt().solve(x.transpose() * y);
  sol.lambda = lambda;
  Eigen::BDCSVD<Matrix> svd(x);
  sol.singular_values = svd.singularValues();
  sol.shrinkage_factors = sol.singular_values.array().square() /
                          (sol.singular_values.array().square() + lambda);
  return sol;
}

Matrix krr_fit(const Kernel& k, const Matrix& y, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("krr_fit: lambda must be positive");
  if (!k.matrix.allFinite() || !y.allFinite()) {
    throw std::runtime_error("krr_fit: non-finite input");
  }
  const int n = k.n();
  Matrix shifted = k.matrix + lambda * Matrix::Identity(n, n);
  return k.matrix * shifted.llt().solve(y);
}

Matrix label_propagation(const Graph& g, const LabelMatrix& y0, double gamma) {
  require_gamma(gamma);
  if (gamma == 0.0) return y0.onehot();
  Matrix l = normalized_laplacian(g, false);
  const double a1 = gamma / (1.0 - gamma);
  const int n = g.n_nodes();
  Matrix system = Matrix::Identity(n, n) + a1 * l;
  return system.llt().solve(y0.onehot());
}

Matrix label_propagation_iterative(const Graph& g, const LabelMatrix& y0, double gamma,
                                   int iterations) {
  require_gamma(gamma);
  Matrix s = symmetric_normalized_adjacency(g);
  Matrix y = y0.onehot();
  for (int it = 0; it < iterations; ++it) {
    y = gamma * (s * y) + (1.0 - gamma) * y0.onehot();
  }
  return y;
}

Matrix transductive_z(const Matrix& khat, const Matrix& y_labeled,
                      const std::vector<int>& labeled_idx, double a2) {
  if (a2 <= 0.0) throw std::invalid_argument("transductive_z: a2 must be positive");
  const int n = static_cast<int>(khat.rows());
  if (labeled_idx.empty()) throw std::invalid_argument("transductive_z: empty labeled set");
  std::vector<int> unlabeled = complement_indices(n, labeled_idx);
  if (unlabeled.empty()) throw std::invalid_argument("transductive_z: empty unlabeled set");
  if (static_cast<int>(labeled_idx.size()) != y_labeled.rows()) {
    throw std::invalid_argument("transductive_z: y_labeled row count mismatch");
  }
  const int nu = static_cast<int>(unlabeled.size());
  const int nl = static_cast<int>(labeled_idx.size());
  Matrix kuu(nu, nu), kul(nu, nl);
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < nu; ++b) kuu(a, b) = khat(unlabeled[a], unlabeled[b]);
    for (int b = 0; b < nl; ++b) kul(a, b) = khat(unlabeled[a], labeled_idx[b]);
  }
  Matrix system = kuu + a2 * Matrix::Identity(nu, nu);
  return system.llt().solve(-(kul * y_labeled));
}

Matrix brute_force_problem2(const Matrix& khat, const Matrix& y_labeled,
                            const std::vector<int>& labeled_idx, double a2,
                            const BruteForceOptions& opts) {
  if (a2 <= 0.0) throw std::invalid_argument("brute_force_problem2: a2 must be positive");
  const int n = static_cast<int>(khat.rows());
  std::vector<int> unlabeled = complement_indices(n, labeled_idx);
  if (labeled_idx.empty() || unlabeled.empty()) {
    throw std::invalid_argument("brute_force_problem2: needs both labeled and unlabeled nodes");
  }
  const int nu = static_cast<int>(unlabeled.size());
  const Eigen::Index c = y_labeled.cols();

  // Assemble the full label matrix with the labeled rows pinned, descend on
  // the unlabeled block. Gradient of tr(Y^T Khat Y) + a2 ||Z||^2 wrt Z is
  // 2 (Khat Y)_u + 2 a2 Z.
  Matrix y = Matrix::Zero(n, c);
  for (std::size_t t = 0; t < labeled_idx.size(); ++t) {
    y.row(labeled_idx[t]) = y_labeled.row(t);
  }
  Matrix z = Matrix::Zero(nu, c);
  // Keep the step below the stability bound 1/L for the quadratic, with
  // L = 2 (||Khat||_inf + a2) an upper bound on the Hessian norm.
  double lipschitz = 2.0 * (khat.cwiseAbs().rowwise().sum().maxCoeff() + a2);
  double step = std::min(opts.step, 0.9 / lipschitz);
  for (long it = 0; it < opts.max_iterations; ++it) {
    for (int a = 0; a < nu; ++a) y.row(unlabeled[a]) = z.row(a);
    Matrix ky = khat * y;
    Matrix grad(nu, c);
    for (int a = 0; a < nu; ++a) grad.row(a) = 2.0 * ky.row(unlabeled[a]) + 2.0 * a2 * z.row(a);
    if (grad.norm() <= opts.grad_tolerance) return z;
    z -= step * grad;
  }
  throw std::runtime_error("brute_force_problem2: gradient descent did not converge within " +
                           std::to_string(opts.max_iterations) + " iterations");
}

Matrix semi_krr_fitted(const Kernel& k, const LabelMatrix& y0, double a2, double a3) {
  Kernel attr = attr_highpass_kernel(k, a2, a3);
  return attr.matrix * y0.onehot();
}

Matrix semi_krr_stationarity(const Kernel& k, const LabelMatrix& y0, double a2, double a3) {
  if (a2 <= 0.0 || a3 <= 0.0) {
    throw std::invalid_argument("semi_krr_stationarity: a2 and a3 must be positive");
  }
  // Build Khat through the eigensystem of K so the path is independent of
  // the Cholesky-based one.
  EigenSystem es = eigendecompose(k);
  Vector khat_eigs = a3 / (es.eigenvalues.array() + a3);
  Matrix khat = es.eigenvectors * khat_eigs.asDiagonal() * es.eigenvectors.transpose();
  const int n = k.n();
  Matrix system = khat + a2 * Matrix::Identity(n, n);
  Eigen::LDLT<Matrix> ldlt(system);
  return ldlt.solve(a2 * y0.onehot());
}

double problem1_objective(const Kernel& k, const LabelMatrix& y0, double a2, double a3) {
  Matrix fitted = semi_krr_fitted(k, y0, a2, a3);
  const int n = k.n();
  Matrix alpha = (k.matrix + a3 * Matrix::Identity(n, n)).llt().solve(fitted);
  double fit_term = (fitted - k.matrix * alpha).squaredNorm();
  double complexity = a3 * (alpha.transpose() * k.matrix * alpha).trace();
  double prior = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!y0.is_labeled(i)) prior += fitted.row(i).squaredNorm();
  }
  return fit_term + complexity + a2 * prior;
}

}  // namespace csf
