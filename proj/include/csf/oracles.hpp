#pragma once

#include <vector>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"

namespace csf {

// Closed-form reference models (ridge, KRR, label propagation) and the
// transductive semi-supervised KRR solutions, together with a brute-force
// gradient-descent verifier for the penalized quadratic problem.

struct RidgeSolution {
  Matrix beta;
  double lambda = 0.0;
  Vector singular_values;    // of the design matrix
  Vector shrinkage_factors;  // d_i^2 / (d_i^2 + lambda)
};

RidgeSolution ridge_fit(const Matrix& x, const Matrix& y, double lambda);

// Fitted values K (K + lambda I)^{-1} Y.
Matrix krr_fit(const Kernel& k, const Matrix& y, double lambda);

// Closed form (I + gamma/(1-gamma) L)^{-1} Y with L the normalized Laplacian
// (no self-loops). gamma in [0, 1).
Matrix label_propagation(const Graph& g, const LabelMatrix& y0, double gamma);

// Fixed-point iteration Y <- gamma S Y + (1 - gamma) Y0 with
// S = D^{-1/2} A D^{-1/2}; converges to the closed form.
Matrix label_propagation_iterative(const Graph& g, const LabelMatrix& y0, double gamma,
                                   int iterations);

// Closed-form transductive solution Z = -(Khat_uu + a2 I)^{-1} Khat_ul Y_L.
// y_labeled holds the one-hot rows of the labeled nodes, in labeled_idx
// order; rows of the result follow the unlabeled indices in ascending order.
Matrix transductive_z(const Matrix& khat, const Matrix& y_labeled,
                      const std::vector<int>& labeled_idx, double a2);

struct BruteForceOptions {
  double step = 1e-2;
  long max_iterations = 1'000'000;
  double grad_tolerance = 1e-9;
};

// Minimizes tr(Y^T Khat Y) + a2 ||Z||_F^2 over the unlabeled block Z by
// plain gradient descent on the assembled objective. Deliberately avoids the
// block algebra of transductive_z so the two can cross-check each other.
Matrix brute_force_problem2(const Matrix& khat, const Matrix& y_labeled,
                            const std::vector<int>& labeled_idx, double a2,
                            const BruteForceOptions& opts = {});

// Fitted value of semi-supervised KRR: Y = K_attr Y0.
Matrix semi_krr_fitted(const Kernel& k, const LabelMatrix& y0, double a2, double a3);

// Independent check: solves the stationarity condition
// (I - Gamma(K, a3) + a2 I) Y = a2 Y0 with Khat built through the
// eigendecomposition of K rather than a linear solve.
Matrix semi_krr_stationarity(const Kernel& k, const LabelMatrix& y0, double a2, double a3);

// Joint objective of the original semi-supervised KRR problem evaluated at
// the closed-form point (recorded for inspection; the closed form is exact
// only for the reduced problems).
double problem1_objective(const Kernel& k, const LabelMatrix& y0, double a2, double a3);

}  // namespace csf
