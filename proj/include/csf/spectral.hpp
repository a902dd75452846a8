#pragma once

#include <functional>
#include <map>
#include <string>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"

namespace csf {

// Named scalar spectral filter g(lambda) with its parameters and eigenvalue
// domain. High-pass specs are nondecreasing on their domain, low-pass
// nonincreasing.
struct FilterSpec {
  std::string name;
  std::map<std::string, double> params;
  std::function<double(double)> g;
  double domain_lo = 0.0;
  double domain_hi = 2.0;
  bool high_pass = false;

  // g(lambda) = 1 - (p/(p+1)) lambda on [0,2]
  static FilterSpec gcn(double avg_degree);
  // g(lambda) = (1 - lambda)^c on [0,2]
  static FilterSpec sgc(int c);
  // g(lambda) = 1 / (1 + a1 lambda)
  static FilterSpec label_prop(double a1);
  // g(lambda) = lambda / (lambda + lambda_reg), the KRR shrinkage profile
  static FilterSpec krr(double lambda_reg);
  // g(lambda) = a2 (lambda + a3) / (a3 + a2 (lambda + a3)), the attribute
  // high-pass filter
  static FilterSpec attr(double a2, double a3);
  // casting of the GCN filter to a Laplacian regularization function:
  // r(lambda) = (p+1) / (p (1-lambda) + 1), so that g = 1/r where defined
  static double gcn_regularizer(double avg_degree, double lambda);
};

// Evaluates spec.g at lambda; lambda must lie in the declared domain.
double filter_value(const FilterSpec& spec, double lambda);

// Elementwise g over a vector of eigenvalues (for tables and plots).
Vector shrinkage_profile(const FilterSpec& spec, const Vector& lambdas);

// K_attr = (I + (1/a2)(I - Gamma(K, a3)))^{-1}. Requires a2 > 0 and a3 > 0
// (the result is a valid kernel only then); eigenvalues equal the attr
// filter applied to the eigenvalues of K.
Kernel attr_highpass_kernel(const Kernel& k, double a2, double a3);

// One-step random walk kernel K_top = D~^{-1/2} A~ D~^{-1/2} on the
// self-loop augmented graph. Indefinite in general: eigenvalues in (-1, 1].
Kernel topology_lowpass_kernel(const Graph& g);

// K * signals; with Laplacian eigenvectors as signals this reads out the
// per-frequency gain of the filter.
Matrix frequency_response(const Kernel& k, const Matrix& signals);

}  // namespace csf
