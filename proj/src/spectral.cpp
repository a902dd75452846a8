#include "csf/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csf {

FilterSpec FilterSpec::gcn(double avg_degree) {
  if (avg_degree < 0.0) throw std::invalid_argument("gcn filter: average degree must be >= 0");
  FilterSpec f;
  f.name = "gcn";
  f.params = {{"p_bar", avg_degree}};
  double damp = avg_degree / (avg_degree + 1.0);
  f.g = [damp](double lam) { return 1.0 - damp * lam; };
  f.domain_lo = 0.0;
  f.domain_hi = 2.0;
  f.high_pass = false;
  return f;
}

FilterSpec FilterSpec::sgc(int c) {
  if (c < 0) throw std::invalid_argument("sgc filter: layer count must be >= 0");
  FilterSpec f;
  f.name = "sgc";
  f.params = {{"c", static_cast<double>(c)}};
  f.g = [c](double lam) { return std::pow(1.0 - lam, c); };
  f.domain_lo = 0.0;
  f.domain_hi = 2.0;
  f.high_pass = false;
  return f;
}

FilterSpec FilterSpec::label_prop(double a1) {
  if (a1 < 0.0) throw std::invalid_argument("label_prop filter: a1 must be >= 0");
  FilterSpec f;
  f.name = "label_prop";
  f.params = {{"a1", a1}};
  f.g = [a1](double lam) { return 1.0 / (1.0 + a1 * lam); };
  f.domain_lo = 0.0;
  f.domain_hi = std::numeric_limits<double>::infinity();
  f.high_pass = false;
  return f;
}

FilterSpec FilterSpec::krr(double lambda_reg) {
  if (lambda_reg <= 0.0) throw std::invalid_argument("krr filter: lambda must be positive");
  FilterSpec f;
  f.name = "krr";
  f.params = {{"lambda", lambda_reg}};
  f.g = [lambda_reg](double lam) { return lam / (lam + lambda_reg); };
  f.domain_lo = 0.0;
  f.domain_hi = std::numeric_limits<double>::infinity();
  f.high_pass = true;
  return f;
}

FilterSpec FilterSpec::attr(double a2, double a3) {
  if (a2 <= 0.0 || a3 <= 0.0) {
    throw std::invalid_argument(
        "attr filter: a2 and a3 must be positive (the filter is a valid kernel only then)");
  }
  FilterSpec f;
  f.name = "attr";
  f.params = {{"a2", a2}, {"a3", a3}};
  f.g = [a2, a3](double lam) { return a2 * (lam + a3) / (a3 + a2 * (lam + a3)); };
  f.domain_lo = 0.0;
  f.domain_hi = std::numeric_limits<double>::infinity();
  f.high_pass = true;
  return f;
}

double FilterSpec::gcn_regularizer(double avg_degree, double lambda) {
  return (avg_degree + 1.0) / (avg_degree * (1.0 - lambda) + 1.0);
}

double filter_value(const FilterSpec& spec, double lambda) {
  if (lambda < spec.domain_lo || lambda > spec.domain_hi) {
    throw std::domain_error("filter '" + spec.name + "': lambda " + std::to_string(lambda) +
                            " outside domain [" + std::to_string(spec.domain_lo) + ", " +
                            std::to_string(spec.domain_hi) + "]");
  }
  return spec.g(lambda);
}

Vector shrinkage_profile(const FilterSpec& spec, const Vector& lambdas) {
  Vector out(lambdas.size());
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) out(i) = spec.g(lambdas(i));
  return out;
}

Kernel attr_highpass_kernel(const Kernel& k, double a2, double a3) {
  if (a2 <= 0.0 || a3 <= 0.0) {
    throw std::invalid_argument(
        "attr_highpass_kernel: a2 and a3 must be positive (the filter is a valid kernel only "
        "then)");
  }
  const int n = k.n();
  Matrix khat = Matrix::Identity(n, n) - gamma_operator(k, a3);
  Matrix m = Matrix::Identity(n, n) + khat / a2;
  // m is SPD (identity plus a PSD term), so Cholesky applies.
  Matrix attr = m.llt().solve(Matrix::Identity(n, n));
  if (!attr.allFinite()) {
    throw std::runtime_error("attr_highpass_kernel: inversion produced non-finite values");
  }
  return Kernel{(attr + attr.transpose()) / 2.0, true};
}

Kernel topology_lowpass_kernel(const Graph& g) {
  const int n = g.n_nodes();
  Matrix a = g.adjacency(true);
  Vector dinv = a.rowwise().sum().array().sqrt().inverse();
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = a(i, j) * dinv(i) * dinv(j);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return Kernel{std::move(k), false};
}

Matrix frequency_response(const Kernel& k, const Matrix& signals) {
  if (signals.rows() != k.matrix.rows()) {
    throw std::invalid_argument("frequency_response: signals must have " +
                                std::to_string(k.matrix.rows()) + " rows, got " +
                                std::to_string(signals.rows()));
  }
  return k.matrix * signals;
}

}  // namespace csf
