#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "csf/oracles.hpp"
#include "csf/spectral.hpp"
#include "test_util.hpp"

using namespace csf;
using csf::testing::random_connected_graph;
using csf::testing::random_matrix;
using csf::testing::random_psd_kernel;

namespace {

LabelMatrix random_labels(int n, int c, int n_labeled, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> ids(n, -1);
  std::vector<int> order = rng.sample_without_replacement(n, n_labeled);
  for (int i : order) ids[i] = rng.below(c);
  return LabelMatrix::from_ids(ids, c);
}

}  // namespace

TEST_CASE("ridge regression") {
  SUBCASE("identity design") {
    Matrix y(2, 1);
    y << 2, 4;
    RidgeSolution sol = ridge_fit(Matrix::Identity(2, 2), y, 1.0);
    CHECK(sol.beta(0, 0) == doctest::Approx(1.0));
    CHECK(sol.beta(1, 0) == doctest::Approx(2.0));
  }
  SUBCASE("tiny lambda approaches least squares") {
    Matrix x = random_matrix(10, 3, 4);
    Matrix y = random_matrix(10, 2, 5);
    RidgeSolution sol = ridge_fit(x, y, 1e-12);
    // independent normal-equations oracle
    Matrix ls = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    CHECK((sol.beta - ls).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("shrinkage factors from the singular values") {
    Matrix x = Vector::LinSpaced(2, 2.0, 1.0).asDiagonal();  // diag(2, 1)
    RidgeSolution sol = ridge_fit(x, Matrix::Zero(2, 1), 1.0);
    CHECK(sol.shrinkage_factors(0) == doctest::Approx(0.8));
    CHECK(sol.shrinkage_factors(1) == doctest::Approx(0.5));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(ridge_fit(Matrix::Identity(2, 2), Matrix::Zero(2, 1), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("kernel ridge regression") {
  SUBCASE("identity kernel halves the labels") {
    Matrix y = random_matrix(4, 2, 6);
    Matrix fitted = krr_fit(Kernel{Matrix::Identity(4, 4), true}, y, 1.0);
    CHECK((fitted - y / 2.0).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("eigen-shrinkage on a random kernel") {
    Kernel k = random_psd_kernel(6, 7);
    Matrix y = random_matrix(6, 1, 8);
    double lambda = 0.7;
    Matrix fitted = krr_fit(k, y, lambda);
    EigenSystem es = eigendecompose(k);
    Vector coef = es.eigenvectors.transpose() * y;
    Vector fitted_coef = es.eigenvectors.transpose() * fitted;
    for (int i = 0; i < 6; ++i) {
      double factor = es.eigenvalues(i) / (es.eigenvalues(i) + lambda);
      CHECK(fitted_coef(i) == doctest::Approx(factor * coef(i)).epsilon(1e-8));
      CHECK(factor >= 0.0);
      CHECK(factor < 1.0);
    }
  }
  SUBCASE("infinite penalty kills the fit") {
    Kernel k = random_psd_kernel(5, 9);
    Matrix y = random_matrix(5, 1, 10);
    CHECK(krr_fit(k, y, 1e12).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("label propagation") {
  SUBCASE("gamma zero returns the input") {
    Graph g = random_connected_graph(6, 3, 11);
    LabelMatrix y0 = random_labels(6, 2, 3, 12);
    CHECK(label_propagation(g, y0, 0.0) == y0.onehot());
  }
  SUBCASE("two-node closed form") {
    Graph g = Graph::create(2, {{0, 1}}, Matrix::Zero(2, 1));
    LabelMatrix y0 = LabelMatrix::from_ids({0, -1}, 1);
    Matrix fitted = label_propagation(g, y0, 0.5);
    CHECK(fitted(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(fitted(1, 0) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("iterative rule converges to the closed form") {
    Graph g = random_connected_graph(9, 6, 13);
    LabelMatrix y0 = random_labels(9, 3, 5, 14);
    for (double gamma : {0.3, 0.7}) {
      Matrix closed = label_propagation(g, y0, gamma);
      Matrix iter = label_propagation_iterative(g, y0, gamma, 500);
      CHECK((closed - iter).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
  SUBCASE("filter factors are 1/(1 + a1 lambda)") {
    Graph g = random_connected_graph(8, 5, 15);
    LabelMatrix y0 = random_labels(8, 2, 4, 16);
    double gamma = 0.4;
    double a1 = gamma / (1.0 - gamma);
    Matrix fitted = label_propagation(g, y0, gamma);
    EigenSystem es = eigendecompose(normalized_laplacian(g, false));
    Vector coef = es.eigenvectors.transpose() * y0.onehot().col(0);
    Vector fitted_coef = es.eigenvectors.transpose() * fitted.col(0);
    FilterSpec spec = FilterSpec::label_prop(a1);
    for (int i = 0; i < 8; ++i) {
      CHECK(fitted_coef(i) == doctest::Approx(spec.g(es.eigenvalues(i)) * coef(i)).epsilon(1e-8));
    }
  }
  SUBCASE("isolated node is rejected") {
    Graph g = Graph::create(3, {{0, 1}}, Matrix::Zero(3, 1));
    LabelMatrix y0 = random_labels(3, 2, 2, 17);
    CHECK_THROWS_WITH(label_propagation(g, y0, 0.5), doctest::Contains("isolated"));
  }
}

TEST_CASE("transductive solution") {
  SUBCASE("block-diagonal coupling gives zero") {
    Matrix khat = Matrix::Identity(4, 4) * 0.5;
    Matrix y_l(2, 2);
    y_l << 1, 0, 0, 1;
    Matrix z = transductive_z(khat, y_l, {0, 1}, 1.0);
    CHECK(z.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("hand-computed 2-node value") {
    Matrix k(2, 2);
    k << 1.0, 0.5, 0.5, 1.0;
    Matrix khat = Matrix::Identity(2, 2) - gamma_operator(Kernel{k, true}, 1.0);
    Matrix y_l(1, 1);
    y_l << 1.0;
    Matrix z = transductive_z(khat, y_l, {0}, 1.0);
    CHECK(z.rows() == 1);
    CHECK(z(0, 0) == doctest::Approx(2.0 / 23.0).epsilon(1e-10));
  }
  SUBCASE("validation") {
    Matrix khat = Matrix::Identity(3, 3);
    Matrix y_l(3, 1);
    y_l << 1, 1, 1;
    CHECK_THROWS(transductive_z(khat, y_l, {0, 1, 2}, 1.0));  // no unlabeled
    CHECK_THROWS(transductive_z(khat, Matrix(0, 1), {}, 1.0));
  }
}

TEST_CASE("brute force problem 2") {
  SUBCASE("agrees with the 2-node hand value") {
    Matrix k(2, 2);
    k << 1.0, 0.5, 0.5, 1.0;
    Matrix khat = Matrix::Identity(2, 2) - gamma_operator(Kernel{k, true}, 1.0);
    Matrix y_l(1, 1);
    y_l << 1.0;
    Matrix z = brute_force_problem2(khat, y_l, {0}, 1.0);
    CHECK(z(0, 0) == doctest::Approx(2.0 / 23.0).epsilon(1e-6));
  }
  SUBCASE("strong prior pushes the solution to zero") {
    Kernel k = random_psd_kernel(6, 20);
    Matrix khat = Matrix::Identity(6, 6) - gamma_operator(k, 1.0);
    Matrix y_l(3, 2);
    y_l << 1, 0, 0, 1, 1, 0;
    Matrix z = brute_force_problem2(khat, y_l, {0, 2, 4}, 1e9);
    CHECK(z.cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("returned point beats the zero initializer") {
    Kernel k = random_psd_kernel(8, 21);
    Matrix khat = Matrix::Identity(8, 8) - gamma_operator(k, 0.7);
    Matrix y_l(3, 2);
    y_l << 1, 0, 0, 1, 1, 0;
    std::vector<int> labeled{1, 4, 6};
    Matrix z = brute_force_problem2(khat, y_l, labeled, 0.5);
    auto objective = [&](const Matrix& zz) {
      Matrix y = Matrix::Zero(8, 2);
      for (int t = 0; t < 3; ++t) y.row(labeled[t]) = y_l.row(t);
      int u = 0;
      for (int i = 0; i < 8; ++i) {
        bool is_labeled = i == 1 || i == 4 || i == 6;
        if (!is_labeled) y.row(i) = zz.row(u++);
      }
      return (y.transpose() * khat * y).trace() + 0.5 * zz.squaredNorm();
    };
    CHECK(objective(z) <= objective(Matrix::Zero(5, 2)) + 1e-12);
  }
  SUBCASE("matches the closed form on random instances") {
    for (std::uint64_t seed : {30u, 31u, 32u}) {
      Kernel k = random_psd_kernel(12, seed);
      double a3 = seed % 2 ? 0.5 : 2.0;
      Matrix khat = Matrix::Identity(12, 12) - gamma_operator(k, a3);
      LabelMatrix labels = random_labels(12, 3, 6, seed + 100);
      std::vector<int> labeled = labels.labeled_indices();
      Matrix y_l(labeled.size(), 3);
      for (std::size_t t = 0; t < labeled.size(); ++t) y_l.row(t) = labels.onehot().row(labeled[t]);
      for (double a2 : {0.1, 1.0, 10.0}) {
        Matrix closed = transductive_z(khat, y_l, labeled, a2);
        Matrix brute = brute_force_problem2(khat, y_l, labeled, a2);
        CHECK((closed - brute).cwiseAbs().maxCoeff() <= 1e-5);
      }
    }
  }
}

TEST_CASE("semi-supervised KRR fitted values") {
  SUBCASE("identity kernel closed form") {
    LabelMatrix y0 = random_labels(4, 2, 2, 40);
    Matrix fitted = semi_krr_fitted(Kernel{Matrix::Identity(4, 4), true}, y0, 1.0, 1.0);
    CHECK((fitted - (2.0 / 3.0) * y0.onehot()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("equals K_attr Y0 exactly") {
    Kernel k = random_psd_kernel(7, 41);
    LabelMatrix y0 = random_labels(7, 3, 4, 42);
    Matrix fitted = semi_krr_fitted(k, y0, 0.7, 1.2);
    Matrix expected = attr_highpass_kernel(k, 0.7, 1.2).matrix * y0.onehot();
    CHECK((fitted - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("matches the independent stationarity solve") {
    for (std::uint64_t seed : {50u, 51u, 52u, 53u}) {
      Kernel k = random_psd_kernel(9, seed);
      LabelMatrix y0 = random_labels(9, 2, 5, seed + 7);
      double a2 = seed % 2 ? 0.3 : 5.0;
      Matrix fitted = semi_krr_fitted(k, y0, a2, 1.0);
      Matrix stationary = semi_krr_stationarity(k, y0, a2, 1.0);
      CHECK((fitted - stationary).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("a3 to zero recovers the labels when fully labeled") {
    std::vector<int> ids{0, 1, 0, 1, 1};
    LabelMatrix y0 = LabelMatrix::from_ids(ids, 2);
    Kernel k = random_psd_kernel(5, 60);
    // shift the kernel to keep eigenvalues away from zero so the limit holds
    Kernel shifted{k.matrix + 0.5 * Matrix::Identity(5, 5), true};
    Matrix fitted = semi_krr_fitted(shifted, y0, 1.0, 1e-12);
    CHECK((fitted - y0.onehot()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("joint objective is finite and consistent") {
  Kernel k = random_psd_kernel(6, 70);
  LabelMatrix y0 = random_labels(6, 2, 3, 71);
  double obj = problem1_objective(k, y0, 1.0, 1.0);
  CHECK(std::isfinite(obj));
  CHECK(obj >= 0.0);
}
