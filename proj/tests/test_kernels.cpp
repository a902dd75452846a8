#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "csf/kernels.hpp"
#include "test_util.hpp"

using namespace csf;
using csf::testing::random_matrix;
using csf::testing::random_psd_kernel;
using csf::testing::temp_dir;

namespace {

// Independent O(N^2 M) reimplementation of the KNN kernel pipeline with
// plain scalar loops, used as the brute-force oracle.
Matrix brute_force_knn_pipeline(const Matrix& x, int top_k) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (int f = 0; f < m; ++f) {
        double diff = x(i, f) - x(j, f);
        d2 += diff * diff;
      }
      dist[i][j] = d2;
      if (j > i) mean += std::sqrt(d2);
    }
  }
  mean /= n * (n - 1) / 2.0;
  double h = mean * mean;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j) {
      if (j != i) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      double sa = std::exp(-dist[i][a] / h), sb = std::exp(-dist[i][b] / h);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    for (int t = 0; t < top_k; ++t) w[i][idx[t]] = std::exp(-dist[i][idx[t]] / h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) w[i][j] = std::max(w[i][j], w[j][i]);
    w[i][i] = 1.0;
  }
  std::vector<double> rowsum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rowsum[i] += w[i][j];
  }
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      k(i, j) = w[i][j] / std::sqrt(rowsum[i]) / std::sqrt(rowsum[j]);
    }
  }
  return k;
}

}  // namespace

TEST_CASE("gaussian similarity basics") {
  Matrix x(4, 3);
  x << 1, 2, 3, 1, 2, 3, 0, 0, 0, 5, 5, 5;
  Matrix s = gaussian_similarity(x);
  CHECK(s(0, 1) == doctest::Approx(1.0));  // identical rows
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 2) < 1.0);
  CHECK(s == s.transpose().eval());
}

TEST_CASE("degenerate bandwidth") {
  Matrix x = Matrix::Constant(3, 2, 0.7);
  CHECK_THROWS_WITH(gaussian_similarity(x), doctest::Contains("degenerate bandwidth"));
  CHECK_THROWS(gaussian_knn_kernel(x, 1));
}

TEST_CASE("gaussian knn kernel matches the brute-force pipeline") {
  Matrix x = random_matrix(20, 3, 5);
  Matrix expected = brute_force_knn_pipeline(x, 5);
  Matrix actual = gaussian_knn_normalized(x, 5);
  CHECK((actual - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gaussian knn kernel output is the PSD projection") {
  Matrix x = random_matrix(18, 3, 6);
  Matrix pre = gaussian_knn_normalized(x, 4);
  Kernel k = gaussian_knn_kernel(x, 4);
  CHECK(k.psd_checked);
  EigenSystem pre_es = eigendecompose(pre);
  Vector clipped = pre_es.eigenvalues.cwiseMax(0.0);
  Matrix expected = pre_es.eigenvectors * clipped.asDiagonal() * pre_es.eigenvectors.transpose();
  CHECK((k.matrix - expected).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_NOTHROW(assert_psd(k.matrix, 1e-8));
}

TEST_CASE("gaussian knn kernel is permutation equivariant") {
  const int n = 14;
  Matrix x = random_matrix(n, 4, 8);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(3);
  rng.shuffle(perm);
  Matrix px(n, 4);
  for (int i = 0; i < n; ++i) px.row(i) = x.row(perm[i]);
  Kernel k = gaussian_knn_kernel(x, 4);
  Kernel kp = gaussian_knn_kernel(px, 4);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK(kp.matrix(i, j) == doctest::Approx(k.matrix(perm[i], perm[j])).epsilon(1e-8));
    }
  }
}

TEST_CASE("gamma operator closed forms") {
  SUBCASE("identity kernel") {
    Kernel k{Matrix::Identity(3, 3), true};
    Matrix g = gamma_operator(k, 1.0);
    CHECK((g - 0.5 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("2x2 example solved by hand") {
    Matrix m(2, 2);
    m << 1.0, 0.5, 0.5, 1.0;
    Matrix g = gamma_operator(Kernel{m, true}, 1.0);
    Matrix expected(2, 2);
    expected << 1.75 / 3.75, 0.5 / 3.75, 0.5 / 3.75, 1.75 / 3.75;
    CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(gamma_operator(Kernel{Matrix::Identity(2, 2), true}, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("gamma operator matches the eigen path") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    Kernel k = random_psd_kernel(8, seed);
    double a3 = seed % 2 ? 0.5 : 2.0;
    Matrix g = gamma_operator(k, a3);
    EigenSystem es = eigendecompose(k);
    Vector shrunk = es.eigenvalues.array() / (es.eigenvalues.array() + a3);
    Matrix expected = es.eigenvectors * shrunk.asDiagonal() * es.eigenvectors.transpose();
    CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-8);
    EigenSystem ges = eigendecompose(g);
    CHECK(ges.eigenvalues(0) >= -1e-10);
    CHECK(ges.eigenvalues(ges.eigenvalues.size() - 1) < 1.0);
  }
}

TEST_CASE("eigendecompose") {
  SUBCASE("identity") {
    EigenSystem es = eigendecompose(Kernel{Matrix::Identity(3, 3), true});
    CHECK(es.eigenvalues.isApproxToConstant(1.0));
  }
  SUBCASE("diagonal") {
    Matrix d = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
    EigenSystem es = eigendecompose(d);
    CHECK(es.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(es.eigenvalues(2) == doctest::Approx(3.0));
    // eigenvectors are signed identity columns
    CHECK(es.eigenvectors.cwiseAbs().isApprox(Matrix::Identity(3, 3), 1e-12));
  }
  SUBCASE("reconstruction and orthonormality") {
    Matrix m = random_matrix(8, 8, 3);
    m = ((m + m.transpose()) / 2).eval();
    EigenSystem es = eigendecompose(m);
    Matrix rec = es.eigenvectors * es.eigenvalues.asDiagonal() * es.eigenvectors.transpose();
    CHECK((rec - m).norm() <= 1e-8);
    CHECK((es.eigenvectors.transpose() * es.eigenvectors - Matrix::Identity(8, 8)).norm() <= 1e-8);
    for (int i = 1; i < 8; ++i) CHECK(es.eigenvalues(i) >= es.eigenvalues(i - 1));
  }
}

TEST_CASE("assert_psd") {
  Matrix ok(2, 2);
  ok << 2, 0, 0, 3;
  CHECK(assert_psd(ok).psd_checked);

  Matrix bad(2, 2);
  bad << 0, 1, 1, 0;
  CHECK_THROWS_WITH_AS(assert_psd(bad), doctest::Contains("not PSD"), std::runtime_error);
  CHECK_THROWS_WITH(assert_psd(bad), doctest::Contains("-1"));

  Matrix asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_WITH(assert_psd(asym), doctest::Contains("not symmetric"));

  // squared difference of valid kernels is always PSD
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Kernel a = random_psd_kernel(6, seed * 2 + 1);
    Kernel b = random_psd_kernel(6, seed * 2 + 2);
    Matrix diff = a.matrix - b.matrix;
    CHECK_NOTHROW(assert_psd(diff * diff, 1e-8));
  }
}

TEST_CASE("kernel TSV round trip is exact") {
  Kernel k = random_psd_kernel(7, 19);
  auto dir = temp_dir("kernel_tsv");
  save_kernel_tsv(k, dir / "k.tsv");
  Kernel loaded = load_kernel_tsv(dir / "k.tsv");
  CHECK(loaded.matrix == k.matrix);
  CHECK_FALSE(loaded.psd_checked);
}
