#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"
#include "csf/util.hpp"

namespace csf::testing {

inline Matrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

// Random PSD kernel with eigenvalues of order one.
inline Kernel random_psd_kernel(int n, std::uint64_t seed) {
  Matrix a = random_matrix(n, n, seed);
  Matrix k = (a * a.transpose()) / static_cast<double>(n);
  return assert_psd(k, 1e-8);
}

// Random connected undirected graph: a shuffled chain plus extra edges.
inline Graph random_connected_graph(int n, int extra_edges, std::uint64_t seed, int n_attrs = 3) {
  Rng rng(seed);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.emplace_back(std::min(perm[i], perm[i + 1]), std::max(perm[i], perm[i + 1]));
  }
  std::set<std::pair<int, int>> seen(edges.begin(), edges.end());
  while (static_cast<int>(seen.size()) < n - 1 + extra_edges) {
    int i = rng.below(n);
    int j = rng.below(n);
    if (i == j) continue;
    seen.insert({std::min(i, j), std::max(i, j)});
  }
  return Graph::create(n, {seen.begin(), seen.end()}, random_matrix(n, n_attrs, seed + 1));
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("csf_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path bundled_data(const std::string& name) {
  return std::filesystem::path(CSF_DATA_DIR) / name;
}

}  // namespace csf::testing
