#pragma once

#include <cstdint>
#include <vector>

#include "csf/kernels.hpp"

namespace csf {

// Nystrom column sketch: m sampled columns C, the principal submatrix Q at
// the sampled indices, and the truncation rank.
struct NystromSketch {
  std::vector<int> sampled_cols;
  Matrix c;  // N x m
  Matrix q;  // m x m
  int rank_k = 0;
};

// Uniform sampling without replacement, deterministic given seed.
NystromSketch sketch(const Kernel& k, int m, int rank_k, std::uint64_t seed);

// K ~= C Qk^+ C^T with Qk the best rank-k approximation of Q. Pseudo-inverse
// tolerance 1e-10 relative to the largest eigenvalue.
Matrix approx_kernel(const NystromSketch& s);

// K^{-1} ~= C1^T Qk C1 with C1 the pseudo-inverse of C.
Matrix approx_inverse(const NystromSketch& s);

enum class NystromMode {
  // Sketch K once (K ~= F F^T) and carry exact low-rank algebra through the
  // inversion inside Gamma and the outer inversion. Error vanishes at m = N.
  kernel_sketch,
  // Literal column-sampled inverse approximation applied to the final
  // inversion (I + Khat/a2)^{-1}. Kept selectable for comparison; the
  // inverted matrix is near-identity (full rank), which column sampling
  // represents poorly, so kernel_sketch is the default.
  final_inverse,
};

struct NystromConfig {
  int m = 0;
  int rank_k = 0;  // 0 means rank_k = m
  std::uint64_t seed = 0;
  NystromMode mode = NystromMode::kernel_sketch;
};

// Nystrom-accelerated K_attr: O(m N^2) instead of O(N^3).
Kernel attr_highpass_kernel_nystrom(const Kernel& k, double a2, double a3,
                                    const NystromConfig& cfg);

}  // namespace csf
