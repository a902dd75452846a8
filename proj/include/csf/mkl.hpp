#pragma once

#include <functional>
#include <vector>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"

namespace csf {

struct FusionConfig {
  double gamma = 0.5;
  std::vector<double> gamma_grid{0.0, 0.1, 0.5, 1.0};
};

// Cross-space fusion (K_attr + K_top)/2 + gamma (K_attr - K_top)^2.
// The squared difference term is PSD, so the result is PSD whenever both
// inputs are; the psd_checked flag propagates accordingly.
Kernel fuse(const Kernel& k_attr, const Kernel& k_top, double gamma);

struct GammaScore {
  double gamma = 0.0;
  double val_accuracy = 0.0;
};

struct GammaSelection {
  double gamma = 0.0;
  std::vector<GammaScore> scores;
};

using GammaTrainFn = std::function<double(const Kernel& fused, const Dataset& data)>;

// Evaluates each grid point with the training callback and returns the gamma
// with the highest validation accuracy; ties break toward the smaller gamma.
GammaSelection select_gamma(const Kernel& k_attr, const Kernel& k_top, const Dataset& data,
                            const std::vector<double>& grid, const GammaTrainFn& train_fn);

}  // namespace csf
