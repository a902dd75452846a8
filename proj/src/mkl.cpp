#include "csf/mkl.hpp"

#include <stdexcept>
#include <string>

namespace csf {

Kernel fuse(const Kernel& k_attr, const Kernel& k_top, double gamma) {
  if (k_attr.n() != k_top.n()) {
    throw std::invalid_argument("fuse: kernel dimension mismatch (" + std::to_string(k_attr.n()) +
                                " vs " + std::to_string(k_top.n()) + ")");
  }
  if (gamma < 0.0) throw std::invalid_argument("fuse: gamma must be nonnegative");
  Matrix diff = k_attr.matrix - k_top.matrix;
  Matrix fused = (k_attr.matrix + k_top.matrix) / 2.0 + gamma * (diff * diff);
  fused = ((fused + fused.transpose()) / 2.0).eval();
  return Kernel{std::move(fused), k_attr.psd_checked && k_top.psd_checked};
}

GammaSelection select_gamma(const Kernel& k_attr, const Kernel& k_top, const Dataset& data,
                            const std::vector<double>& grid, const GammaTrainFn& train_fn) {
  if (grid.empty()) throw std::invalid_argument("select_gamma: empty gamma grid");
  if (data.splits.val.empty()) throw std::invalid_argument("select_gamma: empty validation split");
  GammaSelection sel;
  for (double gamma : grid) {
    Kernel fused = fuse(k_attr, k_top, gamma);
    double score = 0.0;
    try {
      score = train_fn(fused, data);
    } catch (const std::exception& e) {
      throw std::runtime_error("select_gamma: training failed at gamma=" +
                               std::to_string(gamma) + ": " + e.what());
    }
    sel.scores.push_back({gamma, score});
  }
  // argmax with ties broken toward the smaller gamma
  const GammaScore* best = &sel.scores.front();
  for (const auto& s : sel.scores) {
    if (s.val_accuracy > best->val_accuracy ||
        (s.val_accuracy == best->val_accuracy && s.gamma < best->gamma)) {
      best = &s;
    }
  }
  sel.gamma = best->gamma;
  return sel;
}

}  // namespace csf
