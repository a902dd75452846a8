#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"

namespace csf {

enum class Activation { relu, identity };

struct ModelConfig {
  int n_layers = 2;
  int hidden_dim = 16;
  double dropout = 0.5;  // inverted dropout on layer inputs (post-concat)
  double lr = 0.01;
  int epochs = 150;
  Activation activation = Activation::relu;
  bool concat_x = true;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> per_epoch_loss;
  double best_val_acc = 0.0;
  double test_acc_at_best_val = 0.0;
  std::vector<double> diversity_per_layer;  // length n_layers + 1, H^0 = X first
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TrainReport from_json(const nlohmann::json& j);
};

// One propagation step: act(D^{-1/2} K D^{-1/2} h w), concatenated with the
// raw attributes when concat_x is set. The kernel row sums must be positive.
Matrix propagate_layer(const Kernel& k, const Matrix& h, const Matrix& w, const Matrix& x,
                       Activation act, bool concat_x);

// Full-graph transductive training: n_layers propagation steps (the final
// layer maps to the classes without activation or concatenation), softmax
// cross-entropy on the train split, Adam updates, snapshot at the best
// validation accuracy. Deterministic given (seed, config, data).
TrainReport train(const Dataset& data, const Kernel& kernel, const ModelConfig& cfg);

// Central finite differences over every weight against the analytic
// gradient; returns the maximum relative error. Requires dropout == 0.
double gradient_check(const ModelConfig& cfg, const Dataset& data, const Kernel& kernel,
                      double epsilon);
// Same check reported per layer. weights_override replaces the seeded
// initialization when given (testing seam).
std::vector<double> gradient_check_layers(const ModelConfig& cfg, const Dataset& data,
                                          const Kernel& kernel, double epsilon,
                                          const std::vector<Matrix>* weights_override = nullptr);

enum class AblationVariant {
  full,
  no_topology,
  no_attribute,
  lowpass_attribute,
  only_lowpass_attribute,
};

AblationVariant ablation_variant_from_name(const std::string& name);
std::string ablation_variant_name(AblationVariant v);

// Builds the propagation kernel for a variant. gaussian_knn is the
// renormalized Gaussian KNN kernel over attributes (which doubles as the
// GCN-style low-pass filter on the attribute graph), k_top the topology
// kernel.
Kernel ablation_kernel(AblationVariant v, const Kernel& gaussian_knn, const Kernel& k_top,
                       double a2, double a3, double gamma);

// Whether the CSF propagation rule keeps the X concatenation under this
// variant. no_attribute reproduces the plain GCN propagation, which has no
// concatenation.
bool ablation_variant_concat_x(AblationVariant v);

struct DepthSweepRow {
  int depth = 0;
  std::vector<TrainReport> reports;  // one per seed, shared across depths
};

std::vector<DepthSweepRow> depth_sweep(const Dataset& data,
                                       const std::function<Kernel()>& kernel_builder,
                                       const ModelConfig& cfg_base, const std::vector<int>& depths,
                                       const std::vector<std::uint64_t>& seeds);

}  // namespace csf
