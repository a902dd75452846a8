#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csf/graph.hpp"

namespace csf {

// Synthetic attributed-graph generator. Each class owns a block of signature
// features with elevated on-probability over a sparse binary background;
// edges are drawn with a controllable cross-class fraction, so p_cross near
// 1 produces a strongly disassortative graph.
struct SynthConfig {
  int n_nodes = 100;
  int n_features = 200;
  int n_classes = 5;
  std::vector<double> class_proportions;  // empty = balanced
  int signature_size = 20;
  double p_signature = 0.35;
  double p_background = 0.02;
  double edges_per_node = 1.7;
  double p_cross = 0.9;
  bool ensure_connected = false;
  double train_frac = 0.6;
  double val_frac = 0.2;
  std::uint64_t seed = 0;
};

Dataset synth_attributed_graph(const SynthConfig& cfg);

// Named presets used for the bundled exports and the synthetic test graphs.
// texas / cornell / wisconsin follow the WebKB shape (183/183/251 nodes,
// 1703 binary features, 5 classes, sparse disassortative edges).
SynthConfig synth_preset(const std::string& name);
std::vector<std::string> synth_preset_names();

}  // namespace csf
