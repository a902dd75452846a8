#include "csf/synth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "csf/util.hpp"

namespace csf {

Dataset synth_attributed_graph(const SynthConfig& cfg) {
  const int n = cfg.n_nodes;
  const int m = cfg.n_features;
  const int c = cfg.n_classes;
  if (n < 2 || m < 1 || c < 1) throw std::invalid_argument("synth: bad dimensions");
  if (cfg.signature_size * c > m) {
    throw std::invalid_argument("synth: signature blocks exceed feature count");
  }
  Rng rng(cfg.seed);

  // class assignment
  std::vector<double> props = cfg.class_proportions;
  if (props.empty()) props.assign(c, 1.0 / c);
  if (static_cast<int>(props.size()) != c) {
    throw std::invalid_argument("synth: class_proportions size mismatch");
  }
  double total = 0.0;
  for (double p : props) total += p;
  std::vector<int> labels;
  labels.reserve(n);
  int assigned = 0;
  for (int k = 0; k < c; ++k) {
    int count = k == c - 1 ? n - assigned : static_cast<int>(props[k] / total * n);
    for (int t = 0; t < count; ++t) labels.push_back(k);
    assigned += count;
  }
  rng.shuffle(labels);

  // features: signature block per class over sparse background noise
  Matrix x = Matrix::Zero(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (rng.unit() < cfg.p_background) x(i, j) = 1.0;
    }
    int lo = labels[i] * cfg.signature_size;
    for (int j = lo; j < lo + cfg.signature_size; ++j) {
      x(i, j) = rng.unit() < cfg.p_signature ? 1.0 : 0.0;
    }
  }

  // edges: rejection-sample pairs until the cross/within mix matches p_cross
  std::set<std::pair<int, int>> edges;
  const int target = static_cast<int>(cfg.edges_per_node * n);
  long attempts = 0;
  const long max_attempts = 400L * target + 10000;
  while (static_cast<int>(edges.size()) < target && attempts++ < max_attempts) {
    int i = rng.below(n);
    int j = rng.below(n);
    if (i == j) continue;
    bool cross = labels[i] != labels[j];
    if (cross != (rng.unit() < cfg.p_cross)) continue;
    edges.insert({std::min(i, j), std::max(i, j)});
  }

  std::vector<int> degree(n, 0);
  for (const auto& [i, j] : edges) {
    ++degree[i];
    ++degree[j];
  }
  if (cfg.ensure_connected) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    for (int t = 0; t + 1 < n; ++t) {
      auto e = std::minmax(perm[t], perm[t + 1]);
      if (edges.insert({e.first, e.second}).second) {
        ++degree[e.first];
        ++degree[e.second];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    while (degree[i] == 0) {
      int j = rng.below(n);
      if (j == i) continue;
      auto e = std::minmax(i, j);
      if (edges.insert({e.first, e.second}).second) {
        ++degree[i];
        ++degree[j];
      }
    }
  }

  Dataset data{Graph::create(n, {edges.begin(), edges.end()}, std::move(x)),
               LabelMatrix::from_ids(labels, c), SplitSpec{}};
  data.splits = random_split(data.labels, cfg.train_frac, cfg.val_frac, cfg.seed);
  return data;
}

SynthConfig synth_preset(const std::string& name) {
  SynthConfig cfg;
  if (name == "texas" || name == "cornell" || name == "wisconsin") {
    cfg.n_nodes = name == "wisconsin" ? 251 : 183;
    cfg.n_features = 1703;
    cfg.n_classes = 5;
    cfg.class_proportions = {0.30, 0.25, 0.20, 0.15, 0.10};
    cfg.signature_size = 60;
    cfg.p_signature = 0.35;
    cfg.p_background = 0.02;
    cfg.edges_per_node = 1.7;
    cfg.p_cross = 0.9;
    cfg.seed = name == "texas" ? 101 : (name == "cornell" ? 102 : 103);
    return cfg;
  }
  if (name == "synth60") {
    // small, well-connected, strongly disassortative; used for the
    // over-smoothing measurements
    cfg.n_nodes = 60;
    cfg.n_features = 40;
    cfg.n_classes = 4;
    cfg.signature_size = 8;
    cfg.p_signature = 0.6;
    cfg.p_background = 0.05;
    cfg.edges_per_node = 7.0;
    cfg.p_cross = 0.95;
    cfg.ensure_connected = true;
    cfg.seed = 55;
    return cfg;
  }
  if (name == "synth150") {
    cfg.n_nodes = 150;
    cfg.n_features = 120;
    cfg.n_classes = 5;
    cfg.signature_size = 20;
    cfg.p_signature = 0.5;
    cfg.p_background = 0.03;
    cfg.edges_per_node = 4.0;
    cfg.p_cross = 0.95;
    cfg.seed = 77;
    return cfg;
  }
  throw std::invalid_argument("unknown synthetic preset '" + name + "'");
}

std::vector<std::string> synth_preset_names() {
  return {"texas", "cornell", "wisconsin", "synth60", "synth150"};
}

}  // namespace csf
