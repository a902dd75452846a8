#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "csf/types.hpp"

namespace csf {

// Undirected attributed graph. Edges are stored once with i < j, no
// self-loops, no duplicates; the dense adjacency is materialized on demand.
class Graph {
 public:
  static Graph create(int n_nodes, std::vector<std::pair<int, int>> edges, Matrix attributes);

  int n_nodes() const { return n_nodes_; }
  int n_attributes() const { return static_cast<int>(attributes_.cols()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const Matrix& attributes() const { return attributes_; }

  Matrix adjacency(bool with_self_loops) const;

 private:
  int n_nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
  Matrix attributes_;
};

// One-hot labels with a mask of which nodes carry a label. Rows of unlabeled
// nodes are exactly zero.
class LabelMatrix {
 public:
  // ids[i] in [0, n_classes) or -1 for unlabeled.
  static LabelMatrix from_ids(const std::vector<int>& ids, int n_classes);

  const Matrix& onehot() const { return onehot_; }
  const std::vector<std::uint8_t>& labeled_mask() const { return mask_; }

  int n_nodes() const { return static_cast<int>(onehot_.rows()); }
  int n_classes() const { return static_cast<int>(onehot_.cols()); }
  bool is_labeled(int i) const { return mask_[i] != 0; }
  int class_of(int i) const;  // -1 when unlabeled
  std::vector<int> labeled_indices() const;
  std::vector<int> unlabeled_indices() const;

 private:
  Matrix onehot_;
  std::vector<std::uint8_t> mask_;
};

struct DegreeInfo {
  Vector degrees;
  double avg_degree = 0.0;
};

DegreeInfo degree_info(const Graph& g, bool with_self_loops);

struct SplitSpec {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

struct Dataset {
  Graph graph;
  LabelMatrix labels;
  SplitSpec splits;
};

// Dataset directory format: features.tsv, edges.tsv, labels.tsv, splits.json.
// Validation failures raise errors naming the offending file and line.
Dataset load_dataset(const std::filesystem::path& dir, bool allow_isolated = false);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

// Shuffles the labeled nodes and assigns train/val/test by fraction.
SplitSpec random_split(const LabelMatrix& labels, double train_frac, double val_frac,
                       std::uint64_t seed);

// I - D^{-1/2} A D^{-1/2}, optionally on the self-loop augmented graph.
Matrix normalized_laplacian(const Graph& g, bool with_self_loops);

// Mean pairwise Euclidean distance between L2-row-normalized rows of h.
// Zero rows normalize to zero vectors. Requires at least two rows.
double representation_diversity(const Matrix& h);

}  // namespace csf
