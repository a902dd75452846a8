#include "csf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "csf/tsv.hpp"
#include "csf/util.hpp"

namespace csf {

namespace {

std::string loc(const std::filesystem::path& file, int line) {
  return file.string() + ":" + std::to_string(line);
}

}  // namespace

Graph Graph::create(int n_nodes, std::vector<std::pair<int, int>> edges, Matrix attributes) {
  if (n_nodes < 0) throw std::invalid_argument("n_nodes must be nonnegative");
  if (attributes.rows() != n_nodes) {
    throw std::invalid_argument("attributes must have exactly n_nodes rows (" +
                                std::to_string(attributes.rows()) + " vs " +
                                std::to_string(n_nodes) + ")");
  }
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes) {
      throw std::invalid_argument("node index out of range in edge (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
    }
    if (i == j) throw std::invalid_argument("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge in edge list");
  }
  Graph g;
  g.n_nodes_ = n_nodes;
  g.edges_ = std::move(edges);
  g.attributes_ = std::move(attributes);
  return g;
}

Matrix Graph::adjacency(bool with_self_loops) const {
  Matrix a = Matrix::Zero(n_nodes_, n_nodes_);
  for (const auto& [i, j] : edges_) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  if (with_self_loops) a.diagonal().setOnes();
  return a;
}

LabelMatrix LabelMatrix::from_ids(const std::vector<int>& ids, int n_classes) {
  if (n_classes < 1) throw std::invalid_argument("n_classes must be at least 1");
  LabelMatrix lm;
  lm.onehot_ = Matrix::Zero(ids.size(), n_classes);
  lm.mask_.assign(ids.size(), 0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == -1) continue;
    if (ids[i] < 0 || ids[i] >= n_classes) {
      throw std::invalid_argument("label " + std::to_string(ids[i]) + " out of range at node " +
                                  std::to_string(i));
    }
    lm.onehot_(i, ids[i]) = 1.0;
    lm.mask_[i] = 1;
  }
  return lm;
}

int LabelMatrix::class_of(int i) const {
  if (!mask_[i]) return -1;
  int c = 0;
  onehot_.row(i).maxCoeff(&c);
  return c;
}

std::vector<int> LabelMatrix::labeled_indices() const {
  std::vector<int> out;
  for (int i = 0; i < n_nodes(); ++i) {
    if (mask_[i]) out.push_back(i);
  }
  return out;
}

std::vector<int> LabelMatrix::unlabeled_indices() const {
  std::vector<int> out;
  for (int i = 0; i < n_nodes(); ++i) {
    if (!mask_[i]) out.push_back(i);
  }
  return out;
}

DegreeInfo degree_info(const Graph& g, bool with_self_loops) {
  Matrix a = g.adjacency(with_self_loops);
  DegreeInfo info;
  info.degrees = a.rowwise().sum();
  info.avg_degree = g.n_nodes() > 0 ? info.degrees.mean() : 0.0;
  return info;
}

Dataset load_dataset(const std::filesystem::path& dir, bool allow_isolated) {
  const auto features_file = dir / "features.tsv";
  const auto edges_file = dir / "edges.tsv";
  const auto labels_file = dir / "labels.tsv";
  const auto splits_file = dir / "splits.json";

  // features
  auto feature_rows = read_tsv_rows(features_file);
  if (feature_rows.empty()) throw std::runtime_error(features_file.string() + ": no rows");
  const int n = static_cast<int>(feature_rows.size());
  const std::size_t m = feature_rows.front().size();
  Matrix x(n, m);
  for (int i = 0; i < n; ++i) {
    if (feature_rows[i].size() != m) {
      throw std::runtime_error(loc(features_file, i + 1) + ": ragged row, expected " +
                               std::to_string(m) + " values, got " +
                               std::to_string(feature_rows[i].size()));
    }
    for (std::size_t j = 0; j < m; ++j) x(i, j) = feature_rows[i][j];
  }

  // edges
  auto edge_rows = read_tsv_rows(edges_file);
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  for (std::size_t r = 0; r < edge_rows.size(); ++r) {
    if (edge_rows[r].size() != 2) {
      throw std::runtime_error(loc(edges_file, r + 1) + ": expected two indices");
    }
    int i = static_cast<int>(edge_rows[r][0]);
    int j = static_cast<int>(edge_rows[r][1]);
    if (edge_rows[r][0] != i || edge_rows[r][1] != j) {
      throw std::runtime_error(loc(edges_file, r + 1) + ": non-integer node index");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::runtime_error(loc(edges_file, r + 1) + ": node index out of range");
    }
    if (i == j) throw std::runtime_error(loc(edges_file, r + 1) + ": self-loop not allowed");
    auto e = std::minmax(i, j);
    if (!seen.insert({e.first, e.second}).second) {
      throw std::runtime_error(loc(edges_file, r + 1) + ": duplicate edge");
    }
    edges.emplace_back(e.first, e.second);
  }

  // labels
  auto label_rows = read_tsv_rows(labels_file);
  if (static_cast<int>(label_rows.size()) != n) {
    throw std::runtime_error(labels_file.string() + ": expected " + std::to_string(n) +
                             " rows, got " + std::to_string(label_rows.size()));
  }
  std::vector<int> ids(n);
  int n_classes = 0;
  for (int i = 0; i < n; ++i) {
    if (label_rows[i].size() != 1) {
      throw std::runtime_error(loc(labels_file, i + 1) + ": expected a single class id");
    }
    int id = static_cast<int>(label_rows[i][0]);
    if (label_rows[i][0] != id || id < -1) {
      throw std::runtime_error(loc(labels_file, i + 1) + ": invalid class id");
    }
    ids[i] = id;
    n_classes = std::max(n_classes, id + 1);
  }
  if (n_classes == 0) throw std::runtime_error(labels_file.string() + ": no labeled nodes");

  // splits
  std::ifstream sin(splits_file);
  if (!sin) throw std::runtime_error("missing file: " + splits_file.string());
  nlohmann::json sj;
  try {
    sin >> sj;
  } catch (const std::exception& e) {
    throw std::runtime_error(splits_file.string() + ": " + e.what());
  }
  auto read_split = [&](const char* key) {
    std::vector<int> out;
    if (!sj.contains(key)) {
      throw std::runtime_error(splits_file.string() + ": missing array '" + key + "'");
    }
    for (const auto& v : sj.at(key)) {
      int idx = v.get<int>();
      if (idx < 0 || idx >= n) {
        throw std::runtime_error(splits_file.string() + ": split index " + std::to_string(idx) +
                                 " out of range in '" + key + "'");
      }
      out.push_back(idx);
    }
    return out;
  };
  SplitSpec splits{read_split("train"), read_split("val"), read_split("test")};
  std::set<int> used;
  for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
    for (int idx : *part) {
      if (!used.insert(idx).second) {
        throw std::runtime_error(splits_file.string() + ": splits are not disjoint at index " +
                                 std::to_string(idx));
      }
    }
  }
  for (int idx : splits.train) {
    if (ids[idx] == -1) {
      throw std::runtime_error(splits_file.string() + ": train split contains unlabeled node " +
                               std::to_string(idx));
    }
  }

  Dataset data{Graph::create(n, std::move(edges), std::move(x)),
               LabelMatrix::from_ids(ids, n_classes), std::move(splits)};

  if (!allow_isolated) {
    DegreeInfo deg = degree_info(data.graph, false);
    for (int i = 0; i < n; ++i) {
      if (deg.degrees(i) == 0.0) {
        throw std::runtime_error(edges_file.string() + ": isolated node " + std::to_string(i) +
                                 " (degree zero)");
      }
    }
  }
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_tsv_matrix(data.graph.attributes(), dir / "features.tsv");

  std::ofstream eout(dir / "edges.tsv");
  for (const auto& [i, j] : data.graph.edges()) eout << i << '\t' << j << '\n';

  std::ofstream lout(dir / "labels.tsv");
  for (int i = 0; i < data.labels.n_nodes(); ++i) lout << data.labels.class_of(i) << '\n';

  nlohmann::json sj;
  sj["train"] = data.splits.train;
  sj["val"] = data.splits.val;
  sj["test"] = data.splits.test;
  std::ofstream sout(dir / "splits.json");
  sout << sj.dump(2) << '\n';
}

SplitSpec random_split(const LabelMatrix& labels, double train_frac, double val_frac,
                       std::uint64_t seed) {
  if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0) {
    throw std::invalid_argument("split fractions must be nonnegative and sum to at most 1");
  }
  std::vector<int> pool = labels.labeled_indices();
  Rng rng(seed);
  rng.shuffle(pool);
  const auto n = pool.size();
  const auto n_train = static_cast<std::size_t>(train_frac * n);
  const auto n_val = static_cast<std::size_t>(val_frac * n);
  SplitSpec s;
  s.train.assign(pool.begin(), pool.begin() + n_train);
  s.val.assign(pool.begin() + n_train, pool.begin() + n_train + n_val);
  s.test.assign(pool.begin() + n_train + n_val, pool.end());
  return s;
}

Matrix normalized_laplacian(const Graph& g, bool with_self_loops) {
  const int n = g.n_nodes();
  Matrix a = g.adjacency(with_self_loops);
  Vector deg = a.rowwise().sum();
  Vector dinv(n);
  for (int i = 0; i < n; ++i) {
    if (deg(i) <= 0.0) {
      throw std::runtime_error("zero degree at node " + std::to_string(i) +
                               " (isolated node without self-loops)");
    }
    dinv(i) = 1.0 / std::sqrt(deg(i));
  }
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    l(i, i) = 1.0 - a(i, i) * dinv(i) * dinv(i);
    for (int j = i + 1; j < n; ++j) {
      double v = -a(i, j) * dinv(i) * dinv(j);
      l(i, j) = v;
      l(j, i) = v;
    }
  }
  return l;
}

double representation_diversity(const Matrix& h) {
  const Eigen::Index n = h.rows();
  if (n < 2) throw std::invalid_argument("representation_diversity needs at least 2 rows");
  Matrix hn = h;
  for (Eigen::Index i = 0; i < n; ++i) {
    double norm = hn.row(i).norm();
    if (norm > 0.0) hn.row(i) /= norm;
    // zero rows stay zero vectors
  }
  Matrix gram = hn * hn.transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d2 = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
      total += std::sqrt(std::max(d2, 0.0));
    }
  }
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace csf
