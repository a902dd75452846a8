#include "csf/trainer.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>
#include <string>

#include "csf/mkl.hpp"
#include "csf/spectral.hpp"
#include "csf/util.hpp"

namespace csf {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

Matrix normalized_propagation(const Kernel& k) {
  const int n = k.n();
  Vector rowsum = k.matrix.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (!(rowsum(i) > 0.0)) {
      throw std::runtime_error("degenerate normalization: kernel row sum " +
                               std::to_string(rowsum(i)) + " at node " + std::to_string(i));
    }
  }
  Vector dinv = rowsum.array().sqrt().inverse();
  Matrix p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = k.matrix(i, j) * dinv(i) * dinv(j);
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

Matrix apply_activation(Matrix m, Activation act) {
  if (act == Activation::relu) m = m.cwiseMax(0.0);
  return m;
}

void validate_config(const ModelConfig& cfg) {
  if (cfg.n_layers < 1) throw std::invalid_argument("n_layers must be at least 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (cfg.hidden_dim < 1) throw std::invalid_argument("hidden_dim must be at least 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (cfg.lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
}

// Layer input widths for the stack. Layer 0 consumes X; hidden layers map to
// hidden_dim and re-attach X when concat_x; the final layer maps to the
// class count without concatenation.
std::vector<std::pair<int, int>> layer_shapes(const ModelConfig& cfg, int n_attrs, int n_classes) {
  std::vector<std::pair<int, int>> shapes;
  for (int k = 0; k < cfg.n_layers; ++k) {
    int in = k == 0 ? n_attrs : (cfg.concat_x ? cfg.hidden_dim + n_attrs : cfg.hidden_dim);
    int out = k == cfg.n_layers - 1 ? n_classes : cfg.hidden_dim;
    shapes.emplace_back(in, out);
  }
  return shapes;
}

std::vector<Matrix> init_weights(const std::vector<std::pair<int, int>>& shapes, Rng& rng) {
  std::vector<Matrix> weights;
  weights.reserve(shapes.size());
  for (const auto& [in, out] : shapes) {
    double limit = std::sqrt(6.0 / (in + out));
    Matrix w(in, out);
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) w(i, j) = rng.uniform(-limit, limit);
    }
    weights.push_back(std::move(w));
  }
  return weights;
}

// The model state shared between training, evaluation and the checks.
struct Network {
  const Dataset* data = nullptr;
  ModelConfig cfg;
  Matrix p;   // normalized propagation operator
  Matrix px;  // p * X, reused wherever no dropout applies
  SparseMatrix x_sparse;
  std::vector<Matrix> weights;

  int n() const { return static_cast<int>(p.rows()); }
  int n_attrs() const { return data->graph.n_attributes(); }
  int n_classes() const { return data->labels.n_classes(); }

  // Forward pass without dropout. Collects the layer outputs (post-concat
  // hidden representations, then logits) when requested.
  Matrix forward_eval(const std::vector<Matrix>& ws, std::vector<Matrix>* outputs = nullptr) const {
    const int layers = cfg.n_layers;
    Matrix z;  // current hidden block (without the X columns)
    Matrix logits;
    for (int k = 0; k < layers; ++k) {
      Matrix s;
      if (k == 0) {
        s = px * ws[0];
      } else if (cfg.concat_x) {
        s = (p * z) * ws[k].topRows(cfg.hidden_dim) + px * ws[k].bottomRows(n_attrs());
      } else {
        s = (p * z) * ws[k];
      }
      if (k == layers - 1) {
        logits = std::move(s);
      } else {
        z = apply_activation(std::move(s), cfg.activation);
        if (outputs) {
          Matrix h(n(), z.cols() + (cfg.concat_x ? n_attrs() : 0));
          h.leftCols(z.cols()) = z;
          if (cfg.concat_x) h.rightCols(n_attrs()) = data->graph.attributes();
          outputs->push_back(std::move(h));
        }
      }
    }
    if (outputs) outputs->push_back(logits);
    return logits;
  }

  double accuracy(const Matrix& logits, const std::vector<int>& idx) const {
    if (idx.empty()) return 0.0;
    int correct = 0;
    for (int i : idx) {
      int pred = 0;
      logits.row(i).maxCoeff(&pred);
      if (pred == data->labels.class_of(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
  }
};

struct ForwardCache {
  std::vector<Matrix> phin;  // per layer, P * (masked input), N x in_width
  std::vector<Matrix> s;     // per layer pre-activation
  std::vector<Matrix> mask_z;
  Matrix logits;
};

// Training-mode forward. Dropout masks the post-concat layer input; the X
// block is handled through a sparse copy so the mask only touches stored
// nonzeros (masking zeros is a no-op for the product).
ForwardCache forward_train(const Network& net, const std::vector<Matrix>& ws, Rng& rng) {
  const ModelConfig& cfg = net.cfg;
  const int layers = cfg.n_layers;
  const double p_drop = cfg.dropout;
  const double scale = p_drop > 0.0 ? 1.0 / (1.0 - p_drop) : 1.0;
  ForwardCache cache;
  cache.phin.resize(layers);
  cache.s.resize(layers);
  cache.mask_z.resize(layers);

  Matrix z;
  for (int k = 0; k < layers; ++k) {
    const bool has_z = k > 0;
    const bool has_x = k == 0 || cfg.concat_x;

    Matrix phin_z;
    if (has_z) {
      Matrix zin = z;
      if (p_drop > 0.0) {
        Matrix mask(zin.rows(), zin.cols());
        for (Eigen::Index i = 0; i < zin.rows(); ++i) {
          for (Eigen::Index j = 0; j < zin.cols(); ++j) {
            mask(i, j) = rng.unit() >= p_drop ? scale : 0.0;
          }
        }
        zin = zin.cwiseProduct(mask);
        cache.mask_z[k] = std::move(mask);
      }
      phin_z = net.p * zin;
    }

    Matrix phin_x;
    if (has_x) {
      if (p_drop > 0.0) {
        SparseMatrix xm = net.x_sparse;
        for (int t = 0; t < xm.nonZeros(); ++t) {
          xm.valuePtr()[t] *= rng.unit() >= p_drop ? scale : 0.0;
        }
        phin_x = net.p * xm;
      } else {
        phin_x = net.px;
      }
    }

    Matrix& phin = cache.phin[k];
    if (has_z && has_x) {
      phin.resize(net.n(), phin_z.cols() + phin_x.cols());
      phin.leftCols(phin_z.cols()) = phin_z;
      phin.rightCols(phin_x.cols()) = phin_x;
    } else {
      phin = has_z ? std::move(phin_z) : std::move(phin_x);
    }

    cache.s[k] = phin * ws[k];
    if (k < layers - 1) {
      z = apply_activation(cache.s[k], cfg.activation);
    } else {
      cache.logits = cache.s[k];
    }
  }
  return cache;
}

double softmax_cross_entropy(const Matrix& logits, const Dataset& data,
                             const std::vector<int>& train_idx, Matrix* dlogits) {
  const Eigen::Index c = logits.cols();
  if (dlogits) *dlogits = Matrix::Zero(logits.rows(), c);
  double loss = 0.0;
  for (int i : train_idx) {
    Vector row = logits.row(i).transpose();
    double mx = row.maxCoeff();
    Vector ex = (row.array() - mx).exp();
    double denom = ex.sum();
    int label = data.labels.class_of(i);
    loss -= std::log(std::max(ex(label) / denom, 1e-300));
    if (dlogits) {
      dlogits->row(i) = (ex / denom).transpose();
      (*dlogits)(i, label) -= 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(train_idx.size());
  if (dlogits) *dlogits *= inv;
  return loss * inv;
}

std::vector<Matrix> backward(const Network& net, const std::vector<Matrix>& ws,
                             const ForwardCache& cache, const Matrix& dlogits) {
  const ModelConfig& cfg = net.cfg;
  const int layers = cfg.n_layers;
  std::vector<Matrix> grads(layers);
  Matrix ds = dlogits;
  for (int k = layers - 1; k >= 0; --k) {
    grads[k] = cache.phin[k].transpose() * ds;
    if (k == 0) break;
    // Only the hidden block of the input feeds back; the X columns are
    // constants.
    Matrix dphin_z = ds * ws[k].topRows(cfg.hidden_dim).transpose();
    Matrix dz = net.p * dphin_z;
    if (cache.mask_z[k].size() > 0) dz = dz.cwiseProduct(cache.mask_z[k]);
    if (cfg.activation == Activation::relu) {
      dz = dz.cwiseProduct((cache.s[k - 1].array() > 0.0).cast<double>().matrix());
    }
    ds = std::move(dz);
  }
  return grads;
}

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(const std::vector<Matrix>& weights) {
    for (const auto& w : weights) {
      m.push_back(Matrix::Zero(w.rows(), w.cols()));
      v.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
  }

  void step(std::vector<Matrix>& weights, const std::vector<Matrix>& grads, double lr, int t) {
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * grads[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * grads[k].cwiseProduct(grads[k]);
      weights[k].array() -= lr * (m[k].array() / bc1) / ((v[k].array() / bc2).sqrt() + eps);
    }
  }
};

Network build_network(const Dataset& data, const Kernel& kernel, const ModelConfig& cfg) {
  validate_config(cfg);
  if (kernel.n() != data.graph.n_nodes()) {
    throw std::invalid_argument("kernel dimension " + std::to_string(kernel.n()) +
                                " does not match graph size " +
                                std::to_string(data.graph.n_nodes()));
  }
  if (data.splits.train.empty()) throw std::invalid_argument("empty train split");
  Network net;
  net.data = &data;
  net.cfg = cfg;
  net.p = normalized_propagation(kernel);
  net.px = net.p * data.graph.attributes();
  net.x_sparse = data.graph.attributes().sparseView();
  net.x_sparse.makeCompressed();
  return net;
}

}  // namespace

Matrix propagate_layer(const Kernel& k, const Matrix& h, const Matrix& w, const Matrix& x,
                       Activation act, bool concat_x) {
  if (h.rows() != k.matrix.rows()) {
    throw std::invalid_argument("propagate_layer: h must have one row per node");
  }
  if (w.rows() != h.cols()) throw std::invalid_argument("propagate_layer: h/w shape mismatch");
  if (concat_x && x.rows() != h.rows()) {
    throw std::invalid_argument("propagate_layer: x must have one row per node");
  }
  Matrix p = normalized_propagation(k);
  Matrix z = apply_activation((p * h) * w, act);
  if (!concat_x) return z;
  Matrix out(z.rows(), z.cols() + x.cols());
  out.leftCols(z.cols()) = z;
  out.rightCols(x.cols()) = x;
  return out;
}

TrainReport train(const Dataset& data, const Kernel& kernel, const ModelConfig& cfg) {
  Network net = build_network(data, kernel, cfg);
  Rng rng(cfg.seed);
  auto shapes = layer_shapes(cfg, net.n_attrs(), net.n_classes());
  std::vector<Matrix> weights = init_weights(shapes, rng);
  AdamState adam(weights);

  TrainReport report;
  report.seed = cfg.seed;
  double best_val = -1.0;
  std::vector<Matrix> best_weights = weights;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ForwardCache cache = forward_train(net, weights, rng);
    Matrix dlogits;
    double loss = softmax_cross_entropy(cache.logits, data, data.splits.train, &dlogits);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("training loss is not finite at epoch " + std::to_string(epoch));
    }
    report.per_epoch_loss.push_back(loss);
    std::vector<Matrix> grads = backward(net, weights, cache, dlogits);
    adam.step(weights, grads, cfg.lr, epoch + 1);

    Matrix logits = net.forward_eval(weights);
    double val_acc = net.accuracy(logits, data.splits.val);
    double test_acc = net.accuracy(logits, data.splits.test);
    if (val_acc > best_val) {
      best_val = val_acc;
      report.test_acc_at_best_val = test_acc;
      best_weights = weights;
    }
  }
  report.best_val_acc = best_val;

  std::vector<Matrix> layer_outputs;
  net.forward_eval(best_weights, &layer_outputs);
  report.diversity_per_layer.push_back(representation_diversity(data.graph.attributes()));
  for (const auto& h : layer_outputs) {
    report.diversity_per_layer.push_back(representation_diversity(h));
  }
  return report;
}

std::vector<double> gradient_check_layers(const ModelConfig& cfg, const Dataset& data,
                                          const Kernel& kernel, double epsilon,
                                          const std::vector<Matrix>* weights_override) {
  if (cfg.dropout != 0.0) {
    throw std::invalid_argument("gradient_check requires dropout == 0");
  }
  Network net = build_network(data, kernel, cfg);
  Rng rng(cfg.seed);
  auto shapes = layer_shapes(cfg, net.n_attrs(), net.n_classes());
  std::vector<Matrix> weights = weights_override ? *weights_override : init_weights(shapes, rng);

  Rng dummy(0);
  ForwardCache cache = forward_train(net, weights, dummy);
  Matrix dlogits;
  softmax_cross_entropy(cache.logits, data, data.splits.train, &dlogits);
  std::vector<Matrix> analytic = backward(net, weights, cache, dlogits);

  auto loss_at = [&](const std::vector<Matrix>& ws) {
    Rng local(0);
    ForwardCache c = forward_train(net, ws, local);
    return softmax_cross_entropy(c.logits, data, data.splits.train, nullptr);
  };

  std::vector<double> per_layer(weights.size(), 0.0);
  std::vector<Matrix> ws = weights;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (Eigen::Index i = 0; i < weights[k].rows(); ++i) {
      for (Eigen::Index j = 0; j < weights[k].cols(); ++j) {
        const double orig = ws[k](i, j);
        ws[k](i, j) = orig + epsilon;
        double up = loss_at(ws);
        ws[k](i, j) = orig - epsilon;
        double down = loss_at(ws);
        ws[k](i, j) = orig;
        double fd = (up - down) / (2.0 * epsilon);
        double ref = std::max({std::abs(fd), std::abs(analytic[k](i, j)), 1e-6});
        per_layer[k] = std::max(per_layer[k], std::abs(fd - analytic[k](i, j)) / ref);
      }
    }
  }
  return per_layer;
}

double gradient_check(const ModelConfig& cfg, const Dataset& data, const Kernel& kernel,
                      double epsilon) {
  auto per_layer = gradient_check_layers(cfg, data, kernel, epsilon);
  double mx = 0.0;
  for (double v : per_layer) mx = std::max(mx, v);
  return mx;
}

AblationVariant ablation_variant_from_name(const std::string& name) {
  if (name == "full") return AblationVariant::full;
  if (name == "no_topology") return AblationVariant::no_topology;
  if (name == "no_attribute") return AblationVariant::no_attribute;
  if (name == "lowpass_attribute") return AblationVariant::lowpass_attribute;
  if (name == "only_lowpass_attribute") return AblationVariant::only_lowpass_attribute;
  throw std::invalid_argument("unknown ablation variant '" + name + "'");
}

std::string ablation_variant_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::full: return "full";
    case AblationVariant::no_topology: return "no_topology";
    case AblationVariant::no_attribute: return "no_attribute";
    case AblationVariant::lowpass_attribute: return "lowpass_attribute";
    case AblationVariant::only_lowpass_attribute: return "only_lowpass_attribute";
  }
  throw std::invalid_argument("unknown ablation variant");
}

Kernel ablation_kernel(AblationVariant v, const Kernel& gaussian_knn, const Kernel& k_top,
                       double a2, double a3, double gamma) {
  switch (v) {
    case AblationVariant::full:
      return fuse(attr_highpass_kernel(gaussian_knn, a2, a3), k_top, gamma);
    case AblationVariant::no_topology:
      return attr_highpass_kernel(gaussian_knn, a2, a3);
    case AblationVariant::no_attribute:
      return k_top;
    case AblationVariant::lowpass_attribute:
      // The renormalized Gaussian KNN kernel is exactly the GCN-style
      // low-pass operator on the attribute graph.
      return fuse(gaussian_knn, k_top, gamma);
    case AblationVariant::only_lowpass_attribute:
      return gaussian_knn;
  }
  throw std::invalid_argument("unknown ablation variant");
}

bool ablation_variant_concat_x(AblationVariant v) {
  return v != AblationVariant::no_attribute;
}

std::vector<DepthSweepRow> depth_sweep(const Dataset& data,
                                       const std::function<Kernel()>& kernel_builder,
                                       const ModelConfig& cfg_base, const std::vector<int>& depths,
                                       const std::vector<std::uint64_t>& seeds) {
  if (depths.empty()) throw std::invalid_argument("depth_sweep: empty depth list");
  if (seeds.empty()) throw std::invalid_argument("depth_sweep: empty seed list");
  Kernel kernel = kernel_builder();
  std::vector<DepthSweepRow> rows;
  for (int depth : depths) {
    DepthSweepRow row;
    row.depth = depth;
    for (std::uint64_t seed : seeds) {
      ModelConfig cfg = cfg_base;
      cfg.n_layers = depth;
      cfg.seed = seed;
      row.reports.push_back(train(data, kernel, cfg));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["per_epoch_loss"] = per_epoch_loss;
  j["best_val_acc"] = best_val_acc;
  j["test_acc_at_best_val"] = test_acc_at_best_val;
  j["diversity_per_layer"] = diversity_per_layer;
  return j;
}

TrainReport TrainReport::from_json(const nlohmann::json& j) {
  TrainReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.per_epoch_loss = j.at("per_epoch_loss").get<std::vector<double>>();
  r.best_val_acc = j.at("best_val_acc").get<double>();
  r.test_acc_at_best_val = j.at("test_acc_at_best_val").get<double>();
  r.diversity_per_layer = j.at("diversity_per_layer").get<std::vector<double>>();
  return r;
}

}  // namespace csf
