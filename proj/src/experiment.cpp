#include "csf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "csf/spectral.hpp"
#include "csf/tsv.hpp"
#include "csf/util.hpp"

namespace csf {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

NystromMode nystrom_mode_from_name(const std::string& name) {
  if (name == "kernel_sketch") return NystromMode::kernel_sketch;
  if (name == "final_inverse") return NystromMode::final_inverse;
  throw std::invalid_argument("unknown nystrom mode '" + name + "'");
}

ModelConfig model_config(const ExperimentConfig& cfg, int depth, std::uint64_t seed,
                         bool concat_x) {
  ModelConfig mc;
  mc.n_layers = depth;
  mc.hidden_dim = cfg.hidden_dim;
  mc.dropout = cfg.dropout;
  mc.lr = cfg.lr;
  mc.epochs = cfg.epochs;
  mc.concat_x = concat_x;
  mc.seed = seed;
  return mc;
}

Kernel build_attr_kernel(const Kernel& gaussian, const ExperimentConfig& cfg) {
  if (!cfg.nystrom.enabled) return attr_highpass_kernel(gaussian, cfg.a2, cfg.a3);
  NystromConfig nc;
  nc.m = cfg.nystrom.frac > 0.0
             ? std::max(1, static_cast<int>(std::lround(cfg.nystrom.frac * gaussian.n())))
             : cfg.nystrom.m;
  nc.rank_k = cfg.nystrom.rank_k;
  nc.mode = nystrom_mode_from_name(cfg.nystrom.mode);
  return attr_highpass_kernel_nystrom(gaussian, cfg.a2, cfg.a3, nc);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::filesystem::path prepare_output_dir(const ExperimentConfig& cfg, const std::string& fallback) {
  std::string id = cfg.experiment_id.empty() ? fallback : cfg.experiment_id;
  std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / id;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_config(const ExperimentConfig& cfg, const KernelBundle& kb,
                  const std::filesystem::path& dir) {
  nlohmann::json j = cfg.to_json();
  j["resolved"]["gamma_used"] = kb.gamma_used;
  j["resolved"]["concat_x"] = kb.concat_x;
  if (!kb.gamma_scores.empty()) {
    TsvTable scores;
    scores.columns = {"gamma", "val_accuracy", "seed"};
    for (const auto& s : kb.gamma_scores) {
      scores.rows.push_back({s.gamma, s.val_accuracy, static_cast<double>(cfg.seeds.front())});
    }
    write_tsv_table(scores, dir / "gamma_scores.tsv");
  }
  std::ofstream out(dir / "config.json");
  out << j.dump(2) << '\n';
}

std::vector<CellResult> run_cells(const Dataset& base, const ExperimentConfig& cfg,
                                  const KernelBundle& kb, const std::vector<int>& depths) {
  std::vector<CellResult> cells;
  for (int depth : depths) {
    for (std::uint64_t seed : cfg.seeds) cells.push_back({depth, seed, {}});
  }
  parallel_for_indexed(cells.size(), [&](std::size_t i) {
    CellResult& cell = cells[i];
    Dataset data{base.graph, base.labels, splits_for_seed(base, cfg, cell.seed)};
    cell.report = train(data, kb.variant_kernel, model_config(cfg, cell.depth, cell.seed,
                                                              kb.concat_x));
  });
  return cells;
}

std::vector<AggregateRow> aggregate_by_depth(const std::vector<CellResult>& cells,
                                             const std::vector<int>& depths) {
  std::vector<AggregateRow> rows;
  for (int depth : depths) {
    std::vector<const TrainReport*> reports;
    for (const auto& cell : cells) {
      if (cell.depth == depth) reports.push_back(&cell.report);
    }
    rows.push_back(aggregate_cells(depth, reports));
  }
  return rows;
}

void write_aggregate(const std::vector<AggregateRow>& rows, const std::filesystem::path& file) {
  TsvTable table;
  table.columns = {"depth",           "n_seeds",         "test_acc_mean", "test_acc_std",
                   "val_acc_mean",    "final_loss_mean", "diversity_last_hidden_mean"};
  for (const auto& r : rows) {
    table.rows.push_back({static_cast<double>(r.depth), static_cast<double>(r.n_seeds),
                          r.test_acc_mean, r.test_acc_std, r.val_acc_mean, r.final_loss_mean,
                          r.diversity_last_hidden_mean});
  }
  write_tsv_table(table, file);
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["dataset_path"] = dataset_path;
  j["variant"] = variant;
  j["a2"] = a2;
  j["a3"] = a3;
  j["gamma"] = gamma;
  j["gamma_grid"] = gamma_grid;
  j["top_k"] = top_k;
  j["depths"] = depths;
  j["lr"] = lr;
  j["seeds"] = seeds;
  j["split_policy"] = split_policy;
  j["train_frac"] = train_frac;
  j["val_frac"] = val_frac;
  j["hidden_dim"] = hidden_dim;
  j["epochs"] = epochs;
  j["dropout"] = dropout;
  j["nystrom"] = {{"enabled", nystrom.enabled},
                  {"m", nystrom.m},
                  {"rank_k", nystrom.rank_k},
                  {"frac", nystrom.frac},
                  {"mode", nystrom.mode}};
  j["out_dir"] = out_dir;
  j["experiment_id"] = experiment_id;
  return j;
}

void ExperimentConfig::apply_json(const nlohmann::json& j) {
  maybe(j, "dataset_path", dataset_path);
  maybe(j, "variant", variant);
  maybe(j, "a2", a2);
  maybe(j, "a3", a3);
  maybe(j, "gamma", gamma);
  maybe(j, "gamma_grid", gamma_grid);
  maybe(j, "top_k", top_k);
  maybe(j, "depths", depths);
  maybe(j, "lr", lr);
  maybe(j, "seeds", seeds);
  maybe(j, "split_policy", split_policy);
  maybe(j, "train_frac", train_frac);
  maybe(j, "val_frac", val_frac);
  maybe(j, "hidden_dim", hidden_dim);
  maybe(j, "epochs", epochs);
  maybe(j, "dropout", dropout);
  if (j.contains("nystrom")) {
    const auto& nj = j.at("nystrom");
    maybe(nj, "enabled", nystrom.enabled);
    maybe(nj, "m", nystrom.m);
    maybe(nj, "rank_k", nystrom.rank_k);
    maybe(nj, "frac", nystrom.frac);
    maybe(nj, "mode", nystrom.mode);
  }
  maybe(j, "out_dir", out_dir);
  maybe(j, "experiment_id", experiment_id);
}

SplitSpec splits_for_seed(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.split_policy == "from_file") return data.splits;
  if (cfg.split_policy == "random") {
    return random_split(data.labels, cfg.train_frac, cfg.val_frac, seed);
  }
  throw std::invalid_argument("unknown split policy '" + cfg.split_policy + "'");
}

KernelBundle build_kernels(const Dataset& data, const ExperimentConfig& cfg) {
  KernelBundle kb;
  kb.gaussian = gaussian_knn_kernel(data.graph.attributes(), cfg.top_k);
  kb.k_top = topology_lowpass_kernel(data.graph);
  AblationVariant variant = ablation_variant_from_name(cfg.variant);
  kb.concat_x = ablation_variant_concat_x(variant);
  kb.gamma_used = cfg.gamma;

  const bool needs_attr =
      variant == AblationVariant::full || variant == AblationVariant::no_topology;
  Kernel attr;
  if (needs_attr) attr = build_attr_kernel(kb.gaussian, cfg);

  const bool is_fusion =
      variant == AblationVariant::full || variant == AblationVariant::lowpass_attribute;
  if (is_fusion && !cfg.gamma_grid.empty()) {
    // Validation-accuracy selection on the first (depth, seed) cell.
    const Kernel& left = variant == AblationVariant::full ? attr : kb.gaussian;
    Dataset sel_data{data.graph, data.labels, splits_for_seed(data, cfg, cfg.seeds.front())};
    auto train_fn = [&](const Kernel& fused_kernel, const Dataset& d) {
      TrainReport r = train(d, fused_kernel,
                            model_config(cfg, cfg.depths.front(), cfg.seeds.front(), kb.concat_x));
      return r.best_val_acc;
    };
    GammaSelection sel = select_gamma(left, kb.k_top, sel_data, cfg.gamma_grid, train_fn);
    kb.gamma_used = sel.gamma;
    kb.gamma_scores = sel.scores;
  }

  switch (variant) {
    case AblationVariant::full: kb.variant_kernel = fuse(attr, kb.k_top, kb.gamma_used); break;
    case AblationVariant::no_topology: kb.variant_kernel = attr; break;
    default:
      kb.variant_kernel =
          ablation_kernel(variant, kb.gaussian, kb.k_top, cfg.a2, cfg.a3, kb.gamma_used);
  }
  return kb;
}

AggregateRow aggregate_cells(int depth, const std::vector<const TrainReport*>& reports) {
  AggregateRow row;
  row.depth = depth;
  row.n_seeds = static_cast<int>(reports.size());
  std::vector<double> acc, val, loss, div;
  for (const TrainReport* r : reports) {
    acc.push_back(r->test_acc_at_best_val);
    val.push_back(r->best_val_acc);
    loss.push_back(r->per_epoch_loss.empty() ? 0.0 : r->per_epoch_loss.back());
    // diversity of the input to the classification layer
    std::size_t idx = r->diversity_per_layer.size() >= 2 ? r->diversity_per_layer.size() - 2 : 0;
    div.push_back(r->diversity_per_layer.empty() ? 0.0 : r->diversity_per_layer[idx]);
  }
  row.test_acc_mean = mean_of(acc);
  row.test_acc_std = sample_std(acc, row.test_acc_mean);
  row.val_acc_mean = mean_of(val);
  row.final_loss_mean = mean_of(loss);
  row.diversity_last_hidden_mean = mean_of(div);
  return row;
}

RunOutput cmd_run(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run: empty seed list");
  if (cfg.depths.empty()) throw std::invalid_argument("run: empty depth list");
  Dataset data = load_dataset(cfg.dataset_path);
  KernelBundle kb = build_kernels(data, cfg);

  RunOutput out;
  out.directory = prepare_output_dir(cfg, "run");
  out.cells = run_cells(data, cfg, kb, cfg.depths);
  out.aggregate = aggregate_by_depth(out.cells, cfg.depths);

  std::filesystem::create_directories(out.directory / "runs");
  for (const auto& cell : out.cells) {
    std::ofstream f(out.directory / "runs" /
                    ("depth" + std::to_string(cell.depth) + "_seed" + std::to_string(cell.seed) +
                     ".json"));
    f << cell.report.to_json().dump(2) << '\n';
  }
  write_aggregate(out.aggregate, out.directory / "aggregate.tsv");
  write_config(cfg, kb, out.directory);
  return out;
}

SweepKind sweep_kind_from_name(const std::string& name) {
  if (name == "knn_topk") return SweepKind::knn_topk;
  if (name == "a2") return SweepKind::a2;
  if (name == "a3") return SweepKind::a3;
  if (name == "lr") return SweepKind::lr;
  if (name == "gamma") return SweepKind::gamma;
  throw std::invalid_argument("unknown sweep kind '" + name + "'");
}

std::vector<SweepRow> cmd_sweep(SweepKind kind, const ExperimentConfig& cfg,
                                const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (cfg.seeds.empty()) throw std::invalid_argument("sweep: empty seed list");
  Dataset data = load_dataset(cfg.dataset_path);

  std::vector<SweepRow> rows;
  for (double value : grid) {
    ExperimentConfig c = cfg;
    c.gamma_grid.clear();  // sweeps fix gamma
    switch (kind) {
      case SweepKind::knn_topk: c.top_k = static_cast<int>(value); break;
      case SweepKind::a2: c.a2 = value; break;
      case SweepKind::a3: c.a3 = value; break;
      case SweepKind::lr: c.lr = value; break;
      case SweepKind::gamma: c.gamma = value; break;
    }
    KernelBundle kb = build_kernels(data, c);
    std::vector<CellResult> cells = run_cells(data, c, kb, c.depths);
    std::vector<double> acc, val;
    for (const auto& cell : cells) {
      acc.push_back(cell.report.test_acc_at_best_val);
      val.push_back(cell.report.best_val_acc);
    }
    SweepRow row;
    row.value = value;
    row.test_acc_mean = mean_of(acc);
    row.test_acc_std = sample_std(acc, row.test_acc_mean);
    row.val_acc_mean = mean_of(val);
    rows.push_back(row);
  }

  std::filesystem::path dir = prepare_output_dir(cfg, "sweep");
  TsvTable table;
  table.columns = {"value", "test_acc_mean", "test_acc_std", "val_acc_mean"};
  for (const auto& r : rows) {
    table.rows.push_back({r.value, r.test_acc_mean, r.test_acc_std, r.val_acc_mean});
  }
  write_tsv_table(table, dir / "sweep.tsv");
  std::ofstream f(dir / "config.json");
  f << cfg.to_json().dump(2) << '\n';
  return rows;
}

void cmd_spectral(const ExperimentConfig& cfg, const SpectralRequest& request) {
  Dataset data = load_dataset(cfg.dataset_path);
  std::filesystem::path dir = prepare_output_dir(cfg, "spectral");

  const double p_bar = degree_info(data.graph, false).avg_degree;
  Matrix laplacian = normalized_laplacian(data.graph, true);
  EigenSystem graph_es = eigendecompose(laplacian);
  Kernel gaussian = gaussian_knn_kernel(data.graph.attributes(), cfg.top_k);
  EigenSystem kernel_es = eigendecompose(gaussian);

  for (const std::string& name : request.filters) {
    FilterSpec spec;
    Vector lambdas;
    if (name == "gcn") {
      spec = FilterSpec::gcn(p_bar);
    } else if (name == "sgc") {
      spec = FilterSpec::sgc(request.sgc_layers);
    } else if (name == "lp") {
      spec = FilterSpec::label_prop(request.lp_a1);
    } else if (name == "krr") {
      spec = FilterSpec::krr(request.krr_lambda);
    } else if (name == "attr") {
      spec = FilterSpec::attr(cfg.a2, cfg.a3);
    } else {
      throw std::invalid_argument("unknown filter name '" + name + "'");
    }
    if (!request.lambdas.empty()) {
      lambdas = Eigen::Map<const Vector>(request.lambdas.data(), request.lambdas.size());
    } else {
      lambdas = spec.domain_hi == 2.0 ? graph_es.eigenvalues : kernel_es.eigenvalues;
    }
    Vector profile = shrinkage_profile(spec, lambdas);
    TsvTable table;
    table.columns = {"lambda", "g"};
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
      table.rows.push_back({lambdas(i), profile(i)});
    }
    write_tsv_table(table, dir / ("profile_" + name + ".tsv"));
  }

  // Frequency response of the variant kernel against the topology kernel on
  // the graph Fourier basis.
  KernelBundle kb = build_kernels(data, cfg);
  const int n = data.graph.n_nodes();
  std::vector<int> signals = request.signal_indices;
  if (signals.empty()) signals = {0, n / 2, n - 1};
  for (int s : signals) {
    if (s < 0 || s >= n) throw std::invalid_argument("signal index out of range");
  }
  Matrix sig(n, signals.size());
  for (std::size_t j = 0; j < signals.size(); ++j) sig.col(j) = graph_es.eigenvectors.col(signals[j]);
  Matrix response_variant = graph_es.eigenvectors.transpose() *
                            frequency_response(kb.variant_kernel, sig);
  Matrix gain_variant = graph_es.eigenvectors.transpose() *
                        (kb.variant_kernel.matrix * graph_es.eigenvectors);
  Matrix gain_top = graph_es.eigenvectors.transpose() * (kb.k_top.matrix * graph_es.eigenvectors);

  TsvTable table;
  table.columns = {"lambda", "gain_variant", "gain_topology"};
  for (std::size_t j = 0; j < signals.size(); ++j) {
    table.columns.push_back("response_sig" + std::to_string(signals[j]));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> row{graph_es.eigenvalues(i), gain_variant(i, i), gain_top(i, i)};
    for (std::size_t j = 0; j < signals.size(); ++j) row.push_back(response_variant(i, j));
    table.rows.push_back(std::move(row));
  }
  write_tsv_table(table, dir / "frequency_response.tsv");
}

std::vector<NystromBenchRow> cmd_nystrom_bench(const ExperimentConfig& cfg,
                                               const std::vector<int>& m_grid) {
  using clock = std::chrono::steady_clock;
  Dataset data = load_dataset(cfg.dataset_path);
  const int n = data.graph.n_nodes();
  if (n < 500) {
    std::cerr << "nystrom-bench: dataset has only " << n
              << " nodes; timings below ~500 nodes are noise-dominated\n";
  }
  Kernel gaussian = gaussian_knn_kernel(data.graph.attributes(), cfg.top_k);
  Kernel k_top = topology_lowpass_kernel(data.graph);

  auto evaluate = [&](const Kernel& attr) {
    Kernel fused = fuse(attr, k_top, cfg.gamma);
    std::vector<double> accs;
    for (std::uint64_t seed : cfg.seeds) {
      Dataset d{data.graph, data.labels, splits_for_seed(data, cfg, seed)};
      TrainReport r = train(d, fused, model_config(cfg, cfg.depths.front(), seed, true));
      accs.push_back(r.test_acc_at_best_val);
    }
    return mean_of(accs);
  };

  std::vector<NystromBenchRow> rows;

  auto t0 = clock::now();
  Kernel exact = attr_highpass_kernel(gaussian, cfg.a2, cfg.a3);
  auto t1 = clock::now();
  NystromBenchRow exact_row;
  exact_row.m = 0;  // denotes the exact pipeline
  exact_row.rank_k = 0;
  exact_row.frobenius_error = 0.0;
  exact_row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  exact_row.accuracy = evaluate(exact);
  rows.push_back(exact_row);

  for (int m : m_grid) {
    NystromConfig nc;
    nc.m = m;
    nc.rank_k = cfg.nystrom.rank_k > 0 ? std::min(cfg.nystrom.rank_k, m) : m;
    nc.seed = cfg.seeds.front();
    nc.mode = nystrom_mode_from_name(cfg.nystrom.mode);
    auto s0 = clock::now();
    Kernel attr = attr_highpass_kernel_nystrom(gaussian, cfg.a2, cfg.a3, nc);
    auto s1 = clock::now();
    NystromBenchRow row;
    row.m = m;
    row.rank_k = nc.rank_k;
    row.frobenius_error = (attr.matrix - exact.matrix).norm();
    row.wall_ms = std::chrono::duration<double, std::milli>(s1 - s0).count();
    row.accuracy = evaluate(attr);
    rows.push_back(row);
  }

  std::filesystem::path dir = prepare_output_dir(cfg, "nystrom_bench");
  TsvTable table;
  table.columns = {"m", "rank_k", "frobenius_error", "wall_ms", "accuracy"};
  for (const auto& r : rows) {
    table.rows.push_back({static_cast<double>(r.m), static_cast<double>(r.rank_k),
                          r.frobenius_error, r.wall_ms, r.accuracy});
  }
  write_tsv_table(table, dir / "nystrom_bench.tsv");
  std::ofstream f(dir / "config.json");
  f << cfg.to_json().dump(2) << '\n';
  return rows;
}

void cmd_ablate(const ExperimentConfig& cfg) {
  Dataset data = load_dataset(cfg.dataset_path);
  std::filesystem::path dir = prepare_output_dir(cfg, "ablate");

  std::ofstream names(dir / "variants.txt");
  std::vector<std::string> variant_names{"full", "no_topology", "no_attribute",
                                         "lowpass_attribute", "only_lowpass_attribute"};
  TsvTable combined;
  combined.columns = {"variant_index", "depth", "n_seeds", "test_acc_mean", "test_acc_std"};
  for (std::size_t vi = 0; vi < variant_names.size(); ++vi) {
    ExperimentConfig c = cfg;
    c.variant = variant_names[vi];
    KernelBundle kb = build_kernels(data, c);
    std::vector<CellResult> cells = run_cells(data, c, kb, c.depths);
    std::vector<AggregateRow> agg = aggregate_by_depth(cells, c.depths);
    for (const auto& row : agg) {
      combined.rows.push_back({static_cast<double>(vi), static_cast<double>(row.depth),
                               static_cast<double>(row.n_seeds), row.test_acc_mean,
                               row.test_acc_std});
    }
    names << vi << '\t' << variant_names[vi] << '\n';
  }
  write_tsv_table(combined, dir / "ablate.tsv");
  std::ofstream f(dir / "config.json");
  f << cfg.to_json().dump(2) << '\n';
}

}  // namespace csf
