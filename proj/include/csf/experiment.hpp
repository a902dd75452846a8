#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "csf/graph.hpp"
#include "csf/kernels.hpp"
#include "csf/mkl.hpp"
#include "csf/nystrom.hpp"
#include "csf/trainer.hpp"

namespace csf {

struct NystromSettings {
  bool enabled = false;
  int m = 0;
  int rank_k = 0;     // 0 = use m
  double frac = 0.0;  // when > 0, m = max(1, round(frac * N)); 0.001 mirrors
                      // the 0.1% sampling preset
  std::string mode = "kernel_sketch";
};

// Full configuration of an experiment run; mirrored by the CLI flags and the
// JSON config file (config file entries override flags).
struct ExperimentConfig {
  std::string dataset_path;
  std::string variant = "full";
  double a2 = 100.0;
  double a3 = 1.0;
  double gamma = 0.5;
  std::vector<double> gamma_grid;  // nonempty: select gamma on validation
  int top_k = 20;
  std::vector<int> depths{2, 5, 10, 20};
  double lr = 0.01;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string split_policy = "random";  // "random" or "from_file"
  double train_frac = 0.6;
  double val_frac = 0.2;
  int hidden_dim = 16;
  int epochs = 150;
  double dropout = 0.5;
  NystromSettings nystrom;
  std::string out_dir = "out";
  std::string experiment_id;

  nlohmann::json to_json() const;
  void apply_json(const nlohmann::json& j);  // only keys present are applied
};

// Kernels shared by every cell of an experiment.
struct KernelBundle {
  Kernel gaussian;  // renormalized Gaussian KNN kernel on the attributes
  Kernel k_top;
  Kernel variant_kernel;
  double gamma_used = 0.0;
  std::vector<GammaScore> gamma_scores;
  bool concat_x = true;
};

KernelBundle build_kernels(const Dataset& data, const ExperimentConfig& cfg);

// Splits for one seed under the configured policy.
SplitSpec splits_for_seed(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

struct CellResult {
  int depth = 0;
  std::uint64_t seed = 0;
  TrainReport report;
};

struct AggregateRow {
  int depth = 0;
  int n_seeds = 0;
  double test_acc_mean = 0.0;
  double test_acc_std = 0.0;
  double val_acc_mean = 0.0;
  double final_loss_mean = 0.0;
  double diversity_last_hidden_mean = 0.0;
};

AggregateRow aggregate_cells(int depth, const std::vector<const TrainReport*>& reports);

struct RunOutput {
  std::filesystem::path directory;
  std::vector<CellResult> cells;
  std::vector<AggregateRow> aggregate;
};

// run: per-(depth, seed) training cells, per-run JSON reports and an
// aggregate table. Cells execute on the worker pool (CSF_THREADS).
RunOutput cmd_run(const ExperimentConfig& cfg);

// sweep: one aggregate row per grid value; shared seeds across values.
enum class SweepKind { knn_topk, a2, a3, lr, gamma };
SweepKind sweep_kind_from_name(const std::string& name);

struct SweepRow {
  double value = 0.0;
  double test_acc_mean = 0.0;
  double test_acc_std = 0.0;
  double val_acc_mean = 0.0;
};

std::vector<SweepRow> cmd_sweep(SweepKind kind, const ExperimentConfig& cfg,
                                const std::vector<double>& grid);

// spectral: shrinkage-profile and frequency-response tables.
struct SpectralRequest {
  std::vector<std::string> filters{"gcn", "attr"};
  std::vector<int> signal_indices;     // default: lowest, middle, highest
  std::vector<double> lambdas;         // default: operator spectrum
  int sgc_layers = 2;
  double lp_a1 = 1.0;
  double krr_lambda = 1.0;
};

void cmd_spectral(const ExperimentConfig& cfg, const SpectralRequest& request);

// nystrom-bench: (m, rank_k, frobenius_error, wall_ms, accuracy) rows;
// the m = 0 row reports the exact (non-Nystrom) pipeline for reference.
struct NystromBenchRow {
  int m = 0;
  int rank_k = 0;
  double frobenius_error = 0.0;
  double wall_ms = 0.0;
  double accuracy = 0.0;
};

std::vector<NystromBenchRow> cmd_nystrom_bench(const ExperimentConfig& cfg,
                                               const std::vector<int>& m_grid);

// ablate: cmd_run across every ablation variant.
void cmd_ablate(const ExperimentConfig& cfg);

}  // namespace csf
