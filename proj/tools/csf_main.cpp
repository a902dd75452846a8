#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "csf/experiment.hpp"
#include "csf/mkl.hpp"
#include "csf/synth.hpp"

namespace {

bool g_select_gamma = false;

void add_common_options(CLI::App* cmd, csf::ExperimentConfig& cfg, std::string& config_file) {
  cmd->add_flag("--select-gamma", g_select_gamma,
                "select gamma by validation accuracy over the default grid");
  cmd->add_option("--dataset", cfg.dataset_path, "dataset directory");
  cmd->add_option("--variant", cfg.variant,
                  "full | no_topology | no_attribute | lowpass_attribute | "
                  "only_lowpass_attribute");
  cmd->add_option("--a2", cfg.a2, "attribute filter shrinkage strength");
  cmd->add_option("--a3", cfg.a3, "attribute filter frequency range");
  cmd->add_option("--gamma", cfg.gamma, "fusion weight of the squared-difference term");
  cmd->add_option("--gamma-grid", cfg.gamma_grid,
                  "candidate gammas; selects by validation accuracy")
      ->delimiter(',');
  cmd->add_option("--top-k", cfg.top_k, "KNN neighbours for the Gaussian kernel");
  cmd->add_option("--depths", cfg.depths, "layer counts")->delimiter(',');
  cmd->add_option("--lr", cfg.lr, "learning rate");
  cmd->add_option("--seed-list", cfg.seeds, "seeds, comma separated")->delimiter(',');
  cmd->add_option("--split", cfg.split_policy, "random | from_file");
  cmd->add_option("--train-frac", cfg.train_frac, "train fraction for random splits");
  cmd->add_option("--val-frac", cfg.val_frac, "validation fraction for random splits");
  cmd->add_option("--hidden", cfg.hidden_dim, "hidden width");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--dropout", cfg.dropout, "dropout rate");
  cmd->add_flag("--nystrom", cfg.nystrom.enabled, "use the Nystrom-accelerated K_attr");
  cmd->add_option("--nystrom-m", cfg.nystrom.m, "Nystrom sample count");
  cmd->add_option("--nystrom-rank", cfg.nystrom.rank_k, "Nystrom truncation rank (0 = m)");
  cmd->add_option("--nystrom-frac", cfg.nystrom.frac,
                  "sample fraction of N (overrides --nystrom-m; 0.001 = the 0.1% preset)");
  cmd->add_option("--nystrom-mode", cfg.nystrom.mode, "kernel_sketch | final_inverse");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--id", cfg.experiment_id, "experiment id (output subdirectory)");
  cmd->add_option("--config", config_file, "JSON config; entries override flags");
}

void apply_config_file(csf::ExperimentConfig& cfg, const std::string& config_file) {
  if (config_file.empty()) return;
  std::ifstream in(config_file);
  if (!in) throw std::runtime_error("cannot open config file: " + config_file);
  nlohmann::json j;
  in >> j;
  cfg.apply_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-space spectral graph filter experiments"};
  app.require_subcommand(1);

  csf::ExperimentConfig cfg;
  std::string config_file;

  auto* run = app.add_subcommand("run", "train over (depth, seed) cells and aggregate");
  add_common_options(run, cfg, config_file);

  auto* sweep = app.add_subcommand("sweep", "grid sweep over one hyperparameter");
  std::string sweep_kind = "a2";
  std::vector<double> sweep_grid;
  add_common_options(sweep, cfg, config_file);
  sweep->add_option("--kind", sweep_kind, "knn_topk | a2 | a3 | lr | gamma")->required();
  sweep->add_option("--grid", sweep_grid, "grid values")->required()->delimiter(',');

  auto* spectral = app.add_subcommand("spectral", "filter profiles and frequency response");
  csf::SpectralRequest spectral_req;
  add_common_options(spectral, cfg, config_file);
  spectral->add_option("--filters", spectral_req.filters, "gcn | sgc | lp | krr | attr")
      ->delimiter(',');
  spectral->add_option("--signals", spectral_req.signal_indices,
                       "graph Fourier signal indices")
      ->delimiter(',');
  spectral->add_option("--lambdas", spectral_req.lambdas, "explicit eigenvalue grid")
      ->delimiter(',');
  spectral->add_option("--sgc-c", spectral_req.sgc_layers, "SGC layer count");
  spectral->add_option("--lp-a1", spectral_req.lp_a1, "label propagation a1");
  spectral->add_option("--krr-lambda", spectral_req.krr_lambda, "KRR ridge weight");

  auto* nystrom = app.add_subcommand("nystrom-bench", "Nystrom approximation benchmark");
  std::vector<int> m_grid;
  add_common_options(nystrom, cfg, config_file);
  nystrom->add_option("--m-grid", m_grid, "sample counts")->required()->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "run all kernel ablation variants");
  add_common_options(ablate, cfg, config_file);

  auto* gen = app.add_subcommand("gen", "write a synthetic dataset directory");
  std::string preset;
  std::string gen_out;
  gen->add_option("--preset", preset, "texas | cornell | wisconsin | synth60 | synth150")
      ->required();
  gen->add_option("--out", gen_out, "target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config_file(cfg, config_file);
    if (g_select_gamma && cfg.gamma_grid.empty()) {
      cfg.gamma_grid = csf::FusionConfig{}.gamma_grid;
    }
    if (run->parsed()) {
      csf::RunOutput out = csf::cmd_run(cfg);
      for (const auto& row : out.aggregate) {
        std::cout << "depth " << row.depth << ": test acc " << row.test_acc_mean << " +- "
                  << row.test_acc_std << " over " << row.n_seeds << " seeds\n";
      }
      std::cout << "results in " << out.directory.string() << "\n";
    } else if (sweep->parsed()) {
      auto rows = csf::cmd_sweep(csf::sweep_kind_from_name(sweep_kind), cfg, sweep_grid);
      for (const auto& row : rows) {
        std::cout << sweep_kind << "=" << row.value << ": test acc " << row.test_acc_mean
                  << " +- " << row.test_acc_std << "\n";
      }
    } else if (spectral->parsed()) {
      csf::cmd_spectral(cfg, spectral_req);
      std::cout << "spectral tables written\n";
    } else if (nystrom->parsed()) {
      auto rows = csf::cmd_nystrom_bench(cfg, m_grid);
      for (const auto& row : rows) {
        std::cout << (row.m == 0 ? std::string("exact") : "m=" + std::to_string(row.m))
                  << ": error " << row.frobenius_error << ", " << row.wall_ms << " ms, acc "
                  << row.accuracy << "\n";
      }
    } else if (ablate->parsed()) {
      csf::cmd_ablate(cfg);
      std::cout << "ablation table written\n";
    } else if (gen->parsed()) {
      csf::Dataset data = csf::synth_attributed_graph(csf::synth_preset(preset));
      csf::save_dataset(data, gen_out);
      std::cout << "wrote " << preset << " (" << data.graph.n_nodes() << " nodes) to " << gen_out
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
