// Seeded Monte Carlo drivers behind the CLI commands.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airfeel/config.hpp"
#include "airfeel/csv.hpp"
#include "airfeel/dataset.hpp"
#include "airfeel/fel.hpp"

namespace airfeel {

/// One grid point per (K, N_r, SNR) combination of the configured lists
/// (a missing list contributes its scalar key). Columns:
///   nr, snr_db, k, trials, mse_empirical, mse_bound_awgn, mse_bound_fading,
///   abs_err_p99
CsvTable run_mse_sweep(const ExperimentConfig& cfg);

/// Per-trial training runs; trial t uses dataset and channel streams
/// labelled by t.
std::vector<TrainResult> run_train_trials(const ExperimentConfig& cfg,
                                          const std::optional<std::filesystem::path>& idx_dir = {});

/// Round metrics averaged over trials. Columns:
///   round, train_loss, test_acc, grad_mse, grad_norm2
CsvTable run_train(const ExperimentConfig& cfg,
                   const std::optional<std::filesystem::path>& idx_dir = {});

/// Columns: k, q, nr, gamma, c, nr_symbol, nr_symbol_appendix, nr_gradient,
///   expected_abs_err, sigma_fad2, sigma_q2, conv_rhs
CsvTable run_bound_tables(const ExperimentConfig& cfg);

/// Columns: k, t_ofdma, t_analog, t_compfed, gamma_ratio
CsvTable run_latency(const ExperimentConfig& cfg);

/// Dataset of trial `trial` (regenerated from the seed, or loaded from IDX).
SplitDataset build_dataset(const ExperimentConfig& cfg, std::uint64_t trial,
                           const std::optional<std::filesystem::path>& idx_dir);

/// Training options equivalent to `cfg` for a dataset with the given shape.
TrainOptions train_options(const ExperimentConfig& cfg, const Dataset& train_set,
                           std::uint64_t trial);

/// Human-readable column documentation for a command name.
std::string column_help(const std::string& command);

}  // namespace airfeel
