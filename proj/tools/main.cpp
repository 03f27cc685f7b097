// airfeel: command-line front end for the experiment drivers.
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "airfeel/config.hpp"
#include "airfeel/experiments.hpp"

namespace {

struct CommandArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string dataset_idx;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& summary,
                      CommandArgs& args) {
  CLI::App* cmd = app.add_subcommand(name, summary);
  cmd->add_option("--config", args.config, "experiment config file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "CSV output path ('-' for stdout; default: config 'output')");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "override the config thread count");
  cmd->add_option("--dataset-idx", args.dataset_idx,
                  "directory with IDX train/t10k image and label files (dataset = idx)");
  cmd->footer(airfeel::column_help(name));
  return cmd;
}

int run(const std::string& command, const CommandArgs& args) {
  airfeel::ExperimentConfig cfg = airfeel::load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  std::optional<std::filesystem::path> idx;
  if (!args.dataset_idx.empty()) idx = args.dataset_idx;

  airfeel::CsvTable table;
  if (command == "mse-sweep") {
    table = airfeel::run_mse_sweep(cfg);
  } else if (command == "train") {
    table = airfeel::run_train(cfg, idx);
  } else if (command == "bounds") {
    table = airfeel::run_bound_tables(cfg);
  } else {
    table = airfeel::run_latency(cfg);
  }

  const std::string out = args.out.empty() ? cfg.output : args.out;
  if (out.empty() || out == "-") {
    table.write(std::cout);
    return 0;
  }
  std::ofstream file(out);
  if (!file) {
    std::cerr << "airfeel: cannot open " << out << " for writing\n";
    return 1;
  }
  table.write(file);
  if (!file.flush()) {
    std::cerr << "airfeel: write to " << out << " failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digital over-the-air federated edge learning simulator"};
  app.footer("Config keys (key = default  # meaning):\n" + airfeel::config_reference());
  app.require_subcommand(1);

  CommandArgs args;
  const std::string commands[] = {"mse-sweep", "train", "bounds", "latency"};
  const std::string summaries[] = {
      "Monte Carlo aggregation MSE against the closed-form bounds",
      "federated training through the configured aggregator",
      "antenna, fading-MSE and convergence bound tables",
      "latency of OFDMA, analog and digital over-the-air aggregation",
  };
  for (std::size_t i = 0; i < 4; ++i) add_command(app, commands[i], summaries[i], args);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const std::string& name : commands) {
      if (app.got_subcommand(name)) return run(name, args);
    }
  } catch (const std::exception& e) {
    std::cerr << "airfeel: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
