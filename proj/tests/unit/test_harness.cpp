#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "airfeel/config.hpp"
#include "airfeel/csv.hpp"
#include "airfeel/experiments.hpp"
#include "airfeel/random.hpp"
#include "doctest.h"

using namespace airfeel;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("derived streams are deterministic and label sensitive") {
    Rng a = derive_stream(5, {1, 2, 3, 4});
    Rng b = derive_stream(5, {1, 2, 3, 4});
    CHECK(a() == b());
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {5u, 6u}) {
      for (std::uint64_t e : {0u, 1u}) {
        for (std::uint64_t t : {0u, 1u}) {
          for (std::uint64_t r : {0u, 1u}) {
            for (std::uint64_t s : {0u, 1u}) {
              Rng rng = derive_stream(seed, {e, t, r, s});
              firsts.insert(rng());
            }
          }
        }
      }
    }
    CHECK(firsts.size() == 32);
    // The high half of each word participates too.
    Rng lo = derive_stream(1, {0, 0, 0, 1});
    Rng hi = derive_stream(1, {0, 0, 0, (std::uint64_t{1} << 32) | 1});
    CHECK(lo() != hi());
    // Independent of the order streams are requested in.
    Rng later = derive_stream(5, {1, 2, 3, 4});
    Rng fresh = derive_stream(5, {1, 2, 3, 4});
    CHECK(later() == fresh());
  }

  TEST_CASE("parallel_for visits every index once and rethrows") {
    for (unsigned threads : {1u, 2u, 4u, 16u}) {
      std::vector<std::atomic<int>> hits(97);
      parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
      for (const auto& h : hits) CHECK(h.load() == 1);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
  }

  TEST_CASE("csv formatting and lookup") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(std::int64_t{-42}) == "-42");
    CHECK(format_number(7) == "7");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_number(std::nan("")) == "nan");

    CsvTable t;
    t.header = {"a", "b"};
    t.add_row({"1", "2.5"});
    t.add_row({"3", "inf"});
    CHECK_THROWS_AS(t.add_row({"1"}), std::invalid_argument);
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("c"), std::out_of_range);
    CHECK(t.value(0, "b") == 2.5);
    CHECK(std::isinf(t.value(1, "b")));
    CHECK(t.str() == "a,b\n1,2.5\n3,inf\n");
  }

  TEST_CASE("config parsing") {
    const ExperimentConfig cfg = parse_config(
        "# comment line\n"
        "seed = 9\n"
        "K = 12   # trailing comment\n"
        "Nr = 64\n"
        "q = 64\n"
        "channel_dist = real-gaussian\n"
        "aggregator = analog-fading\n"
        "model = one-hidden-layer-mlp\n"
        "data_mode = label-skew\n"
        "sweep_target = symbol-sum\n"
        "nr_list = 10, 20,40\n"
        "snr_db = -3.5, 0\n"
        "q_list =\n"
        "\n");
    CHECK(cfg.seed == 9);
    CHECK(cfg.system.devices == 12);
    CHECK(cfg.system.antennas == 64);
    CHECK(cfg.system.order == 64);
    CHECK(cfg.system.law == ChannelLaw::kRealGaussian);
    CHECK(cfg.aggregator == AggregationMode::kAnalogFading);
    CHECK(cfg.model == LearnerFamily::kMlp);
    CHECK(cfg.data_mode == PartitionMode::kLabelSkew);
    CHECK(cfg.sweep_target == SweepTarget::kSymbolSum);
    CHECK(cfg.nr_list == std::vector<int>{10, 20, 40});
    CHECK(cfg.snr_db_list == std::vector<double>{-3.5, 0.0});
    CHECK(cfg.q_list.empty());
    CHECK(cfg.rounds == ExperimentConfig{}.rounds);
  }

  TEST_CASE("config errors name key and line") {
    auto error_of = [](const char* text) {
      try {
        parse_config(text);
      } catch (const ConfigError& e) {
        return std::make_pair(e.key(), e.line());
      }
      return std::make_pair(std::string("none"), -1);
    };
    CHECK(error_of("seed = 1\nbogus = 2\n") == std::make_pair(std::string("bogus"), 2));
    CHECK(error_of("K = 3\nK = 4\n") == std::make_pair(std::string("K"), 2));
    CHECK(error_of("\nq = 8\n") == std::make_pair(std::string("q"), 2));
    CHECK(error_of("K = abc\n") == std::make_pair(std::string("K"), 1));
    CHECK(error_of("eta = 1x\n") == std::make_pair(std::string("eta"), 1));
    CHECK(error_of("aggregator = smoke-signals\n") == std::make_pair(std::string("aggregator"), 1));
    CHECK(error_of("value_low = 3\nvalue_high = 1\n").first == "value_high");
    CHECK(error_of("no equals sign\n").second == 1);
    CHECK(error_of("nr_list = 10, x\n").first == "nr_list");
    try {
      parse_config("seed = 1\nbogus = 2\n");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/airfeel.cfg"), ConfigError);
  }

  TEST_CASE("config render round trip") {
    ExperimentConfig cfg;
    cfg.seed = 123456789012345ULL;
    cfg.system.sigma_z2 = 0.1;
    cfg.system.law = ChannelLaw::kRealGaussian;
    cfg.eta = 1.0 / 3.0;
    cfg.nr_list = {1, 2, 3};
    cfg.snr_db_list = {-15.0, 0.1};
    cfg.output = "out.csv";
    cfg.aggregator = AggregationMode::kAwgn;
    CHECK(parse_config(render_config(cfg)) == cfg);
    CHECK(parse_config(render_config(ExperimentConfig{})) == ExperimentConfig{});
    CHECK(parse_config(config_reference()) == ExperimentConfig{});
  }

  TEST_CASE("validate_config") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(validate_config(cfg));
    cfg.trials = -1;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = ExperimentConfig{};
    cfg.system.order = 32;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  }

  TEST_CASE("gradient sweep is seed reproducible and shares draws across SNR") {
    ExperimentConfig cfg;
    cfg.seed = 3;
    cfg.trials = 20;
    cfg.threads = 1;
    cfg.aggregator = AggregationMode::kAwgn;
    cfg.system.devices = 10;
    cfg.system.subchannels = 20;
    cfg.system.order = 16;
    cfg.nr_list = {1, 4};
    cfg.snr_db_list = {0, 10, 20};
    const CsvTable a = run_mse_sweep(cfg);
    REQUIRE(a.rows.size() == 6);
    CHECK(a.header == std::vector<std::string>{"nr", "snr_db", "k", "trials", "mse_empirical",
                                               "mse_bound_awgn", "mse_bound_fading", "abs_err_p99"});
    cfg.threads = 3;
    CHECK(run_mse_sweep(cfg).str() == a.str());
    for (std::size_t r = 1; r < 3; ++r) {
      CHECK(a.value(r, "mse_empirical") <= a.value(r - 1, "mse_empirical"));
      CHECK(a.value(r, "mse_bound_awgn") < a.value(r - 1, "mse_bound_awgn"));
    }
    cfg.seed = 4;
    CHECK(run_mse_sweep(cfg).str() != a.str());
    cfg.trials = 0;
    CHECK(run_mse_sweep(cfg).rows.empty());
  }

  TEST_CASE("symbol-sum sweep reports the AWGN variance law") {
    ExperimentConfig cfg;
    cfg.trials = 20000;
    cfg.threads = 1;
    cfg.sweep_target = SweepTarget::kSymbolSum;
    cfg.aggregator = AggregationMode::kAwgn;
    cfg.system.devices = 5;
    cfg.system.sigma_z2 = 2.0;
    cfg.nr_list = {10};
    cfg.value_low = 0.0;
    cfg.value_high = 1.0;
    const CsvTable t = run_mse_sweep(cfg);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.value(0, "mse_bound_awgn") == doctest::Approx(0.2));
    CHECK(t.value(0, "mse_empirical") == doctest::Approx(0.2).epsilon(0.05));
  }

  TEST_CASE("train table averages trials") {
    ExperimentConfig cfg;
    cfg.trials = 2;
    cfg.threads = 2;
    cfg.rounds = 3;
    cfg.system.devices = 4;
    cfg.samples_per_device = 20;
    cfg.aggregator = AggregationMode::kFading;
    cfg.system.antennas = 8;
    const CsvTable t = run_train(cfg);
    REQUIRE(t.rows.size() == 3);
    const auto results = run_train_trials(cfg);
    REQUIRE(results.size() == 2);
    for (int m = 0; m < 3; ++m) {
      const double mean = (results[0].rounds[m].grad_mse + results[1].rounds[m].grad_mse) / 2;
      CHECK(t.value(m, "grad_mse") == doctest::Approx(mean));
      CHECK(t.value(m, "round") == m + 1);
    }
    cfg.threads = 1;
    CHECK(run_train(cfg).str() == t.str());

    const SplitDataset d = build_dataset(cfg, 0, {});
    CHECK(d.train.size() == 80);
    cfg.dataset = DatasetKind::kIdx;
    CHECK_THROWS(build_dataset(cfg, 0, {}));
  }

  TEST_CASE("bound and latency tables") {
    ExperimentConfig cfg;
    cfg.k_list = {10, 20};
    cfg.q_list = {4, 16};
    cfg.nr_list = {100};
    const CsvTable b = run_bound_tables(cfg);
    CHECK(b.rows.size() == 4);
    CHECK(b.value(0, "gamma") == 10.0);
    CHECK(b.value(0, "c") == doctest::Approx(1.1));

    ExperimentConfig lat;
    lat.k_list = {10, 20, 40};
    const CsvTable l = run_latency(lat);
    REQUIRE(l.rows.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(l.value(r, "t_ofdma") / l.value(r, "t_compfed") ==
            doctest::Approx(l.value(r, "k") * lat.bandwidth));
    }
  }

  TEST_CASE("column help covers every command") {
    for (const char* cmd : {"mse-sweep", "train", "bounds", "latency"}) {
      CHECK_FALSE(column_help(cmd).empty());
    }
  }

#ifdef AIRFEEL_CLI_PATH
  TEST_CASE("command line smoke test") {
    const auto dir = std::filesystem::temp_directory_path() / "airfeel_cli_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream cfg(dir / "run.cfg");
      cfg << "trials = 2\nK = 4\nN = 10\nq = 16\nnr_list = 2, 4\nsnr_db = 0, 10\nrounds = 2\n"
             "samples_per_device = 10\nk_list = 4, 8\n";
      std::ofstream bad(dir / "bad.cfg");
      bad << "bogus = 1\n";
    }
    const std::string cli = AIRFEEL_CLI_PATH;
    auto run = [&](const std::string& args) {
      const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (dir / "stdout").string() +
                              "\" 2> \"" + (dir / "stderr").string() + "\"";
      return std::system(cmd.c_str());
    };
    const std::string cfg = (dir / "run.cfg").string();
    const std::vector<std::pair<std::string, std::string>> commands{
        {"mse-sweep", "nr,snr_db,k,trials,mse_empirical,mse_bound_awgn,mse_bound_fading,abs_err_p99"},
        {"train", "round,train_loss,test_acc,grad_mse,grad_norm2"},
        {"bounds", "k,q,nr,gamma,c,nr_symbol,nr_symbol_appendix,nr_gradient,expected_abs_err,"
                   "sigma_fad2,sigma_q2,conv_rhs"},
        {"latency", "k,t_ofdma,t_analog,t_compfed,gamma_ratio"}};
    for (const auto& [name, header] : commands) {
      const auto out = dir / (name + ".csv");
      REQUIRE(run(name + " --config \"" + cfg + "\" --out \"" + out.string() + "\" --seed 5") == 0);
      const auto rows = lines_of(slurp(out));
      REQUIRE(rows.size() >= 2);
      CHECK(rows[0] == header);
      const auto again = dir / (name + "2.csv");
      REQUIRE(run(name + " --config \"" + cfg + "\" --out \"" + again.string() + "\" --seed 5") == 0);
      CHECK(slurp(out) == slurp(again));
      REQUIRE(run(name + " --help") == 0);
      CHECK(slurp(dir / "stdout").find(lines_of(column_help(name))[0]) != std::string::npos);
    }
    CHECK(run("train --config \"" + (dir / "bad.cfg").string() + "\" --out -") != 0);
    CHECK(slurp(dir / "stderr").find("bogus") != std::string::npos);
    CHECK(run("train --config \"" + (dir / "missing.cfg").string() + "\"") != 0);
    CHECK(run("launch-rockets") != 0);
    std::filesystem::remove_all(dir);
  }
#endif
}
