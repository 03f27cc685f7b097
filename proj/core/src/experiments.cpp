#include "airfeel/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "airfeel/bounds.hpp"
#include "airfeel/powerctl.hpp"

namespace airfeel {

namespace {

template <typename T>
std::vector<T> axis(const std::vector<T>& list, T fallback) {
  return list.empty() ? std::vector<T>{fallback} : list;
}

double percentile99(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

struct TrialError {
  double squared = 0.0;
  std::vector<double> abs;
};

struct SweepPoint {
  int k;
  int nr;
  std::optional<double> snr_db;
  std::uint64_t experiment;
};

double clip_bound(const ExperimentConfig& cfg) {
  return cfg.delta_g > 0.0 ? cfg.delta_g : std::max(std::abs(cfg.value_low), std::abs(cfg.value_high));
}

std::vector<std::string> sweep_gradient(const ExperimentConfig& cfg, const SweepPoint& pt) {
  SystemConfig sys = cfg.system;
  sys.devices = pt.k;
  sys.antennas = pt.nr;
  const int n = sys.subchannels;
  if (pt.snr_db) sys.sigma_z2 = sys.p_max / (n * std::pow(10.0, *pt.snr_db / 10.0));
  sys.validate();

  const double delta = clip_bound(cfg);
  const codec::QuantizerSpec spec(sys.order, delta);
  const std::vector<std::int64_t> sizes(static_cast<std::size_t>(pt.k), 1);
  const double peak =
      cfg.aggregator == AggregationMode::kAnalogFading ? delta * delta : qam_peak_energy(sys.order);
  const PowerScaling scaling = select_beta(sizes, n, peak, sys.p_max, cfg.beta_margin);

  std::vector<TrialError> trials(static_cast<std::size_t>(cfg.trials));
  parallel_for(trials.size(), cfg.threads, [&](std::size_t t) {
    Rng rng = derive_stream(cfg.seed, {pt.experiment, t, 0, kDeviceStreamBase});
    std::uniform_real_distribution<double> law(cfg.value_low, cfg.value_high);
    std::vector<std::vector<double>> grads(static_cast<std::size_t>(pt.k), std::vector<double>(n));
    for (auto& g : grads) {
      for (double& v : g) v = law(rng);
    }
    const AggregateResult agg =
        aggregate(grads, cfg.aggregator, sys, spec, scaling, {cfg.seed, {pt.experiment, t, 1, 0}});
    TrialError& out = trials[t];
    out.squared = agg.grad_mse;
    for (int i = 0; i < n; ++i) out.abs.push_back(std::abs(agg.ideal[i] - agg.estimate[i]));
  });

  // Lattice-domain noise: received noise scaled by sqrt(beta) / |D|.
  const double lattice_noise2 = sys.sigma_z2 * scaling.beta;
  const bounds::AwgnBoundInput awgn{n, pt.k, sys.order, delta, lattice_noise2, pt.nr};
  const double bound_awgn = bounds::mse_awgn_bound(awgn).total();
  double bound_fading = bounds::quantization_variance(n, pt.k, sys.order, delta);
  if (lattice_noise2 > 0.0) {
    const bounds::FadingBoundInput fading{pt.k * std::sqrt(qam_peak_energy(sys.order)),
                                          std::sqrt(sys.sigma_h2),
                                          std::sqrt(lattice_noise2),
                                          pt.k,
                                          n,
                                          sys.order,
                                          pt.nr,
                                          cfg.epsilon,
                                          cfg.delta};
    bound_fading = bounds::mse_fading_bound(fading, delta, spec.cell_width() * spec.cell_width()).total();
  }

  double squared = 0.0;
  std::vector<double> abs;
  for (const TrialError& t : trials) {
    squared += t.squared;
    abs.insert(abs.end(), t.abs.begin(), t.abs.end());
  }
  const double snr = pt.snr_db ? *pt.snr_db : to_db(sys.p_max / (n * sys.sigma_z2));
  return {format_number(pt.nr),
          format_number(snr),
          format_number(pt.k),
          format_number(cfg.trials),
          format_number(squared / cfg.trials),
          format_number(bound_awgn),
          format_number(bound_fading),
          format_number(percentile99(std::move(abs)))};
}

std::vector<std::string> sweep_symbol_sum(const ExperimentConfig& cfg, const SweepPoint& pt) {
  SystemConfig sys = cfg.system;
  sys.devices = pt.k;
  sys.antennas = pt.nr;
  if (pt.snr_db) sys.sigma_z2 = std::pow(10.0, -*pt.snr_db / 10.0);
  sys.validate();
  if (cfg.aggregator != AggregationMode::kFading && cfg.aggregator != AggregationMode::kAwgn) {
    throw std::invalid_argument("mse-sweep: symbol-sum target needs aggregator fading or awgn");
  }

  std::vector<TrialError> trials(static_cast<std::size_t>(cfg.trials));
  parallel_for(trials.size(), cfg.threads, [&](std::size_t t) {
    Rng rng = derive_stream(cfg.seed, {pt.experiment, t, 0, 0});
    std::uniform_real_distribution<double> law(cfg.value_low, cfg.value_high);
    CVector symbols(static_cast<std::size_t>(pt.k));
    cplx truth{};
    for (cplx& s : symbols) {
      s = law(rng);
      truth += s;
    }
    cplx s_hat;
    if (cfg.aggregator == AggregationMode::kAwgn) {
      s_hat = transmit_awgn(symbols, sys, rng);
    } else {
      const ChannelRealization ch = sample_channel(sys, rng);
      s_hat = combine(sum_beamformer(ch, sys), apply_mac(symbols, ch));
    }
    trials[t].squared = std::norm(s_hat - truth);
    trials[t].abs.push_back(std::abs(s_hat - truth));
  });

  const double bound_awgn = sys.sigma_z2 / pt.nr;
  double bound_fading = std::nan("");
  if (sys.sigma_z2 > 0.0) {
    const double amplitude = std::max(std::abs(cfg.value_low), std::abs(cfg.value_high));
    const bounds::FadingBoundInput in{pt.k * amplitude,  std::sqrt(sys.sigma_h2),
                                      std::sqrt(sys.sigma_z2), pt.k,
                                      1,                  sys.order,
                                      pt.nr,              cfg.epsilon,
                                      cfg.delta};
    const double e = bounds::expected_abs_error_fading(in);
    bound_fading = e * e;
  }

  double squared = 0.0;
  std::vector<double> abs;
  for (const TrialError& t : trials) {
    squared += t.squared;
    abs.push_back(t.abs.front());
  }
  const double snr = pt.snr_db ? *pt.snr_db : to_db(1.0 / sys.sigma_z2);
  return {format_number(pt.nr),
          format_number(snr),
          format_number(pt.k),
          format_number(cfg.trials),
          format_number(squared / cfg.trials),
          format_number(bound_awgn),
          format_number(bound_fading),
          format_number(percentile99(std::move(abs)))};
}

}  // namespace

CsvTable run_mse_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  CsvTable table;
  table.header = {"nr",         "snr_db",         "k",
                  "trials",     "mse_empirical",  "mse_bound_awgn",
                  "mse_bound_fading", "abs_err_p99"};
  if (cfg.trials == 0) return table;

  const auto ks = axis(cfg.k_list, cfg.system.devices);
  const auto nrs = axis(cfg.nr_list, cfg.system.antennas);
  std::vector<std::optional<double>> snrs;
  for (double s : cfg.snr_db_list) snrs.emplace_back(s);
  if (snrs.empty()) snrs.emplace_back(std::nullopt);

  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    for (std::size_t ni = 0; ni < nrs.size(); ++ni) {
      // Points that differ only in SNR share their random draws.
      const std::uint64_t experiment = (static_cast<std::uint64_t>(ki) << 20) | ni;
      for (const auto& snr : snrs) {
        const SweepPoint pt{ks[ki], nrs[ni], snr, experiment};
        table.add_row(cfg.sweep_target == SweepTarget::kGradient ? sweep_gradient(cfg, pt)
                                                                 : sweep_symbol_sum(cfg, pt));
      }
    }
  }
  return table;
}

SplitDataset build_dataset(const ExperimentConfig& cfg, std::uint64_t trial,
                           const std::optional<std::filesystem::path>& idx_dir) {
  const std::size_t wanted =
      static_cast<std::size_t>(cfg.system.devices) * static_cast<std::size_t>(cfg.samples_per_device);
  Rng rng = derive_stream(cfg.seed, {0, trial, kSetupRound, kSetupData});
  SplitDataset data;
  switch (cfg.dataset) {
    case DatasetKind::kSynthetic: {
      const auto per_class = static_cast<int>(
          std::ceil(static_cast<double>(wanted) / (0.8 * cfg.classes))) + 1;
      data = make_synthetic_dataset(cfg.classes, cfg.feature_dim, per_class, cfg.separation, rng);
      break;
    }
    case DatasetKind::kRegression: {
      const auto samples = static_cast<int>(std::ceil(static_cast<double>(wanted) / 0.8)) + 5;
      data = make_regression_dataset(samples, cfg.feature_dim, cfg.noise_stddev, rng);
      break;
    }
    case DatasetKind::kIdx: {
      if (!idx_dir) throw std::invalid_argument("dataset = idx requires --dataset-idx DIR");
      data = load_idx_directory(*idx_dir);
      const std::size_t k = static_cast<std::size_t>(cfg.system.devices);
      const std::size_t usable = std::min(wanted, data.train.size() / k * k);
      data.train = data.train.head(usable);
      return data;
    }
  }
  data.train = data.train.head(wanted);
  return data;
}

TrainOptions train_options(const ExperimentConfig& cfg, const Dataset& train_set,
                           std::uint64_t trial) {
  TrainOptions opts;
  opts.learner.family = cfg.model;
  opts.learner.input_dim = train_set.feature_dim;
  opts.learner.class_count = train_set.is_regression() ? cfg.classes : train_set.classes;
  opts.learner.hidden_units = cfg.hidden;
  opts.mode = cfg.aggregator;
  opts.system = cfg.system;
  opts.delta_g = cfg.delta_g;
  opts.beta_margin = cfg.beta_margin;
  opts.batch_size = cfg.batch;
  opts.local_epochs = cfg.local_epochs;
  opts.eta = cfg.eta;
  opts.rounds = cfg.rounds;
  opts.frame_size = cfg.frame_size;
  opts.data_mode = cfg.data_mode;
  opts.shards_per_device = cfg.shards_per_device;
  opts.seed = cfg.seed;
  opts.experiment = 0;
  opts.trial = trial;
  return opts;
}

std::vector<TrainResult> run_train_trials(const ExperimentConfig& cfg,
                                          const std::optional<std::filesystem::path>& idx_dir) {
  validate_config(cfg);
  std::vector<TrainResult> results(static_cast<std::size_t>(cfg.trials));
  parallel_for(results.size(), cfg.threads, [&](std::size_t t) {
    const SplitDataset data = build_dataset(cfg, t, idx_dir);
    results[t] = train(train_options(cfg, data.train, t), data);
  });
  return results;
}

CsvTable run_train(const ExperimentConfig& cfg,
                   const std::optional<std::filesystem::path>& idx_dir) {
  CsvTable table;
  table.header = {"round", "train_loss", "test_acc", "grad_mse", "grad_norm2"};
  const auto results = run_train_trials(cfg, idx_dir);
  if (results.empty()) return table;
  const double count = static_cast<double>(results.size());
  for (int m = 0; m < cfg.rounds; ++m) {
    RoundMetrics avg;
    for (const TrainResult& r : results) {
      const RoundMetrics& x = r.rounds[static_cast<std::size_t>(m)];
      avg.train_loss += x.train_loss / count;
      avg.test_accuracy += x.test_accuracy / count;
      avg.grad_mse += x.grad_mse / count;
      avg.grad_norm2 += x.grad_norm2 / count;
    }
    table.add_row({format_number(m + 1), format_number(avg.train_loss),
                   format_number(avg.test_accuracy), format_number(avg.grad_mse),
                   format_number(avg.grad_norm2)});
  }
  return table;
}

CsvTable run_bound_tables(const ExperimentConfig& cfg) {
  validate_config(cfg);
  CsvTable table;
  table.header = {"k",        "q",           "nr",         "gamma",
                  "c",        "nr_symbol",   "nr_symbol_appendix", "nr_gradient",
                  "expected_abs_err", "sigma_fad2", "sigma_q2", "conv_rhs"};
  const double delta_g = cfg.delta_g > 0.0 ? cfg.delta_g : 1.0;
  for (int k : axis(cfg.k_list, cfg.system.devices)) {
    for (int q : axis(cfg.q_list, cfg.system.order)) {
      for (int nr : axis(cfg.nr_list, cfg.system.antennas)) {
        const bounds::FadingBoundInput in{k * cfg.symbol_amplitude,
                                          std::sqrt(cfg.system.sigma_h2),
                                          std::sqrt(cfg.system.sigma_z2),
                                          k,
                                          cfg.system.subchannels,
                                          q,
                                          nr,
                                          cfg.epsilon,
                                          cfg.delta};
        const bounds::MseBound fad = bounds::mse_fading_bound(in, delta_g);
        const bounds::ConvergenceInput conv{cfg.eta,          cfg.smoothness, cfg.rounds,
                                            cfg.loss_gap,     fad.channel,    fad.quantization,
                                            cfg.theta_bar};
        table.add_row({format_number(k), format_number(q), format_number(nr),
                       format_number(in.gamma), format_number(bounds::fading_c(in)),
                       format_number(static_cast<std::int64_t>(bounds::antenna_bound_symbol(in))),
                       format_number(static_cast<std::int64_t>(bounds::antenna_bound_symbol(
                           in, bounds::AntennaBoundVariant::kAppendix))),
                       format_number(static_cast<std::int64_t>(bounds::antenna_bound_gradient(in))),
                       format_number(bounds::expected_abs_error_fading(in)),
                       format_number(fad.channel), format_number(fad.quantization),
                       format_number(bounds::convergence_rhs(conv))});
      }
    }
  }
  return table;
}

CsvTable run_latency(const ExperimentConfig& cfg) {
  validate_config(cfg);
  CsvTable table;
  table.header = {"k", "t_ofdma", "t_analog", "t_compfed", "gamma_ratio"};
  for (int k : axis(cfg.k_list, cfg.system.devices)) {
    bounds::LatencyInput in;
    in.bandwidth = cfg.bandwidth;
    in.symbol_time = cfg.symbol_time;
    in.model_size = cfg.model_size > 0.0 ? cfg.model_size : cfg.system.subchannels;
    in.devices = k;
    in.antennas = cfg.system.antennas;
    in.order = cfg.system.order;
    in.sigma_z2 = cfg.system.sigma_z2;
    in.sigma_h2 = cfg.system.sigma_h2;
    in.symbol_m1 = cfg.symbol_m1;
    in.symbol_m2 = cfg.symbol_m2;
    in.delta_g = cfg.delta_g > 0.0 ? cfg.delta_g : 1.0;
    const bounds::LatencyReport r = bounds::latency_suite(in);
    table.add_row({format_number(k), format_number(r.t_ofdma), format_number(r.t_analog),
                   format_number(r.t_compfed), format_number(r.gamma_ratio)});
  }
  return table;
}

std::string column_help(const std::string& command) {
  if (command == "mse-sweep") {
    return "CSV columns (one row per K x Nr x SNR grid point):\n"
           "  nr                receive antennas\n"
           "  snr_db            SNR in dB (gradient: p_max / (N sigma_z2); symbol-sum: 1 / sigma_z2)\n"
           "  k                 devices\n"
           "  trials            Monte Carlo trials\n"
           "  mse_empirical     mean squared aggregation error (summed over the N entries)\n"
           "  mse_bound_awgn    AWGN closed-form MSE (symbol-sum: sigma_z2 / Nr)\n"
           "  mse_bound_fading  fading closed-form MSE (symbol-sum: squared expected-error bound)\n"
           "  abs_err_p99       99th percentile of the per-entry absolute error\n";
  }
  if (command == "train") {
    return "CSV columns (one row per round, averaged over trials):\n"
           "  round       communication round, starting at 1\n"
           "  train_loss  training loss after the update\n"
           "  test_acc    test accuracy after the update (0 for regression)\n"
           "  grad_mse    ||g - g_hat||^2 against the error-free aggregate\n"
           "  grad_norm2  ||g||^2 of the error-free aggregate before the update\n";
  }
  if (command == "bounds") {
    return "CSV columns (one row per K x q x Nr grid point):\n"
           "  k, q, nr            grid coordinates\n"
           "  gamma               K * symbol_amplitude\n"
           "  c                   1/gamma + sigma_h/sigma_z\n"
           "  nr_symbol           antennas for |s_hat - s| <= epsilon w.p. 1 - delta\n"
           "  nr_symbol_appendix  same with the extra sigma_z^2/sigma_h^2 factor\n"
           "  nr_gradient         antennas for gradient error epsilon w.p. 1 - delta\n"
           "  expected_abs_err    bound on E|s_hat - s| at nr\n"
           "  sigma_fad2          fading gradient MSE bound at nr\n"
           "  sigma_q2            quantization variance N delta_g^2 / (3 K q^2)\n"
           "  conv_rhs            convergence bound with sigma_ch2 = sigma_fad2\n";
  }
  if (command == "latency") {
    return "CSV columns (one row per K):\n"
           "  k            devices\n"
           "  t_ofdma      orthogonal-access latency in s (inf when the rate is 0)\n"
           "  t_analog     analog over-the-air latency in s\n"
           "  t_compfed    digital over-the-air latency in s\n"
           "  gamma_ratio  t_compfed / t_analog\n";
  }
  throw std::invalid_argument("unknown command " + command);
}

}  // namespace airfeel
