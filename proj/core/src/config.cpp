#include "airfeel/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "airfeel/codec.hpp"

namespace airfeel {

namespace {

// Raised by value parsers and checks; parse_config attaches key and line.
struct BadValue {
  std::string message;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw BadValue{"expected an integer, got '" + std::string(text) + "'"};
  }
  return value;
}

double parse_real(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
    throw BadValue{"expected a finite number, got '" + std::string(text) + "'"};
  }
  return value;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, Parse parse) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(parse(trim(text.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string render_real(double v) {
  char buf[64];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

template <typename T, typename Render>
std::string render_list(const std::vector<T>& values, Render render) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += render(values[i]);
  }
  return out;
}

template <typename E, std::size_t M>
E parse_enum(std::string_view text, const std::array<E, M>& values) {
  for (E v : values) {
    if (text == to_string(v)) return v;
  }
  std::string allowed;
  for (E v : values) allowed += std::string(allowed.empty() ? "" : ", ") + to_string(v);
  throw BadValue{"expected one of {" + allowed + "}, got '" + std::string(text) + "'"};
}

constexpr std::array kModes{AggregationMode::kIdeal, AggregationMode::kAwgn, AggregationMode::kFading,
                            AggregationMode::kAnalogFading};
constexpr std::array kFamilies{LearnerFamily::kLinearRegression, LearnerFamily::kSoftmaxRegression,
                               LearnerFamily::kMlp};
constexpr std::array kPartitions{PartitionMode::kIid, PartitionMode::kLabelSkew};
constexpr std::array kLaws{ChannelLaw::kComplexGaussian, ChannelLaw::kRealGaussian};
constexpr std::array kTargets{SweepTarget::kGradient, SweepTarget::kSymbolSum};
constexpr std::array kDatasets{DatasetKind::kSynthetic, DatasetKind::kRegression, DatasetKind::kIdx};

struct Field {
  const char* key;
  const char* help;
  std::function<void(ExperimentConfig&, std::string_view)> parse;
  std::function<std::string(const ExperimentConfig&)> render;
  std::function<void(const ExperimentConfig&)> check;
};

template <typename T, typename Access>
Field integer(const char* key, const char* help, Access access,
              std::function<void(T)> check = nullptr) {
  return {key, help,
          [=](ExperimentConfig& c, std::string_view v) { access(c) = parse_integer<T>(v); },
          [=](const ExperimentConfig& c) {
            return std::to_string(access(c));
          },
          [=](const ExperimentConfig& c) {
            if (check) check(access(c));
          }};
}

template <typename Access>
Field real(const char* key, const char* help, Access access,
           std::function<void(double)> check = nullptr) {
  return {key, help, [=](ExperimentConfig& c, std::string_view v) { access(c) = parse_real(v); },
          [=](const ExperimentConfig& c) {
            return render_real(access(c));
          },
          [=](const ExperimentConfig& c) {
            if (check) check(access(c));
          }};
}

template <typename E, std::size_t M, typename Access>
Field choice(const char* key, const char* help, const std::array<E, M>& values, Access access) {
  return {key, help,
          [=](ExperimentConfig& c, std::string_view v) { access(c) = parse_enum(v, values); },
          [=](const ExperimentConfig& c) {
            return std::string(to_string(access(c)));
          },
          nullptr};
}

auto at_least(double lo, const char* what) {
  return [=](double v) {
    if (!(v >= lo)) throw BadValue{std::string(what) + " must be >= " + render_real(lo)};
  };
}

auto positive(const char* what) {
  return [=](double v) {
    if (!(v > 0.0)) throw BadValue{std::string(what) + " must be positive"};
  };
}

void power_of_four(int q) {
  try {
    codec::grid_side(q);
  } catch (const std::invalid_argument&) {
    throw BadValue{"q must be a power of 4 (got " + std::to_string(q) + ")"};
  }
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer<std::uint64_t>("seed", "master seed (overridden by --seed)",
                                       [](auto& c) -> auto& { return c.seed; }));
    f.push_back(integer<int>("trials", "Monte Carlo trials per grid point, or seeds for train",
                             [](auto& c) -> auto& { return c.trials; },
                             at_least(0, "trials")));
    f.push_back(integer<unsigned>("threads", "worker threads, 0 = all cores",
                                  [](auto& c) -> auto& { return c.threads; }));
    f.push_back(integer<int>("K", "number of devices",
                             [](auto& c) -> auto& { return c.system.devices; },
                             at_least(1, "K")));
    f.push_back(integer<int>("N", "subchannels per frame / gradient length for mse-sweep",
                             [](auto& c) -> auto& { return c.system.subchannels; },
                             at_least(1, "N")));
    f.push_back(integer<int>("Nr", "receive antennas",
                             [](auto& c) -> auto& { return c.system.antennas; },
                             at_least(1, "Nr")));
    f.push_back(integer<int>("q", "QAM order, a power of 4",
                             [](auto& c) -> auto& { return c.system.order; },
                             power_of_four));
    f.push_back(real("sigma_h2", "channel coefficient variance",
                     [](auto& c) -> auto& { return c.system.sigma_h2; },
                     positive("sigma_h2")));
    f.push_back(real("sigma_z2", "noise variance (ignored by mse-sweep when snr_db is set)",
                     [](auto& c) -> auto& { return c.system.sigma_z2; },
                     at_least(0, "sigma_z2")));
    f.push_back(real("p_max", "per-device frame power budget",
                     [](auto& c) -> auto& { return c.system.p_max; },
                     positive("p_max")));
    f.push_back(choice("channel_dist", "channel and noise law", kLaws,
                       [](auto& c) -> auto& { return c.system.law; }));
    f.push_back(real("delta_g", "gradient clip bound, <= 0 derives a default",
                     [](auto& c) -> auto& { return c.delta_g; }));
    f.push_back(choice("aggregator", "aggregation pipeline", kModes,
                       [](auto& c) -> auto& { return c.aggregator; }));
    f.push_back(real("beta_margin", "power scaling margin over the worst case",
                     [](auto& c) -> auto& { return c.beta_margin; },
                     at_least(1, "beta_margin")));
    f.push_back(choice("model", "learner family", kFamilies,
                       [](auto& c) -> auto& { return c.model; }));
    f.push_back(integer<int>("hidden", "hidden units of the MLP",
                             [](auto& c) -> auto& { return c.hidden; },
                             at_least(1, "hidden")));
    f.push_back(choice("dataset", "training data source", kDatasets,
                       [](auto& c) -> auto& { return c.dataset; }));
    f.push_back(integer<int>("classes", "synthetic classes",
                             [](auto& c) -> auto& { return c.classes; },
                             at_least(2, "classes")));
    f.push_back(integer<int>("feature_dim", "synthetic feature dimension",
                             [](auto& c) -> auto& { return c.feature_dim; },
                             at_least(1, "feature_dim")));
    f.push_back(integer<int>("samples_per_device", "training samples held by each device",
                             [](auto& c) -> auto& { return c.samples_per_device; },
                             at_least(1, "samples_per_device")));
    f.push_back(real("separation", "distance between synthetic class means",
                     [](auto& c) -> auto& { return c.separation; },
                     at_least(0, "separation")));
    f.push_back(real("noise_stddev", "target noise of the regression dataset",
                     [](auto& c) -> auto& { return c.noise_stddev; },
                     at_least(0, "noise_stddev")));
    f.push_back(choice("data_mode", "partition across devices", kPartitions,
                       [](auto& c) -> auto& { return c.data_mode; }));
    f.push_back(integer<int>("shards_per_device", "label-skew shards per device",
                             [](auto& c) -> auto& { return c.shards_per_device; },
                             at_least(1, "shards_per_device")));
    f.push_back(integer<int>("batch", "local mini-batch size, 0 = full shard",
                             [](auto& c) -> auto& { return c.batch; },
                             at_least(0, "batch")));
    f.push_back(integer<int>("local_epochs", "local SGD epochs, 0 = plain gradient",
                             [](auto& c) -> auto& { return c.local_epochs; },
                             at_least(0, "local_epochs")));
    f.push_back(real("eta", "learning rate", [](auto& c) -> auto& { return c.eta; },
                     positive("eta")));
    f.push_back(integer<int>("rounds", "communication rounds T",
                             [](auto& c) -> auto& { return c.rounds; },
                             at_least(0, "rounds")));
    f.push_back(integer<int>("frame_size", "parameters per transmitted frame, 0 = all",
                             [](auto& c) -> auto& { return c.frame_size; },
                             at_least(0, "frame_size")));
    f.push_back(choice("sweep_target", "mse-sweep quantity", kTargets,
                       [](auto& c) -> auto& { return c.sweep_target; }));
    f.push_back(real("value_low", "lower end of the uniform gradient or symbol law",
                     [](auto& c) -> auto& { return c.value_low; }));
    f.push_back(real("value_high", "upper end of the uniform gradient or symbol law",
                     [](auto& c) -> auto& { return c.value_high; }));
    f.push_back({"nr_list", "antenna counts swept by mse-sweep and bounds",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.nr_list = parse_list<int>(v, parse_integer<int>);
                 },
                 [](const ExperimentConfig& c) {
                   return render_list(c.nr_list, [](int x) { return std::to_string(x); });
                 },
                 [](const ExperimentConfig& c) {
                   for (int v : c.nr_list) at_least(1, "every nr_list entry")(v);
                 }});
    f.push_back({"snr_db", "SNR grid in dB for mse-sweep",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.snr_db_list = parse_list<double>(v, parse_real);
                 },
                 [](const ExperimentConfig& c) { return render_list(c.snr_db_list, render_real); },
                 nullptr});
    f.push_back({"q_list", "QAM orders swept by bounds",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.q_list = parse_list<int>(v, parse_integer<int>);
                 },
                 [](const ExperimentConfig& c) {
                   return render_list(c.q_list, [](int x) { return std::to_string(x); });
                 },
                 [](const ExperimentConfig& c) {
                   for (int v : c.q_list) power_of_four(v);
                 }});
    f.push_back({"k_list", "device counts swept by mse-sweep, bounds and latency",
                 [](ExperimentConfig& c, std::string_view v) {
                   c.k_list = parse_list<int>(v, parse_integer<int>);
                 },
                 [](const ExperimentConfig& c) {
                   return render_list(c.k_list, [](int x) { return std::to_string(x); });
                 },
                 [](const ExperimentConfig& c) {
                   for (int v : c.k_list) at_least(1, "every k_list entry")(v);
                 }});
    f.push_back(real("symbol_amplitude", "per-device |s| used for gamma = K * amplitude",
                     [](auto& c) -> auto& { return c.symbol_amplitude; },
                     positive("symbol_amplitude")));
    f.push_back(real("epsilon", "target error of the antenna bounds",
                     [](auto& c) -> auto& { return c.epsilon; },
                     positive("epsilon")));
    f.push_back(real("delta", "failure probability of the antenna bounds",
                     [](auto& c) -> auto& { return c.delta; }, [](double v) {
                       if (!(v > 0.0 && v < 1.0)) throw BadValue{"delta must lie in (0, 1)"};
                     }));
    f.push_back(real("smoothness", "smoothness constant L for the convergence bound",
                     [](auto& c) -> auto& { return c.smoothness; },
                     positive("smoothness")));
    f.push_back(real("loss_gap", "L(w(1)) - L* for the convergence bound",
                     [](auto& c) -> auto& { return c.loss_gap; },
                     at_least(0, "loss_gap")));
    f.push_back(real("theta_bar", "mean gradient divergence for the convergence bound",
                     [](auto& c) -> auto& { return c.theta_bar; },
                     at_least(0, "theta_bar")));
    f.push_back(real("bandwidth", "latency model bandwidth B in Hz",
                     [](auto& c) -> auto& { return c.bandwidth; },
                     positive("bandwidth")));
    f.push_back(real("symbol_time", "latency model symbol duration T_s in s",
                     [](auto& c) -> auto& { return c.symbol_time; },
                     positive("symbol_time")));
    f.push_back(real("model_size", "latency model parameter count, <= 0 uses N",
                     [](auto& c) -> auto& { return c.model_size; }));
    f.push_back(real("symbol_m1", "E|s| of the transmitted symbol law",
                     [](auto& c) -> auto& { return c.symbol_m1; },
                     at_least(0, "symbol_m1")));
    f.push_back(real("symbol_m2", "E|s|^2 of the transmitted symbol law",
                     [](auto& c) -> auto& { return c.symbol_m2; },
                     positive("symbol_m2")));
    f.push_back({"output", "default CSV path when --out is absent",
                 [](ExperimentConfig& c, std::string_view v) { c.output = std::string(v); },
                 [](const ExperimentConfig& c) { return c.output; }, nullptr});
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

void check_cross_fields(const ExperimentConfig& cfg, const std::map<std::string, int>& lines) {
  auto line_of = [&](const char* key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  if (!(cfg.value_low < cfg.value_high)) {
    throw ConfigError("value_high", line_of("value_high"), "value_high must exceed value_low");
  }
  if (cfg.dataset == DatasetKind::kSynthetic && cfg.classes > cfg.feature_dim) {
    throw ConfigError("classes", line_of("classes"), "classes must not exceed feature_dim");
  }
}

void check_all(const ExperimentConfig& cfg, const std::map<std::string, int>& lines) {
  for (const Field& f : fields()) {
    if (!f.check) continue;
    try {
      f.check(cfg);
    } catch (const BadValue& bad) {
      const auto it = lines.find(f.key);
      throw ConfigError(f.key, it == lines.end() ? 0 : it->second, bad.message);
    }
  }
  check_cross_fields(cfg, lines);
}

}  // namespace

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         "'" + key + "': " + message),
      key_(std::move(key)),
      line_(line) {}

const char* to_string(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::kIdeal: return "ideal";
    case AggregationMode::kAwgn: return "awgn";
    case AggregationMode::kFading: return "fading";
    case AggregationMode::kAnalogFading: return "analog-fading";
  }
  return "?";
}

const char* to_string(LearnerFamily family) {
  switch (family) {
    case LearnerFamily::kLinearRegression: return "linear-regression";
    case LearnerFamily::kSoftmaxRegression: return "softmax-regression";
    case LearnerFamily::kMlp: return "one-hidden-layer-mlp";
  }
  return "?";
}

const char* to_string(PartitionMode mode) {
  return mode == PartitionMode::kIid ? "iid" : "label-skew";
}

const char* to_string(ChannelLaw law) {
  return law == ChannelLaw::kComplexGaussian ? "complex-gaussian" : "real-gaussian";
}

const char* to_string(SweepTarget target) {
  return target == SweepTarget::kGradient ? "gradient" : "symbol-sum";
}

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSynthetic: return "synthetic";
    case DatasetKind::kRegression: return "regression";
    case DatasetKind::kIdx: return "idx";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, int> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), line_no, "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    if (field == nullptr) throw ConfigError(key, line_no, "unknown key");
    if (!lines.emplace(key, line_no).second) {
      throw ConfigError(key, line_no, "duplicate key (first set on line " +
                                          std::to_string(lines[key]) + ")");
    }
    try {
      field->parse(cfg, value);
    } catch (const BadValue& bad) {
      throw ConfigError(key, line_no, bad.message);
    }
  }
  check_all(cfg, lines);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", 0, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.render(cfg);
    out += '\n';
  }
  return out;
}

void validate_config(const ExperimentConfig& cfg) { check_all(cfg, {}); }

std::string config_reference() {
  const ExperimentConfig defaults;
  std::string out;
  for (const Field& f : fields()) {
    std::string line = std::string(f.key) + " = " + f.render(defaults);
    if (line.size() < 34) line.resize(34, ' ');
    out += "  " + line + "  # " + f.help + '\n';
  }
  return out;
}

}  // namespace airfeel
