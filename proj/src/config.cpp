#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "corrnet/csv.hpp"
#include "corrnet/error.hpp"
#include "corrnet/pipeline.hpp"

namespace corrnet {

const char* decoder_key(Decoder d) {
  switch (d) {
    case Decoder::CorrNetSvm: return "svm";
    case Decoder::CorrNetSnn: return "snn";
    case Decoder::PureSvm: return "pure-svm";
    case Decoder::PureSnn: return "pure-snn";
  }
  return "?";
}

const char* decoder_method(Decoder d) {
  switch (d) {
    case Decoder::CorrNetSvm: return "corrnet-svm";
    case Decoder::CorrNetSnn: return "corrnet-snn";
    case Decoder::PureSvm: return "pure-svm";
    case Decoder::PureSnn: return "pure-snn";
  }
  return "?";
}

bool is_snn(Decoder d) { return d == Decoder::CorrNetSnn || d == Decoder::PureSnn; }
bool is_pure(Decoder d) { return d == Decoder::PureSvm || d == Decoder::PureSnn; }

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || std::isnan(out)) {
    throw ConfigError(key, "cannot parse '" + v + "' as a number");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(key, "cannot parse '" + v + "' as an integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "1" || t == "true" || t == "on" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "off" || t == "no") return false;
  throw ConfigError(key, "cannot parse '" + v + "' as a boolean");
}

RadiusMode to_mode(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "svm-min-edge" || t == "min-edge") return RadiusMode::SvmMinEdge;
  if (t == "snn-mean-distance" || t == "mean-distance") return RadiusMode::SnnMeanDistance;
  throw ConfigError(key, "unknown radius mode '" + v + "'");
}

std::vector<Decoder> to_decoders(const std::string& key, const std::string& v) {
  std::vector<Decoder> out;
  for (auto field : csv::split(v, ',')) {
    const std::string t = trim(std::string(field));
    if (t.empty()) continue;
    bool found = false;
    for (Decoder d : {Decoder::CorrNetSvm, Decoder::CorrNetSnn, Decoder::PureSvm, Decoder::PureSnn}) {
      if (t == decoder_key(d)) {
        if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
        found = true;
      }
    }
    if (!found) throw ConfigError(key, "unknown decoder '" + t + "'");
  }
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return csv::format_double(v);
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct KeySpec {
  std::string key;
  Setter set;
  Getter get;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"eps_cv", [](auto& c, auto& k, auto& v) { c.eps_cv = to_double(k, v); },
       [](auto& c) { return fmt(c.eps_cv); }},
      {"eps_corr", [](auto& c, auto& k, auto& v) { c.eps_corr = to_double(k, v); },
       [](auto& c) { return fmt(c.eps_corr); }},
      {"abs_correlation", [](auto& c, auto& k, auto& v) { c.abs_correlation = to_bool(k, v); },
       [](auto& c) { return std::string(c.abs_correlation ? "1" : "0"); }},
      {"decoders", [](auto& c, auto& k, auto& v) { c.decoders = to_decoders(k, v); },
       [](auto& c) {
         std::string s;
         for (auto d : c.decoders) s += (s.empty() ? "" : ",") + std::string(decoder_key(d));
         return s;
       }},
      {"svm_radius", [](auto& c, auto& k, auto& v) { c.svm_radius = to_mode(k, v); },
       [](auto& c) { return std::string(to_string(c.svm_radius)); }},
      {"snn_radius", [](auto& c, auto& k, auto& v) { c.snn_radius = to_mode(k, v); },
       [](auto& c) { return std::string(to_string(c.snn_radius)); }},
      {"svm_c", [](auto& c, auto& k, auto& v) { c.svm.c = to_double(k, v); },
       [](auto& c) { return fmt(c.svm.c); }},
      {"svm_tolerance", [](auto& c, auto& k, auto& v) { c.svm.tolerance = to_double(k, v); },
       [](auto& c) { return fmt(c.svm.tolerance); }},
      {"svm_max_updates", [](auto& c, auto& k, auto& v) { c.svm.max_updates = static_cast<long>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.svm.max_updates); }},
      {"tau_m", [](auto& c, auto& k, auto& v) { c.snn.tau_m = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.tau_m); }},
      {"tau_s", [](auto& c, auto& k, auto& v) { c.snn.tau_s = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.tau_s); }},
      {"v_thre", [](auto& c, auto& k, auto& v) { c.snn.v_thre = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.v_thre); }},
      {"v_rest", [](auto& c, auto& k, auto& v) { c.snn.v_rest = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.v_rest); }},
      {"resistance", [](auto& c, auto& k, auto& v) { c.snn.resistance = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.resistance); }},
      {"window", [](auto& c, auto& k, auto& v) { c.snn.window = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.window); }},
      {"dt", [](auto& c, auto& k, auto& v) { c.snn.dt = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.dt); }},
      {"lr", [](auto& c, auto& k, auto& v) { c.snn.lr = to_double(k, v); },
       [](auto& c) { return fmt(c.snn.lr); }},
      {"max_epochs", [](auto& c, auto& k, auto& v) { c.snn.max_epochs = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.snn.max_epochs); }},
      {"grid_x", [](auto& c, auto& k, auto& v) { c.synthetic.grid_x = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.synthetic.grid_x); }},
      {"grid_y", [](auto& c, auto& k, auto& v) { c.synthetic.grid_y = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.synthetic.grid_y); }},
      {"grid_z", [](auto& c, auto& k, auto& v) { c.synthetic.grid_z = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.synthetic.grid_z); }},
      {"pitch_x", [](auto& c, auto& k, auto& v) { c.synthetic.pitch.x() = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.pitch.x()); }},
      {"pitch_y", [](auto& c, auto& k, auto& v) { c.synthetic.pitch.y() = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.pitch.y()); }},
      {"pitch_z", [](auto& c, auto& k, auto& v) { c.synthetic.pitch.z() = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.pitch.z()); }},
      {"jitter", [](auto& c, auto& k, auto& v) { c.synthetic.jitter = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.jitter); }},
      {"rf_sigma", [](auto& c, auto& k, auto& v) { c.synthetic.rf_sigma = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.rf_sigma); }},
      {"gain", [](auto& c, auto& k, auto& v) { c.synthetic.gain = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.gain); }},
      {"snr", [](auto& c, auto& k, auto& v) { c.synthetic.snr = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.snr); }},
      {"irrelevant_fraction", [](auto& c, auto& k, auto& v) { c.synthetic.irrelevant_fraction = to_double(k, v); },
       [](auto& c) { return fmt(c.synthetic.irrelevant_fraction); }},
      {"center_weighting", [](auto& c, auto& k, auto& v) { c.synthetic.center_weighting = to_bool(k, v); },
       [](auto& c) { return std::string(c.synthetic.center_weighting ? "1" : "0"); }},
      {"rows", [](auto& c, auto& k, auto& v) { c.rows = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.rows); }},
      {"cols", [](auto& c, auto& k, auto& v) { c.cols = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.cols); }},
      {"train_trials", [](auto& c, auto& k, auto& v) { c.train_trials = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.train_trials); }},
      {"test_repetitions", [](auto& c, auto& k, auto& v) { c.test_repetitions = static_cast<int>(to_int(k, v)); },
       [](auto& c) { return std::to_string(c.test_repetitions); }},
      {"seed", [](auto& c, auto& k, auto& v) {
         const auto s = to_int(k, v);
         if (s < 0) throw ConfigError(k, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       },
       [](auto& c) { return std::to_string(c.seed); }},
      {"out", [](auto& c, auto&, auto& v) { c.out = trim(v); }, [](auto& c) { return c.out.string(); }},
      {"threads", [](auto& c, auto& k, auto& v) {
         const auto t = to_int(k, v);
         if (t < 0) throw ConfigError(k, "threads must be non-negative");
         c.threads = static_cast<unsigned>(t);
       },
       [](auto& c) { return std::to_string(c.threads); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& spec : key_table()) out.push_back(spec.key);
    return out;
  }();
  return names;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  for (const auto& spec : key_table()) {
    if (spec.key == key) {
      spec.set(*this, key, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

void PipelineConfig::validate() const {
  auto unit = [](const char* key, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(key, "must lie in [0, 1]");
  };
  unit("eps_cv", eps_cv);
  unit("eps_corr", eps_corr);
  if (decoders.empty()) throw ConfigError("decoders", "no decoder enabled, nothing to run");
  if (rows < 1) throw ConfigError("rows", "must be positive");
  if (cols < 1) throw ConfigError("cols", "must be positive");
  if (train_trials < 2) throw ConfigError("train_trials", "need at least 2 training trials");
  if (test_repetitions < 1) throw ConfigError("test_repetitions", "must be positive");
  if (out.empty()) throw ConfigError("out", "output directory must be set");
  auto wrap = [](const char* key, auto&& check) {
    try {
      check();
    } catch (const InvalidArgument& e) {
      throw ConfigError(key, e.what());
    }
  };
  wrap("svm_c", [&] { svm.validate(); });
  wrap("tau_m", [&] { snn.validate(); });
  wrap("snr", [&] { synthetic.validate(); });
}

std::string PipelineConfig::echo() const {
  std::ostringstream os;
  for (const auto& spec : key_table()) os << spec.key << '=' << spec.get(*this) << '\n';
  return os.str();
}

PipelineConfig parse_config(const std::optional<std::filesystem::path>& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  PipelineConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("config", "cannot open " + path->string());
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(line, "expected key=value");
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  cfg.synthetic.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

}  // namespace corrnet
