#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hyperlfh/errors.hpp"
#include "hyperlfh/fusion.hpp"
#include "hyperlfh/model.hpp"
#include "hyperlfh/synth.hpp"

namespace hyperlfh {

struct ConfigKey {
  const char* name;
  const char* def;
  const char* doc;
};

/// Every recognized key with its default. Unknown keys are rejected;
/// overrides beat file values, file values beat defaults.
inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"precision", "64", "floating point width for training: 32 or 64"},
      {"data.dir", "", "graph directory holding nodes.csv/edges.csv[/labels.csv]"},
      {"data.checkpoint", "", "model checkpoint path (eval; defaults to <out>/model.ckpt)"},
      {"fusion.mode", "relational", "initial embedding backbone: relational or linear"},
      {"fusion.dim", "256", "node embedding size d"},
      {"hypergen.lambda", "0.2", "reconstruction error weight in the reconstruction loss"},
      {"hypergen.gamma", "0.2", "l2 coefficient-regularization weight"},
      {"hypergen.l1_weight", "1.0", "l1 coefficient-regularization weight (1 = canonical)"},
      {"hypergen.threshold", "1e-6", "membership cutoff on relu(p) for incidence entries"},
      {"hypergen.candidate_cap", "0", "subsample candidate sets above this size (0 = off)"},
      {"hyperattn.heads", "4", "attention head count K (must divide fusion.dim)"},
      {"hyperattn.rounds", "1", "number of stacked attention blocks"},
      {"train.alpha", "0.1", "united-loss weight: (1-alpha) label + alpha reconstruction"},
      {"train.lr", "0.002", "Adam learning rate"},
      {"train.dropout", "0.3", "dropout rate (training mode only)"},
      {"train.max_epochs", "100", "epoch budget"},
      {"train.patience", "30", "early-stopping patience on validation macro-F1"},
      {"train.train_ratio", "0.2", "labeled-node fraction for training"},
      {"train.val_ratio", "0.1", "labeled-node fraction for validation"},
      {"train.seed", "1", "run seed (init, splits, dropout)"},
      {"linkpred.objective", "united", "embedding objective for link prediction: united or recon"},
      {"linkpred.hide_fraction", "0.5", "fraction of undirected edge units to hide"},
      {"linkpred.classifier_steps", "200", "optimizer steps for the logistic edge classifier"},
      {"linkpred.holdin", "0.8", "fraction of pairs used to fit the edge classifier"},
      {"sweep.param", "", "sweep parameter: lambda|gamma|alpha|dim|heads|train_ratio"},
      {"sweep.values", "", "comma-separated sweep values"},
      {"synth.num_classes", "3", "planted class count"},
      {"synth.nodes_per_class", "100", "labeled primary nodes per class"},
      {"synth.node_types", "3", "node type count (1 primary + auxiliaries)"},
      {"synth.aux_per_class", "30", "auxiliary nodes per class per auxiliary type"},
      {"synth.p_intra", "0.05", "within-class edge probability"},
      {"synth.p_inter", "0.005", "cross-class edge probability"},
      {"synth.feature_dim", "32", "raw feature dimension D"},
      {"synth.noise", "0.5", "feature noise sigma"},
      {"synth.seed", "1", "generator seed"},
  };
  return schema;
}

class RunConfig {
 public:
  static RunConfig defaults() {
    RunConfig c;
    for (const auto& k : config_schema()) c.values_[k.name] = k.def;
    return c;
  }

  /// Flat `key = value` file, '#' starts a comment, blank lines ignored.
  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
      set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError("unknown config key: " + key);
    values_[key] = value;
  }

  /// "key=value" form used by --set overrides.
  void set_pair(const std::string& pair) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value, got '" + pair + "'");
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  double get_f64(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      throw ConfigError("config key " + key + ": not a number: '" + s + "'");
    }
  }

  int get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      throw ConfigError("config key " + key + ": not an integer: '" + s + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string& s = get(key);
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (...) {
      throw ConfigError("config key " + key + ": not an unsigned integer: '" + s + "'");
    }
  }

  std::vector<double> get_f64_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<double> out;
    std::string cur;
    auto flush = [&]() {
      if (cur.empty()) return;
      try {
        out.push_back(std::stod(cur));
      } catch (...) {
        throw ConfigError("config key " + key + ": bad list element '" + cur + "'");
      }
      cur.clear();
    };
    for (char c : s) {
      if (c == ',')
        flush();
      else if (!std::isspace(static_cast<unsigned char>(c)))
        cur += c;
    }
    flush();
    return out;
  }

  /// Cross-key semantic checks; each message names the offending key.
  void validate() const {
    const int prec = get_int("precision");
    if (prec != 32 && prec != 64) throw ConfigError("precision must be 32 or 64");
    parse_fusion_mode(get("fusion.mode"));
    const int dim = get_int("fusion.dim");
    const int heads = get_int("hyperattn.heads");
    if (dim < 1) throw ConfigError("fusion.dim must be positive");
    if (heads < 1 || dim % heads != 0)
      throw ConfigError("hyperattn.heads must be positive and divide fusion.dim");
    if (get_int("hyperattn.rounds") < 1) throw ConfigError("hyperattn.rounds must be >= 1");
    const double alpha = get_f64("train.alpha");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("train.alpha must be in [0,1]");
    const double drop = get_f64("train.dropout");
    if (drop < 0.0 || drop >= 1.0) throw ConfigError("train.dropout must be in [0,1)");
    if (get_f64("train.lr") <= 0.0) throw ConfigError("train.lr must be positive");
    const int epochs = get_int("train.max_epochs");
    const int patience = get_int("train.patience");
    if (epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
    if (patience < 1 || patience > epochs)
      throw ConfigError("train.patience must be in [1, train.max_epochs]");
    const double tr = get_f64("train.train_ratio"), vr = get_f64("train.val_ratio");
    if (tr <= 0 || vr <= 0 || tr + vr > 1.0)
      throw ConfigError("train.train_ratio/val_ratio must be positive with sum <= 1");
    if (get_f64("hypergen.lambda") < 0) throw ConfigError("hypergen.lambda must be >= 0");
    if (get_f64("hypergen.gamma") < 0) throw ConfigError("hypergen.gamma must be >= 0");
    if (get_f64("hypergen.threshold") < 0) throw ConfigError("hypergen.threshold must be >= 0");
    const double hf = get_f64("linkpred.hide_fraction");
    if (hf <= 0 || hf >= 1) throw ConfigError("linkpred.hide_fraction must be in (0,1)");
    const double hi = get_f64("linkpred.holdin");
    if (hi <= 0 || hi >= 1) throw ConfigError("linkpred.holdin must be in (0,1)");
    const std::string& obj = get("linkpred.objective");
    if (obj != "united" && obj != "recon")
      throw ConfigError("linkpred.objective must be 'united' or 'recon'");
  }

  ModelConfig model_config() const {
    ModelConfig m;
    m.dim = get_int("fusion.dim");
    m.heads = get_int("hyperattn.heads");
    m.rounds = get_int("hyperattn.rounds");
    m.fusion_mode = parse_fusion_mode(get("fusion.mode"));
    m.lambda = get_f64("hypergen.lambda");
    m.gamma = get_f64("hypergen.gamma");
    m.l1_weight = get_f64("hypergen.l1_weight");
    m.threshold = get_f64("hypergen.threshold");
    m.candidate_cap = get_int("hypergen.candidate_cap");
    m.alpha = get_f64("train.alpha");
    m.dropout = get_f64("train.dropout");
    return m;
  }

  SynthConfig synth_config() const {
    SynthConfig s;
    s.num_classes = get_int("synth.num_classes");
    s.nodes_per_class = get_int("synth.nodes_per_class");
    s.node_types = get_int("synth.node_types");
    s.aux_per_class = get_int("synth.aux_per_class");
    s.p_intra = get_f64("synth.p_intra");
    s.p_inter = get_f64("synth.p_inter");
    s.feature_dim = get_int("synth.feature_dim");
    s.noise = get_f64("synth.noise");
    s.seed = get_u64("synth.seed");
    return s;
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace hyperlfh
