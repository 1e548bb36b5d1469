#include "qpqc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qpqc/error.hpp"

namespace qpqc {

namespace pt = boost::property_tree;

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (is.fail() || !is.eof()) throw ConfigError("bad value for " + key + ": '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& text, F parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(parse(item.substr(a, b - a + 1)));
  }
  return out;
}

using Setter = std::function<void(ConfigFile&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"model",
       {
           {"arch", [](ConfigFile& c, const std::string& v) { c.experiment.model.arch = parse_arch(v); }},
           {"encoding", [](ConfigFile& c, const std::string& v) { c.experiment.model.encoding.kind = parse_encoding(v); }},
           {"encoding_layers",
            [](ConfigFile& c, const std::string& v) { c.experiment.model.encoding.layers = parse_number<int>("encoding_layers", v); }},
           {"ordering", [](ConfigFile& c, const std::string& v) { c.experiment.model.encoding.ordering = parse_ordering(v); }},
           {"ordering_seed",
            [](ConfigFile& c, const std::string& v) {
              c.experiment.model.encoding.ordering_seed = parse_number<std::uint64_t>("ordering_seed", v);
            }},
           {"ansatz", [](ConfigFile& c, const std::string& v) { c.experiment.model.ansatz.kind = parse_ansatz(v); }},
           {"ansatz_layers",
            [](ConfigFile& c, const std::string& v) { c.experiment.model.ansatz.layers = parse_number<int>("ansatz_layers", v); }},
           {"ansatz_seed",
            [](ConfigFile& c, const std::string& v) {
              c.experiment.model.ansatz.seed = parse_number<std::uint64_t>("ansatz_seed", v);
            }},
           {"fc_depth", [](ConfigFile& c, const std::string& v) { c.experiment.model.ansatz.qcnn_fc_depth = parse_fc_depth(v); }},
           {"measurement", [](ConfigFile& c, const std::string& v) { c.experiment.model.measurement = parse_measurement(v); }},
           {"image_height",
            [](ConfigFile& c, const std::string& v) { c.experiment.model.image_shape.height = parse_number<int>("image_height", v); }},
           {"image_width",
            [](ConfigFile& c, const std::string& v) { c.experiment.model.image_shape.width = parse_number<int>("image_width", v); }},
           {"image_channels",
            [](ConfigFile& c, const std::string& v) {
              c.experiment.model.image_shape.channels = parse_number<int>("image_channels", v);
            }},
           {"qubits_per_circuit",
            [](ConfigFile& c, const std::string& v) {
              c.experiment.model.qubits_per_circuit = parse_number<int>("qubits_per_circuit", v);
            }},
           {"qks", [](ConfigFile& c, const std::string& v) { c.experiment.model.qks = parse_number<int>("qks", v); }},
           {"classes", [](ConfigFile& c, const std::string& v) { c.experiment.model.class_count = parse_number<int>("classes", v); }},
       }},
      {"data",
       {
           {"path", [](ConfigFile& c, const std::string& v) { c.experiment.dataset_path = v; }},
           {"split_fraction",
            [](ConfigFile& c, const std::string& v) { c.experiment.split_fraction = parse_number<double>("split_fraction", v); }},
           {"synth_per_class", [](ConfigFile& c, const std::string& v) { c.synth_per_class = parse_number<int>("synth_per_class", v); }},
       }},
      {"train",
       {
           {"batch_size", [](ConfigFile& c, const std::string& v) { c.experiment.batch_size = parse_number<int>("batch_size", v); }},
           {"epochs", [](ConfigFile& c, const std::string& v) { c.experiment.epochs = parse_number<int>("epochs", v); }},
           {"patience", [](ConfigFile& c, const std::string& v) { c.experiment.patience = parse_number<int>("patience", v); }},
           {"learning_rate",
            [](ConfigFile& c, const std::string& v) { c.experiment.learning_rate = parse_number<double>("learning_rate", v); }},
           {"seed", [](ConfigFile& c, const std::string& v) { apply_seed(c.experiment, parse_number<std::uint64_t>("seed", v)); }},
           {"metrics_out", [](ConfigFile& c, const std::string& v) { c.experiment.metrics_out_path = v; }},
           {"checkpoint", [](ConfigFile& c, const std::string& v) { c.experiment.checkpoint_path = v; }},
           {"workers", [](ConfigFile& c, const std::string& v) { c.experiment.workers = parse_number<int>("workers", v); }},
           {"short_schedule",
            [](ConfigFile& c, const std::string& v) {
              if (parse_bool("short_schedule", v)) {
                c.experiment.epochs = 10;
                c.experiment.patience = 10;
              }
            }},
       }},
      {"sweep",
       {
           {"archs", [](ConfigFile& c, const std::string& v) { c.sweep.archs = parse_list<Arch>(v, parse_arch); }},
           {"encodings",
            [](ConfigFile& c, const std::string& v) { c.sweep.encodings = parse_list<EncodingKind>(v, parse_encoding); }},
           {"ansaetze", [](ConfigFile& c, const std::string& v) { c.sweep.ansaetze = parse_list<AnsatzKind>(v, parse_ansatz); }},
           {"measurements",
            [](ConfigFile& c, const std::string& v) {
              c.sweep.measurements = parse_list<MeasurementKind>(v, parse_measurement);
            }},
           {"orderings",
            [](ConfigFile& c, const std::string& v) { c.sweep.orderings = parse_list<OrderingKind>(v, parse_ordering); }},
           {"seeds",
            [](ConfigFile& c, const std::string& v) {
              c.sweep.seeds = parse_list<std::uint64_t>(
                  v, [](const std::string& s) { return parse_number<std::uint64_t>("seeds", s); });
            }},
           {"out_dir", [](ConfigFile& c, const std::string& v) { c.sweep.out_dir = v; }},
       }},
  };
  return table;
}

}  // namespace

int ExperimentConfig::effective_batch_size() const {
  if (batch_size > 0) return batch_size;
  return model.arch == Arch::HQNNQuanv || model.arch == Arch::ClassicalQuanv ? 4 : 16;
}

void ExperimentConfig::validate() const {
  model.validate();
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must be in (0, 1)");
  if (batch_size < 0) throw ConfigError("batch_size must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (patience < 1 || patience > epochs) throw ConfigError("patience must be in [1, epochs]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (workers < 0) throw ConfigError("workers must be non-negative");
}

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.model.seed = seed;
}

void resolve_component_seeds(ExperimentConfig& config) {
  auto& ansatz = config.model.ansatz;
  if (ansatz.kind != AnsatzKind::NoEntanglement) {
    ansatz.seed.reset();
  } else if (!ansatz.seed) {
    ansatz.seed = config.seed;
  }
  auto& enc = config.model.encoding;
  if (enc.kind != EncodingKind::Amplitude || enc.ordering != OrderingKind::Random) {
    enc.ordering_seed.reset();
  } else if (!enc.ordering_seed) {
    enc.ordering_seed = config.seed;
  }
}

ConfigFile parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ConfigFile out;
  const auto& table = schema();
  for (const auto& [section, keys] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end()) throw ConfigError("unknown config section [" + section + "]");
    if (!keys.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : keys) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      setter->second(out, value.data());
    }
  }
  return out;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qpqc
