#include "scobul/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scobul/errors.hpp"

namespace scobul {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

constexpr std::array kKnownKeys = {
    "experiment.kind", "experiment.seed", "experiment.train_steps",
    "experiment.rf_steps", "experiment.test_steps", "experiment.decode_window",
    "experiment.high_f1_threshold",
    "network.n_neurons", "network.input_connectivity", "network.init_resource_low",
    "network.init_resource_high", "network.inhibitory_weight",
    "network.death_silence_threshold",
    "neuron.threshold", "neuron.tau_m", "neuron.refractory_len",
    "plasticity.w_max", "plasticity.tau_p", "plasticity.d", "plasticity.d_plus",
    "plasticity.d_minus", "plasticity.renorm_mode", "plasticity.renorm_interval",
    "stdp.a_plus", "stdp.a_minus", "stdp.tau_plus", "stdp.tau_minus", "stdp.pairing",
    "signal.duration", "signal.n_nodes", "signal.p0", "signal.n_clusters",
    "signal.cluster_size", "signal.cluster_activation_prob", "signal.cluster_extra_prob",
    "signal.cluster_duration",
    "dvs.width", "dvs.height", "dvs.spot_radius", "dvs.speed_min", "dvs.speed_max",
    "dvs.target_rate_hz", "dvs.calibration_steps",
    "ga.population", "ga.mutation_prob", "ga.elitism_frac", "ga.seeds_per_fitness",
    "ga.max_generations", "ga.parallelism",
};

bool is_known_key(const std::string& key) {
  if (key.rfind("search.", 0) == 0) return true;
  return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

constexpr std::array kSearchableKeys = {
    "network.input_connectivity", "network.init_resource_low",
    "network.init_resource_high", "network.inhibitory_weight",
    "network.death_silence_threshold",
    "neuron.threshold", "neuron.tau_m", "neuron.refractory_len",
    "plasticity.w_max", "plasticity.tau_p", "plasticity.d", "plasticity.d_plus",
    "plasticity.d_minus",
    "stdp.a_plus", "stdp.a_minus", "stdp.tau_plus", "stdp.tau_minus",
};

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + value + "'");
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

bool is_searchable_key(const std::string& key) {
  return std::find(kSearchableKeys.begin(), kSearchableKeys.end(), key) !=
         kSearchableKeys.end();
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: unterminated section header at line " +
                          std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config: empty section name at line " + std::to_string(line_no));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no));
    const std::string key =
        (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.back() == '.')
      throw ConfigError("config: empty key at line " + std::to_string(line_no));
    if (!is_known_key(key)) throw ConfigError("config: unknown key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string Config::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

std::int64_t Config::get_int(const std::string& key) const {
  return std::llround(get_double(key));
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::llround(parse_double(key, it->second));
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ConfigError("config: unknown key '" + key + "'");
  entries_[key] = value;
}

void Config::set_number(const std::string& key, double value) {
  set(key, format_double(value));
}

std::string Config::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    const std::string name = key.substr(dot + 1);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << value << "\n";
  }
  return out.str();
}

ExperimentKind experiment_kind_from_config(const Config& cfg) {
  const auto kind = cfg.get_string("experiment.kind");
  if (kind == "cluster") return ExperimentKind::Cluster;
  if (kind == "dvs") return ExperimentKind::Dvs;
  throw ConfigError("config: key 'experiment.kind' must be 'cluster' or 'dvs', got '" +
                    kind + "'");
}

ExperimentSetup setup_from_config(const Config& cfg, PlasticityArm arm) {
  const auto kind = experiment_kind_from_config(cfg);

  ExperimentSetup setup;
  setup.arm = arm;
  setup.phases.train = cfg.get_int("experiment.train_steps");
  setup.phases.rf = kind == ExperimentKind::Dvs ? cfg.get_int("experiment.rf_steps") : 0;
  setup.phases.test = cfg.get_int("experiment.test_steps");
  setup.decode_window = cfg.get_int("experiment.decode_window", 40);
  setup.high_f1_threshold = cfg.get_double("experiment.high_f1_threshold", 0.5);

  auto& net = setup.network;
  net.n_neurons = static_cast<std::uint32_t>(cfg.get_int("network.n_neurons"));
  net.input_connectivity = cfg.get_double("network.input_connectivity", 1.0);
  net.init_resource_low = cfg.get_double("network.init_resource_low");
  net.init_resource_high = cfg.get_double("network.init_resource_high");
  net.inhibitory_weight = cfg.get_double("network.inhibitory_weight");
  net.death_silence_threshold = cfg.get_int("network.death_silence_threshold", 0);
  net.threshold = cfg.get_double("neuron.threshold");
  net.tau_m = cfg.get_double("neuron.tau_m");
  net.refractory_len = cfg.get_int("neuron.refractory_len", 0);
  net.n_inputs = kind == ExperimentKind::Cluster
                     ? static_cast<std::uint32_t>(cfg.get_int("signal.n_nodes"))
                     : 3 * static_cast<std::uint32_t>(cfg.get_int("dvs.width")) *
                           static_cast<std::uint32_t>(cfg.get_int("dvs.height"));

  auto& pl = setup.plasticity;
  pl.w_min = 0.0;
  pl.w_max = cfg.get_double("plasticity.w_max", 1.0);
  pl.tau_p = cfg.get_int("plasticity.tau_p");
  pl.d = cfg.get_double("plasticity.d");
  pl.d_plus = cfg.get_double("plasticity.d_plus");
  pl.d_minus = cfg.get_double("plasticity.d_minus");
  const auto mode = cfg.get_string("plasticity.renorm_mode", "immediate");
  if (mode == "immediate") {
    pl.renorm_mode = PlasticityParams::RenormMode::Immediate;
  } else if (mode == "periodic") {
    pl.renorm_mode = PlasticityParams::RenormMode::Periodic;
    pl.renorm_interval = cfg.get_int("plasticity.renorm_interval", 1000);
  } else {
    throw ConfigError(
        "config: key 'plasticity.renorm_mode' must be 'immediate' or 'periodic'");
  }

  auto& st = setup.stdp;
  st.w_max = pl.w_max;
  if (arm == PlasticityArm::StdpBaseline) {
    st.a_plus = cfg.get_double("stdp.a_plus");
    st.a_minus = cfg.get_double("stdp.a_minus");
    st.tau_plus = cfg.get_int("stdp.tau_plus");
    st.tau_minus = cfg.get_int("stdp.tau_minus");
    const auto pairing = cfg.get_string("stdp.pairing", "nearest");
    if (pairing == "nearest")
      st.pairing = StdpBaselineParams::Pairing::Nearest;
    else if (pairing == "all_pairs")
      st.pairing = StdpBaselineParams::Pairing::AllPairs;
    else
      throw ConfigError("config: key 'stdp.pairing' must be 'nearest' or 'all_pairs'");
  }
  return setup;
}

ClusterSignalSpec cluster_spec_from_config(const Config& cfg, std::uint64_t seed) {
  ClusterSignalSpec spec;
  spec.n_nodes = static_cast<std::uint32_t>(cfg.get_int("signal.n_nodes"));
  spec.background_prob = cfg.get_double("signal.p0");
  spec.seed = seed;
  const auto n_clusters = cfg.get_int("signal.n_clusters");
  const auto size = cfg.get_int("signal.cluster_size");
  if (n_clusters < 0 || size < 1)
    throw ConfigError("config: bad 'signal.n_clusters' / 'signal.cluster_size'");
  if (static_cast<std::int64_t>(spec.n_nodes) < n_clusters * size)
    throw ConfigError("config: key 'signal.n_nodes' too small for the cluster layout");
  for (std::int64_t i = 0; i < n_clusters; ++i) {
    ClusterSpec c;
    c.activation_prob = cfg.get_double("signal.cluster_activation_prob");
    c.extra_prob = cfg.get_double("signal.cluster_extra_prob");
    c.active_len = cfg.get_int("signal.cluster_duration");
    for (std::int64_t k = 0; k < size; ++k)
      c.nodes.push_back(static_cast<std::uint32_t>(i * size + k));
    spec.clusters.push_back(std::move(c));
  }
  return spec;
}

DvsSignalPlan dvs_plan_from_config(const Config& cfg) {
  DvsSignalPlan plan;
  plan.dvs.width = static_cast<std::uint32_t>(cfg.get_int("dvs.width"));
  plan.dvs.height = static_cast<std::uint32_t>(cfg.get_int("dvs.height"));
  plan.scene.spot_radius = cfg.get_double("dvs.spot_radius");
  plan.scene.speed_min = cfg.get_double("dvs.speed_min");
  plan.scene.speed_max = cfg.get_double("dvs.speed_max");
  plan.target_rate_hz = cfg.get_double("dvs.target_rate_hz", 30.0);
  plan.calibration_steps = cfg.get_int("dvs.calibration_steps", 10000);
  return plan;
}

GaConfig ga_from_config(const Config& cfg, std::uint64_t seed) {
  GaConfig ga;
  ga.population = static_cast<std::uint32_t>(cfg.get_int("ga.population"));
  ga.mutation_prob = cfg.get_double("ga.mutation_prob", 0.5);
  ga.elitism_frac = cfg.get_double("ga.elitism_frac", 0.1);
  ga.seeds_per_fitness = static_cast<std::uint32_t>(cfg.get_int("ga.seeds_per_fitness", 3));
  ga.max_generations = static_cast<std::uint32_t>(cfg.get_int("ga.max_generations", 0));
  ga.parallelism = static_cast<std::uint32_t>(cfg.get_int("ga.parallelism", 0));
  ga.seed = seed;
  try {
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config: [ga] section invalid: " + std::string(e.what()));
  }
  return ga;
}

DvsSignal generate_dvs_signal_from_config(const Config& cfg, std::uint64_t root,
                                          Timestep duration,
                                          CalibrationResult* calibration) {
  auto plan = dvs_plan_from_config(cfg);
  const auto cal = calibrate_thresholds(plan.dvs.width, plan.dvs.height, plan.scene,
                                        plan.calibration_steps, plan.target_rate_hz,
                                        seed_stream(root, "scene"));
  plan.dvs.brightness_rate_scale = cal.brightness_rate_scale;
  plan.dvs.change_threshold = cal.change_threshold;
  plan.dvs.seed = seed_stream(root, "dvs");
  if (calibration) *calibration = cal;
  return make_dvs_signal(plan.dvs, plan.scene, duration, seed_stream(root, "scene"));
}

SearchSpace search_space_from_config(const Config& cfg) {
  SearchSpace space;
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("search.", 0) != 0) continue;
    SearchEntry entry;
    entry.name = key.substr(7);
    if (!is_searchable_key(entry.name))
      throw ConfigError("config: key '" + key + "' does not name a searchable parameter");
    std::istringstream in(value);
    std::string lo, hi, scale;
    if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') ||
        !std::getline(in, scale))
      throw ConfigError("config: key '" + key + "' must be 'low : high : linear|log'");
    entry.low = parse_double(key, trim(lo));
    entry.high = parse_double(key, trim(hi));
    const auto s = trim(scale);
    if (s == "linear")
      entry.scale = SearchEntry::Scale::Linear;
    else if (s == "log")
      entry.scale = SearchEntry::Scale::Log;
    else
      throw ConfigError("config: key '" + key + "' scale must be 'linear' or 'log'");
    space.entries.push_back(std::move(entry));
  }
  space.validate();
  return space;
}

SearchSpace filter_search_space(const SearchSpace& space, PlasticityArm arm) {
  constexpr std::array kResourceOnly = {"plasticity.tau_p", "plasticity.d",
                                        "plasticity.d_plus", "plasticity.d_minus"};
  SearchSpace out;
  for (const auto& entry : space.entries) {
    const bool stdp_key = entry.name.rfind("stdp.", 0) == 0;
    const bool resource_key =
        std::find(kResourceOnly.begin(), kResourceOnly.end(), entry.name) !=
        kResourceOnly.end();
    if (arm == PlasticityArm::Scobul && stdp_key) continue;
    if (arm == PlasticityArm::StdpBaseline && resource_key) continue;
    out.entries.push_back(entry);
  }
  out.validate();
  return out;
}

Config apply_genome(const Config& base, const SearchSpace& space, const Genome& genome) {
  if (genome.size() != space.entries.size())
    throw std::invalid_argument("genome length does not match the search space");
  Config cfg = base;
  for (std::size_t i = 0; i < genome.size(); ++i)
    cfg.set_number(space.entries[i].name, decode_gene(space.entries[i], genome[i]));
  return cfg;
}

}  // namespace scobul
