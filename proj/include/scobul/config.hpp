#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "scobul/optimize.hpp"
#include "scobul/pipeline.hpp"
#include "scobul/siggen.hpp"

namespace scobul {

/// Flat key-value configuration: INI-style sections, entries addressed as
/// "section.key". Parsing and typed access throw ConfigError naming the
/// offending key. Keys are validated against the documented set so typos
/// fail loudly.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_number(const std::string& key, double value);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Canonical INI rendering (sorted sections/keys); parses back identically.
  std::string to_ini() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// True for keys a genome may override (numeric hyperparameters).
bool is_searchable_key(const std::string& key);

ExperimentKind experiment_kind_from_config(const Config& cfg);
ExperimentSetup setup_from_config(const Config& cfg, PlasticityArm arm);
ClusterSignalSpec cluster_spec_from_config(const Config& cfg, std::uint64_t seed);

struct DvsSignalPlan {
  DvsConfig dvs;
  SpotSceneConfig scene;
  double target_rate_hz = 30.0;
  Timestep calibration_steps = 10000;
};

DvsSignalPlan dvs_plan_from_config(const Config& cfg);
GaConfig ga_from_config(const Config& cfg, std::uint64_t seed);

/// Calibrates the emulated camera on a scene sample, then renders the full
/// signal. Sub-streams of `root`: "scene" (trajectory), "dvs" (brightness
/// channel draws). Optionally reports the calibration it settled on.
DvsSignal generate_dvs_signal_from_config(const Config& cfg, std::uint64_t root,
                                          Timestep duration,
                                          CalibrationResult* calibration = nullptr);

/// Parses [search] entries of the form  key = low : high : linear|log  and
/// checks every key against the searchable set.
SearchSpace search_space_from_config(const Config& cfg);

/// One [search] section serves both arms: each arm keeps the subset of
/// entries its plasticity engine reads (resource-rule knobs for one, pairwise
/// STDP knobs for the other, everything else shared).
SearchSpace filter_search_space(const SearchSpace& space, PlasticityArm arm);

/// Applies decoded genes onto a copy of the configuration.
Config apply_genome(const Config& base, const SearchSpace& space, const Genome& genome);

}  // namespace scobul
