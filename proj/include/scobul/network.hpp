#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/plasticity.hpp"
#include "scobul/rng.hpp"

namespace scobul {

enum class PlasticityArm : std::uint8_t { Scobul, StdpBaseline };

struct NetworkConfig {
  std::uint32_t n_inputs = 0;
  std::uint32_t n_neurons = 0;
  double input_connectivity = 1.0;  ///< fraction of input nodes per neuron, (0, 1]
  double init_resource_low = 0.0;   ///< uniform range for initial resources
  double init_resource_high = 1.0;
  double inhibitory_weight = -1.0;  ///< fixed lateral weight, strictly negative
  Timestep death_silence_threshold = 0;  ///< <= 0 disables death/rebirth
  double threshold = 1.0;
  double tau_m = 20.0;  ///< membrane time constant, ms; leak = exp(-1/tau_m)
  Timestep refractory_len = 0;
  std::uint64_t seed = 0;  ///< topology + rebirth stream

  void validate() const;
};

struct SimLog {
  std::vector<SpikeRecord> neuron_spikes;
  std::uint64_t reborn_neurons = 0;
};

/// Winner-takes-all layer: every neuron receives excitatory plastic synapses
/// from a seeded-random subset of the input nodes and one fixed inhibitory
/// synapse from every other neuron. Lateral inhibitory spikes take effect on
/// the following step, which makes a step independent of neuron ordering.
///
/// Single writer; distinct instances share nothing and may run in parallel.
class Network {
 public:
  Network(const NetworkConfig& config, const PlasticityParams& plasticity);
  Network(const NetworkConfig& config, const StdpBaselineParams& stdp);

  const NetworkConfig& config() const { return config_; }
  PlasticityArm arm() const { return arm_; }
  Timestep now() const { return now_; }

  const std::vector<NeuronState>& neurons() const { return neurons_; }
  NeuronState& neuron_mut(std::size_t i) { return neurons_[i]; }

  double synapse_weight(std::size_t neuron, std::size_t k) const;

  /// Trace auditing for the resource engine; no-op on the baseline arm.
  void set_trace_sink(TraceSink* sink);

  /// Advances one step: delivers input deltas plus last step's lateral
  /// inhibition, integrates every neuron, then (when plasticity is on) runs
  /// the plasticity hooks. `spikes_at_t` are this step's input-node events.
  /// Returns the neurons that fired, ascending.
  const std::vector<std::uint32_t>& step(std::span<const SpikeRecord> spikes_at_t,
                                         Timestep t, bool plasticity_on);

  /// Rebuilds every neuron silent for at least the configured threshold:
  /// fresh input subset and resources from the topology stream, inhibitory
  /// wiring and neuron parameters preserved, conservation baseline reset.
  std::vector<std::uint32_t> death_rebirth_scan(Timestep t);

  /// Runs `duration` steps against the signal starting at the network's
  /// current clock. Death/rebirth runs only while plasticity is on; a frozen
  /// run leaves every resource and weight bit-identical.
  /// Throws std::runtime_error if the signal ends before the run does.
  SimLog run(const IndexedEvents& signal, Timestep duration, bool plasticity_on);

  /// Folds resource shifts and refreshes every weight of record.
  void settle();

  std::uint64_t rebalance_warnings() const;

 private:
  using Engine = std::variant<ScobulEngine, StdpEngine>;

  void build();
  void draw_plastic_synapses(std::size_t i);
  void rebirth(std::size_t i);

  template <class E>
  void step_impl(E& engine, std::span<const SpikeRecord> spikes_at_t, Timestep t,
                 bool plasticity_on);

  NetworkConfig config_;
  PlasticityArm arm_;
  Engine engine_;
  Rng rng_;
  double leak_ = 1.0;
  std::size_t synapses_per_neuron_ = 0;
  Timestep now_ = 0;
  std::vector<NeuronState> neurons_;
  std::vector<std::int32_t> input_lut_;  ///< [neuron * n_inputs + node] -> synapse or -1
  std::vector<std::uint8_t> prev_fired_;
  std::vector<double> input_sum_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> delivered_;
  std::vector<std::uint32_t> fired_now_;
};

}  // namespace scobul
