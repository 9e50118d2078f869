#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scobul/core.hpp"

namespace scobul {

/// One plasticity period: the window [center - tau_p, center + tau_p]
/// anchored at a postsynaptic spike. A new period may only open tau_p or
/// more steps after the previous center.
struct PeriodEvent {
  int neuron_id = 0;
  Timestep center = 0;
  Timestep open_begin = 0;
  Timestep open_end = 0;  ///< inclusive
};

/// Rule-application record for audit trails. `resource_before` and
/// `spiked_flag` capture the synapse at the moment the rule fired.
struct TraceEvent {
  enum class Kind : std::uint8_t {
    UnconditionalDepression,  ///< per-spike decrement, once per 2*tau_p window
    SymmetricPotentiation,    ///< first spike inside a period
    InactiveDepression,       ///< end-of-period suppression of strong idle synapses
    PeriodOpened,
    PeriodClosed,
  };
  Kind kind{};
  int neuron_id = 0;
  std::int32_t synapse = -1;
  Timestep t = 0;
  Timestep period_center = kNever;
  double delta = 0.0;
  double resource_before = 0.0;
  bool spiked_flag = false;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceEvent& event) = 0;
};

/// Resource-based plasticity engine (the SCoBUL rule set):
///  - every presynaptic spike depresses its synapse by `d`, at most once in
///    any window of length 2*tau_p;
///  - the first presynaptic spike inside a plasticity period potentiates by
///    `d_plus`, symmetrically in pre/post order (spikes up to tau_p before
///    the period opened count retroactively);
///  - at period end, synapses with positive resource that saw no spike
///    during the period are depressed by `d_minus`;
///  - every delta is compensated on the neuron's other plastic synapses so
///    the total resource stays constant (immediate mode), or accumulated and
///    settled by periodic renormalization (periodic mode).
///
/// All rules act on the resource; weights follow via resource_to_weight.
/// One engine instance serves one network instance (single-writer).
class ScobulEngine {
 public:
  explicit ScobulEngine(const PlasticityParams& params);

  const PlasticityParams& params() const { return params_; }
  void set_trace_sink(TraceSink* sink) { trace_ = sink; }

  double w_min() const { return params_.w_min; }
  double w_max() const { return params_.w_max; }

  /// Housekeeping at the start of step t: closes a period whose window has
  /// passed and, in periodic mode, runs renormalization on schedule.
  void begin_step(NeuronState& neuron, int neuron_id, Timestep t);

  /// A spike was delivered to plastic synapse `k` at step t.
  /// Throws std::logic_error on a non-plastic synapse.
  void on_pre_spike(NeuronState& neuron, int neuron_id, std::size_t k, Timestep t);

  /// The neuron fired at step t. Opens a new period when the spacing gate
  /// allows (closing a still-open previous one first) and retroactively
  /// potentiates synapses whose last spike falls inside the new window.
  /// Returns the opened period, or nullopt when the gate rejects.
  std::optional<PeriodEvent> on_post_spike(NeuronState& neuron, int neuron_id, Timestep t);

  /// Applies the end-of-period depression and clears per-period flags.
  void close_period(NeuronState& neuron, int neuron_id, Timestep t);

  /// Equal-share compensation of `delta` (already applied to `source`)
  /// across the neuron's other plastic synapses. No-op in periodic mode and
  /// for a single-synapse neuron (counted as a warning: conservation is
  /// impossible there).
  void rebalance(NeuronState& neuron, std::size_t source, double delta);

  /// Restores the neuron's plastic resource total to its baseline by a
  /// uniform additive correction and refreshes all weight caches.
  /// No-op unless the engine is in periodic mode.
  void periodic_renormalize(NeuronState& neuron, int neuron_id);

  double synapse_weight(const NeuronState& neuron, std::size_t k) const;

  /// Resets per-run bookkeeping of a rebuilt neuron (flags, period state).
  void on_rebirth(NeuronState& neuron) const;

  std::uint64_t single_synapse_warnings() const { return single_synapse_warnings_; }

 private:
  void apply_delta(NeuronState& neuron, int neuron_id, std::size_t k, double delta,
                   TraceEvent::Kind kind, Timestep t);

  PlasticityParams params_;
  TraceSink* trace_ = nullptr;
  std::uint64_t single_synapse_warnings_ = 0;
  std::vector<std::size_t> scratch_;  // eligibility snapshot, single-writer
};

/// Classic pair-based STDP baseline: exponential windows, additive updates,
/// hard bounds [0, w_max]. `Nearest` pairs each spike with the most recent
/// opposite spike; `AllPairs` sums over all previous opposite spikes via
/// exponential traces. Simultaneous pre/post pairs are neutral.
struct StdpBaselineParams {
  enum class Pairing : std::uint8_t { Nearest, AllPairs };

  double a_plus = 0.0;
  double a_minus = 0.0;
  Timestep tau_plus = 20;
  Timestep tau_minus = 20;
  double w_max = 1.0;
  Pairing pairing = Pairing::Nearest;

  void validate() const;
};

/// Pure single-pair update: dt = t_post - t_pre; dt > 0 potentiates by
/// a_plus * exp(-dt/tau_plus) (clipped at w_max), dt < 0 depresses by
/// a_minus * exp(dt/tau_minus) (clipped at 0), dt = 0 leaves w unchanged.
double stdp_pair_update(double w, Timestep t_pre, Timestep t_post,
                        const StdpBaselineParams& params);

/// Online driver for the baseline. Weights live in SynapseState::weight;
/// resources are untouched after initialization.
class StdpEngine {
 public:
  explicit StdpEngine(const StdpBaselineParams& params);

  const StdpBaselineParams& params() const { return params_; }

  double w_min() const { return 0.0; }
  double w_max() const { return params_.w_max; }

  void begin_step(NeuronState&, int, Timestep) {}
  void on_pre_spike(NeuronState& neuron, int neuron_id, std::size_t k, Timestep t);
  void on_post_spike(NeuronState& neuron, int neuron_id, Timestep t);

  double synapse_weight(const NeuronState& neuron, std::size_t k) const {
    return neuron.synapses[k].weight;
  }

  void on_rebirth(NeuronState& neuron) const;

 private:
  StdpBaselineParams params_;
};

}  // namespace scobul
