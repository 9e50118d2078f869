#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace scobul {

/// Discrete simulation time. One step corresponds to 1 ms of model time.
using Timestep = std::int64_t;

/// Sentinel for "has not happened yet" timestamps; simulated time is >= 0.
inline constexpr Timestep kNever = -1;

/// One spike: emitted at step `t` by `source`. Input channels and neurons
/// live in disjoint id spaces chosen by the producer of the log.
struct SpikeRecord {
  Timestep t = 0;
  std::uint32_t source = 0;
  friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

/// A finite spike signal over `n_channels` sources; events sorted by
/// (t, source), every t in [0, duration), every source in [0, n_channels).
struct EventStream {
  std::uint32_t n_channels = 0;
  Timestep duration = 0;
  std::vector<SpikeRecord> events;
};

/// Per-step view over an EventStream. Built once, shared read-only.
class IndexedEvents {
 public:
  /// Throws FormatError if the stream violates the ordering/range contract.
  explicit IndexedEvents(const EventStream& stream);

  Timestep duration() const { return stream_->duration; }
  std::uint32_t n_channels() const { return stream_->n_channels; }

  std::span<const SpikeRecord> at(Timestep t) const {
    const auto b = offsets_[static_cast<std::size_t>(t)];
    const auto e = offsets_[static_cast<std::size_t>(t) + 1];
    return {stream_->events.data() + b, stream_->events.data() + e};
  }

 private:
  const EventStream* stream_;
  std::vector<std::size_t> offsets_;
};

enum class SynapseKind : std::uint8_t { ExcitatoryPlastic, InhibitoryFixed };

/// Saturating map from synaptic resource to weight:
///
///   w = w_min + (w_max - w_min) * max(W, 0) / ((w_max - w_min) + max(W, 0))
///
/// Total over all real W; monotone non-decreasing; range [w_min, w_max).
double resource_to_weight(double resource, double w_min, double w_max) noexcept;

/// Parameters of the resource-based plasticity rules.
struct PlasticityParams {
  enum class RenormMode : std::uint8_t { Immediate, Periodic };

  double w_min = 0.0;
  double w_max = 1.0;
  Timestep tau_p = 20;     ///< half-length of a plasticity period
  double d = 0.0;          ///< unconditional per-spike resource decrement
  double d_plus = 0.0;     ///< symmetric potentiation increment
  double d_minus = 0.0;    ///< end-of-period depression of inactive synapses
  RenormMode renorm_mode = RenormMode::Immediate;
  Timestep renorm_interval = 1000;  ///< periodic mode only

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// Per-synapse state shared by both plasticity engines.
///
/// For excitatory-plastic synapses under the resource rules, the effective
/// resource is `resource + NeuronState::plastic_resource_shift` (the shift
/// carries the equal-share rebalancing; see NeuronState::resource_of).
/// `weight` is the weight of record: under the resource rules it is
/// authoritative only between renormalization points in periodic mode
/// (immediate mode computes weights from the resource on every read); under
/// the pairwise STDP baseline it is the live state.
struct SynapseState {
  std::uint32_t source = 0;
  SynapseKind kind = SynapseKind::ExcitatoryPlastic;
  double resource = 0.0;
  double weight = 0.0;
  Timestep last_pre_spike = kNever;
  Timestep last_unconditional_depression = kNever;
  bool potentiated_this_period = false;
  bool spiked_this_period = false;
  double pre_trace = 0.0;  ///< STDP baseline, all-pairs mode only
};

/// Leaky integrate-and-fire neuron with current-based delta synapses.
/// Plastic synapses occupy the prefix [0, n_plastic) of `synapses`.
struct NeuronState {
  double potential = 0.0;
  double threshold = 1.0;
  double leak_factor = 1.0;  ///< multiplicative decay per step, in (0, 1]
  Timestep refractory_remaining = 0;
  Timestep refractory_len = 0;
  Timestep period_center = kNever;  ///< most recent plasticity-period anchor
  bool period_open = false;         ///< end-of-period rule not yet applied
  Timestep last_fire = kNever;
  Timestep silence_steps = 0;  ///< steps since last fire
  double initial_resource_total = 0.0;  ///< conservation baseline
  double plastic_resource_shift = 0.0;  ///< shared additive term on plastic W
  double post_trace = 0.0;              ///< STDP baseline, all-pairs mode
  Timestep post_trace_time = kNever;
  std::size_t n_plastic = 0;
  std::vector<SynapseState> synapses;

  double resource_of(std::size_t k) const {
    return synapses[k].resource + (k < n_plastic ? plastic_resource_shift : 0.0);
  }

  double plastic_resource_total() const;

  /// Folds the shared shift into each plastic synapse's resource.
  void settle_resources();
};

/// Advances one neuron by one timestep given the summed delta-synapse input.
/// Refractory steps consume the counter and ignore input; otherwise the
/// potential leaks multiplicatively, gains the input, and fires on reaching
/// threshold (reset to 0, refractory re-armed). Returns whether it fired.
bool integrate_step(NeuronState& neuron, double weighted_input, Timestep t);

}  // namespace scobul
