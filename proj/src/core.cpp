#include "scobul/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "scobul/errors.hpp"

namespace scobul {

IndexedEvents::IndexedEvents(const EventStream& stream) : stream_(&stream) {
  if (stream.duration < 0) throw FormatError("event stream: negative duration");
  const auto& ev = stream.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (ev[i].t < 0 || ev[i].t >= stream.duration)
      throw FormatError("event stream: event " + std::to_string(i) + " out of range");
    if (ev[i].source >= stream.n_channels)
      throw FormatError("event stream: event " + std::to_string(i) + " has bad source");
    if (i > 0 && (ev[i].t < ev[i - 1].t ||
                  (ev[i].t == ev[i - 1].t && ev[i].source <= ev[i - 1].source)))
      throw FormatError("event stream: events not sorted by (t, source)");
  }
  offsets_.resize(static_cast<std::size_t>(stream.duration) + 1);
  std::size_t i = 0;
  for (Timestep t = 0; t <= stream.duration; ++t) {
    while (i < ev.size() && ev[i].t < t) ++i;
    offsets_[static_cast<std::size_t>(t)] = i;
  }
}

double resource_to_weight(double resource, double w_min, double w_max) noexcept {
  const double span = w_max - w_min;
  const double m = resource > 0.0 ? resource : 0.0;
  const double w = w_min + span * (m / (span + m));
  // keep the strict upper bound when m/(span+m) rounds to 1
  return w < w_max ? w : std::nextafter(w_max, w_min);
}

void PlasticityParams::validate() const {
  if (!(w_max > w_min) || w_min < 0.0)
    throw std::invalid_argument("plasticity: requires w_max > w_min >= 0");
  if (tau_p < 1) throw std::invalid_argument("plasticity: tau_p must be >= 1");
  if (d < 0.0 || d_plus < 0.0 || d_minus < 0.0)
    throw std::invalid_argument("plasticity: d, d_plus, d_minus must be >= 0");
  if (renorm_mode == RenormMode::Periodic && renorm_interval < 1)
    throw std::invalid_argument("plasticity: renorm_interval must be >= 1");
}

double NeuronState::plastic_resource_total() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < n_plastic; ++k) sum += synapses[k].resource;
  return sum + static_cast<double>(n_plastic) * plastic_resource_shift;
}

void NeuronState::settle_resources() {
  for (std::size_t k = 0; k < n_plastic; ++k) synapses[k].resource += plastic_resource_shift;
  plastic_resource_shift = 0.0;
}

bool integrate_step(NeuronState& neuron, double weighted_input, Timestep t) {
  if (neuron.refractory_remaining > 0) {
    --neuron.refractory_remaining;
    ++neuron.silence_steps;
    return false;
  }
  neuron.potential = neuron.leak_factor * neuron.potential + weighted_input;
  if (neuron.potential >= neuron.threshold) {
    neuron.potential = 0.0;
    neuron.refractory_remaining = neuron.refractory_len;
    neuron.silence_steps = 0;
    neuron.last_fire = t;
    return true;
  }
  ++neuron.silence_steps;
  return false;
}

}  // namespace scobul
