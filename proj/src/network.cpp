#include "scobul/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scobul {

namespace {

Timestep effective_death_threshold(const NetworkConfig& c) {
  return c.death_silence_threshold > 0 ? c.death_silence_threshold
                                       : std::numeric_limits<Timestep>::max();
}

/// k distinct values from [0, n), ascending. Partial Fisher-Yates.
std::vector<std::uint32_t> sample_subset(Rng& rng, std::uint32_t n, std::size_t k) {
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

void NetworkConfig::validate() const {
  if (n_neurons < 2) throw std::invalid_argument("network: needs at least 2 neurons");
  if (n_inputs == 0) throw std::invalid_argument("network: needs at least 1 input node");
  if (!(input_connectivity > 0.0) || input_connectivity > 1.0)
    throw std::invalid_argument("network: input_connectivity must be in (0, 1]");
  if (!(inhibitory_weight < 0.0))
    throw std::invalid_argument("network: inhibitory_weight must be negative");
  if (!(init_resource_high >= init_resource_low))
    throw std::invalid_argument("network: init resource range is inverted");
  if (!(tau_m > 0.0)) throw std::invalid_argument("network: tau_m must be positive");
  if (refractory_len < 0)
    throw std::invalid_argument("network: refractory_len must be >= 0");
}

Network::Network(const NetworkConfig& config, const PlasticityParams& plasticity)
    : config_(config),
      arm_(PlasticityArm::Scobul),
      engine_(ScobulEngine(plasticity)),
      rng_(config.seed) {
  build();
}

Network::Network(const NetworkConfig& config, const StdpBaselineParams& stdp)
    : config_(config),
      arm_(PlasticityArm::StdpBaseline),
      engine_(StdpEngine(stdp)),
      rng_(config.seed) {
  build();
}

void Network::build() {
  config_.validate();
  leak_ = std::exp(-1.0 / config_.tau_m);
  synapses_per_neuron_ = static_cast<std::size_t>(
      std::ceil(config_.input_connectivity * config_.n_inputs));
  if (synapses_per_neuron_ == 0) synapses_per_neuron_ = 1;

  neurons_.resize(config_.n_neurons);
  input_lut_.assign(std::size_t(config_.n_neurons) * config_.n_inputs, -1);
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    auto& n = neurons_[i];
    n.threshold = config_.threshold;
    n.leak_factor = leak_;
    n.refractory_len = config_.refractory_len;
    draw_plastic_synapses(i);
    for (std::uint32_t j = 0; j < config_.n_neurons; ++j) {
      if (j == i) continue;
      SynapseState syn;
      syn.source = j;
      syn.kind = SynapseKind::InhibitoryFixed;
      syn.weight = config_.inhibitory_weight;
      n.synapses.push_back(syn);
    }
  }
  prev_fired_.assign(config_.n_neurons, 0);
  input_sum_.assign(config_.n_neurons, 0.0);
}

void Network::draw_plastic_synapses(std::size_t i) {
  auto& n = neurons_[i];
  const auto subset = sample_subset(rng_, config_.n_inputs, synapses_per_neuron_);
  const double lo = config_.init_resource_low;
  const double hi = config_.init_resource_high;
  const double wmin = std::visit([](const auto& e) { return e.w_min(); }, engine_);
  const double wmax = std::visit([](const auto& e) { return e.w_max(); }, engine_);

  n.n_plastic = subset.size();
  n.plastic_resource_shift = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    SynapseState syn;
    syn.source = subset[k];
    syn.kind = SynapseKind::ExcitatoryPlastic;
    syn.resource = rng_.uniform(lo, hi);
    syn.weight = resource_to_weight(syn.resource, wmin, wmax);
    total += syn.resource;
    if (k < n.synapses.size())
      n.synapses[k] = syn;
    else
      n.synapses.push_back(syn);
  }
  n.initial_resource_total = total;

  auto* row = &input_lut_[i * config_.n_inputs];
  std::fill(row, row + config_.n_inputs, -1);
  for (std::size_t k = 0; k < subset.size(); ++k)
    row[subset[k]] = static_cast<std::int32_t>(k);
}

void Network::rebirth(std::size_t i) {
  auto& n = neurons_[i];
  draw_plastic_synapses(i);  // inhibitory suffix untouched
  n.potential = 0.0;
  n.refractory_remaining = 0;
  n.last_fire = kNever;
  n.silence_steps = 0;
  for (std::size_t k = 0; k < n.n_plastic; ++k) {
    auto& syn = n.synapses[k];
    syn.last_pre_spike = kNever;
    syn.last_unconditional_depression = kNever;
    syn.potentiated_this_period = false;
    syn.spiked_this_period = false;
    syn.pre_trace = 0.0;
  }
  std::visit([&](const auto& e) { e.on_rebirth(n); }, engine_);
}

double Network::synapse_weight(std::size_t neuron, std::size_t k) const {
  return std::visit(
      [&](const auto& e) { return e.synapse_weight(neurons_[neuron], k); }, engine_);
}

void Network::set_trace_sink(TraceSink* sink) {
  if (auto* e = std::get_if<ScobulEngine>(&engine_)) e->set_trace_sink(sink);
}

std::uint64_t Network::rebalance_warnings() const {
  if (const auto* e = std::get_if<ScobulEngine>(&engine_))
    return e->single_synapse_warnings();
  return 0;
}

template <class E>
void Network::step_impl(E& engine, std::span<const SpikeRecord> spikes_at_t,
                        Timestep t, bool plasticity_on) {
  const std::size_t n = neurons_.size();
  if (plasticity_on)
    for (std::size_t i = 0; i < n; ++i)
      engine.begin_step(neurons_[i], static_cast<int>(i), t);

  // phase 1: input deltas plus lateral inhibition from last step's winners
  std::fill(input_sum_.begin(), input_sum_.end(), 0.0);
  delivered_.clear();
  for (const auto& ev : spikes_at_t) {
    // column ev.source of the [neuron x input] synapse lookup table
    const auto* lut = &input_lut_[std::size_t(ev.source)];
    for (std::size_t i = 0; i < n; ++i) {
      const std::int32_t k = lut[i * config_.n_inputs];
      if (k < 0) continue;
      input_sum_[i] += engine.synapse_weight(neurons_[i], static_cast<std::size_t>(k));
      if (plasticity_on)
        delivered_.emplace_back(static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(k));
    }
  }
  std::uint32_t fired_prev = 0;
  for (std::uint8_t f : prev_fired_) fired_prev += f;
  if (fired_prev > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto others = fired_prev - prev_fired_[i];
      input_sum_[i] += config_.inhibitory_weight * static_cast<double>(others);
    }
  }

  // phase 2: integrate
  fired_now_.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (integrate_step(neurons_[i], input_sum_[i], t))
      fired_now_.push_back(static_cast<std::uint32_t>(i));

  // phase 3: plasticity hooks
  if (plasticity_on) {
    for (const auto& [i, k] : delivered_)
      engine.on_pre_spike(neurons_[i], static_cast<int>(i), k, t);
    for (std::uint32_t i : fired_now_)
      engine.on_post_spike(neurons_[i], static_cast<int>(i), t);
  }

  std::fill(prev_fired_.begin(), prev_fired_.end(), 0);
  for (std::uint32_t i : fired_now_) prev_fired_[i] = 1;
}

const std::vector<std::uint32_t>& Network::step(std::span<const SpikeRecord> spikes_at_t,
                                                Timestep t, bool plasticity_on) {
  std::visit([&](auto& e) { step_impl(e, spikes_at_t, t, plasticity_on); }, engine_);
  return fired_now_;
}

std::vector<std::uint32_t> Network::death_rebirth_scan(Timestep) {
  std::vector<std::uint32_t> reborn;
  const Timestep threshold = effective_death_threshold(config_);
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    if (neurons_[i].silence_steps >= threshold) {
      rebirth(i);
      reborn.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return reborn;
}

SimLog Network::run(const IndexedEvents& signal, Timestep duration, bool plasticity_on) {
  if (signal.n_channels() != config_.n_inputs)
    throw std::runtime_error("run: signal has " + std::to_string(signal.n_channels()) +
                             " channels, network expects " +
                             std::to_string(config_.n_inputs));
  if (now_ + duration > signal.duration())
    throw std::runtime_error(
        "run: signal exhausted at step " + std::to_string(signal.duration()) +
        ", need " + std::to_string(now_ + duration));

  SimLog log;
  // rebirth redraws resources, so a frozen run must not scan for deaths
  const bool death_enabled = plasticity_on && config_.death_silence_threshold > 0;
  for (Timestep s = 0; s < duration; ++s) {
    const Timestep t = now_;
    const auto& fired = step(signal.at(t), t, plasticity_on);
    for (std::uint32_t i : fired) log.neuron_spikes.push_back({t, i});
    if (death_enabled) log.reborn_neurons += death_rebirth_scan(t).size();
    ++now_;
  }
  return log;
}

void Network::settle() {
  for (auto& n : neurons_) {
    n.settle_resources();
    if (arm_ == PlasticityArm::Scobul) {
      const auto& e = std::get<ScobulEngine>(engine_);
      for (std::size_t k = 0; k < n.n_plastic; ++k)
        n.synapses[k].weight =
            resource_to_weight(n.synapses[k].resource, e.w_min(), e.w_max());
    }
  }
}

}  // namespace scobul
