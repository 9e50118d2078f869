#include "scobul/plasticity.hpp"

#include <cmath>
#include <stdexcept>

namespace scobul {

ScobulEngine::ScobulEngine(const PlasticityParams& params) : params_(params) {
  params_.validate();
}

void ScobulEngine::apply_delta(NeuronState& neuron, int neuron_id, std::size_t k,
                               double delta, TraceEvent::Kind kind, Timestep t) {
  if (trace_) {
    trace_->record({kind, neuron_id, static_cast<std::int32_t>(k), t,
                    neuron.period_center, delta, neuron.resource_of(k),
                    neuron.synapses[k].spiked_this_period});
  }
  neuron.synapses[k].resource += delta;
  if (params_.renorm_mode == PlasticityParams::RenormMode::Immediate)
    rebalance(neuron, k, delta);
}

void ScobulEngine::rebalance(NeuronState& neuron, std::size_t source, double delta) {
  if (delta == 0.0 || params_.renorm_mode != PlasticityParams::RenormMode::Immediate)
    return;
  if (neuron.n_plastic < 2) {
    ++single_synapse_warnings_;
    return;
  }
  // Equal shares -delta/(n-1) on every other plastic synapse, realized as a
  // shared shift plus a cancelling term on the source. O(1) per delta.
  const double share = delta / static_cast<double>(neuron.n_plastic - 1);
  neuron.plastic_resource_shift -= share;
  neuron.synapses[source].resource += share;
}

void ScobulEngine::begin_step(NeuronState& neuron, int neuron_id, Timestep t) {
  if (neuron.period_open && t > neuron.period_center + params_.tau_p)
    close_period(neuron, neuron_id, t);
  if (params_.renorm_mode == PlasticityParams::RenormMode::Periodic && t > 0 &&
      t % params_.renorm_interval == 0)
    periodic_renormalize(neuron, neuron_id);
}

void ScobulEngine::on_pre_spike(NeuronState& neuron, int neuron_id, std::size_t k,
                                Timestep t) {
  auto& syn = neuron.synapses[k];
  if (syn.kind != SynapseKind::ExcitatoryPlastic)
    throw std::logic_error("plasticity hook on a non-plastic synapse");

  // unconditional depression, at most once in any 2*tau_p window
  if (syn.last_unconditional_depression == kNever ||
      t - syn.last_unconditional_depression >= 2 * params_.tau_p) {
    syn.last_unconditional_depression = t;
    apply_delta(neuron, neuron_id, k, -params_.d,
                TraceEvent::Kind::UnconditionalDepression, t);
  }

  // symmetric potentiation, forward half: first spike inside the open period
  if (neuron.period_open && neuron.period_center <= t &&
      t <= neuron.period_center + params_.tau_p) {
    syn.spiked_this_period = true;
    if (!syn.potentiated_this_period) {
      syn.potentiated_this_period = true;
      apply_delta(neuron, neuron_id, k, params_.d_plus,
                  TraceEvent::Kind::SymmetricPotentiation, t);
    }
  }

  syn.last_pre_spike = t;
}

std::optional<PeriodEvent> ScobulEngine::on_post_spike(NeuronState& neuron,
                                                       int neuron_id, Timestep t) {
  if (neuron.period_center != kNever && t - neuron.period_center < params_.tau_p)
    return std::nullopt;
  // a new period replaces a still-open previous one early
  if (neuron.period_open) close_period(neuron, neuron_id, t);

  neuron.period_center = t;
  neuron.period_open = true;
  if (trace_)
    trace_->record({TraceEvent::Kind::PeriodOpened, neuron_id, -1, t, t, 0.0, 0.0, false});

  // retroactive half: synapses already hit inside [t - tau_p, t]
  for (std::size_t k = 0; k < neuron.n_plastic; ++k) {
    auto& syn = neuron.synapses[k];
    if (syn.last_pre_spike == kNever || syn.last_pre_spike < t - params_.tau_p) continue;
    syn.spiked_this_period = true;
    if (!syn.potentiated_this_period) {
      syn.potentiated_this_period = true;
      apply_delta(neuron, neuron_id, k, params_.d_plus,
                  TraceEvent::Kind::SymmetricPotentiation, t);
    }
  }
  return PeriodEvent{neuron_id, t, t - params_.tau_p, t + params_.tau_p};
}

void ScobulEngine::close_period(NeuronState& neuron, int neuron_id, Timestep t) {
  if (!neuron.period_open) return;
  // Snapshot eligibility first: compensation from earlier depressions only
  // raises the others, so a snapshotted synapse stays > 0 at application.
  scratch_.clear();
  for (std::size_t k = 0; k < neuron.n_plastic; ++k) {
    const auto& syn = neuron.synapses[k];
    if (!syn.spiked_this_period && neuron.resource_of(k) > 0.0) scratch_.push_back(k);
  }
  for (std::size_t k : scratch_)
    apply_delta(neuron, neuron_id, k, -params_.d_minus,
                TraceEvent::Kind::InactiveDepression, t);
  for (std::size_t k = 0; k < neuron.n_plastic; ++k) {
    neuron.synapses[k].potentiated_this_period = false;
    neuron.synapses[k].spiked_this_period = false;
  }
  neuron.period_open = false;
  if (trace_)
    trace_->record({TraceEvent::Kind::PeriodClosed, neuron_id, -1, t,
                    neuron.period_center, 0.0, 0.0, false});
}

void ScobulEngine::periodic_renormalize(NeuronState& neuron, int) {
  if (params_.renorm_mode != PlasticityParams::RenormMode::Periodic) return;
  if (neuron.n_plastic == 0) return;
  const double total = neuron.plastic_resource_total();
  neuron.plastic_resource_shift +=
      (neuron.initial_resource_total - total) / static_cast<double>(neuron.n_plastic);
  for (std::size_t k = 0; k < neuron.n_plastic; ++k)
    neuron.synapses[k].weight =
        resource_to_weight(neuron.resource_of(k), params_.w_min, params_.w_max);
}

double ScobulEngine::synapse_weight(const NeuronState& neuron, std::size_t k) const {
  const auto& syn = neuron.synapses[k];
  if (syn.kind == SynapseKind::InhibitoryFixed) return syn.weight;
  if (params_.renorm_mode == PlasticityParams::RenormMode::Periodic) return syn.weight;
  return resource_to_weight(neuron.resource_of(k), params_.w_min, params_.w_max);
}

void ScobulEngine::on_rebirth(NeuronState& neuron) const {
  neuron.period_center = kNever;
  neuron.period_open = false;
}

void StdpBaselineParams::validate() const {
  if (a_plus <= 0.0 || a_minus <= 0.0)
    throw std::invalid_argument("stdp: a_plus and a_minus must be positive");
  if (tau_plus < 1 || tau_minus < 1)
    throw std::invalid_argument("stdp: tau_plus and tau_minus must be >= 1");
  if (w_max <= 0.0) throw std::invalid_argument("stdp: w_max must be positive");
}

double stdp_pair_update(double w, Timestep t_pre, Timestep t_post,
                        const StdpBaselineParams& params) {
  const Timestep dt = t_post - t_pre;
  if (dt > 0) {
    const double next =
        w + params.a_plus * std::exp(-static_cast<double>(dt) /
                                     static_cast<double>(params.tau_plus));
    return next < params.w_max ? next : params.w_max;
  }
  if (dt < 0) {
    const double next =
        w - params.a_minus * std::exp(static_cast<double>(dt) /
                                      static_cast<double>(params.tau_minus));
    return next > 0.0 ? next : 0.0;
  }
  return w;
}

StdpEngine::StdpEngine(const StdpBaselineParams& params) : params_(params) {
  params_.validate();
}

void StdpEngine::on_pre_spike(NeuronState& neuron, int, std::size_t k, Timestep t) {
  auto& syn = neuron.synapses[k];
  if (syn.kind != SynapseKind::ExcitatoryPlastic)
    throw std::logic_error("plasticity hook on a non-plastic synapse");
  if (params_.pairing == StdpBaselineParams::Pairing::Nearest) {
    if (neuron.last_fire != kNever)
      syn.weight = stdp_pair_update(syn.weight, t, neuron.last_fire, params_);
  } else {
    // post_trace_time < t here (the post hook runs after pre hooks), so the
    // decayed trace sums strictly earlier posts and dt = 0 stays neutral.
    if (neuron.post_trace_time != kNever) {
      const double post =
          neuron.post_trace * std::exp(-static_cast<double>(t - neuron.post_trace_time) /
                                       static_cast<double>(params_.tau_minus));
      syn.weight = std::max(syn.weight - params_.a_minus * post, 0.0);
    }
    syn.pre_trace =
        (syn.last_pre_spike == kNever
             ? 0.0
             : syn.pre_trace * std::exp(-static_cast<double>(t - syn.last_pre_spike) /
                                        static_cast<double>(params_.tau_plus))) +
        1.0;
  }
  syn.last_pre_spike = t;
}

void StdpEngine::on_post_spike(NeuronState& neuron, int, Timestep t) {
  for (std::size_t k = 0; k < neuron.n_plastic; ++k) {
    auto& syn = neuron.synapses[k];
    if (syn.last_pre_spike == kNever) continue;
    if (params_.pairing == StdpBaselineParams::Pairing::Nearest) {
      syn.weight = stdp_pair_update(syn.weight, syn.last_pre_spike, t, params_);
    } else {
      double pre = syn.pre_trace;
      if (syn.last_pre_spike == t)
        pre -= 1.0;  // a simultaneous pre does not pair with this post
      else
        pre *= std::exp(-static_cast<double>(t - syn.last_pre_spike) /
                        static_cast<double>(params_.tau_plus));
      if (pre > 0.0)
        syn.weight = std::min(syn.weight + params_.a_plus * pre, params_.w_max);
    }
  }
  neuron.post_trace =
      (neuron.post_trace_time == kNever
           ? 0.0
           : neuron.post_trace * std::exp(-static_cast<double>(t - neuron.post_trace_time) /
                                          static_cast<double>(params_.tau_minus))) +
      1.0;
  neuron.post_trace_time = t;
}

void StdpEngine::on_rebirth(NeuronState& neuron) const {
  neuron.post_trace = 0.0;
  neuron.post_trace_time = kNever;
}

}  // namespace scobul
