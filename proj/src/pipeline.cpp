#include "scobul/pipeline.hpp"

#include "scobul/errors.hpp"

namespace scobul {

namespace {

std::vector<std::uint64_t> count_spikes(const std::vector<const SimLog*>& logs,
                                        std::uint32_t n_neurons) {
  std::vector<std::uint64_t> counts(n_neurons, 0);
  for (const auto* log : logs)
    for (const auto& ev : log->neuron_spikes) ++counts[ev.source];
  return counts;
}

}  // namespace

DvsEvalContext make_dvs_eval_context(const Trajectory& trajectory) {
  DvsEvalContext ctx;
  ctx.metric = fit_phase_metric(trajectory);
  ctx.centroid = trajectory_centroid(trajectory, ctx.metric);
  return ctx;
}

Network make_network(const ExperimentSetup& setup, std::uint64_t weight_seed) {
  NetworkConfig net = setup.network;
  net.seed = weight_seed;
  if (setup.arm == PlasticityArm::Scobul) return Network(net, setup.plasticity);
  return Network(net, setup.stdp);
}

DvsRunResult run_dvs_experiment(const ExperimentSetup& setup,
                                const IndexedEvents& signal,
                                const Trajectory& trajectory,
                                const DvsEvalContext& context,
                                std::uint64_t weight_seed) {
  Network net = make_network(setup, weight_seed);
  const auto& phases = setup.phases;

  const SimLog train = net.run(signal, phases.train, true);
  const SimLog rf = net.run(signal, phases.rf, false);
  const SimLog test = net.run(signal, phases.test, false);

  DvsRunResult result;
  result.spike_counts = count_spikes({&train, &rf, &test}, setup.network.n_neurons);
  result.reborn_neurons = train.reborn_neurons;
  result.receptive_fields =
      receptive_centers(rf.neuron_spikes, trajectory, context.metric, phases.train,
                        phases.train + phases.rf, setup.network.n_neurons);
  if (result.receptive_fields.centers.empty())
    throw DegenerateRun("dvs run: no neuron fired in the receptive-field segment");

  const Timestep test_begin = phases.train + phases.rf;
  const auto predictions =
      predict_positions(test.neuron_spikes, result.receptive_fields.centers,
                        test_begin, test_begin + phases.test, setup.decode_window);
  result.nmsd = normalized_msd(predictions, trajectory, context.metric, test_begin,
                               setup.decode_window, context.centroid);
  return result;
}

ClusterRunResult run_cluster_experiment(const ExperimentSetup& setup,
                                        const IndexedEvents& signal,
                                        const GroundTruthLog& truth,
                                        std::uint64_t weight_seed) {
  Network net = make_network(setup, weight_seed);
  const auto& phases = setup.phases;

  const SimLog train = net.run(signal, phases.train, true);
  const SimLog test = net.run(signal, phases.test, false);

  ClusterRunResult result;
  result.spike_counts = count_spikes({&train, &test}, setup.network.n_neurons);
  result.reborn_neurons = train.reborn_neurons;
  result.report = cluster_recognition_report(
      test.neuron_spikes, truth, phases.train, phases.train + phases.test,
      setup.network.n_neurons, setup.high_f1_threshold);
  return result;
}

}  // namespace scobul
