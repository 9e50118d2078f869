#pragma once

#include <cstdint>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/eval.hpp"
#include "scobul/network.hpp"
#include "scobul/siggen.hpp"

namespace scobul {

enum class ExperimentKind : std::uint8_t { Cluster, Dvs };

struct PhasePlan {
  Timestep train = 0;
  Timestep rf = 0;  ///< receptive-field segment; 0 for the cluster task
  Timestep test = 0;

  Timestep total() const { return train + rf + test; }
};

/// Everything a single run needs except the signal and the weight seed.
struct ExperimentSetup {
  PlasticityArm arm = PlasticityArm::Scobul;
  NetworkConfig network;
  PlasticityParams plasticity;
  StdpBaselineParams stdp;
  PhasePlan phases;
  Timestep decode_window = 40;
  double high_f1_threshold = 0.5;
};

/// Trajectory-derived quantities shared by every run on one signal.
struct DvsEvalContext {
  PhaseMetric metric;
  PhaseVec centroid{};
};

DvsEvalContext make_dvs_eval_context(const Trajectory& trajectory);

struct DvsRunResult {
  NmsdResult nmsd;
  ReceptiveFieldResult receptive_fields;
  std::vector<std::uint64_t> spike_counts;  ///< per neuron, whole run
  std::uint64_t reborn_neurons = 0;
};

/// Train (plasticity on) / receptive-field (off) / test (off) against one
/// signal, then decode and score. Throws DegenerateRun when the network is
/// too silent to evaluate.
DvsRunResult run_dvs_experiment(const ExperimentSetup& setup,
                                const IndexedEvents& signal,
                                const Trajectory& trajectory,
                                const DvsEvalContext& context,
                                std::uint64_t weight_seed);

struct ClusterRunResult {
  ClusterRecognitionReport report;
  std::vector<std::uint64_t> spike_counts;
  std::uint64_t reborn_neurons = 0;
};

/// Train (plasticity on) then score recognition on a frozen test segment.
ClusterRunResult run_cluster_experiment(const ExperimentSetup& setup,
                                        const IndexedEvents& signal,
                                        const GroundTruthLog& truth,
                                        std::uint64_t weight_seed);

/// Builds the network for a setup with the given topology/weight seed.
Network make_network(const ExperimentSetup& setup, std::uint64_t weight_seed);

}  // namespace scobul
