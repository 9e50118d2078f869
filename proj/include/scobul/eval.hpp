#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/siggen.hpp"

namespace scobul {

using PhaseVec = std::array<double, 4>;

/// Per-coordinate scale factors (reciprocal standard deviations) that give
/// every phase-space coordinate unit spread over the fitted trajectory.
struct PhaseMetric {
  PhaseVec scale{1.0, 1.0, 1.0, 1.0};
};

PhaseVec scaled_point(const ScenePhasePoint& p, const PhaseMetric& m);

/// Fits 1/sigma per coordinate over the whole trajectory (population sigma).
/// Throws std::invalid_argument on an empty or zero-variance coordinate.
PhaseMetric fit_phase_metric(const Trajectory& trajectory);

/// Mean scaled phase point over the whole trajectory.
PhaseVec trajectory_centroid(const Trajectory& trajectory, const PhaseMetric& m);

struct ReceptiveCenter {
  std::uint32_t neuron_id = 0;
  PhaseVec center{};
  std::uint64_t support = 0;  ///< spikes the center was estimated from
};

struct ReceptiveFieldResult {
  std::vector<ReceptiveCenter> centers;
  std::vector<std::uint32_t> silent_neurons;  ///< excluded, zero spikes
};

/// Receptive-field center of a neuron: the mean scaled phase point over the
/// steps in [begin, end) at which it fired. Spikes outside the range are
/// ignored; neurons with no spikes in range are excluded and reported.
ReceptiveFieldResult receptive_centers(std::span<const SpikeRecord> neuron_spikes,
                                       const Trajectory& trajectory,
                                       const PhaseMetric& m, Timestep begin,
                                       Timestep end, std::uint32_t n_neurons);

struct WindowPrediction {
  std::uint32_t window = 0;
  bool valid = false;
  PhaseVec value{};
};

/// Spike-count-weighted mean of receptive centers per window of
/// `window_len` steps over [begin, end); a trailing partial window is
/// dropped. Windows in which no neuron with a center fired are invalid.
std::vector<WindowPrediction> predict_positions(
    std::span<const SpikeRecord> neuron_spikes,
    const std::vector<ReceptiveCenter>& centers, Timestep begin, Timestep end,
    Timestep window_len = 40);

struct NmsdResult {
  double value = 0.0;
  double coverage = 0.0;  ///< fraction of windows with a prediction
  std::uint32_t windows_used = 0;
  std::uint32_t windows_total = 0;
};

/// Mean squared scaled distance between predictions and per-window mean true
/// positions, normalized by the mean squared distance of those true
/// positions to the full-run centroid. Both means run over the predicted
/// windows only. 1.0 is the always-centroid baseline; 0 is perfect.
/// Throws DegenerateRun when no window has a prediction.
NmsdResult normalized_msd(const std::vector<WindowPrediction>& predictions,
                          const Trajectory& trajectory, const PhaseMetric& m,
                          Timestep test_begin, Timestep window_len,
                          const PhaseVec& centroid);

struct PairScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClusterRecognitionReport {
  struct Match {
    std::uint32_t neuron = 0;
    std::uint32_t cluster = 0;
    double f1 = 0.0;
  };

  std::vector<std::vector<PairScore>> scores;  ///< [neuron][cluster]
  std::vector<Match> matching;                 ///< greedy one-to-one, f1 > 0
  double mean_matched_f1 = 0.0;                ///< over all clusters, unmatched = 0
  std::vector<std::uint32_t> unrecognized_clusters;  ///< no neuron with f1 > 0 left
  std::vector<std::uint32_t> contested_clusters;   ///< >= 2 neurons above threshold
  std::vector<std::uint32_t> ambiguous_neurons;    ///< above threshold for >= 2 clusters
  double high_f1_threshold = 0.5;
};

/// Scores every (neuron, cluster) pair on [begin, end): recall is the
/// fraction of the cluster's activation intervals containing at least one
/// spike of the neuron, precision the fraction of the neuron's spikes that
/// fall inside the cluster's activity. Only intervals fully inside the range
/// count. The greedy matching assigns pairs by descending f1 (ties by
/// cluster then neuron id), one neuron per cluster.
ClusterRecognitionReport cluster_recognition_report(
    std::span<const SpikeRecord> neuron_spikes, const GroundTruthLog& truth,
    Timestep begin, Timestep end, std::uint32_t n_neurons,
    double high_f1_threshold = 0.5);

}  // namespace scobul
