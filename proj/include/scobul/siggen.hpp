#pragma once

#include <cstdint>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/rng.hpp"

namespace scobul {

/// One correlated input-node group: while active, every node in `nodes`
/// gains `extra_prob` on top of the background spike probability.
struct ClusterSpec {
  std::vector<std::uint32_t> nodes;
  double activation_prob = 0.0;  ///< per-step Bernoulli while inactive
  Timestep active_len = 1;
  double extra_prob = 0.0;
};

struct ClusterSignalSpec {
  std::uint32_t n_nodes = 0;
  double background_prob = 0.0;  ///< per node per step
  std::vector<ClusterSpec> clusters;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Half-open activation interval [begin, end).
struct ActivationInterval {
  Timestep begin = 0;
  Timestep end = 0;
};

struct GroundTruthLog {
  std::vector<std::vector<ActivationInterval>> intervals;  ///< per cluster

  std::size_t activation_count(std::size_t cluster) const {
    return intervals[cluster].size();
  }
};

struct ClusterSignal {
  EventStream events;
  GroundTruthLog truth;
};

/// Draws the background-plus-clusters signal. Per step, every inactive
/// cluster may switch on for its configured length; a node covered by k
/// active clusters spikes with min(1, background + sum of their extras).
/// A cluster whose interval ended is eligible again on the next step.
/// Intervals running past `duration` are clipped in the ground truth.
ClusterSignal gen_cluster_signal(const ClusterSignalSpec& spec, Timestep duration);

/// Light-spot state: position in pixels, velocity in pixels per step.
struct ScenePhasePoint {
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

using Trajectory = std::vector<ScenePhasePoint>;

struct SpotSceneConfig {
  double spot_radius = 2.0;  ///< Gaussian profile radius, pixels
  double speed_min = 0.03;   ///< pixels per step, > 0
  double speed_max = 0.1;

  void validate() const;
};

/// A Gaussian-profile light spot crossing the field along straight segments.
/// Each segment enters on one border, exits on another; on exit a fresh
/// entry point, direction and speed are drawn. Brightness is in [0, 1].
class LightSpotScene {
 public:
  LightSpotScene(std::uint32_t width, std::uint32_t height,
                 const SpotSceneConfig& config, std::uint64_t seed);

  ScenePhasePoint state() const { return state_; }

  /// Writes the current frame (row-major, width*height) and advances 1 step.
  void render_and_advance(std::vector<float>& frame);

 private:
  void new_segment();

  std::uint32_t width_, height_;
  SpotSceneConfig config_;
  Rng rng_;
  ScenePhasePoint state_;
  double remaining_ = 0.0;  ///< steps left in the current segment
};

struct DvsConfig {
  std::uint32_t width = 20;
  std::uint32_t height = 20;
  double brightness_rate_scale = 300.0;  ///< Hz per unit of brightness
  double change_threshold = 0.05;        ///< brightness units
  std::uint64_t seed = 0;
};

/// Emulated event camera: 3 channels per pixel.
///   channel 3*p + 0  brightness: spikes with prob min(1, scale * B * 1ms)
///   channel 3*p + 1  ON:  signed per-pixel accumulator of brightness change
///                         crossed +threshold (threshold then subtracted)
///   channel 3*p + 2  OFF: the accumulator crossed -threshold
/// At most one ON or OFF event per pixel per step; the residual carries over.
/// The first frame only initializes the change reference.
class DvsEmulator {
 public:
  explicit DvsEmulator(const DvsConfig& config);

  std::uint32_t n_channels() const { return 3 * config_.width * config_.height; }

  /// Converts the frame at step t into events, appended to `out` sorted by
  /// channel id. Frames must arrive with consecutive t.
  void feed_frame(const std::vector<float>& frame, Timestep t,
                  std::vector<SpikeRecord>& out);

 private:
  DvsConfig config_;
  Rng rng_;
  bool primed_ = false;
  std::vector<float> prev_;
  std::vector<float> accum_;
};

struct DvsSignal {
  EventStream events;
  Trajectory trajectory;
};

/// Renders the scene for `duration` steps and converts it to events.
/// The phase point logged at step t is the state the frame at t was
/// rendered from, so events and trajectory are aligned.
DvsSignal make_dvs_signal(const DvsConfig& dvs, const SpotSceneConfig& scene,
                          Timestep duration, std::uint64_t scene_seed);

struct CalibrationResult {
  double brightness_rate_scale = 0.0;
  double change_threshold = 0.0;
  double mean_rate_hz = 0.0;  ///< over all 3*W*H channels on the sample
};

/// Fits the two conversion parameters on a scene sample so the mean rate
/// over all channels lands on `target_hz`: the brightness scale is bisected
/// against the brightness channels' expected rate and the change threshold
/// against the ON/OFF channels' rate (both monotone). Requires a sample of
/// at least 10000 steps; throws std::invalid_argument on a degenerate
/// target and std::runtime_error when the target is unreachable.
CalibrationResult calibrate_thresholds(std::uint32_t width, std::uint32_t height,
                                       const SpotSceneConfig& scene,
                                       Timestep sample_steps, double target_hz,
                                       std::uint64_t scene_seed);

}  // namespace scobul
