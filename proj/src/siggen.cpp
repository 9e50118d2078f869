#include "scobul/siggen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scobul {

void ClusterSignalSpec::validate() const {
  if (n_nodes == 0) throw std::invalid_argument("cluster signal: n_nodes must be > 0");
  if (background_prob < 0.0 || background_prob > 1.0)
    throw std::invalid_argument("cluster signal: background_prob must be in [0, 1]");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    const std::string tag = "cluster " + std::to_string(i);
    if (c.active_len < 1)
      throw std::invalid_argument("cluster signal: " + tag + " active_len must be >= 1");
    if (c.extra_prob < 0.0 || background_prob + c.extra_prob > 1.0)
      throw std::invalid_argument("cluster signal: " + tag +
                                  " violates background + extra <= 1");
    if (c.activation_prob < 0.0 || c.activation_prob > 1.0)
      throw std::invalid_argument("cluster signal: " + tag + " bad activation_prob");
    for (auto node : c.nodes)
      if (node >= n_nodes)
        throw std::invalid_argument("cluster signal: " + tag + " node out of range");
  }
}

ClusterSignal gen_cluster_signal(const ClusterSignalSpec& spec, Timestep duration) {
  spec.validate();
  if (duration < 0) throw std::invalid_argument("cluster signal: negative duration");

  ClusterSignal out;
  out.events.n_channels = spec.n_nodes;
  out.events.duration = duration;
  out.truth.intervals.resize(spec.clusters.size());

  Rng rng(spec.seed);
  std::vector<Timestep> remaining(spec.clusters.size(), 0);
  std::vector<double> extra(spec.n_nodes, 0.0);

  for (Timestep t = 0; t < duration; ++t) {
    for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
      if (remaining[i] > 0) continue;
      const auto& c = spec.clusters[i];
      if (!rng.bernoulli(c.activation_prob)) continue;
      remaining[i] = c.active_len;
      out.truth.intervals[i].push_back({t, std::min(t + c.active_len, duration)});
      for (auto node : c.nodes) extra[node] += c.extra_prob;
    }
    for (std::uint32_t node = 0; node < spec.n_nodes; ++node) {
      const double p = std::min(1.0, spec.background_prob + extra[node]);
      if (rng.bernoulli(p)) out.events.events.push_back({t, node});
    }
    for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
      if (remaining[i] == 0) continue;
      if (--remaining[i] == 0)
        for (auto node : spec.clusters[i].nodes) extra[node] -= spec.clusters[i].extra_prob;
    }
  }
  return out;
}

void SpotSceneConfig::validate() const {
  if (!(spot_radius > 0.0)) throw std::invalid_argument("scene: spot_radius must be > 0");
  if (!(speed_min > 0.0))
    throw std::invalid_argument("scene: speed_min must be > 0 (a stuck spot never crosses)");
  if (!(speed_max >= speed_min))
    throw std::invalid_argument("scene: speed range is inverted");
}

LightSpotScene::LightSpotScene(std::uint32_t width, std::uint32_t height,
                               const SpotSceneConfig& config, std::uint64_t seed)
    : width_(width), height_(height), config_(config), rng_(seed) {
  config_.validate();
  if (!(config.spot_radius < std::min(width, height) / 2.0))
    throw std::invalid_argument("scene: spot_radius must be < min(width, height)/2");
  new_segment();
}

void LightSpotScene::new_segment() {
  const double w = static_cast<double>(width_);
  const double h = static_cast<double>(height_);
  auto point_on_edge = [&](int edge) -> std::pair<double, double> {
    switch (edge) {
      case 0: return {0.0, rng_.uniform(0.0, h)};      // left
      case 1: return {w - 1e-9, rng_.uniform(0.0, h)};  // right
      case 2: return {rng_.uniform(0.0, w), 0.0};      // top
      default: return {rng_.uniform(0.0, w), h - 1e-9};  // bottom
    }
  };
  // keep segments at least half a field long so crossings are not degenerate
  const double min_len = std::min(w, h) / 2.0;
  double ex = 0, ey = 0, gx = 0, gy = 0, len = 0;
  do {
    const int entry_edge = static_cast<int>(rng_.below(4));
    int exit_edge = static_cast<int>(rng_.below(3));
    if (exit_edge >= entry_edge) ++exit_edge;
    std::tie(ex, ey) = point_on_edge(entry_edge);
    std::tie(gx, gy) = point_on_edge(exit_edge);
    len = std::hypot(gx - ex, gy - ey);
  } while (len < min_len);

  const double speed = rng_.uniform(config_.speed_min, config_.speed_max);
  state_.x = ex;
  state_.y = ey;
  state_.vx = speed * (gx - ex) / len;
  state_.vy = speed * (gy - ey) / len;
  remaining_ = len / speed;
}

void LightSpotScene::render_and_advance(std::vector<float>& frame) {
  frame.resize(std::size_t(width_) * height_);
  const double inv = 1.0 / (2.0 * config_.spot_radius * config_.spot_radius);
  // separable Gaussian profile
  static thread_local std::vector<double> fx, fy;
  fx.resize(width_);
  fy.resize(height_);
  for (std::uint32_t i = 0; i < width_; ++i) {
    const double d = static_cast<double>(i) - state_.x;
    fx[i] = std::exp(-d * d * inv);
  }
  for (std::uint32_t j = 0; j < height_; ++j) {
    const double d = static_cast<double>(j) - state_.y;
    fy[j] = std::exp(-d * d * inv);
  }
  for (std::uint32_t j = 0; j < height_; ++j)
    for (std::uint32_t i = 0; i < width_; ++i)
      frame[std::size_t(j) * width_ + i] = static_cast<float>(fx[i] * fy[j]);

  state_.x += state_.vx;
  state_.y += state_.vy;
  remaining_ -= 1.0;
  const bool out = state_.x < 0.0 || state_.x >= width_ || state_.y < 0.0 ||
                   state_.y >= height_;
  if (remaining_ <= 0.0 || out) new_segment();
}

DvsEmulator::DvsEmulator(const DvsConfig& config) : config_(config), rng_(config.seed) {
  if (config.width == 0 || config.height == 0)
    throw std::invalid_argument("dvs: empty field");
  if (!(config.change_threshold > 0.0))
    throw std::invalid_argument("dvs: change_threshold must be > 0");
  if (!(config.brightness_rate_scale >= 0.0))
    throw std::invalid_argument("dvs: brightness_rate_scale must be >= 0");
}

void DvsEmulator::feed_frame(const std::vector<float>& frame, Timestep t,
                             std::vector<SpikeRecord>& out) {
  const std::size_t n_px = std::size_t(config_.width) * config_.height;
  if (frame.size() != n_px) throw std::invalid_argument("dvs: frame size mismatch");
  const double rate_to_prob = config_.brightness_rate_scale * 1e-3;  // 1 step = 1 ms
  const double threshold = config_.change_threshold;

  if (!primed_) {
    prev_ = frame;
    accum_.assign(n_px, 0.0f);
    primed_ = true;
    for (std::size_t p = 0; p < n_px; ++p) {
      const double prob = std::min(1.0, rate_to_prob * frame[p]);
      if (rng_.bernoulli(prob)) out.push_back({t, static_cast<std::uint32_t>(3 * p)});
    }
    return;
  }

  for (std::size_t p = 0; p < n_px; ++p) {
    const double prob = std::min(1.0, rate_to_prob * frame[p]);
    if (rng_.bernoulli(prob)) out.push_back({t, static_cast<std::uint32_t>(3 * p)});
    double acc = accum_[p] + (double(frame[p]) - double(prev_[p]));
    if (acc >= threshold) {
      out.push_back({t, static_cast<std::uint32_t>(3 * p + 1)});
      acc -= threshold;
    } else if (acc <= -threshold) {
      out.push_back({t, static_cast<std::uint32_t>(3 * p + 2)});
      acc += threshold;
    }
    accum_[p] = static_cast<float>(acc);
  }
  prev_ = frame;
}

DvsSignal make_dvs_signal(const DvsConfig& dvs, const SpotSceneConfig& scene,
                          Timestep duration, std::uint64_t scene_seed) {
  DvsSignal out;
  DvsEmulator emu(dvs);
  out.events.n_channels = emu.n_channels();
  out.events.duration = duration;
  out.trajectory.reserve(static_cast<std::size_t>(duration));

  LightSpotScene spot(dvs.width, dvs.height, scene, scene_seed);
  std::vector<float> frame;
  for (Timestep t = 0; t < duration; ++t) {
    out.trajectory.push_back(spot.state());
    spot.render_and_advance(frame);
    emu.feed_frame(frame, t, out.events.events);
  }
  return out;
}

namespace {

/// All frames of a scene sample, rendered once.
std::vector<std::vector<float>> render_sample(std::uint32_t w, std::uint32_t h,
                                              const SpotSceneConfig& scene,
                                              Timestep steps, std::uint64_t seed) {
  LightSpotScene spot(w, h, scene, seed);
  std::vector<std::vector<float>> frames(static_cast<std::size_t>(steps));
  for (auto& f : frames) spot.render_and_advance(f);
  return frames;
}

double expected_brightness_rate(const std::vector<std::vector<float>>& frames,
                                std::size_t n_px, double scale) {
  const double rate_to_prob = scale * 1e-3;
  double expected = 0.0;
  for (const auto& f : frames)
    for (std::size_t p = 0; p < n_px; ++p)
      expected += std::min(1.0, rate_to_prob * f[p]);
  const double seconds = static_cast<double>(frames.size()) * 1e-3;
  return expected / (static_cast<double>(n_px) * seconds);
}

double change_event_rate(const std::vector<std::vector<float>>& frames,
                         std::size_t n_px, double threshold) {
  std::vector<double> acc(n_px, 0.0);
  std::uint64_t count = 0;
  for (std::size_t t = 1; t < frames.size(); ++t) {
    for (std::size_t p = 0; p < n_px; ++p) {
      acc[p] += double(frames[t][p]) - double(frames[t - 1][p]);
      if (acc[p] >= threshold) {
        ++count;
        acc[p] -= threshold;
      } else if (acc[p] <= -threshold) {
        ++count;
        acc[p] += threshold;
      }
    }
  }
  const double seconds = static_cast<double>(frames.size()) * 1e-3;
  return static_cast<double>(count) / (2.0 * static_cast<double>(n_px) * seconds);
}

}  // namespace

CalibrationResult calibrate_thresholds(std::uint32_t width, std::uint32_t height,
                                       const SpotSceneConfig& scene,
                                       Timestep sample_steps, double target_hz,
                                       std::uint64_t scene_seed) {
  if (!(target_hz > 0.0))
    throw std::invalid_argument("calibrate: target rate must be positive");
  if (sample_steps < 10000)
    throw std::invalid_argument("calibrate: sample must cover at least 10000 steps");

  const auto frames = render_sample(width, height, scene, sample_steps, scene_seed);
  const std::size_t n_px = std::size_t(width) * height;

  // brightness channels: expected rate is monotone increasing in the scale
  double lo = 0.0, hi = 1.0;
  while (expected_brightness_rate(frames, n_px, hi) < target_hz) {
    hi *= 2.0;
    if (hi > 1e15)
      throw std::runtime_error(
          "calibrate: brightness target unreachable (max rate " +
          std::to_string(expected_brightness_rate(frames, n_px, 1e15)) + " Hz)");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected_brightness_rate(frames, n_px, mid) < target_hz ? lo : hi) = mid;
  }
  const double scale = 0.5 * (lo + hi);

  // ON/OFF channels: event rate is monotone non-increasing in the threshold
  double t_lo = 1e-9;
  const double max_change_rate = change_event_rate(frames, n_px, t_lo);
  if (max_change_rate < target_hz)
    throw std::runtime_error("calibrate: change target unreachable (max rate " +
                             std::to_string(max_change_rate) +
                             " Hz; is the scene static?)");
  double t_hi = 0.01;
  while (change_event_rate(frames, n_px, t_hi) > target_hz) t_hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    (change_event_rate(frames, n_px, mid) > target_hz ? t_lo : t_hi) = mid;
  }
  const double threshold = 0.5 * (t_lo + t_hi);

  CalibrationResult result;
  result.brightness_rate_scale = scale;
  result.change_threshold = threshold;
  result.mean_rate_hz = (expected_brightness_rate(frames, n_px, scale) +
                         2.0 * change_event_rate(frames, n_px, threshold)) /
                        3.0;
  return result;
}

}  // namespace scobul
