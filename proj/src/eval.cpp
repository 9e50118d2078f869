#include "scobul/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "scobul/errors.hpp"

namespace scobul {

namespace {

PhaseVec raw_point(const ScenePhasePoint& p) { return {p.x, p.y, p.vx, p.vy}; }

double sq_dist(const PhaseVec& a, const PhaseVec& b) {
  double s = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace

PhaseVec scaled_point(const ScenePhasePoint& p, const PhaseMetric& m) {
  const PhaseVec raw = raw_point(p);
  return {raw[0] * m.scale[0], raw[1] * m.scale[1], raw[2] * m.scale[2],
          raw[3] * m.scale[3]};
}

PhaseMetric fit_phase_metric(const Trajectory& trajectory) {
  if (trajectory.empty())
    throw std::invalid_argument("phase metric: empty trajectory");
  const double n = static_cast<double>(trajectory.size());
  PhaseVec mean{}, sq{};
  for (const auto& p : trajectory) {
    const PhaseVec v = raw_point(p);
    for (int k = 0; k < 4; ++k) mean[k] += v[k];
  }
  for (int k = 0; k < 4; ++k) mean[k] /= n;
  for (const auto& p : trajectory) {
    const PhaseVec v = raw_point(p);
    for (int k = 0; k < 4; ++k) sq[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
  }
  PhaseMetric m;
  for (int k = 0; k < 4; ++k) {
    const double sigma = std::sqrt(sq[k] / n);
    if (!(sigma > 0.0))
      throw std::invalid_argument("phase metric: coordinate " + std::to_string(k) +
                                  " has zero variance (degenerate scene)");
    m.scale[k] = 1.0 / sigma;
  }
  return m;
}

PhaseVec trajectory_centroid(const Trajectory& trajectory, const PhaseMetric& m) {
  PhaseVec c{};
  for (const auto& p : trajectory) {
    const PhaseVec v = scaled_point(p, m);
    for (int k = 0; k < 4; ++k) c[k] += v[k];
  }
  for (int k = 0; k < 4; ++k) c[k] /= static_cast<double>(trajectory.size());
  return c;
}

ReceptiveFieldResult receptive_centers(std::span<const SpikeRecord> neuron_spikes,
                                       const Trajectory& trajectory,
                                       const PhaseMetric& m, Timestep begin,
                                       Timestep end, std::uint32_t n_neurons) {
  if (end > static_cast<Timestep>(trajectory.size()))
    throw std::invalid_argument("receptive centers: range exceeds the trajectory");
  std::vector<PhaseVec> sums(n_neurons, PhaseVec{});
  std::vector<std::uint64_t> counts(n_neurons, 0);
  for (const auto& ev : neuron_spikes) {
    if (ev.t < begin || ev.t >= end || ev.source >= n_neurons) continue;
    const PhaseVec v = scaled_point(trajectory[static_cast<std::size_t>(ev.t)], m);
    auto& s = sums[ev.source];
    for (int k = 0; k < 4; ++k) s[k] += v[k];
    ++counts[ev.source];
  }
  ReceptiveFieldResult out;
  for (std::uint32_t j = 0; j < n_neurons; ++j) {
    if (counts[j] == 0) {
      out.silent_neurons.push_back(j);
      continue;
    }
    ReceptiveCenter c;
    c.neuron_id = j;
    c.support = counts[j];
    for (int k = 0; k < 4; ++k) c.center[k] = sums[j][k] / static_cast<double>(counts[j]);
    out.centers.push_back(c);
  }
  return out;
}

std::vector<WindowPrediction> predict_positions(
    std::span<const SpikeRecord> neuron_spikes,
    const std::vector<ReceptiveCenter>& centers, Timestep begin, Timestep end,
    Timestep window_len) {
  if (window_len < 1) throw std::invalid_argument("predict: window_len must be >= 1");
  const auto n_windows = static_cast<std::size_t>((end - begin) / window_len);

  std::vector<std::int64_t> center_of_neuron;
  std::uint32_t max_id = 0;
  for (const auto& c : centers) max_id = std::max(max_id, c.neuron_id);
  center_of_neuron.assign(max_id + 1, -1);
  for (std::size_t i = 0; i < centers.size(); ++i)
    center_of_neuron[centers[i].neuron_id] = static_cast<std::int64_t>(i);

  std::vector<std::vector<std::uint64_t>> spike_counts(
      n_windows, std::vector<std::uint64_t>(centers.size(), 0));
  for (const auto& ev : neuron_spikes) {
    if (ev.t < begin || ev.t >= begin + static_cast<Timestep>(n_windows) * window_len)
      continue;
    if (ev.source >= center_of_neuron.size()) continue;
    const auto ci = center_of_neuron[ev.source];
    if (ci < 0) continue;
    const auto w = static_cast<std::size_t>((ev.t - begin) / window_len);
    ++spike_counts[w][static_cast<std::size_t>(ci)];
  }

  std::vector<WindowPrediction> out(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    out[w].window = static_cast<std::uint32_t>(w);
    std::uint64_t total = 0;
    PhaseVec acc{};
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const auto s = spike_counts[w][i];
      if (s == 0) continue;
      total += s;
      for (int k = 0; k < 4; ++k)
        acc[k] += static_cast<double>(s) * centers[i].center[k];
    }
    if (total == 0) continue;
    out[w].valid = true;
    for (int k = 0; k < 4; ++k)
      out[w].value[k] = acc[k] / static_cast<double>(total);
  }
  return out;
}

NmsdResult normalized_msd(const std::vector<WindowPrediction>& predictions,
                          const Trajectory& trajectory, const PhaseMetric& m,
                          Timestep test_begin, Timestep window_len,
                          const PhaseVec& centroid) {
  NmsdResult out;
  out.windows_total = static_cast<std::uint32_t>(predictions.size());
  double num = 0.0, den = 0.0;
  for (const auto& pred : predictions) {
    if (!pred.valid) continue;
    const Timestep w_begin = test_begin + static_cast<Timestep>(pred.window) * window_len;
    PhaseVec truth{};
    for (Timestep t = w_begin; t < w_begin + window_len; ++t) {
      const PhaseVec v = scaled_point(trajectory[static_cast<std::size_t>(t)], m);
      for (int k = 0; k < 4; ++k) truth[k] += v[k];
    }
    for (int k = 0; k < 4; ++k) truth[k] /= static_cast<double>(window_len);
    num += sq_dist(pred.value, truth);
    den += sq_dist(truth, centroid);
    ++out.windows_used;
  }
  if (out.windows_used == 0)
    throw DegenerateRun("normalized msd: no window has a prediction");
  if (!(den > 0.0))
    throw DegenerateRun("normalized msd: degenerate truth (zero spread)");
  out.value = num / den;
  out.coverage = out.windows_total == 0
                     ? 0.0
                     : static_cast<double>(out.windows_used) / out.windows_total;
  return out;
}

ClusterRecognitionReport cluster_recognition_report(
    std::span<const SpikeRecord> neuron_spikes, const GroundTruthLog& truth,
    Timestep begin, Timestep end, std::uint32_t n_neurons,
    double high_f1_threshold) {
  const auto n_clusters = truth.intervals.size();
  const auto span_len = static_cast<std::size_t>(end - begin);

  // per-cluster activity timeline over the scored range
  std::vector<std::vector<ActivationInterval>> intervals(n_clusters);
  std::vector<std::vector<std::uint8_t>> active(n_clusters);
  for (std::size_t c = 0; c < n_clusters; ++c) {
    active[c].assign(span_len, 0);
    for (const auto& iv : truth.intervals[c]) {
      if (iv.begin < begin || iv.end > end) continue;  // only fully inside
      intervals[c].push_back(iv);
      for (Timestep t = iv.begin; t < iv.end; ++t)
        active[c][static_cast<std::size_t>(t - begin)] = 1;
    }
  }

  // hit counts per (neuron, cluster): spikes inside activity, intervals hit
  std::vector<std::uint64_t> spikes_total(n_neurons, 0);
  std::vector<std::vector<std::uint64_t>> spikes_in(
      n_neurons, std::vector<std::uint64_t>(n_clusters, 0));
  std::vector<std::vector<std::vector<std::uint8_t>>> interval_hit(n_neurons);
  for (std::uint32_t j = 0; j < n_neurons; ++j) {
    interval_hit[j].resize(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c)
      interval_hit[j][c].assign(intervals[c].size(), 0);
  }
  for (const auto& ev : neuron_spikes) {
    if (ev.t < begin || ev.t >= end || ev.source >= n_neurons) continue;
    ++spikes_total[ev.source];
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (!active[c][static_cast<std::size_t>(ev.t - begin)]) continue;
      ++spikes_in[ev.source][c];
      auto& ivs = intervals[c];
      const auto it = std::upper_bound(
          ivs.begin(), ivs.end(), ev.t,
          [](Timestep t, const ActivationInterval& iv) { return t < iv.begin; });
      const auto idx = static_cast<std::size_t>(it - ivs.begin()) - 1;
      interval_hit[ev.source][c][idx] = 1;
    }
  }

  ClusterRecognitionReport report;
  report.high_f1_threshold = high_f1_threshold;
  report.scores.assign(n_neurons, std::vector<PairScore>(n_clusters));
  for (std::uint32_t j = 0; j < n_neurons; ++j) {
    for (std::size_t c = 0; c < n_clusters; ++c) {
      auto& s = report.scores[j][c];
      std::uint64_t hit = 0;
      for (auto h : interval_hit[j][c]) hit += h;
      s.recall = intervals[c].empty()
                     ? 0.0
                     : static_cast<double>(hit) / static_cast<double>(intervals[c].size());
      s.precision = spikes_total[j] == 0
                        ? 0.0
                        : static_cast<double>(spikes_in[j][c]) /
                              static_cast<double>(spikes_total[j]);
      s.f1 = (s.precision + s.recall) > 0.0
                 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                 : 0.0;
    }
  }

  // greedy one-to-one matching by descending f1
  struct Pair {
    double f1;
    std::uint32_t cluster, neuron;
  };
  std::vector<Pair> pairs;
  for (std::uint32_t j = 0; j < n_neurons; ++j)
    for (std::size_t c = 0; c < n_clusters; ++c)
      if (report.scores[j][c].f1 > 0.0)
        pairs.push_back({report.scores[j][c].f1, static_cast<std::uint32_t>(c), j});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.f1 != b.f1) return a.f1 > b.f1;
    if (a.cluster != b.cluster) return a.cluster < b.cluster;
    return a.neuron < b.neuron;
  });
  std::vector<std::uint8_t> cluster_taken(n_clusters, 0), neuron_taken(n_neurons, 0);
  for (const auto& p : pairs) {
    if (cluster_taken[p.cluster] || neuron_taken[p.neuron]) continue;
    cluster_taken[p.cluster] = 1;
    neuron_taken[p.neuron] = 1;
    report.matching.push_back({p.neuron, p.cluster, p.f1});
  }
  double f1_sum = 0.0;
  for (const auto& match : report.matching) f1_sum += match.f1;
  report.mean_matched_f1 =
      n_clusters == 0 ? 0.0 : f1_sum / static_cast<double>(n_clusters);

  for (std::uint32_t c = 0; c < n_clusters; ++c)
    if (!cluster_taken[c]) report.unrecognized_clusters.push_back(c);
  for (std::uint32_t c = 0; c < n_clusters; ++c) {
    int high = 0;
    for (std::uint32_t j = 0; j < n_neurons; ++j)
      if (report.scores[j][c].f1 >= high_f1_threshold) ++high;
    if (high >= 2) report.contested_clusters.push_back(c);
  }
  for (std::uint32_t j = 0; j < n_neurons; ++j) {
    int high = 0;
    for (std::size_t c = 0; c < n_clusters; ++c)
      if (report.scores[j][c].f1 >= high_f1_threshold) ++high;
    if (high >= 2) report.ambiguous_neurons.push_back(j);
  }
  return report;
}

}  // namespace scobul
