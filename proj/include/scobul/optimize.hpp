#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace scobul {

/// One searched hyperparameter. Log scale interpolates exponentially and
/// requires 0 < low < high.
struct SearchEntry {
  enum class Scale : std::uint8_t { Linear, Log };

  std::string name;  ///< configuration key the decoded value binds to
  double low = 0.0;
  double high = 1.0;
  Scale scale = Scale::Linear;
};

struct SearchSpace {
  std::vector<SearchEntry> entries;

  void validate() const;  ///< throws std::invalid_argument
};

/// Scaled coordinates: one gene in [0, 1] per search entry.
using Genome = std::vector<double>;

double decode_gene(const SearchEntry& entry, double gene01);

struct GaConfig {
  std::uint32_t population = 20;
  double mutation_prob = 0.5;   ///< per offspring: redraw one random gene
  double elitism_frac = 0.1;    ///< top fraction copied unchanged
  std::uint32_t seeds_per_fitness = 3;  ///< consumed by the fitness builder
  std::uint32_t max_generations = 0;    ///< 0 = until no improvement
  std::uint32_t parallelism = 0;        ///< 0 = hardware concurrency
  std::uint64_t seed = 0;

  void validate() const;
};

struct GenerationStats {
  std::uint32_t generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double worst = 0.0;
};

struct GaResult {
  Genome best_genome;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;  ///< one row per evaluated generation
  std::uint64_t evaluations = 0;
  std::uint64_t degenerate_runs = 0;
};

/// Lower is better. nullopt marks a degenerate run; the driver substitutes a
/// penalty of (worst finite fitness seen so far + 1), assigned during the
/// in-genome-order reduction so that concurrent evaluation yields results
/// identical to sequential evaluation.
using FitnessFn = std::function<std::optional<double>(const Genome&)>;

/// Minimal generational GA: uniform-random start, elites copied unchanged,
/// offspring from size-2 tournaments and uniform crossover, mutation redraws
/// one uniformly chosen gene. Stops when a generation's best fails to
/// improve on the previous generation's best (elitism makes the best-so-far
/// sequence non-increasing), or at the generation cap. Deterministic given
/// (space, config, fitness).
GaResult ga_run(const SearchSpace& space, const GaConfig& config,
                const FitnessFn& fitness);

}  // namespace scobul
