#include "scobul/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "scobul/rng.hpp"

namespace scobul {

namespace {

constexpr double kFallbackPenalty = 1e6;

void parallel_for(std::size_t n, std::uint32_t n_threads,
                  const std::function<void(std::size_t)>& body) {
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  if (n_threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(n_threads, n);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);  // first by index, deterministic
}

struct Individual {
  Genome genome;
  double fitness = 0.0;
  bool evaluated = false;
};

}  // namespace

void SearchSpace::validate() const {
  if (entries.empty()) throw std::invalid_argument("search space: empty");
  for (const auto& e : entries) {
    if (!(e.low < e.high))
      throw std::invalid_argument("search space: '" + e.name + "' needs low < high");
    if (e.scale == SearchEntry::Scale::Log && !(e.low > 0.0))
      throw std::invalid_argument("search space: '" + e.name +
                                  "' log scale needs low > 0");
    for (const auto& other : entries)
      if (&other != &e && other.name == e.name)
        throw std::invalid_argument("search space: duplicate name '" + e.name + "'");
  }
}

double decode_gene(const SearchEntry& entry, double gene01) {
  if (entry.scale == SearchEntry::Scale::Log)
    return std::exp(std::log(entry.low) +
                    gene01 * (std::log(entry.high) - std::log(entry.low)));
  return entry.low + gene01 * (entry.high - entry.low);
}

void GaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("ga: population must be >= 2");
  if (!(elitism_frac > 0.0) || !(elitism_frac < 1.0))
    throw std::invalid_argument("ga: elitism_frac must be in (0, 1)");
  if (static_cast<double>(population) * elitism_frac < 1.0)
    throw std::invalid_argument("ga: population * elitism_frac must be >= 1");
  if (mutation_prob < 0.0 || mutation_prob > 1.0)
    throw std::invalid_argument("ga: mutation_prob must be in [0, 1]");
  if (seeds_per_fitness < 1)
    throw std::invalid_argument("ga: seeds_per_fitness must be >= 1");
}

GaResult ga_run(const SearchSpace& space, const GaConfig& config,
                const FitnessFn& fitness) {
  space.validate();
  config.validate();

  const std::size_t n_genes = space.entries.size();
  const std::size_t pop_size = config.population;
  const std::size_t n_elite = std::max<std::size_t>(
      1, static_cast<std::size_t>(static_cast<double>(pop_size) * config.elitism_frac));

  Rng rng(seed_stream(config.seed, "ga"));
  GaResult result;
  double worst_finite = kFallbackPenalty - 1.0;
  bool any_finite = false;

  // Evaluates the not-yet-evaluated individuals concurrently, then reduces
  // in genome order so penalties are assigned deterministically.
  auto evaluate = [&](std::vector<Individual>& pop) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (!pop[i].evaluated) todo.push_back(i);
    std::vector<std::optional<double>> raw(todo.size());
    parallel_for(todo.size(), config.parallelism,
                 [&](std::size_t k) { raw[k] = fitness(pop[todo[k]].genome); });
    for (std::size_t k = 0; k < todo.size(); ++k) {
      auto& ind = pop[todo[k]];
      ++result.evaluations;
      if (raw[k].has_value()) {
        ind.fitness = *raw[k];
        any_finite = true;
        worst_finite = std::max(worst_finite, ind.fitness);
      } else {
        ++result.degenerate_runs;
        ind.fitness = (any_finite ? worst_finite : kFallbackPenalty) + 1.0;
      }
      ind.evaluated = true;
    }
  };

  auto by_fitness = [](const Individual& a, const Individual& b) {
    return a.fitness < b.fitness;
  };

  std::vector<Individual> pop(pop_size);
  for (auto& ind : pop) {
    ind.genome.resize(n_genes);
    for (auto& g : ind.genome) g = rng.uniform01();
  }
  evaluate(pop);
  std::stable_sort(pop.begin(), pop.end(), by_fitness);

  auto record = [&](std::uint32_t gen, const std::vector<Individual>& sorted) {
    GenerationStats row;
    row.generation = gen;
    row.best = sorted.front().fitness;
    row.worst = sorted.back().fitness;
    double sum = 0.0;
    for (const auto& ind : sorted) sum += ind.fitness;
    row.mean = sum / static_cast<double>(sorted.size());
    result.history.push_back(row);
  };
  record(0, pop);

  for (std::uint32_t gen = 1;; ++gen) {
    if (config.max_generations != 0 && gen >= config.max_generations) break;

    std::vector<Individual> next(pop.begin(), pop.begin() + n_elite);
    while (next.size() < pop_size) {
      auto tournament = [&]() -> const Individual& {
        const auto& a = pop[rng.index(pop_size)];
        const auto& b = pop[rng.index(pop_size)];
        return a.fitness <= b.fitness ? a : b;
      };
      const Individual& pa = tournament();
      const Individual& pb = tournament();
      Individual child;
      child.genome.resize(n_genes);
      for (std::size_t g = 0; g < n_genes; ++g)
        child.genome[g] = rng.bernoulli(0.5) ? pa.genome[g] : pb.genome[g];
      if (rng.bernoulli(config.mutation_prob))
        child.genome[rng.index(n_genes)] = rng.uniform01();
      next.push_back(std::move(child));
    }

    evaluate(next);
    std::stable_sort(next.begin(), next.end(), by_fitness);
    const double prev_best = pop.front().fitness;
    pop = std::move(next);
    record(gen, pop);
    if (!(pop.front().fitness < prev_best)) break;  // no improvement
  }

  result.best_genome = pop.front().genome;
  result.best_fitness = pop.front().fitness;
  return result;
}

}  // namespace scobul
