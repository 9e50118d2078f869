#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scobul/core.hpp"
#include "scobul/errors.hpp"
#include "scobul/rng.hpp"

using namespace scobul;

TEST_CASE("resource_to_weight hand-evaluated points") {
  // negative resource pins the weight at w_min
  CHECK(resource_to_weight(-5.0, 0.0, 1.0) == 0.0);
  CHECK(resource_to_weight(0.0, 0.0, 1.0) == 0.0);
  // direct evaluation: 1 * 1 / (1 + 1)
  CHECK(resource_to_weight(1.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // 2 * 2 / (2 + 2)
  CHECK(resource_to_weight(2.0, 0.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  // nonzero floor
  CHECK(resource_to_weight(3.0, 0.5, 1.5) ==
        doctest::Approx(0.5 + 1.0 * 3.0 / (1.0 + 3.0)).epsilon(1e-12));
}

TEST_CASE("resource_to_weight approaches but never attains w_max") {
  double prev = 0.0;
  for (double w = 1.0; w <= 1e12; w *= 10.0) {
    const double v = resource_to_weight(w, 0.0, 1.0);
    CHECK(v < 1.0);
    CHECK(v >= prev);
    prev = v;
  }
  // even past double saturation the strict bound holds
  CHECK(resource_to_weight(1e300, 0.0, 1.0) < 1.0);
}

TEST_CASE("resource_to_weight is monotone and floored") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double w_max = rng.uniform(0.1, 10.0);
    const double a = rng.uniform(-5.0, 20.0);
    const double b = rng.uniform(-5.0, 20.0);
    const double lo = std::min(a, b), hi = std::max(a, b);
    CHECK(resource_to_weight(lo, 0.0, w_max) <= resource_to_weight(hi, 0.0, w_max));
    if (lo <= 0.0) CHECK(resource_to_weight(lo, 0.0, w_max) == 0.0);
  }
  // strictly increasing on the positive side
  for (int i = 0; i < 500; ++i) {
    const double w1 = rng.uniform(0.01, 50.0);
    const double w2 = w1 + rng.uniform(0.05, 5.0);
    CHECK(resource_to_weight(w1, 0.0, 1.0) < resource_to_weight(w2, 0.0, 1.0));
  }
}

namespace {

NeuronState bare_neuron(double threshold, double leak, Timestep refractory = 0) {
  NeuronState n;
  n.threshold = threshold;
  n.leak_factor = leak;
  n.refractory_len = refractory;
  return n;
}

}  // namespace

TEST_CASE("integrate_step sums simultaneous deltas and resets on fire") {
  auto n = bare_neuron(1.0, std::exp(-1.0 / 20.0));
  CHECK(integrate_step(n, 0.4 + 0.7, 0));
  CHECK(n.potential == 0.0);
  CHECK(n.last_fire == 0);
  CHECK(n.silence_steps == 0);
}

TEST_CASE("integrate_step zero input is a fixed point") {
  auto n = bare_neuron(1.0, 0.9);
  for (Timestep t = 0; t < 10; ++t) CHECK_FALSE(integrate_step(n, 0.0, t));
  CHECK(n.potential == 0.0);
  CHECK(n.silence_steps == 10);
}

TEST_CASE("integrate_step inhibitory delta lowers the potential") {
  const double leak = std::exp(-1.0 / 20.0);
  auto n = bare_neuron(1.0, leak);
  n.potential = 0.5;
  CHECK_FALSE(integrate_step(n, -0.8, 3));
  CHECK(n.potential == doctest::Approx(leak * 0.5 - 0.8));
}

TEST_CASE("a fired neuron stays silent through its refractory window") {
  auto n = bare_neuron(0.5, 1.0, 4);
  CHECK(integrate_step(n, 1.0, 0));
  for (Timestep t = 1; t <= 4; ++t) {
    CHECK_FALSE(integrate_step(n, 100.0, t));  // ignored, not integrated
    CHECK(n.potential == 0.0);
  }
  CHECK(integrate_step(n, 1.0, 5));  // armed again
}

TEST_CASE("saturation bound: threshold above the leak-summed input ceiling") {
  // n inputs of at most w_max per step cannot push V past n*w_max/(1-leak)
  const double leak = 0.95;
  const int n_inputs = 10;
  const double w_max = 1.0;
  const double ceiling = n_inputs * w_max / (1.0 - leak);
  auto n = bare_neuron(ceiling * 1.0001, leak);
  for (Timestep t = 0; t < 20000; ++t)
    CHECK_FALSE(integrate_step(n, n_inputs * w_max, t));
  CHECK(n.potential < ceiling);
}

TEST_CASE("IndexedEvents slices per step and validates ordering") {
  EventStream s;
  s.n_channels = 4;
  s.duration = 5;
  s.events = {{0, 1}, {0, 3}, {2, 0}, {2, 2}, {4, 1}};
  IndexedEvents idx(s);
  CHECK(idx.at(0).size() == 2);
  CHECK(idx.at(1).empty());
  CHECK(idx.at(2).size() == 2);
  CHECK(idx.at(2)[0] == SpikeRecord{2, 0});
  CHECK(idx.at(4).size() == 1);

  EventStream bad = s;
  bad.events[1] = {0, 1};  // duplicate (t, source)
  CHECK_THROWS_AS(IndexedEvents{bad}, FormatError);
  bad = s;
  bad.events[0].source = 9;
  CHECK_THROWS_AS(IndexedEvents{bad}, FormatError);
  bad = s;
  bad.events[0].t = 7;
  CHECK_THROWS_AS(IndexedEvents{bad}, FormatError);
}

TEST_CASE("plasticity params validation") {
  PlasticityParams p;
  p.w_max = 1.0;
  p.tau_p = 10;
  p.d = 0.1;
  p.d_plus = 0.1;
  p.d_minus = 0.1;
  CHECK_NOTHROW(p.validate());
  p.tau_p = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.tau_p = 10;
  p.d = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.d = 0.1;
  p.w_max = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
