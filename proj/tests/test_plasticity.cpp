#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scobul/core.hpp"
#include "scobul/plasticity.hpp"
#include "scobul/rng.hpp"

using namespace scobul;

namespace {

NeuronState make_neuron(const std::vector<double>& resources, int n_inhibitory = 0) {
  NeuronState n;
  n.n_plastic = resources.size();
  for (std::size_t k = 0; k < resources.size(); ++k) {
    SynapseState s;
    s.source = static_cast<std::uint32_t>(k);
    s.kind = SynapseKind::ExcitatoryPlastic;
    s.resource = resources[k];
    s.weight = resource_to_weight(s.resource, 0.0, 1.0);
    n.synapses.push_back(s);
    n.initial_resource_total += resources[k];
  }
  for (int i = 0; i < n_inhibitory; ++i) {
    SynapseState s;
    s.source = static_cast<std::uint32_t>(1000 + i);
    s.kind = SynapseKind::InhibitoryFixed;
    s.weight = -5.0;
    n.synapses.push_back(s);
  }
  return n;
}

PlasticityParams params(Timestep tau_p, double d, double d_plus, double d_minus) {
  PlasticityParams p;
  p.w_max = 1.0;
  p.tau_p = tau_p;
  p.d = d;
  p.d_plus = d_plus;
  p.d_minus = d_minus;
  return p;
}

struct TraceLog : TraceSink {
  std::vector<TraceEvent> events;
  void record(const TraceEvent& e) override { events.push_back(e); }

  std::size_t count(TraceEvent::Kind kind) const {
    std::size_t c = 0;
    for (const auto& e : events)
      if (e.kind == kind) ++c;
    return c;
  }
};

}  // namespace

TEST_CASE("unconditional depression honors its per-synapse window") {
  ScobulEngine eng(params(10, 0.3, 0.0, 0.0));
  auto n = make_neuron({1.0, 1.0});

  SUBCASE("a recent depression blocks the rule") {
    n.synapses[0].last_unconditional_depression = 99;
    eng.on_pre_spike(n, 0, 0, 100);
    CHECK(n.resource_of(0) == doctest::Approx(1.0));
    CHECK(n.synapses[0].last_unconditional_depression == 99);
  }
  SUBCASE("first spike depresses and rebalances") {
    eng.on_pre_spike(n, 0, 0, 100);
    CHECK(n.resource_of(0) == doctest::Approx(0.7));
    CHECK(n.resource_of(1) == doctest::Approx(1.3));  // single peer compensates fully
    CHECK(n.synapses[0].last_unconditional_depression == 100);
  }
  SUBCASE("the window re-arms after 2*tau_p") {
    eng.on_pre_spike(n, 0, 0, 100);
    eng.on_pre_spike(n, 0, 0, 119);  // 19 < 20: blocked
    CHECK(n.resource_of(0) == doctest::Approx(0.7));
    eng.on_pre_spike(n, 0, 0, 120);  // exactly 2*tau_p: allowed
    CHECK(n.resource_of(0) == doctest::Approx(0.4));
  }
}

TEST_CASE("symmetric potentiation fires once per period, first spike wins") {
  ScobulEngine eng(params(10, 0.0, 0.25, 0.0));
  auto n = make_neuron({1.0, 1.0, 1.0});
  TraceLog trace;
  eng.set_trace_sink(&trace);

  REQUIRE(eng.on_post_spike(n, 0, 50).has_value());  // period [40, 60]
  eng.on_pre_spike(n, 0, 0, 52);
  eng.on_pre_spike(n, 0, 0, 55);
  CHECK(trace.count(TraceEvent::Kind::SymmetricPotentiation) == 1);
  CHECK(n.resource_of(0) == doctest::Approx(1.0 + 0.25));
  CHECK(n.resource_of(1) == doctest::Approx(1.0 - 0.125));
}

TEST_CASE("retroactive potentiation covers spikes before the period opened") {
  ScobulEngine eng(params(10, 0.0, 0.25, 0.0));
  auto n = make_neuron({1.0, 1.0});
  eng.on_pre_spike(n, 0, 0, 48);  // no period open yet
  CHECK(n.resource_of(0) == doctest::Approx(1.0));
  REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
  CHECK(n.resource_of(0) == doctest::Approx(1.25));
  CHECK(n.synapses[0].spiked_this_period);
  // a pre older than tau_p earns nothing
  auto m = make_neuron({1.0, 1.0});
  eng.on_pre_spike(m, 0, 0, 39);
  REQUIRE(eng.on_post_spike(m, 0, 50).has_value());
  CHECK(m.resource_of(0) == doctest::Approx(1.0));
}

TEST_CASE("period spacing gate") {
  ScobulEngine eng(params(10, 0.0, 0.0, 0.0));
  auto n = make_neuron({1.0, 1.0});

  REQUIRE(eng.on_post_spike(n, 0, 45).has_value());
  CHECK_FALSE(eng.on_post_spike(n, 0, 50).has_value());  // 5 < tau_p
  CHECK(n.period_center == 45);
  const auto ev = eng.on_post_spike(n, 0, 56);  // 11 >= tau_p
  REQUIRE(ev.has_value());
  CHECK(ev->center == 56);
  CHECK(ev->open_begin == 46);
  CHECK(ev->open_end == 66);
}

TEST_CASE("end-of-period depression targets strong inactive synapses only") {
  ScobulEngine eng(params(10, 0.0, 0.0, 0.2));

  SUBCASE("positive resource, no spike: depressed") {
    auto n = make_neuron({0.5, -1.0});  // the peer is exempt, so the rule shows
    REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
    eng.close_period(n, 0, 61);
    CHECK(n.resource_of(0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK_FALSE(n.period_open);
  }
  SUBCASE("both eligible: depressions cancel through conservation") {
    auto n = make_neuron({0.5, 0.5});
    REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
    eng.close_period(n, 0, 61);
    CHECK(n.resource_of(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("non-positive resource is exempt") {
    auto n = make_neuron({-0.2, 0.5});
    REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
    eng.close_period(n, 0, 61);
    CHECK(n.resource_of(0) == doctest::Approx(0.0).epsilon(1e-12));  // peer's share only
    CHECK(n.resource_of(1) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("a synapse that spiked is exempt") {
    auto n = make_neuron({0.5, 0.5});
    REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
    eng.on_pre_spike(n, 0, 0, 52);
    eng.close_period(n, 0, 61);
    CHECK(n.resource_of(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("expiry close runs from begin_step") {
    auto n = make_neuron({0.5, -1.0});
    REQUIRE(eng.on_post_spike(n, 0, 50).has_value());
    eng.begin_step(n, 0, 60);  // window [40, 60] still open
    CHECK(n.period_open);
    eng.begin_step(n, 0, 61);
    CHECK_FALSE(n.period_open);
    CHECK(n.resource_of(0) == doctest::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("rebalance keeps the total constant") {
  ScobulEngine eng(params(10, 0.0, 0.0, 0.0));

  SUBCASE("three synapses, equal shares") {
    auto n = make_neuron({1.0, 1.0, 1.0});
    n.synapses[0].resource += -0.3;
    eng.rebalance(n, 0, -0.3);
    CHECK(n.resource_of(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(1.15).epsilon(1e-12));
    CHECK(n.resource_of(2) == doctest::Approx(1.15).epsilon(1e-12));
    CHECK(n.plastic_resource_total() == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("zero delta is a no-op") {
    auto n = make_neuron({1.0, 2.0});
    eng.rebalance(n, 0, 0.0);
    CHECK(n.resource_of(0) == 1.0);
    CHECK(n.resource_of(1) == 2.0);
  }
  SUBCASE("two synapses, the single peer absorbs everything") {
    auto n = make_neuron({2.0, 0.0});
    n.synapses[0].resource += 0.4;
    eng.rebalance(n, 0, 0.4);
    CHECK(n.resource_of(0) == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(-0.4).epsilon(1e-12));
  }
  SUBCASE("a lone synapse cannot be compensated: warning, no-op") {
    auto n = make_neuron({1.0});
    n.synapses[0].resource += 0.4;
    eng.rebalance(n, 0, 0.4);
    CHECK(n.resource_of(0) == doctest::Approx(1.4));
    CHECK(eng.single_synapse_warnings() == 1);
  }
}

TEST_CASE("periodic renormalization restores the baseline uniformly") {
  PlasticityParams p = params(10, 0.0, 0.0, 0.0);
  p.renorm_mode = PlasticityParams::RenormMode::Periodic;
  p.renorm_interval = 100;
  ScobulEngine eng(p);

  SUBCASE("drift is corrected in equal shares") {
    auto n = make_neuron({0.9, 0.8, 0.8, 0.8});  // total 3.3
    n.initial_resource_total = 3.0;
    eng.periodic_renormalize(n, 0);
    CHECK(n.resource_of(0) == doctest::Approx(0.9 - 0.075).epsilon(1e-12));
    CHECK(n.resource_of(1) == doctest::Approx(0.8 - 0.075).epsilon(1e-12));
    CHECK(n.plastic_resource_total() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(n.synapses[0].weight ==
          doctest::Approx(resource_to_weight(n.resource_of(0), 0.0, 1.0)));
  }
  SUBCASE("no drift, no change") {
    auto n = make_neuron({1.0, 1.0});
    eng.periodic_renormalize(n, 0);
    CHECK(n.resource_of(0) == doctest::Approx(1.0));
  }
  SUBCASE("an immediate-mode engine ignores the call") {
    ScobulEngine immediate(params(10, 0.0, 0.0, 0.0));
    auto n = make_neuron({0.9, 0.8});
    n.initial_resource_total = 5.0;
    immediate.periodic_renormalize(n, 0);
    CHECK(n.resource_of(0) == doctest::Approx(0.9));
  }
}

TEST_CASE("plastic hooks reject inhibitory synapses") {
  ScobulEngine eng(params(10, 0.1, 0.1, 0.1));
  auto n = make_neuron({1.0}, 1);
  CHECK_THROWS_AS(eng.on_pre_spike(n, 0, 1, 5), std::logic_error);
  StdpBaselineParams sp;
  sp.a_plus = sp.a_minus = 0.1;
  StdpEngine stdp(sp);
  CHECK_THROWS_AS(stdp.on_pre_spike(n, 0, 1, 5), std::logic_error);
}

TEST_CASE("symmetric potentiation is order-symmetric: +delta and -delta match") {
  for (Timestep delta : {Timestep{1}, Timestep{5}, Timestep{10}}) {
    ScobulEngine eng(params(10, 0.0, 0.25, 0.0));
    // pre before post
    auto a = make_neuron({1.0, 1.0});
    eng.on_pre_spike(a, 0, 0, 100 - delta);
    REQUIRE(eng.on_post_spike(a, 0, 100).has_value());
    // post before pre
    auto b = make_neuron({1.0, 1.0});
    REQUIRE(eng.on_post_spike(b, 0, 100).has_value());
    eng.on_pre_spike(b, 0, 0, 100 + delta);
    CHECK(a.resource_of(0) == b.resource_of(0));
    CHECK(a.resource_of(0) == doctest::Approx(1.25));
  }
}

namespace {

/// Drives one neuron with random pre/post events. Returns events driven.
std::size_t random_storm(ScobulEngine& eng, NeuronState& n, Rng& rng,
                         Timestep steps, double p_pre, double p_post) {
  std::size_t driven = 0;
  for (Timestep t = 0; t < steps; ++t) {
    eng.begin_step(n, 0, t);
    for (std::size_t k = 0; k < n.n_plastic; ++k)
      if (rng.bernoulli(p_pre)) {
        eng.on_pre_spike(n, 0, k, t);
        ++driven;
      }
    if (rng.bernoulli(p_post)) {
      eng.on_post_spike(n, 0, t);
      ++driven;
    }
  }
  return driven;
}

}  // namespace

TEST_CASE("conservation: totals survive an arbitrary event storm") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    ScobulEngine eng(params(20, 0.03, 0.08, 0.05));
    Rng init(seed);
    std::vector<double> resources;
    for (int k = 0; k < 12; ++k) resources.push_back(init.uniform(0.0, 1.0));
    auto n = make_neuron(resources, 2);
    const double total0 = n.initial_resource_total;
    Rng rng(seed * 77 + 1);
    random_storm(eng, n, rng, 20000, 0.05, 0.02);
    CHECK(n.plastic_resource_total() ==
          doctest::Approx(total0).epsilon(1e-9));
  }
}

TEST_CASE("inhibitory synapses are untouched by any plasticity event") {
  ScobulEngine eng(params(15, 0.05, 0.1, 0.07));
  auto n = make_neuron({0.5, 0.8, 0.2}, 3);
  const auto before = n.synapses;
  Rng rng(11);
  random_storm(eng, n, rng, 5000, 0.1, 0.05);
  for (std::size_t k = n.n_plastic; k < n.synapses.size(); ++k) {
    CHECK(n.synapses[k].resource == before[k].resource);
    CHECK(n.synapses[k].weight == before[k].weight);
    CHECK(n.synapses[k].last_pre_spike == before[k].last_pre_spike);
  }
}

TEST_CASE("audited rules hold on random spike trains") {
  // small-scale version of the acceptance audit, with explicit bookkeeping
  struct Audit : TraceSink {
    Timestep tau_p;
    std::vector<std::vector<Timestep>> rule32;           // per synapse
    std::vector<std::vector<Timestep>> potentiations;    // per synapse: period centers
    std::vector<Timestep> centers;
    bool ok_34 = true;
    explicit Audit(std::size_t n_syn, Timestep tp)
        : tau_p(tp), rule32(n_syn), potentiations(n_syn) {}
    void record(const TraceEvent& e) override {
      switch (e.kind) {
        case TraceEvent::Kind::UnconditionalDepression:
          rule32[static_cast<std::size_t>(e.synapse)].push_back(e.t);
          break;
        case TraceEvent::Kind::SymmetricPotentiation:
          potentiations[static_cast<std::size_t>(e.synapse)].push_back(e.period_center);
          break;
        case TraceEvent::Kind::PeriodOpened:
          centers.push_back(e.t);
          break;
        case TraceEvent::Kind::InactiveDepression:
          if (!(e.resource_before > 0.0) || e.spiked_flag) ok_34 = false;
          break;
        default:
          break;
      }
    }
  };

  const Timestep tau_p = 12;
  ScobulEngine eng(params(tau_p, 0.02, 0.06, 0.04));
  auto n = make_neuron(std::vector<double>(8, 0.5), 1);
  Audit audit(8, tau_p);
  eng.set_trace_sink(&audit);
  Rng rng(42);
  random_storm(eng, n, rng, 30000, 0.08, 0.04);

  for (const auto& times : audit.rule32)
    for (std::size_t i = 1; i < times.size(); ++i)
      CHECK(times[i] - times[i - 1] >= 2 * tau_p);
  for (const auto& centers : audit.potentiations)
    for (std::size_t i = 1; i < centers.size(); ++i)
      CHECK(centers[i] != centers[i - 1]);  // at most one per period
  for (std::size_t i = 1; i < audit.centers.size(); ++i)
    CHECK(audit.centers[i] - audit.centers[i - 1] >= tau_p);
  CHECK(audit.ok_34);
  CHECK(audit.centers.size() > 100);  // the storm actually exercised periods
}

TEST_CASE("periodic mode tracks immediate mode, tighter at shorter intervals") {
  auto run_mode = [&](PlasticityParams::RenormMode mode, Timestep interval,
                      Timestep checkpoint) {
    PlasticityParams p = params(10, 0.02, 0.05, 0.03);
    p.renorm_mode = mode;
    p.renorm_interval = interval;
    ScobulEngine eng(p);
    auto n = make_neuron(std::vector<double>(6, 0.5));
    Rng rng(5);
    random_storm(eng, n, rng, checkpoint, 0.1, 0.05);
    eng.begin_step(n, 0, checkpoint);  // settle the boundary renorm
    std::vector<double> out;
    for (std::size_t k = 0; k < n.n_plastic; ++k) out.push_back(n.resource_of(k));
    return out;
  };

  const Timestep horizon = 4000;
  const auto immediate =
      run_mode(PlasticityParams::RenormMode::Immediate, 1, horizon);
  const auto fine = run_mode(PlasticityParams::RenormMode::Periodic, 40, horizon);
  const auto coarse = run_mode(PlasticityParams::RenormMode::Periodic, 400, horizon);

  auto deviation = [&](const std::vector<double>& v) {
    double d = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
      d = std::max(d, std::abs(v[k] - immediate[k]));
    return d;
  };
  CHECK(deviation(fine) <= deviation(coarse) + 1e-12);
}

TEST_CASE("pairwise baseline: single-pair updates") {
  StdpBaselineParams p;
  p.a_plus = 0.2;
  p.a_minus = 0.3;
  p.tau_plus = 15;
  p.tau_minus = 20;
  p.w_max = 1.0;
  // dt = +tau_plus: increment a_plus / e
  CHECK(stdp_pair_update(0.5, 0, 15, p) ==
        doctest::Approx(0.5 + 0.2 * std::exp(-1.0)).epsilon(1e-12));
  // clipping at w_max
  CHECK(stdp_pair_update(0.999, 0, 1, p) == 1.0);
  // dt = 0 is neutral
  CHECK(stdp_pair_update(0.5, 10, 10, p) == 0.5);
  // dt < 0 depresses, clipped at zero
  CHECK(stdp_pair_update(0.0, 10, 0, p) == 0.0);
  CHECK(stdp_pair_update(0.5, 10, 0, p) ==
        doctest::Approx(0.5 - 0.3 * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("pairwise baseline engine: nearest-neighbor pairing") {
  StdpBaselineParams p;
  p.a_plus = 0.1;
  p.a_minus = 0.1;
  p.tau_plus = 10;
  p.tau_minus = 10;
  p.w_max = 1.0;
  StdpEngine eng(p);
  auto n = make_neuron({0.0, 0.0});
  n.synapses[0].weight = 0.5;
  n.synapses[1].weight = 0.5;

  eng.on_pre_spike(n, 0, 0, 5);
  integrate_step(n, 100.0, 8);  // fires, records last_fire
  eng.on_post_spike(n, 0, 8);
  CHECK(n.synapses[0].weight ==
        doctest::Approx(0.5 + 0.1 * std::exp(-0.3)).epsilon(1e-12));
  CHECK(n.synapses[1].weight == 0.5);  // never saw a pre

  // a pre after the post pairs against it for depression
  const double w0 = n.synapses[0].weight;
  eng.on_pre_spike(n, 0, 0, 12);
  CHECK(n.synapses[0].weight ==
        doctest::Approx(w0 - 0.1 * std::exp(-0.4)).epsilon(1e-12));
}

TEST_CASE("pairwise baseline engine: all-pairs traces accumulate") {
  StdpBaselineParams p;
  p.a_plus = 0.01;
  p.a_minus = 0.01;
  p.tau_plus = 10;
  p.tau_minus = 10;
  p.w_max = 1.0;
  p.pairing = StdpBaselineParams::Pairing::AllPairs;
  StdpEngine eng(p);
  auto n = make_neuron({0.0});
  n.synapses[0].weight = 0.5;

  eng.on_pre_spike(n, 0, 0, 0);
  eng.on_pre_spike(n, 0, 0, 5);
  n.last_fire = 10;
  eng.on_post_spike(n, 0, 10);
  const double expected =
      0.5 + 0.01 * (std::exp(-1.0) + std::exp(-0.5));  // both pres contribute
  CHECK(n.synapses[0].weight == doctest::Approx(expected).epsilon(1e-12));
}
