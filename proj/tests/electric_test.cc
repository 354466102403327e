#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lrp/electric.h"
#include "lrp/errors.h"
#include "lrp/graph_model.h"
#include "lrp/rng.h"
#include "test_support.h"

namespace lrp {
namespace {

using testing::DenseEffectiveConductance;
using testing::RandomConnectedNetwork;
using testing::RawNetwork;
using testing::RelClose;

constexpr double kInf = std::numeric_limits<double>::infinity();

RawNetwork Path(Site n, double c = 1.0) {
  RawNetwork net;
  for (Site z = 0; z <= n; ++z) net.sites.push_back(z);
  for (Site z = 0; z < n; ++z) net.edges.push_back({z, z + 1, c});
  return net;
}

RawNetwork Znn(Site m) {
  RawNetwork net;
  for (Site z = -m; z <= m; ++z) net.sites.push_back(z);
  for (Site z = -m; z < m; ++z) net.edges.push_back({z, z + 1, 1.0});
  return net;
}

TEST_CASE("contract merges a set into one node") {
  const RawNetwork path = Path(3);
  const Network net = path.Build();
  CHECK(net.num_nodes() == 4);
  const std::vector<Site> set = {1, 2};
  const Network contracted = Contract(net, set);
  CHECK(contracted.num_nodes() == 3);
  CHECK(contracted.edges().size() == 2);
  CHECK(contracted.NodeOf(1) == contracted.NodeOf(2));

  // A triangle with the middle edge swallowed: parallel edges are summed.
  RawNetwork tri{{0, 1, 2}, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 3.0}}};
  const std::vector<Site> pair = {0, 1};
  const Network merged = Contract(tri.Build(), pair);
  REQUIRE(merged.edges().size() == 1);
  CHECK(merged.edges()[0].conductance == doctest::Approx(5.0));

  CHECK_THROWS_AS(Contract(net, std::vector<Site>{}), DomainError);
  CHECK_THROWS_AS(Contract(net, std::vector<Site>{7}), DomainError);
}

TEST_CASE("network normal form") {
  RawNetwork raw{{0, 1, 2, 3},
                 {{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, kInf}, {2, 3, 0.0}, {3, 3, 4.0}}};
  const Network net = raw.Build();
  CHECK(net.num_sites() == 4);
  CHECK(net.num_nodes() == 3);
  CHECK(net.NodeOf(1) == net.NodeOf(2));
  REQUIRE(net.edges().size() == 1);
  CHECK(net.edges()[0].conductance == 3.0);
  CHECK(net.TotalConductance(net.NodeOf(3)) == 0.0);
  CHECK_THROWS_AS(net.NodeOf(9), DomainError);
  RawNetwork bad{{0, 1}, {{0, 1, -1.0}}};
  CHECK_THROWS_AS(bad.Build(), DomainError);
  RawNetwork nan{{0, 1}, {{0, 1, std::nan("")}}};
  CHECK_THROWS_AS(nan.Build(), DomainError);
}

TEST_CASE("series chain conductance") {
  CHECK(SeriesChainConductance(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(0.25));
  CHECK(SeriesChainConductance(std::vector<double>{2, 2}) == doctest::Approx(1.0));
  CHECK(SeriesChainConductance(std::vector<double>{1, kInf}) == 1.0);
  CHECK(SeriesChainConductance(std::vector<double>{kInf, kInf}) == kInf);
  CHECK(SeriesChainConductance(std::vector<double>{3, 0}) == 0.0);
  CHECK_THROWS_AS(SeriesChainConductance(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(SeriesChainConductance(std::vector<double>{-1}), DomainError);
}

TEST_CASE("effective conductance: fixtures") {
  for (Site n : {1, 2, 5, 17, 100}) {
    const double c = EffectiveConductance(Path(n).Build(), {{0}, {n}});
    CHECK(RelClose(c, 1.0 / static_cast<double>(n), 1e-12));
  }
  RawNetwork tri{{0, 1, 2}, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}};
  CHECK(RelClose(EffectiveConductance(tri.Build(), {{0}, {1}}), 1.5, 1e-12));

  RawNetwork split{{0, 1, 2, 3}, {{0, 1, 1.0}, {2, 3, 1.0}}};
  CHECK(EffectiveConductance(split.Build(), {{0}, {3}}) == 0.0);

  RawNetwork shorted{{0, 1, 2}, {{0, 1, kInf}, {1, 2, kInf}}};
  CHECK(EffectiveConductance(shorted.Build(), {{0}, {2}}) == kInf);
  CHECK_THROWS_AS(EffectiveConductance(Path(3).Build(), {{0, 1}, {1, 3}}), DomainError);

  // Wheatstone bridge: balanced, so the bridge carries no current.
  RawNetwork bridge{{0, 1, 2, 3},
                    {{0, 1, 1.0}, {0, 2, 2.0}, {1, 3, 1.0}, {2, 3, 2.0}, {1, 2, 5.0}}};
  CHECK(RelClose(EffectiveConductance(bridge.Build(), {{0}, {3}}), 1.5, 1e-12));
}

TEST_CASE("conductance to boundary on Z_nn is 2/m") {
  const Network net = Znn(64).Build();
  for (Site m = 1; m <= 64; ++m) {
    CHECK(RelClose(ConductanceToBoundary(net, 0, m), 2.0 / static_cast<double>(m), 1e-12));
  }
  CHECK_THROWS_AS(ConductanceToBoundary(net, 0, 0), DomainError);
  CHECK_THROWS_AS(ConductanceToBoundary(net, 0, 65), DomainError);
  CHECK_THROWS_AS(ConductanceToBoundary(net, 5, 5), DomainError);
}

TEST_CASE("effective conductance matches the dense oracle") {
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 5 + static_cast<int>(rng.UniformIndex(60));
    const RawNetwork raw = RandomConnectedNetwork(rng, k, 2 * k, 1e-3, 1e3);
    const std::vector<Site> a = {0};
    const std::vector<Site> b = {static_cast<Site>(k - 1), static_cast<Site>(k / 2)};
    const double expected = DenseEffectiveConductance(raw, a, b);
    const double got = EffectiveConductance(raw.Build(), {a, b});
    INFO("trial " << trial << " k=" << k);
    CHECK(RelClose(got, expected, 1e-10));
  }
}

TEST_CASE("series and parallel laws, symmetry, energy") {
  Rng rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 4 + static_cast<int>(rng.UniformIndex(30));
    RawNetwork first = RandomConnectedNetwork(rng, k, k, 0.01, 100.0);
    RawNetwork second = RandomConnectedNetwork(rng, k, k, 0.01, 100.0);
    const Site top = k - 1;
    const double c1 = EffectiveConductance(first.Build(), {{0}, {top}});
    const double c2 = EffectiveConductance(second.Build(), {{0}, {top}});

    // Parallel: share both terminals, shift the interior of `second`.
    RawNetwork parallel = first;
    auto relabel = [&](Site s, Site shift) {
      return s == 0 || s == top ? s : s + shift;
    };
    for (Site s : second.sites) {
      if (s != 0 && s != top) parallel.sites.push_back(s + k);
    }
    for (const auto& e : second.edges) {
      parallel.edges.push_back({relabel(e.u, k), relabel(e.v, k), e.conductance});
    }
    CHECK(RelClose(EffectiveConductance(parallel.Build(), {{0}, {top}}), c1 + c2, 1e-10));

    // Series: glue the sink of `first` to the source of `second`.
    RawNetwork series = first;
    for (Site s : second.sites) {
      if (s != 0) series.sites.push_back(s + top);
    }
    for (const auto& e : second.edges) {
      series.edges.push_back({e.u + top, e.v + top, e.conductance});
    }
    CHECK(RelClose(EffectiveConductance(series.Build(), {{0}, {2 * top}}),
                   1.0 / (1.0 / c1 + 1.0 / c2), 1e-10));

    // Symmetry.
    CHECK(RelClose(EffectiveConductance(first.Build(), {{top}, {0}}), c1, 1e-12));

    // Energy of the harmonic potential equals the conductance.
    const HarmonicSolution sol = SolveHarmonic(first.Build(), {{0}, {top}});
    CHECK(RelClose(DirichletEnergy(sol.network, sol.potential), c1, 1e-10));
    CHECK(RelClose(sol.current, c1, 1e-12));
    for (double phi : sol.potential) {
      CHECK(phi >= -1e-12);
      CHECK(phi <= 1.0 + 1e-12);
    }

    // Rayleigh monotonicity: raising one conductance cannot lower C_eff.
    RawNetwork raised = first;
    const std::size_t pick = rng.UniformIndex(raised.edges.size());
    raised.edges[pick].conductance *= 1.0 + 10.0 * rng.Uniform01();
    CHECK(EffectiveConductance(raised.Build(), {{0}, {top}}) >= c1 * (1.0 - 1e-9));
  }
}

TEST_CASE("conductance to boundary is non-increasing in the radius") {
  ModelConfig config;
  config.window_radius = 40;
  config.connection = ConnectionFunction::Polynomial(1.0, 1.8);
  config.kernel = KernelSpec::Product(0.3);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    config.seed = seed;
    config.backbone = seed % 2 == 0;
    const Network net = NetworkFromSample(SampleGraph(config));
    double previous = kInf;
    for (Site m = 1; m <= 40; ++m) {
      const double c = ConductanceToBoundary(net, 0, m);
      CHECK(c >= 0.0);
      CHECK(c <= previous * (1.0 + 1e-9));
      previous = c;
    }
  }
}

TEST_CASE("random walk step frequencies follow conductances") {
  RawNetwork star{{0, 1, 2}, {{0, 1, 1.0}, {0, 2, 3.0}}};
  const Network net = star.Build();
  Rng rng(8);
  constexpr int kSteps = 200000;
  int to_one = 0;
  for (int i = 0; i < kSteps; ++i) {
    if (WalkStep(net, net.NodeOf(0), rng) == net.NodeOf(1)) ++to_one;
  }
  const double freq = to_one / static_cast<double>(kSteps);
  CHECK(std::abs(freq - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / kSteps));

  RawNetwork isolated{{0, 1, 2}, {{1, 2, 1.0}}};
  const Network lonely = isolated.Build();
  CHECK_THROWS_AS(WalkStep(lonely, lonely.NodeOf(0), rng), UndefinedWalkError);
}

TEST_CASE("escape probability Monte Carlo") {
  RawNetwork single{{0, 1}, {{0, 1, 2.0}}};
  const EscapeEstimate one = EscapeProbabilityMc(single.Build(), {{0}, {1}}, 1000, 100, 1);
  CHECK(one.probability == 1.0);
  CHECK(one.conductance == doctest::Approx(2.0));

  const EscapeEstimate chain = EscapeProbabilityMc(Path(4).Build(), {{0}, {4}}, 40000, 100000, 2);
  CHECK(chain.censored == 0);
  CHECK(std::abs(chain.probability - 0.25) <= 4.0 * chain.standard_error);

  Rng rng(55);
  const RawNetwork raw = RandomConnectedNetwork(rng, 12, 12, 0.1, 10.0);
  const Network net = raw.Build();
  const double exact = EffectiveConductance(net, {{0}, {11}});
  const EscapeEstimate mc = EscapeProbabilityMc(net, {{0}, {11}}, 40000, 1000000, 3);
  CHECK(std::abs(mc.conductance - exact) <= 4.0 * mc.conductance_stderr);

  // Censoring: a long path with a tiny step budget.
  const EscapeEstimate cut = EscapeProbabilityMc(Path(50).Build(), {{0}, {50}}, 2000, 5, 4);
  CHECK(cut.escaped == 0);
  CHECK(cut.censored > 0);
  CHECK(cut.escaped + cut.returned + cut.censored == 2000);
  CHECK(cut.censored_rate == doctest::Approx(cut.censored / 2000.0));

  // Worker count does not change the result.
  const EscapeEstimate w1 = EscapeProbabilityMc(net, {{0}, {11}}, 5000, 100000, 9, 1);
  const EscapeEstimate w4 = EscapeProbabilityMc(net, {{0}, {11}}, 5000, 100000, 9, 4);
  CHECK(w1.escaped == w4.escaped);
  CHECK(w1.returned == w4.returned);
  CHECK(w1.probability == w4.probability);
}

}  // namespace
}  // namespace lrp
