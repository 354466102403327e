// Acceptance suite: one PASS/FAIL line per criterion. A criterion passes only
// when its numerical check holds and it finishes within its runtime budget.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lrp/electric.h"
#include "lrp/estimators.h"
#include "lrp/experiment.h"
#include "lrp/graph_model.h"
#include "lrp/projection.h"
#include "lrp/rng.h"
#include "test_support.h"

namespace lrp {
namespace {

using testing::DenseEffectiveConductance;
using testing::LogUniform;
using testing::RandomConnectedNetwork;
using testing::RawNetwork;

// Pinned tolerances and budgets.
constexpr double kExactTolerance = 1e-12;
constexpr double kOracleTolerance = 1e-10;
constexpr double kDecayStderrLimit = 0.05;
constexpr double kBirkhoffTolerance = 0.01;
constexpr double kDeltaEffTolerance = 0.05;
constexpr double kCountSigmas = 3.0;
constexpr double kWeakSlope = 0.5;
constexpr double kWeakSlopeTolerance = 0.1;
constexpr double kLongEdgeScale = 4.0;  // MC error allowance 4 / sqrt(R)
constexpr double kDominationTolerance = 1e-9;
constexpr double kWalkSigmas = 4.0;

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string Num(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4g", x);
  return buffer;
}

double RelativeError(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(got), std::abs(want));
}

ModelConfig Homogeneous(Site n, double delta, bool backbone) {
  ModelConfig config;
  config.window_radius = n;
  config.kernel = KernelSpec::Constant(1.0);
  config.connection = ConnectionFunction::Polynomial(1.0, delta);
  config.backbone = backbone;
  return config;
}

// 1. Exact conductance laws.
Outcome ExactLaws() {
  Outcome out;
  constexpr Site kRadius = 512;
  RawNetwork line;
  for (Site z = -kRadius; z <= kRadius; ++z) line.sites.push_back(z);
  for (Site z = -kRadius; z < kRadius; ++z) line.edges.push_back({z, z + 1, 1.0});
  const Network net = line.Build();
  double worst = 0.0;
  for (Site m = 1; m <= kRadius; ++m) {
    worst = std::max(worst, RelativeError(ConductanceToBoundary(net, 0, m),
                                          2.0 / static_cast<double>(m)));
  }
  // Fixtures: series chain, parallel pair, triangle, bridge.
  const RawNetwork series{{0, 1, 2, 3}, {{0, 1, 2.0}, {1, 2, 3.0}, {2, 3, 6.0}}};
  const RawNetwork parallel{{0, 1}, {{0, 1, 0.25}, {0, 1, 1.75}, {1, 0, 3.0}}};
  const RawNetwork triangle{{0, 1, 2}, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}};
  const RawNetwork bridge{{0, 1, 2, 3},
                          {{0, 1, 1.0}, {0, 2, 2.0}, {1, 3, 1.0}, {2, 3, 2.0}, {1, 2, 7.0}}};
  worst = std::max(worst, RelativeError(EffectiveConductance(series.Build(), {{0}, {3}}), 1.0));
  worst = std::max(worst, RelativeError(EffectiveConductance(parallel.Build(), {{0}, {1}}), 5.0));
  worst = std::max(worst, RelativeError(EffectiveConductance(triangle.Build(), {{0}, {1}}), 1.5));
  worst = std::max(worst, RelativeError(EffectiveConductance(bridge.Build(), {{0}, {3}}), 1.5));
  worst = std::max(worst, RelativeError(SeriesChainConductance(std::vector<double>(7, 7.0)), 1.0));
  out.ok = worst <= kExactTolerance;
  out.detail = "max rel err " + Num(worst) + " over m=1..512 and fixtures";
  return out;
}

// 2. Solver against the dense oracle.
Outcome SolverOracle() {
  Rng rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + static_cast<int>(rng.UniformIndex(10));  // <= 12 vertices
    const RawNetwork raw = RandomConnectedNetwork(rng, k, k, 1e-3, 1e3);
    std::vector<Site> a = {0}, b = {static_cast<Site>(k - 1)};
    if (k > 4 && trial % 2 == 0) b.push_back(static_cast<Site>(k - 2));
    worst = std::max(worst, RelativeError(EffectiveConductance(raw.Build(), {a, b}),
                                          DenseEffectiveConductance(raw, a, b)));
  }
  return {worst <= kOracleTolerance, "max rel err " + Num(worst) + " on 50 networks"};
}

// 3. Boundary conductance decay for i.i.d. heavy-tailed conductances.
Outcome Decay() {
  const std::vector<Site> radii = {16, 32, 64, 128, 256, 512, 1024};
  Outcome out;
  for (const auto law : {ConductanceLaw::Exponential(1.0), ConductanceLaw::Pareto(0.5)}) {
    const DecayFit fit = ConductanceDecay(law, radii, 1000, 3);
    const bool ok = fit.slope_defined && fit.slope <= kDecaySlopeThreshold &&
                    fit.slope_stderr < kDecayStderrLimit;
    out.ok = out.ok && ok;
    out.detail += law.Describe() + " slope " + Num(fit.slope) + " se " +
                  Num(fit.slope_stderr) + "; ";
  }
  return out;
}

// 4. Birkhoff fraction of bad edges.
Outcome Birkhoff() {
  const ConductanceLaw law = ConductanceLaw::Exponential(1.0);
  const BadEdgeParams params = BadEdgeParams::ForLaw(law, std::log(2.0));
  Rng rng(4);
  std::vector<double> sample(100000);
  for (double& c : sample) c = law.Sample(rng);
  const double fraction = BadEdgeFraction(sample, params).back();
  return {std::abs(fraction - 0.5) <= kBirkhoffTolerance &&
              std::abs(params.target_fraction - 0.5) < 1e-15,
          "fraction " + Num(fraction) + " at n=1e5"};
}

// 5. Effective decay exponent.
Outcome DeltaEff() {
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5, 1e6};
  Outcome out;
  for (double delta : {2.5, 3.0, 4.0}) {
    const DeltaEffEstimate est =
        EstimateDeltaEff(KernelSpec::Constant(1.0),
                         ConnectionFunction::Polynomial(1.0, delta), grid, 32);
    const bool ok = est.quadrature_converged && !est.divergent &&
                    std::abs(est.estimate - delta) <= kDeltaEffTolerance;
    out.ok = out.ok && ok;
    out.detail += "delta " + Num(delta) + " -> " + Num(est.estimate) + "; ";
  }
  const DeltaEffEstimate indicator = EstimateDeltaEff(
      KernelSpec::Constant(1.0), ConnectionFunction::Indicator(1.0), grid, 32);
  out.ok = out.ok && indicator.divergent;
  out.detail += std::string("indicator divergent=") + (indicator.divergent ? "yes" : "no");
  return out;
}

// 6. Edges above 0+.
Outcome EdgesAboveZero() {
  Outcome out;
  const ModelConfig strong = Homogeneous(1000, 3.0, false);
  // Oracle: the truncated series evaluated directly.
  double series = 0.0;
  for (Site m = 1; m <= 2000; ++m) {
    series += static_cast<double>(std::min<Site>(m, 2001 - m)) *
              std::min(1.0, std::pow(static_cast<double>(m), -3.0));
  }
  const CountEstimate mc = EdgesAboveZeroMc(strong, 10000, 6);
  const double sigmas = std::abs(mc.mean - series) / mc.standard_error;
  out.ok = sigmas <= kCountSigmas;
  out.detail = "delta=3 mean " + Num(mc.mean) + " vs " + Num(series) + " (" + Num(sigmas) +
               " sigma); ";

  std::vector<double> ns, analytic, sampled;
  for (Site n : {100, 1000, 10000}) {
    const ModelConfig weak = Homogeneous(n, 1.5, false);
    double partial = 0.0;
    for (Site m = 1; m <= 2 * n; ++m) {
      partial += static_cast<double>(std::min(m, 2 * n + 1 - m)) *
                 std::min(1.0, std::pow(static_cast<double>(m), -1.5));
    }
    ns.push_back(static_cast<double>(n));
    analytic.push_back(partial);
    sampled.push_back(EdgesAboveZeroMc(weak, 300, 7).mean);
  }
  const double slope_analytic = LogLogSlope(ns, analytic);
  const double slope_sampled = LogLogSlope(ns, sampled);
  out.ok = out.ok && std::abs(slope_analytic - kWeakSlope) <= kWeakSlopeTolerance &&
           std::abs(slope_sampled - kWeakSlope) <= kWeakSlopeTolerance;
  out.detail += "delta=1.5 slope " + Num(slope_analytic) + " (series), " +
                Num(slope_sampled) + " (sampled)";
  return out;
}

// 7. Long-edge scale probabilities.
Outcome LongEdges() {
  Outcome out;
  constexpr std::uint64_t kReplicas = 10000;
  const double allowance = kLongEdgeScale / std::sqrt(static_cast<double>(kReplicas));
  const ModelConfig homogeneous = Homogeneous(128, 3.0, true);
  double worst = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const LongEdgeEstimate est = LongEdgeProbability(homogeneous, k, kReplicas, DeriveSeed(7, k));
    worst = std::max(worst, std::abs(est.probability - est.exact.value()));
  }
  out.ok = worst <= allowance;
  out.detail = "max |mc-exact| " + Num(worst) + " (allowance " + Num(allowance) + "); ";

  ModelConfig wdrcm = homogeneous;
  wdrcm.kernel = KernelSpec::Product(0.3);
  std::vector<LongEdgeEstimate> ladder;
  for (int k = 1; k <= 6; ++k) {
    ladder.push_back(LongEdgeProbability(wdrcm, k, kReplicas, DeriveSeed(8, k)));
  }
  const ScaleExponentFit fit = FitScaleExponent(ladder);
  out.ok = out.ok && fit.lower_95() > 0.0;
  out.detail += "product(0.3) theta " + Num(fit.theta) + " lower_95 " + Num(fit.lower_95());
  return out;
}

// 8. Projection domination.
Outcome Projection() {
  Outcome out;
  Rng rng(88);
  double worst_deficit = -std::numeric_limits<double>::infinity();
  int cuts = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.UniformIndex(14));  // <= 15 vertices
    SpatialNetwork g;
    const double span = 1.0 + 6.0 * rng.Uniform01();
    while (static_cast<int>(g.positions.size()) < k) {
      const double x = -span + 2.0 * span * rng.Uniform01();
      if (std::find(g.positions.begin(), g.positions.end(), x) == g.positions.end()) {
        g.positions.push_back(x);
      }
    }
    RawNetwork original;
    for (int i = 0; i < k; ++i) original.sites.push_back(i);
    for (int i = 1; i < k; ++i) {
      const std::size_t j = rng.UniformIndex(i);
      const double c = LogUniform(rng, 0.05, 20.0);
      g.edges.push_back({static_cast<std::size_t>(i), j, c});
      original.edges.push_back({i, static_cast<Site>(j), c});
    }
    const LineNetwork line = ProjectToZnn(g);
    const Network projected = line.ToNetwork();
    for (Site z = line.first; z <= line.last(); ++z) {
      for (Site m = 1; m <= line.last() - line.first; ++m) {
        std::vector<Site> source, sink, line_sink;
        for (int i = 0; i < k; ++i) {
          const Site w = MergedSite(g.positions[i]);
          if (w == z) source.push_back(i);
          if (std::abs(w - z) >= m) sink.push_back(i);
        }
        if (source.empty() || sink.empty()) continue;
        for (Site w = line.first; w <= line.last(); ++w) {
          if (std::abs(w - z) >= m) line_sink.push_back(w);
        }
        const double deficit = DenseEffectiveConductance(original, source, sink) -
                               EffectiveConductance(projected, {{z}, line_sink});
        worst_deficit = std::max(worst_deficit, deficit);
        ++cuts;
      }
    }
  }
  out.ok = worst_deficit <= kDominationTolerance && cuts > 0;
  out.detail = std::to_string(cuts) + " cuts, max(original - projected) " + Num(worst_deficit);

  const double c = 1.3;
  const LineNetwork example = ProjectToZnn({{0.3, 2.7}, {{0, 1, c}}});
  const bool exact = example.first == 0 && example.conductance.size() == 2 &&
                     example.conductance[0] == 3 * c && example.conductance[1] == 3 * c;
  out.ok = out.ok && exact;
  out.detail += std::string("; 0.3->2.7 example ") + (exact ? "exact 3c" : "WRONG");
  return out;
}

// 9. Walk/conductance duality.
Outcome WalkDuality() {
  Outcome out;
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 4 + static_cast<int>(rng.UniformIndex(9));
    const Network net = RandomConnectedNetwork(rng, k, k, 0.1, 10.0).Build();
    const TerminalPair terminals{{0}, {static_cast<Site>(k - 1)}};
    const EscapeEstimate est =
        EscapeProbabilityMc(net, terminals, 100000, 10000000, DeriveSeed(9, trial));
    const double solver = EffectiveConductance(net, terminals);
    const double z = std::abs(est.conductance - solver) / est.conductance_stderr;
    worst = std::max(worst, z);
    out.ok = out.ok && est.censored == 0;
  }
  out.ok = out.ok && worst <= kWalkSigmas;
  out.detail = "max deviation " + Num(worst) + " standard errors on 20 networks";
  return out;
}

// 10. Determinism of every command across worker counts.
Outcome Determinism() {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("lrp_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream(dir / "spatial.txt") << "v 0 0.3\nv 1 2.7\nv 2 -1.5\n0 1 1\n1 2 0.5\n";
  }
  const std::string base =
      "model:\n  window_radius: 32\n  kernel: {type: min, gamma: 0.5}\n"
      "  connection: {type: polynomial, p: 1, delta: 2.5}\n"
      "replicas: 50\nradii: [2, 4, 8]\nscales: [1, 2, 3]\nn_grid: [10, 100, 1000]\n"
      "quadrature_resolution: 8\nsources: [0]\nsinks: [10]\nseed: 77\n";
  Outcome out;
  int compared = 0;
  for (const std::string& command : ExperimentCommands()) {
    for (const char* format : {"csv", "json"}) {
      ExperimentConfig config =
          ParseExperimentConfig(base + "output: {format: " + format + "}\n");
      config.command = command;
      if (command == "project") config.input = (dir / "spatial.txt").string();
      std::string reference;
      for (int workers : {1, 4}) {
        config.workers = workers;
        config.output_path = (dir / (command + "_" + format + "_" + std::to_string(workers))).string();
        std::ostringstream summary, errors;
        if (RunExperiment(config, summary, errors) == kExitConfigError) {
          out.ok = false;
          out.detail += command + " failed: " + errors.str();
        }
        std::ifstream in(config.output_path, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        if (workers == 1) {
          reference = text.str();
        } else if (text.str() != reference || reference.empty()) {
          out.ok = false;
          out.detail += command + "/" + format + " differs; ";
        }
      }
      ++compared;
    }
  }
  fs::remove_all(dir);
  out.detail += std::to_string(compared) + " command/format pairs byte-identical with workers 1 and 4";
  return out;
}

}  // namespace
}  // namespace lrp

int main() {
  using lrp::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "exact conductance laws", 1.0, lrp::ExactLaws},
      {2, "solver vs dense oracle", 5.0, lrp::SolverOracle},
      {3, "boundary conductance decay O(1/m)", 120.0, lrp::Decay},
      {4, "bad-edge ergodic fraction", 1.0, lrp::Birkhoff},
      {5, "effective decay exponent", 10.0, lrp::DeltaEff},
      {6, "edges above 0+", 120.0, lrp::EdgesAboveZero},
      {7, "long-edge scale probabilities", 300.0, lrp::LongEdges},
      {8, "projection domination", 10.0, lrp::Projection},
      {9, "walk/conductance duality", 120.0, lrp::WalkDuality},
      {10, "determinism across workers", 60.0, lrp::Determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    lrp::Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool pass = outcome.ok && in_budget;
    failures += pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), outcome.detail.c_str(), seconds, c.budget_seconds,
                in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
