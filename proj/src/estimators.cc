#include "lrp/estimators.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lrp/electric.h"
#include "lrp/errors.h"
#include "lrp/parallel.h"

namespace lrp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void CheckRadii(std::span<const Site> radii) {
  if (radii.empty()) throw DomainError("radii must be nonempty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 1) throw DomainError("radii must be >= 1");
    if (i > 0 && radii[i] <= radii[i - 1]) {
      throw DomainError("radii must be strictly increasing");
    }
  }
}

// Turns per-replica values (row-major: replica x radius) into a DecayFit.
DecayFit Summarize(std::span<const Site> radii, std::uint64_t replicas,
                   const std::vector<double>& values) {
  DecayFit fit;
  fit.radii.assign(radii.begin(), radii.end());
  fit.replicas = replicas;
  const std::size_t k = radii.size();
  const auto r_count = static_cast<double>(replicas);
  std::vector<double> sums(k, 0.0);
  for (std::uint64_t r = 0; r < replicas; ++r) {
    for (std::size_t j = 0; j < k; ++j) sums[j] += values[r * k + j];
  }
  for (std::size_t j = 0; j < k; ++j) {
    const double mean = sums[j] / r_count;
    double squares = 0.0;
    for (std::uint64_t r = 0; r < replicas; ++r) {
      const double d = values[r * k + j] - mean;
      squares += d * d;
    }
    fit.mean.push_back(mean);
    fit.standard_error.push_back(
        replicas > 1 ? std::sqrt(squares / (r_count - 1.0) / r_count) : 0.0);
  }

  std::vector<double> xs(radii.begin(), radii.end());
  for (std::size_t j = 0; j < k; ++j) {
    if (!(fit.mean[j] > 0.0) || !std::isfinite(fit.mean[j])) {
      fit.slope_defined = false;
      fit.flags.push_back("slope undefined: mean conductance " +
                          FormatReal(fit.mean[j]) + " at radius " +
                          std::to_string(radii[j]));
    }
  }
  if (k < 2) {
    fit.slope_defined = false;
    fit.flags.push_back("slope undefined: fewer than two radii");
  }
  if (!fit.slope_defined) {
    fit.slope = kNaN;
    fit.slope_stderr = kNaN;
    return fit;
  }
  fit.slope = LogLogSlope(xs, fit.mean);

  // Jackknife over replicas; radii share each replica's field, so the
  // per-radius errors are correlated and cannot simply be propagated.
  if (replicas > 1) {
    std::vector<double> slopes(replicas), loo(k);
    for (std::uint64_t r = 0; r < replicas; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        loo[j] = (sums[j] - values[r * k + j]) / (r_count - 1.0);
      }
      slopes[r] = LogLogSlope(xs, loo);
    }
    double mean_slope = 0.0;
    for (double s : slopes) mean_slope += s;
    mean_slope /= r_count;
    double squares = 0.0;
    for (double s : slopes) squares += (s - mean_slope) * (s - mean_slope);
    fit.slope_stderr = std::sqrt((r_count - 1.0) / r_count * squares);
    if (!std::isfinite(fit.slope_stderr)) {
      fit.flags.push_back("slope standard error undefined");
    }
  }
  return fit;
}

// |[a, b]| for integer intervals.
Site Length(Site a, Site b) { return b >= a ? b - a + 1 : 0; }

}  // namespace

double LogLogSlope(std::span<const double> x, std::span<const double> y) {
  const std::size_t k = x.size();
  if (k < 2 || y.size() != k) return kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(y[i] > 0.0)) return kNaN;
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// ConductanceLaw

void ConductanceLaw::Validate() const {
  switch (kind) {
    case Kind::kUnit:
      return;
    case Kind::kConstant:
      if (!(parameter >= 0.0)) throw DomainError("constant law needs c >= 0");
      return;
    case Kind::kExponential:
      if (!(parameter > 0.0) || !std::isfinite(parameter)) {
        throw DomainError("exponential law needs a finite rate > 0");
      }
      return;
    case Kind::kPareto:
      if (!(parameter > 0.0) || !std::isfinite(parameter)) {
        throw DomainError("Pareto law needs a finite tail index > 0");
      }
      return;
  }
}

double ConductanceLaw::Sample(Rng& rng) const {
  switch (kind) {
    case Kind::kUnit:
      return 1.0;
    case Kind::kConstant:
      return parameter;
    case Kind::kExponential:
      return rng.Exponential(parameter);
    case Kind::kPareto:
      return rng.Pareto(parameter);
  }
  return 1.0;
}

double ConductanceLaw::Cdf(double m) const {
  switch (kind) {
    case Kind::kUnit:
      return m >= 1.0 ? 1.0 : 0.0;
    case Kind::kConstant:
      return m >= parameter ? 1.0 : 0.0;
    case Kind::kExponential:
      return m <= 0.0 ? 0.0 : -std::expm1(-parameter * m);
    case Kind::kPareto:
      return m < 1.0 ? 0.0 : 1.0 - std::pow(m, -parameter);
  }
  return 0.0;
}

std::string ConductanceLaw::Describe() const {
  switch (kind) {
    case Kind::kUnit:
      return "unit";
    case Kind::kConstant:
      return "constant(" + FormatReal(parameter) + ")";
    case Kind::kExponential:
      return "exponential(" + FormatReal(parameter) + ")";
    case Kind::kPareto:
      return "pareto(" + FormatReal(parameter) + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Conductance decay

DecayFit ConductanceDecay(const ConductanceLaw& law, std::span<const Site> radii,
                          std::uint64_t replicas, std::uint64_t seed,
                          int workers) {
  law.Validate();
  CheckRadii(radii);
  if (replicas == 0) throw DomainError("replicas must be positive");
  const std::size_t k = radii.size();
  const auto reach = static_cast<std::size_t>(radii.back());
  std::vector<double> values(replicas * k);
  ParallelFor(replicas, workers, [&](std::size_t r) {
    Rng rng(DeriveSeed(seed, r));
    // Edge (z, z+1) and edge (-z-1, -z) for z = 0..reach-1.
    std::vector<double> right(reach), left(reach);
    for (auto& c : right) c = law.Sample(rng);
    for (auto& c : left) c = law.Sample(rng);
    double right_resistance = 0.0, left_resistance = 0.0;
    std::size_t j = 0;
    for (std::size_t z = 0; z < reach && j < k; ++z) {
      right_resistance += 1.0 / right[z];
      left_resistance += 1.0 / left[z];
      if (z + 1 == static_cast<std::size_t>(radii[j])) {
        values[r * k + j] = 1.0 / right_resistance + 1.0 / left_resistance;
        ++j;
      }
    }
  });
  return Summarize(radii, replicas, values);
}

DecayFit ConductanceDecay(const ModelConfig& config, std::span<const Site> radii,
                          std::uint64_t replicas, std::uint64_t seed,
                          int workers) {
  config.Validate();
  CheckRadii(radii);
  if (replicas == 0) throw DomainError("replicas must be positive");
  if (radii.back() > config.window_radius) {
    throw DomainError("radius exceeds the sampling window");
  }
  const std::size_t k = radii.size();
  std::vector<double> values(replicas * k);
  ParallelFor(replicas, workers, [&](std::size_t r) {
    ModelConfig replica = config;
    replica.seed = DeriveSeed(seed, r);
    const Network net = NetworkFromSample(SampleGraph(replica));
    for (std::size_t j = 0; j < k; ++j) {
      values[r * k + j] = ConductanceToBoundary(net, 0, radii[j]);
    }
  });
  return Summarize(radii, replicas, values);
}

// ---------------------------------------------------------------------------
// Bad edges

BadEdgeParams BadEdgeParams::ForLaw(const ConductanceLaw& law,
                                    double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw DomainError("bad-edge threshold must be finite and > 0");
  }
  const double epsilon = law.Cdf(threshold);
  if (!(epsilon > 0.0)) {
    throw DomainError("bad-edge threshold gives P(C <= M) = 0");
  }
  return {threshold, epsilon};
}

std::vector<double> BadEdgeFraction(std::span<const double> sample,
                                    const BadEdgeParams& params) {
  if (sample.empty()) throw DomainError("bad-edge sample is empty");
  std::vector<double> fraction(sample.size());
  std::uint64_t bad = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] <= params.threshold) ++bad;
    fraction[i] = static_cast<double>(bad) / static_cast<double>(i + 1);
  }
  return fraction;
}

// ---------------------------------------------------------------------------
// Edges above 0+

std::uint64_t CountEdgesAboveZero(const GraphSample& sample) {
  std::uint64_t count = 0;
  for (const auto& e : sample.edges) {
    if (std::min(e.u, e.v) <= 0 && std::max(e.u, e.v) > 0) ++count;
  }
  return count;
}

EdgesAboveZeroMoments HomogeneousEdgesAboveZero(const ModelConfig& config) {
  config.Validate();
  if (!config.kernel.is_constant()) {
    throw DomainError("closed-form moments need a constant kernel");
  }
  const double c = config.kernel.parameter();
  const ConnectionFunction& phi = config.connection;
  const Site n = config.window_radius;
  EdgesAboveZeroMoments out;
  double window_deficit = 0.0;
  for (Site m = 1; m <= 2 * n; ++m) {
    // Pairs (x, x+m) in the window with x <= 0 < x+m; on Z there are m.
    const auto pairs = static_cast<double>(std::min(m, 2 * n + 1 - m));
    const double p =
        config.backbone && m == 1 ? 1.0 : phi(c * static_cast<double>(m));
    out.mean += pairs * p;
    out.variance += pairs * p * (1.0 - p);
    window_deficit += (static_cast<double>(m) - pairs) * p;
  }

  const auto cutoff = static_cast<double>(2 * n);
  if (c == 0.0) {
    out.tail_bound = phi(0.0) > 0.0 ? kInf : 0.0;
  } else if (std::isinf(c)) {
    out.tail_bound = 0.0;
  } else if (phi.kind() == ConnectionFunction::Kind::kIndicator) {
    const double last = std::floor(phi.r0() / c);
    out.tail_bound = std::isinf(last) ? kInf
                     : last <= cutoff
                         ? 0.0
                         : 0.5 * (last * (last + 1.0) - cutoff * (cutoff + 1.0));
  } else {
    // m phi(c m) <= p c^-delta m^(1-delta), decreasing; bound by the integral.
    const double delta = phi.delta();
    out.tail_bound = delta > 2.0 ? phi.p() * std::pow(c, -delta) *
                                       std::pow(cutoff, 2.0 - delta) /
                                       (delta - 2.0)
                                 : kInf;
  }
  out.tail_bound += window_deficit;
  return out;
}

CountEstimate EdgesAboveZeroMc(const ModelConfig& config,
                               std::uint64_t replicas, std::uint64_t seed,
                               int workers) {
  if (replicas == 0) throw DomainError("replicas must be positive");
  std::vector<double> counts(replicas);
  ParallelFor(replicas, workers, [&](std::size_t r) {
    ModelConfig replica = config;
    replica.seed = DeriveSeed(seed, r);
    counts[r] = static_cast<double>(CountEdgesAboveZero(SampleGraph(replica)));
  });
  CountEstimate out;
  out.replicas = replicas;
  const auto r_count = static_cast<double>(replicas);
  for (double x : counts) out.mean += x;
  out.mean /= r_count;
  double squares = 0.0;
  for (double x : counts) squares += (x - out.mean) * (x - out.mean);
  out.standard_error =
      replicas > 1 ? std::sqrt(squares / (r_count - 1.0) / r_count) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Long edges

namespace {

Site ScaleLength(const ModelConfig& config, int scale) {
  if (scale < 0 || scale > 40) throw DomainError("scale index out of range");
  const Site length = Site{1} << scale;
  if (2 * length > config.window_radius) {
    throw DomainError("window radius " + std::to_string(config.window_radius) +
                      " is smaller than 2^(k+1) = " +
                      std::to_string(2 * length));
  }
  return length;
}

}  // namespace

double HomogeneousLongEdgeProbability(const ModelConfig& config, int scale) {
  config.Validate();
  if (!config.kernel.is_constant()) {
    throw DomainError("exact long-edge probability needs a constant kernel");
  }
  const Site length = ScaleLength(config, scale);
  const Site n = config.window_radius;
  const double c = config.kernel.parameter();
  double log_none = 0.0;
  for (Site d = length; d <= 2 * n; ++d) {
    // Left endpoints x in [-n, n-d] with x or x+d inside [-length, length].
    const Site hi = n - d;
    const Site in_first = Length(std::max(-n, -length), std::min(hi, length));
    const Site in_second =
        Length(std::max(-n, -length - d), std::min(hi, length - d));
    const Site in_both =
        Length(std::max({-n, -length, -length - d}),
               std::min({hi, length, length - d}));
    const Site pairs = in_first + in_second - in_both;
    if (pairs == 0) continue;
    const double p =
        config.backbone && d == 1 ? 1.0 : config.connection(c * static_cast<double>(d));
    if (p >= 1.0) return 1.0;
    log_none += static_cast<double>(pairs) * std::log1p(-p);
  }
  return -std::expm1(log_none);
}

LongEdgeEstimate LongEdgeProbability(const ModelConfig& config, int scale,
                                     std::uint64_t replicas, std::uint64_t seed,
                                     int workers) {
  config.Validate();
  if (replicas == 0) throw DomainError("replicas must be positive");
  const Site length = ScaleLength(config, scale);
  std::vector<std::uint8_t> hit(replicas, 0);
  ParallelFor(replicas, workers, [&](std::size_t r) {
    ModelConfig replica = config;
    replica.seed = DeriveSeed(seed, r);
    const GraphSample sample = SampleGraph(replica);
    for (const auto& e : sample.edges) {
      if (e.v - e.u >= length &&
          (std::llabs(e.u) <= length || std::llabs(e.v) <= length)) {
        hit[r] = 1;
        break;
      }
    }
  });
  LongEdgeEstimate out;
  out.scale = scale;
  out.replicas = replicas;
  std::uint64_t hits = 0;
  for (auto h : hit) hits += h;
  out.probability = static_cast<double>(hits) / static_cast<double>(replicas);
  out.standard_error = std::sqrt(out.probability * (1.0 - out.probability) /
                                 static_cast<double>(replicas));
  if (config.kernel.is_constant()) {
    out.exact = HomogeneousLongEdgeProbability(config, scale);
  }
  return out;
}

ScaleExponentFit FitScaleExponent(std::span<const LongEdgeEstimate> ladder) {
  std::vector<double> xs, ys, vars;
  for (const auto& est : ladder) {
    if (!(est.probability > 0.0)) continue;
    xs.push_back(static_cast<double>(est.scale));
    ys.push_back(std::log2(est.probability));
    const double rel = est.standard_error / (est.probability * std::log(2.0));
    vars.push_back(rel * rel);
  }
  ScaleExponentFit fit;
  fit.points = xs.size();
  if (xs.size() < 2) {
    fit.theta = kNaN;
    fit.standard_error = kNaN;
    return fit;
  }
  const auto count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.theta = -slope;
  // Residual scatter plus the propagated Monte Carlo error of each point.
  double residual = 0.0, propagated = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (my + slope * (xs[i] - mx));
    residual += e * e;
    const double w = (xs[i] - mx) / sxx;
    propagated += w * w * vars[i];
  }
  const double residual_var =
      xs.size() > 2 ? residual / (count - 2.0) / sxx : 0.0;
  fit.standard_error = std::sqrt(residual_var + propagated);
  return fit;
}

// ---------------------------------------------------------------------------
// Verdict

const char* VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kConsistentWithRecurrence:
      return "consistent-with-recurrence";
    case Verdict::kNotConsistent:
      return "not-consistent";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "";
}

VerdictReport RecurrenceVerdict(const ModelConfig& config,
                                const VerdictBudget& budget) {
  config.Validate();
  if (budget.max_scale < 1) throw DomainError("max_scale must be >= 1");
  VerdictReport report;

  report.delta_eff = EstimateDeltaEff(config.kernel, config.connection,
                                      budget.n_grid,
                                      budget.quadrature_resolution);
  const DeltaEffEstimate& delta = report.delta_eff;
  if (!delta.quadrature_converged) {
    report.flags.push_back("delta_eff: quadrature did not converge");
  }
  if (delta.divergent || delta.estimate - delta.half_width > 2.0) {
    report.regime = "strong";
  } else if (delta.IntervalContains(2.0)) {
    report.regime = "pseudo-scale-invariant";
    report.flags.push_back(
        "delta_eff interval contains 2: no conclusion in the "
        "pseudo-scale-invariant regime");
  } else {
    report.regime = "weak";
    report.flags.push_back("weak decay regime: delta_eff < 2");
  }

  ModelConfig ladder_config = config;
  ladder_config.window_radius = Site{2} << budget.max_scale;
  bool all_zero = true;
  for (int k = 1; k <= budget.max_scale; ++k) {
    report.long_edges.push_back(LongEdgeProbability(
        ladder_config, k, budget.long_edge_replicas,
        DeriveSeed(budget.seed, 0x10000 + static_cast<std::uint64_t>(k)),
        budget.workers));
    all_zero = all_zero && report.long_edges.back().probability == 0.0;
  }
  report.long_edge_fit = FitScaleExponent(report.long_edges);
  if (all_zero) {
    report.long_edges_summable = true;
  } else {
    report.long_edges_summable = report.long_edge_fit.points >= 2 &&
                                 report.long_edge_fit.lower_95() > 0.0;
  }
  if (!report.long_edges_summable) {
    report.flags.push_back(
        "long-edge scale probabilities not summable at 95% confidence");
  }

  std::vector<Site> radii;
  for (Site m : budget.decay_radii) {
    if (m <= config.window_radius) radii.push_back(m);
  }
  if (radii.size() < 2) {
    report.flags.push_back("decay: fewer than two radii fit in the window");
    report.decay.slope_defined = false;
    report.decay.slope = kNaN;
  } else {
    report.decay = ConductanceDecay(config, radii, budget.decay_replicas,
                                    DeriveSeed(budget.seed, 2), budget.workers);
    for (const auto& flag : report.decay.flags) {
      report.flags.push_back("decay: " + flag);
    }
  }
  report.decay_consistent = report.decay.slope_defined &&
                            report.decay.slope <= kDecaySlopeThreshold;
  if (report.decay.slope_defined && !report.decay_consistent) {
    report.flags.push_back("decay slope above " +
                           FormatReal(kDecaySlopeThreshold));
  }

  if (report.regime == "pseudo-scale-invariant") {
    report.verdict = Verdict::kInconclusive;
  } else if (report.regime == "strong" && report.long_edges_summable &&
             report.decay_consistent) {
    report.verdict = Verdict::kConsistentWithRecurrence;
  } else if (report.regime == "weak") {
    report.verdict = Verdict::kNotConsistent;
  } else {
    report.verdict = Verdict::kInconclusive;
  }
  return report;
}

}  // namespace lrp
