#ifndef LRP_ESTIMATORS_H_
#define LRP_ESTIMATORS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrp/graph_model.h"
#include "lrp/rng.h"

namespace lrp {

// ---------------------------------------------------------------------------
// Effective decay exponent

// I(n) = int_{1/n}^1 int_{1/n}^1 phi(g(s,t) n) ds dt, evaluated by composite
// Gauss-Legendre quadrature in logarithmic coordinates with panel breaks at
// the kinks of the integrand. `resolution` is the number of panels per axis.
struct MarkAveragedIntegral {
  double value = 0.0;
  // |I(2 * resolution) - I(resolution)| / I(2 * resolution).
  double refinement_error = 0.0;
  bool converged = true;
};

MarkAveragedIntegral MarkAveragedConnection(const KernelSpec& kernel,
                                            const ConnectionFunction& phi,
                                            double n, int resolution);

// Successive quadrature refinements must agree to this relative tolerance.
inline constexpr double kQuadratureTolerance = 1e-8;
// Smallest half-width reported for the delta_eff interval.
inline constexpr double kDeltaEffMinHalfWidth = 0.05;

struct DeltaEffEstimate {
  // Negated log-log slope of I(n), fitted on the last half of the grid. The
  // negation makes homogeneous percolation with phi ~ r^-delta give delta.
  // +inf when I(n) vanishes (divergent).
  double estimate = 0.0;
  // Finite-size uncertainty: max(kDeltaEffMinHalfWidth, 2 * spread of the
  // local exponents inside the fitted range).
  double half_width = 0.0;
  bool divergent = false;
  bool quadrature_converged = true;
  std::vector<double> scales;
  std::vector<double> integrals;
  std::vector<double> refinement_errors;
  // local_exponents[i] is the negated slope between scales[i] and scales[i+1].
  std::vector<double> local_exponents;

  bool IntervalContains(double value) const {
    return !divergent && estimate - half_width <= value &&
           value <= estimate + half_width;
  }
};

// Throws DomainError unless n_grid is strictly increasing with >= 2 entries,
// all >= 2, and resolution >= 1.
DeltaEffEstimate EstimateDeltaEff(const KernelSpec& kernel,
                                  const ConnectionFunction& phi,
                                  std::span<const double> n_grid,
                                  int resolution);

// ---------------------------------------------------------------------------
// Conductance decay on Z_nn

// Law of i.i.d. nearest-neighbour conductances.
struct ConductanceLaw {
  enum class Kind { kUnit, kConstant, kExponential, kPareto };

  Kind kind = Kind::kUnit;
  // constant value, exponential rate, or Pareto tail index (scale 1).
  double parameter = 1.0;

  static ConductanceLaw Unit() { return {Kind::kUnit, 1.0}; }
  static ConductanceLaw Constant(double c) { return {Kind::kConstant, c}; }
  static ConductanceLaw Exponential(double rate) {
    return {Kind::kExponential, rate};
  }
  static ConductanceLaw Pareto(double tail_index) {
    return {Kind::kPareto, tail_index};
  }

  void Validate() const;
  double Sample(Rng& rng) const;
  // P(C <= m).
  double Cdf(double m) const;
  std::string Describe() const;
};

struct DecayFit {
  std::vector<Site> radii;
  // Mean of C(0 <-> {|z| >= m}) per radius and its Monte Carlo standard error.
  std::vector<double> mean;
  std::vector<double> standard_error;
  // Least-squares slope of log(mean) against log(m); jackknife standard error
  // over replicas. NaN when some mean is zero.
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::uint64_t replicas = 0;
  bool slope_defined = true;
  std::vector<std::string> flags;
};

// Radii must be strictly increasing and >= 1. The boundary conductance of
// every replica follows from the series law on each half-line.
DecayFit ConductanceDecay(const ConductanceLaw& law, std::span<const Site> radii,
                          std::uint64_t replicas, std::uint64_t seed,
                          int workers = 1);

// Same estimator on sampled graphs: replica r samples the model with seed
// DeriveSeed(seed, r) and solves C(0 <-> {|z| >= m}) in its cluster. Radii
// must not exceed config.window_radius.
DecayFit ConductanceDecay(const ModelConfig& config, std::span<const Site> radii,
                          std::uint64_t replicas, std::uint64_t seed,
                          int workers = 1);

// Slope of log(y) on log(x) by ordinary least squares.
double LogLogSlope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Bad edges

struct BadEdgeParams {
  double threshold = 1.0;  // M
  double target_fraction = 1.0;  // epsilon = P(C <= M)

  static BadEdgeParams ForLaw(const ConductanceLaw& law, double threshold);
};

// fraction[k] = #{i <= k : sample[i] <= M} / (k + 1).
std::vector<double> BadEdgeFraction(std::span<const double> sample,
                                    const BadEdgeParams& params);

// ---------------------------------------------------------------------------
// Edges above 0+

// Number of edges xy with x <= 0 < y.
std::uint64_t CountEdgesAboveZero(const GraphSample& sample);

// Exact mean and variance of the count on the window {-n..n} for a constant
// kernel, plus an upper bound on the full-line mean sum_m m phi(c m) minus the
// window mean (inf when that series diverges).
struct EdgesAboveZeroMoments {
  double mean = 0.0;
  double variance = 0.0;
  double tail_bound = 0.0;
};

EdgesAboveZeroMoments HomogeneousEdgesAboveZero(const ModelConfig& config);

struct CountEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t replicas = 0;
};

// Mean of CountEdgesAboveZero over replicas sampled with derived seeds.
CountEstimate EdgesAboveZeroMc(const ModelConfig& config,
                               std::uint64_t replicas, std::uint64_t seed,
                               int workers = 1);

// ---------------------------------------------------------------------------
// Long edges at dyadic scales

struct LongEdgeEstimate {
  int scale = 0;  // k
  double probability = 0.0;
  double standard_error = 0.0;
  std::uint64_t replicas = 0;
  // 1 - prod(1 - phi) over qualifying pairs; constant kernels only.
  std::optional<double> exact;
};

// P(exists x in [-2^k, 2^k], y in the window: |x-y| >= 2^k, xy in E).
// Throws DomainError when 2^(k+1) exceeds config.window_radius.
LongEdgeEstimate LongEdgeProbability(const ModelConfig& config, int scale,
                                     std::uint64_t replicas, std::uint64_t seed,
                                     int workers = 1);

// Exact value of the above for a constant kernel.
double HomogeneousLongEdgeProbability(const ModelConfig& config, int scale);

// Fit of P_k ~ 2^(-theta k) over the scales with positive estimates.
struct ScaleExponentFit {
  double theta = 0.0;
  double standard_error = 0.0;
  std::size_t points = 0;
  // theta - 1.96 * standard_error.
  double lower_95() const { return theta - 1.96 * standard_error; }
};

ScaleExponentFit FitScaleExponent(std::span<const LongEdgeEstimate> ladder);

// ---------------------------------------------------------------------------
// Aggregated report

struct VerdictBudget {
  std::vector<double> n_grid{1e2, 1e3, 1e4, 1e5, 1e6};
  int quadrature_resolution = 32;
  int max_scale = 6;  // long-edge ladder k = 1..max_scale
  std::uint64_t long_edge_replicas = 2000;
  std::vector<Site> decay_radii{4, 8, 16, 32};
  std::uint64_t decay_replicas = 40;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Decay slopes at or below this value count as consistent with O(1/m).
inline constexpr double kDecaySlopeThreshold = -0.85;

enum class Verdict {
  kConsistentWithRecurrence,
  kNotConsistent,
  kInconclusive,
};

const char* VerdictName(Verdict v);

struct VerdictReport {
  DeltaEffEstimate delta_eff;
  std::string regime;  // "strong", "weak", "pseudo-scale-invariant"
  std::vector<LongEdgeEstimate> long_edges;
  ScaleExponentFit long_edge_fit;
  bool long_edges_summable = false;
  DecayFit decay;
  bool decay_consistent = false;
  Verdict verdict = Verdict::kInconclusive;
  // Sub-estimator flags and refusals; empty when nothing was flagged.
  std::vector<std::string> flags;
};

// Runs the three diagnostics and states which sufficient recurrence criteria
// the numbers are consistent with. Never a proof. Refuses (kInconclusive) when
// the delta_eff interval contains 2. The long-edge ladder is sampled on the
// window {-2^(K+1), ..., 2^(K+1)}; the decay experiment uses config as is.
VerdictReport RecurrenceVerdict(const ModelConfig& config,
                                const VerdictBudget& budget);

}  // namespace lrp

#endif  // LRP_ESTIMATORS_H_
