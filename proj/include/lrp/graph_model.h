#ifndef LRP_GRAPH_MODEL_H_
#define LRP_GRAPH_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lrp {

// A vertex of Z (or of the window {-n,...,n}).
using Site = std::int64_t;

// The kernel g: (0,1)^2 -> [0,inf] that rescales distances by vertex marks.
//
//   constant(c):  g(s,t) = c
//   product(gamma): g(s,t) = s^gamma * t^gamma
//   min(gamma):   g(s,t) = min(s,t)^gamma
//   custom(table): piecewise constant on a k x k grid of mark cells; the table
//                  must be symmetric so that the undirected model is well
//                  defined.
//
// All built-in kernels are symmetric and non-decreasing in each argument.
class KernelSpec {
 public:
  enum class Kind { kConstant, kProduct, kMin, kCustom };

  static KernelSpec Constant(double value);
  static KernelSpec Product(double gamma);
  static KernelSpec Min(double gamma);
  static KernelSpec Custom(std::vector<std::vector<double>> table);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::kConstant; }
  // c for constant, gamma for product/min, unused for custom.
  double parameter() const { return parameter_; }
  const std::vector<std::vector<double>>& table() const { return table_; }

  double operator()(double s, double t) const;

  // inf { g(s, t') : t' >= t_min }. Used to bound connection probabilities
  // over a block of candidate partners.
  double LowerBound(double s, double t_min) const;

  // Mark values at which g is discontinuous or not smooth in one argument.
  // Empty for the smooth built-ins except min (whose kink is on the diagonal).
  std::vector<double> CellBoundaries() const;

  std::string Describe() const;

 private:
  KernelSpec(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  std::size_t Cell(double mark) const;

  Kind kind_;
  double parameter_;
  std::vector<std::vector<double>> table_;
  // suffix_min_[row][col] = min(table_[row][col..k-1]).
  std::vector<std::vector<double>> suffix_min_;
};

// The connection profile phi: [0,inf] -> [0,1], non-increasing.
//
//   polynomial(p, delta): r -> min(1, p r^-delta)
//   truncated(p, delta):  r -> p max(1, r)^-delta
//   indicator(r0):        r -> 1{r <= r0}   (r0 = 0 gives phi = 0 on r > 0)
class ConnectionFunction {
 public:
  enum class Kind { kPolynomial, kTruncated, kIndicator };

  static ConnectionFunction Polynomial(double p, double delta);
  static ConnectionFunction Truncated(double p, double delta);
  static ConnectionFunction Indicator(double r0);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  double delta() const { return delta_; }
  double r0() const { return r0_; }

  double operator()(double r) const;

  // Radii at which phi is not smooth (the point where the cap at 1 ends, or
  // the indicator jump).
  std::vector<double> Breakpoints() const;

  std::string Describe() const;

 private:
  ConnectionFunction(Kind kind, double p, double delta, double r0)
      : kind_(kind), p_(p), delta_(delta), r0_(r0) {}

  Kind kind_;
  double p_;
  double delta_;
  double r0_;
};

struct ModelConfig {
  Site window_radius = 1;
  KernelSpec kernel = KernelSpec::Constant(1.0);
  ConnectionFunction connection = ConnectionFunction::Polynomial(1.0, 2.0);
  // Include every nearest-neighbour edge (z, z+1) with unit conductance.
  bool backbone = true;
  double long_edge_conductance = 1.0;
  std::uint64_t seed = 0;

  // Throws DomainError.
  void Validate() const;
  std::string Describe() const;
};

struct SampledEdge {
  Site u;  // u < v
  Site v;
  double conductance;

  friend bool operator==(const SampledEdge&, const SampledEdge&) = default;
};

struct GraphSample {
  ModelConfig config;
  // marks[z + n] = U_z; empty when the kernel is constant.
  std::vector<double> marks;
  // Sorted by (u, v); no self-loops, no duplicates.
  std::vector<SampledEdge> edges;

  Site window_radius() const { return config.window_radius; }
  bool has_marks() const { return !marks.empty(); }
  double mark(Site z) const { return marks.at(z + config.window_radius); }
};

// phi(g(u,v) |x-y|), or 1 for a backbone pair. Throws DomainError when x == y
// or a mark lies outside (0,1).
double EdgeProbability(Site x, Site y, double u, double v,
                       const ModelConfig& config);

// Draws marks i.i.d. Uniform(0,1) and then every non-backbone pair of the
// window independently with probability EdgeProbability. The output is a
// deterministic function of config (including config.seed).
GraphSample SampleGraph(const ModelConfig& config);

// Edge-list export:
//   # n=<window_radius> seed=<seed>
//   m <z> <mark>          (one per vertex, only when marks exist)
//   <u> <v> <conductance>
// extra_header lines are written verbatim after the first line, each
// prefixed with "# ".
void WriteGraphSample(const GraphSample& sample, std::ostream& out,
                      const std::vector<std::string>& extra_header = {});

// Shortest round-trip decimal representation; "inf" for infinity.
std::string FormatReal(double value);

}  // namespace lrp

#endif  // LRP_GRAPH_MODEL_H_
