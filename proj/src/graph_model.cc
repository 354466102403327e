#include "lrp/graph_model.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "lrp/errors.h"
#include "lrp/rng.h"

namespace lrp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool IsMark(double u) { return u > 0.0 && u < 1.0; }

// Sparse table answering range-minimum queries over the marks.
class RangeMin {
 public:
  explicit RangeMin(const std::vector<double>& values) {
    levels_.push_back(values);
    for (std::size_t width = 2; width <= values.size(); width *= 2) {
      const auto& prev = levels_.back();
      std::vector<double> next(values.size() - width + 1);
      for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = std::min(prev[i], prev[i + width / 2]);
      }
      levels_.push_back(std::move(next));
    }
  }

  // min(values[lo..hi]), inclusive.
  double Query(std::size_t lo, std::size_t hi) const {
    const std::size_t len = hi - lo + 1;
    const int level = std::bit_width(len) - 1;
    const std::size_t width = std::size_t{1} << level;
    return std::min(levels_[level][lo], levels_[level][hi + 1 - width]);
  }

 private:
  std::vector<std::vector<double>> levels_;
};

}  // namespace

// ----------------------------------------------------------------------------
// KernelSpec

KernelSpec KernelSpec::Constant(double value) {
  if (!(value >= 0.0)) throw DomainError("constant kernel must be in [0,inf]");
  return KernelSpec(Kind::kConstant, value);
}

KernelSpec KernelSpec::Product(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("product kernel exponent must be finite and >= 0");
  }
  return KernelSpec(Kind::kProduct, gamma);
}

KernelSpec KernelSpec::Min(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("min kernel exponent must be finite and >= 0");
  }
  return KernelSpec(Kind::kMin, gamma);
}

KernelSpec KernelSpec::Custom(std::vector<std::vector<double>> table) {
  const std::size_t k = table.size();
  if (k == 0) throw DomainError("custom kernel table is empty");
  for (std::size_t i = 0; i < k; ++i) {
    if (table[i].size() != k) throw DomainError("custom kernel table not square");
    for (std::size_t j = 0; j < k; ++j) {
      if (!(table[i][j] >= 0.0)) {
        throw DomainError("custom kernel entries must be in [0,inf]");
      }
      if (table[i][j] != table[j][i]) {
        throw DomainError("custom kernel table must be symmetric");
      }
    }
  }
  KernelSpec kernel(Kind::kCustom, 0.0);
  kernel.suffix_min_ = table;
  for (auto& row : kernel.suffix_min_) {
    for (std::size_t j = k - 1; j-- > 0;) row[j] = std::min(row[j], row[j + 1]);
  }
  kernel.table_ = std::move(table);
  return kernel;
}

std::size_t KernelSpec::Cell(double mark) const {
  const std::size_t k = table_.size();
  return std::min(k - 1, static_cast<std::size_t>(mark * static_cast<double>(k)));
}

double KernelSpec::operator()(double s, double t) const {
  switch (kind_) {
    case Kind::kConstant:
      return parameter_;
    case Kind::kProduct:
      return std::pow(s * t, parameter_);
    case Kind::kMin:
      return std::pow(std::min(s, t), parameter_);
    case Kind::kCustom:
      return table_[Cell(s)][Cell(t)];
  }
  return parameter_;
}

double KernelSpec::LowerBound(double s, double t_min) const {
  if (kind_ == Kind::kCustom) return suffix_min_[Cell(s)][Cell(t_min)];
  return (*this)(s, t_min);
}

std::vector<double> KernelSpec::CellBoundaries() const {
  std::vector<double> out;
  if (kind_ == Kind::kCustom) {
    const std::size_t k = table_.size();
    for (std::size_t i = 1; i < k; ++i) {
      out.push_back(static_cast<double>(i) / static_cast<double>(k));
    }
  }
  return out;
}

std::string KernelSpec::Describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kConstant:
      out << "constant(" << FormatReal(parameter_) << ")";
      break;
    case Kind::kProduct:
      out << "product(" << FormatReal(parameter_) << ")";
      break;
    case Kind::kMin:
      out << "min(" << FormatReal(parameter_) << ")";
      break;
    case Kind::kCustom:
      out << "custom[";
      for (std::size_t i = 0; i < table_.size(); ++i) {
        if (i) out << ";";
        for (std::size_t j = 0; j < table_.size(); ++j) {
          if (j) out << ",";
          out << FormatReal(table_[i][j]);
        }
      }
      out << "]";
      break;
  }
  return out.str();
}

// ----------------------------------------------------------------------------
// ConnectionFunction

ConnectionFunction ConnectionFunction::Polynomial(double p, double delta) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("p must be in (0,1]");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("delta must be finite and > 0");
  }
  return ConnectionFunction(Kind::kPolynomial, p, delta, 0.0);
}

ConnectionFunction ConnectionFunction::Truncated(double p, double delta) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("p must be in (0,1]");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("delta must be finite and > 0");
  }
  return ConnectionFunction(Kind::kTruncated, p, delta, 0.0);
}

ConnectionFunction ConnectionFunction::Indicator(double r0) {
  if (!(r0 >= 0.0)) throw DomainError("indicator radius must be in [0,inf]");
  return ConnectionFunction(Kind::kIndicator, 1.0, kInf, r0);
}

double ConnectionFunction::operator()(double r) const {
  switch (kind_) {
    case Kind::kPolynomial:
      if (r <= 0.0) return 1.0;
      return std::min(1.0, p_ * std::pow(r, -delta_));
    case Kind::kTruncated:
      return p_ * std::pow(std::max(1.0, r), -delta_);
    case Kind::kIndicator:
      return r <= r0_ ? 1.0 : 0.0;
  }
  return 0.0;
}

std::vector<double> ConnectionFunction::Breakpoints() const {
  switch (kind_) {
    case Kind::kPolynomial:
      return {std::pow(p_, 1.0 / delta_)};
    case Kind::kTruncated:
      return {1.0};
    case Kind::kIndicator:
      return {r0_};
  }
  return {};
}

std::string ConnectionFunction::Describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::kPolynomial:
      out << "polynomial(" << FormatReal(p_) << "," << FormatReal(delta_) << ")";
      break;
    case Kind::kTruncated:
      out << "truncated(" << FormatReal(p_) << "," << FormatReal(delta_) << ")";
      break;
    case Kind::kIndicator:
      out << "indicator(" << FormatReal(r0_) << ")";
      break;
  }
  return out.str();
}

// ----------------------------------------------------------------------------
// ModelConfig

void ModelConfig::Validate() const {
  if (window_radius < 1) throw DomainError("window_radius must be >= 1");
  if (window_radius > (Site{1} << 40)) throw DomainError("window_radius too large");
  if (!(long_edge_conductance > 0.0)) {
    throw DomainError("long_edge_conductance must be > 0");
  }
}

std::string ModelConfig::Describe() const {
  std::ostringstream out;
  out << "n=" << window_radius << " kernel=" << kernel.Describe()
      << " phi=" << connection.Describe() << " backbone=" << (backbone ? 1 : 0)
      << " long_c=" << FormatReal(long_edge_conductance) << " seed=" << seed;
  return out.str();
}

// ----------------------------------------------------------------------------
// Sampling

double EdgeProbability(Site x, Site y, double u, double v,
                       const ModelConfig& config) {
  if (x == y) throw DomainError("edge_probability: x == y");
  if (!IsMark(u) || !IsMark(v)) {
    throw DomainError("edge_probability: marks must lie in (0,1)");
  }
  const Site distance = x < y ? y - x : x - y;
  if (config.backbone && distance == 1) return 1.0;
  return config.connection(config.kernel(u, v) * static_cast<double>(distance));
}

GraphSample SampleGraph(const ModelConfig& config) {
  config.Validate();
  GraphSample sample;
  sample.config = config;
  Rng rng(config.seed);

  const Site n = config.window_radius;
  const std::size_t count = static_cast<std::size_t>(2 * n + 1);
  const KernelSpec& kernel = config.kernel;
  const ConnectionFunction& phi = config.connection;
  const bool marked = !kernel.is_constant();

  const std::uint64_t kNoMore = std::numeric_limits<std::uint64_t>::max();
  if (!marked) {
    // Homogeneous: all count - d pairs at distance d share one probability,
    // so walk each distance class by geometric skipping.
    const double c = kernel.parameter();
    for (std::size_t d = 1; d < count; ++d) {
      const std::size_t pairs = count - d;
      if (config.backbone && d == 1) {
        for (std::size_t i = 0; i < pairs; ++i) {
          const Site x = static_cast<Site>(i) - n;
          sample.edges.push_back({x, x + 1, 1.0});
        }
        continue;
      }
      const double p = phi(c * static_cast<double>(d));
      if (p <= 0.0) break;  // phi is non-increasing
      std::size_t i = 0;
      while (true) {
        const std::uint64_t skip = rng.GeometricFailures(p, kNoMore);
        if (skip >= pairs - i) break;
        i += skip;
        const Site x = static_cast<Site>(i) - n;
        sample.edges.push_back(
            {x, x + static_cast<Site>(d), config.long_edge_conductance});
        if (++i == pairs) break;
      }
    }
    std::sort(sample.edges.begin(), sample.edges.end(),
              [](const SampledEdge& a, const SampledEdge& b) {
                return a.u != b.u ? a.u < b.u : a.v < b.v;
              });
    return sample;
  }

  sample.marks.resize(count);
  for (auto& mark : sample.marks) mark = rng.Uniform01();
  const RangeMin range_min(sample.marks);

  // For each x, candidate partners y = x + d are visited in dyadic distance
  // blocks [d_lo, 2 d_lo). Inside a block every pair has probability at most
  // q = phi(inf g * d_lo), so candidates are drawn by geometric skipping with
  // rate q and accepted with probability p_xy / q.
  for (std::size_t i = 0; i < count; ++i) {
    const Site x = static_cast<Site>(i) - n;
    if (config.backbone && i + 1 < count) {
      sample.edges.push_back({x, x + 1, 1.0});
    }
    const std::size_t max_d = count - 1 - i;
    const double u = sample.marks[i];
    std::size_t d_lo = config.backbone ? 2 : 1;
    while (d_lo <= max_d) {
      const std::size_t d_hi = std::min(max_d, 2 * d_lo - 1);
      const double g_floor =
          kernel.LowerBound(u, range_min.Query(i + d_lo, i + d_hi));
      const double q = phi(g_floor * static_cast<double>(d_lo));
      if (q > 0.0) {
        std::size_t d = d_lo;
        while (true) {
          const std::uint64_t skip = rng.GeometricFailures(q, kNoMore);
          if (skip > d_hi - d) break;
          d += skip;
          const double p = phi(kernel(u, sample.marks[i + d]) *
                               static_cast<double>(d));
          if (p >= q || rng.Uniform01() * q < p) {
            sample.edges.push_back(
                {x, x + static_cast<Site>(d), config.long_edge_conductance});
          }
          if (d == d_hi) break;
          ++d;
        }
      }
      d_lo = d_hi + 1;
    }
  }
  return sample;
}

// ----------------------------------------------------------------------------
// Export

std::string FormatReal(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void WriteGraphSample(const GraphSample& sample, std::ostream& out,
                      const std::vector<std::string>& extra_header) {
  out << "# n=" << sample.window_radius() << " seed=" << sample.config.seed
      << "\n";
  for (const auto& line : extra_header) out << "# " << line << "\n";
  if (sample.has_marks()) {
    const Site n = sample.window_radius();
    for (Site z = -n; z <= n; ++z) {
      out << "m " << z << " " << FormatReal(sample.mark(z)) << "\n";
    }
  }
  for (const auto& edge : sample.edges) {
    out << edge.u << " " << edge.v << " " << FormatReal(edge.conductance)
        << "\n";
  }
}

}  // namespace lrp
