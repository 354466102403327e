#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

#include "lrp/errors.h"
#include "lrp/estimators.h"

namespace lrp {
namespace {

constexpr int kOrder = 8;

struct GaussLegendre {
  std::array<double, kOrder> nodes;
  std::array<double, kOrder> weights;
};

// Nodes and weights on [-1, 1] by Newton iteration on P_8.
const GaussLegendre& Rule() {
  static const GaussLegendre rule = [] {
    GaussLegendre r;
    for (int i = 0; i < kOrder; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
      double derivative = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= kOrder; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        derivative = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double step = p1 / derivative;
        x -= step;
        if (std::abs(step) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * derivative * derivative);
    }
    return r;
  }();
  return rule;
}

// Integral of f over [lo, hi] split at `breaks`, with about `panels` panels
// over a reference length `span`.
double Composite(const std::function<double(double)>& f, double lo, double hi,
                 std::vector<double> breaks, int panels, double span) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  const GaussLegendre& rule = Rule();
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = std::max(lo, breaks[s]);
    const double b = std::min(hi, breaks[s + 1]);
    if (!(b > a)) continue;
    const int pieces = std::max(
        1, static_cast<int>(std::ceil(panels * (b - a) / span - 1e-12)));
    const double h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (int i = 0; i < kOrder; ++i) {
        total += 0.5 * h * rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
      }
    }
  }
  return total;
}

// Root of a non-increasing function on [lo, hi], if it changes sign there.
std::optional<double> DecreasingRoot(const std::function<double(double)>& f,
                                     double lo, double hi) {
  double f_lo = f(lo), f_hi = f(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) return std::nullopt;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Integrate(const KernelSpec& kernel, const ConnectionFunction& phi,
                 double n, int resolution) {
  // s = exp(-x), t = exp(-y) with x, y in [0, L].
  const double length = std::log(n);
  if (!(length > 0.0)) return 0.0;

  std::vector<double> cell_breaks;
  for (double b : kernel.CellBoundaries()) cell_breaks.push_back(-std::log(b));
  const std::vector<double> radii = phi.Breakpoints();
  const bool smooth_kernel =
      kernel.kind() == KernelSpec::Kind::kProduct ||
      kernel.kind() == KernelSpec::Kind::kMin;

  auto g = [&](double x, double y) {
    return kernel(std::exp(-x), std::exp(-y));
  };

  std::vector<double> outer_breaks = cell_breaks;
  if (smooth_kernel) {
    for (double r : radii) {
      if (!(r > 0.0) || !std::isfinite(r)) continue;
      for (int edge = 0; edge < 3; ++edge) {
        auto crossing = [&](double x) {
          const double y = edge == 0 ? 0.0 : edge == 1 ? length : x;
          return g(x, y) * n - r;
        };
        if (auto root = DecreasingRoot(crossing, 0.0, length)) {
          outer_breaks.push_back(*root);
        }
      }
    }
  }

  auto outer = [&](double x) {
    std::vector<double> inner_breaks = cell_breaks;
    if (kernel.kind() == KernelSpec::Kind::kMin) inner_breaks.push_back(x);
    if (smooth_kernel) {
      for (double r : radii) {
        if (!(r > 0.0) || !std::isfinite(r)) continue;
        auto crossing = [&](double y) { return g(x, y) * n - r; };
        if (auto root = DecreasingRoot(crossing, 0.0, length)) {
          inner_breaks.push_back(*root);
        }
      }
    }
    auto inner = [&](double y) { return phi(g(x, y) * n) * std::exp(-y); };
    return std::exp(-x) *
           Composite(inner, 0.0, length, inner_breaks, resolution, length);
  };
  return Composite(outer, 0.0, length, outer_breaks, resolution, length);
}

}  // namespace

MarkAveragedIntegral MarkAveragedConnection(const KernelSpec& kernel,
                                            const ConnectionFunction& phi,
                                            double n, int resolution) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("scale n must be >= 1");
  if (resolution < 1) throw DomainError("quadrature resolution must be >= 1");
  MarkAveragedIntegral out;
  const double coarse = Integrate(kernel, phi, n, resolution);
  const double fine = Integrate(kernel, phi, n, 2 * resolution);
  out.value = fine;
  if (fine > 0.0) {
    out.refinement_error = std::abs(fine - coarse) / fine;
  } else {
    out.refinement_error = coarse == 0.0 ? 0.0 : 1.0;
  }
  out.converged = out.refinement_error <= kQuadratureTolerance;
  return out;
}

DeltaEffEstimate EstimateDeltaEff(const KernelSpec& kernel,
                                  const ConnectionFunction& phi,
                                  std::span<const double> n_grid,
                                  int resolution) {
  if (n_grid.size() < 2) throw DomainError("n_grid needs at least two scales");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(n_grid[i] >= 2.0) || !std::isfinite(n_grid[i])) {
      throw DomainError("n_grid entries must be finite and >= 2");
    }
    if (i > 0 && !(n_grid[i] > n_grid[i - 1])) {
      throw DomainError("n_grid must be strictly increasing");
    }
  }
  DeltaEffEstimate est;
  for (double n : n_grid) {
    const MarkAveragedIntegral integral =
        MarkAveragedConnection(kernel, phi, n, resolution);
    est.scales.push_back(n);
    est.integrals.push_back(integral.value);
    est.refinement_errors.push_back(integral.refinement_error);
    est.quadrature_converged = est.quadrature_converged && integral.converged;
  }
  for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
    const double a = est.integrals[i], b = est.integrals[i + 1];
    est.local_exponents.push_back(
        a > 0.0 && b > 0.0
            ? -(std::log(b) - std::log(a)) / (std::log(n_grid[i + 1]) -
                                              std::log(n_grid[i]))
            : std::numeric_limits<double>::infinity());
  }

  // Least squares on the last half of the grid.
  const std::size_t count = n_grid.size();
  const std::size_t fit_from = count - std::max<std::size_t>(2, (count + 1) / 2);
  std::vector<double> xs, ys;
  for (std::size_t i = fit_from; i < count; ++i) {
    if (!(est.integrals[i] > 0.0)) {
      est.divergent = true;
      est.estimate = std::numeric_limits<double>::infinity();
      est.half_width = 0.0;
      return est;
    }
    xs.push_back(n_grid[i]);
    ys.push_back(est.integrals[i]);
  }
  est.estimate = -LogLogSlope(xs, ys);
  double lo = est.estimate, hi = est.estimate;
  for (std::size_t i = fit_from; i + 1 < count; ++i) {
    lo = std::min(lo, est.local_exponents[i]);
    hi = std::max(hi, est.local_exponents[i]);
  }
  est.half_width = std::max(kDeltaEffMinHalfWidth, 2.0 * (hi - lo));
  return est;
}

}  // namespace lrp
