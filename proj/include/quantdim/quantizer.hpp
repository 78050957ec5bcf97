#pragma once

// Quantization errors of real order r: distortion of a codebook, codebook
// optimization (grid dynamic programming in 1-d, Lloyd iterations, exhaustive
// subsets), error curves with dimension and coefficient fits, and the
// density functional Phi_r.
//
// Orientation: for r > 0 the distortion V = int d(x,A)^r is minimized, for
// r = 0 the log-distortion int log d(x,A) is minimized, and for r < 0 V is
// maximized since e = V^(1/r) is then decreasing in V.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "quantdim/density.hpp"
#include "quantdim/dyadic_measure.hpp"
#include "quantdim/error.hpp"
#include "quantdim/oracles.hpp"

namespace quantdim {

enum class Norm { Euclid, Max };
enum class Strategy { Dp1d, Lloyd, Exhaustive };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Dp1d:
      return "dp1d";
    case Strategy::Lloyd:
      return "lloyd";
    case Strategy::Exhaustive:
      return "exhaustive";
  }
  return "unknown";
}

inline const char* norm_name(Norm n) { return n == Norm::Euclid ? "euclid" : "max"; }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using Point = std::vector<double>;
using Codebook = std::vector<Point>;

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

/// Absolutely continuous law on (0,1] integrated cell by cell.
struct DensityTarget {
  std::string name;
  Density1d density;
};

/// Finitely many weighted points in (0,1]^d: exact atoms, or cube centers of
/// a measure tree standing in for the cube masses.
struct PointTarget {
  int dim = 1;
  std::vector<double> coords;   ///< point i occupies coords[i*dim, (i+1)*dim)
  std::vector<double> weights;  ///< normalized to sum 1
  bool exact_atoms = true;
  double cell_side = 0.0;       ///< side of the cubes behind each point (measure mode)

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, static_cast<std::size_t>(dim)}; }

  static PointTarget from_atoms(const AtomicSpec& spec, int dim) {
    PointTarget t;
    t.dim = dim;
    double total = 0.0;
    for (double w : spec.weights) total += w;
    // merge coincident atoms, keep a deterministic order
    std::vector<std::pair<Point, double>> atoms;
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
      if (static_cast<int>(spec.points[i].size()) != dim) throw SpecError("atom dimension mismatch");
      atoms.emplace_back(spec.points[i], spec.weights[i] / total);
    }
    std::sort(atoms.begin(), atoms.end());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (!t.weights.empty() && std::equal(atoms[i].first.begin(), atoms[i].first.end(), t.coords.end() - dim)) {
        t.weights.back() += atoms[i].second;
        continue;
      }
      t.coords.insert(t.coords.end(), atoms[i].first.begin(), atoms[i].first.end());
      t.weights.push_back(atoms[i].second);
    }
    return t;
  }

  /// Cube centers and masses of level `level` (Morton order, spatially blocked).
  static PointTarget from_measure(const DyadicMeasure& m, int level) {
    PointTarget t;
    t.dim = m.dimension();
    t.exact_atoms = false;
    t.cell_side = std::ldexp(1.0, -level);
    const double total = m.total();
    for (std::size_t i = 0; i < m.level_size(level); ++i) {
      const CubeIndex q = m.cube(level, i);
      for (int k = 0; k < t.dim; ++k) t.coords.push_back(q.center(k));
      t.weights.push_back(m.masses(level)[i] / total);
    }
    return t;
  }
};

using IntegrationTarget = std::variant<DensityTarget, PointTarget>;

inline int target_dim(const IntegrationTarget& t) {
  return std::holds_alternative<DensityTarget>(t) ? 1 : std::get<PointTarget>(t).dim;
}

inline DensityTarget density_target(const std::string& name) {
  return DensityTarget{name, oracles::example_density(name).density};
}

/// Uniform law on (lo, hi] as a piecewise density.
inline DensityTarget uniform_on(double lo, double hi) {
  return DensityTarget{"uniform(" + std::to_string(lo) + "," + std::to_string(hi) + "]",
                       Density1d::piecewise({{lo, hi, {1.0 / (hi - lo)}}})};
}

// ---------------------------------------------------------------------------
// Distortion
// ---------------------------------------------------------------------------

inline double distance(std::span<const double> x, std::span<const double> a, Norm norm) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - a[i]);
    s = norm == Norm::Euclid ? s + d * d : std::max(s, d);
  }
  return norm == Norm::Euclid ? std::sqrt(s) : s;
}

/// d^r, or log d at r = 0, with the limits at d = 0.
inline double kernel_value(double d, double r) {
  if (r == 0.0) return d > 0.0 ? std::log(d) : -kInfinity;
  if (d == 0.0) return r > 0.0 ? 0.0 : kInfinity;
  return std::pow(d, r);
}

/// -1: minimize V, +1: maximize V.
inline int orientation(double r) { return r < 0.0 ? 1 : -1; }

inline bool better(double a, double b, double r) { return orientation(r) > 0 ? a > b : a < b; }

struct Distortion {
  double value = 0.0;
  bool divergent = false;     ///< V = +inf for r < 0 (error 0)
  double error_bound = 0.0;   ///< measure mode: bound on |V - V(cube masses)|
};

inline double error_from_distortion(double v, double r) {
  if (r == 0.0) return std::exp(v);
  if (r < 0.0 && std::isinf(v) && v > 0.0) return 0.0;
  return std::pow(v, 1.0 / r);
}

namespace detail {

inline std::vector<double> sorted_unique_1d(const Codebook& a) {
  std::vector<double> xs;
  for (const auto& p : a) {
    if (p.size() != 1) throw DomainError("density targets are one-dimensional");
    xs.push_back(p[0]);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

inline Kernel kernel_of(double r) { return r == 0.0 ? Kernel::Log : Kernel::Power; }

/// int over [a, b] of k(|x - c|) h dx where c is a or b (or outside).
inline double side_cost(const Density1d& h, double c, double a, double b, double r) {
  if (!(b > a)) return 0.0;
  const Integral v = h.cell_integral(c, a, b, r, kernel_of(r));
  if (v.divergent) return kInfinity;
  return v.value;
}

/// Cost of the Voronoi cell (lo, hi] served by c in (lo, hi] closure.
inline double cell_cost(const Density1d& h, double c, double lo, double hi, double r) {
  const double cl = std::clamp(c, lo, hi);
  return side_cost(h, c, lo, cl, r) + side_cost(h, c, cl, hi, r);
}

}  // namespace detail

inline Distortion distortion(const DensityTarget& t, const Codebook& a, double r) {
  if (a.empty()) throw DomainError("codebook must be nonempty");
  Distortion out;
  if (r <= -1.0) {
    out.value = kInfinity;
    out.divergent = true;
    return out;
  }
  const auto xs = detail::sorted_unique_1d(a);
  double v = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double lo = j == 0 ? 0.0 : 0.5 * (xs[j - 1] + xs[j]);
    const double hi = j + 1 == xs.size() ? 1.0 : 0.5 * (xs[j] + xs[j + 1]);
    v += detail::cell_cost(t.density, xs[j], lo, hi, r);
    if (std::isinf(v)) break;
  }
  out.value = v;
  out.divergent = r < 0.0 && std::isinf(v);
  return out;
}

namespace detail {

/// Nearest codebook index (ties to the lower index) and distance for every
/// target point, pruning codebook candidates per block of consecutive points.
struct Assignment {
  std::vector<std::uint32_t> index;
  std::vector<double> dist;
};

inline constexpr std::size_t kBlock = 128;

inline Assignment assign(const PointTarget& t, const Codebook& a, Norm norm) {
  Assignment out;
  const std::size_t n = t.size();
  const int d = t.dim;
  out.index.resize(n);
  out.dist.resize(n);
  std::vector<double> dmin(a.size()), dmax(a.size());
  std::vector<std::uint32_t> cand;
  for (std::size_t b0 = 0; b0 < n; b0 += kBlock) {
    const std::size_t b1 = std::min(n, b0 + kBlock);
    std::array<double, kMaxDim> lo{}, hi{};
    for (int k = 0; k < d; ++k) {
      lo[k] = kInfinity;
      hi[k] = -kInfinity;
    }
    for (std::size_t i = b0; i < b1; ++i)
      for (int k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], t.coords[i * d + k]);
        hi[k] = std::max(hi[k], t.coords[i * d + k]);
      }
    double threshold = kInfinity;
    for (std::size_t c = 0; c < a.size(); ++c) {
      double smin = 0.0, smax = 0.0;
      for (int k = 0; k < d; ++k) {
        const double x = a[c][k];
        const double gap = x < lo[k] ? lo[k] - x : (x > hi[k] ? x - hi[k] : 0.0);
        const double far = std::max(std::abs(x - lo[k]), std::abs(x - hi[k]));
        if (norm == Norm::Euclid) {
          smin += gap * gap;
          smax += far * far;
        } else {
          smin = std::max(smin, gap);
          smax = std::max(smax, far);
        }
      }
      dmin[c] = norm == Norm::Euclid ? std::sqrt(smin) : smin;
      dmax[c] = norm == Norm::Euclid ? std::sqrt(smax) : smax;
      threshold = std::min(threshold, dmax[c]);
    }
    cand.clear();
    const double slack = threshold * (1.0 + 1e-12);
    for (std::size_t c = 0; c < a.size(); ++c)
      if (dmin[c] <= slack) cand.push_back(static_cast<std::uint32_t>(c));
    for (std::size_t i = b0; i < b1; ++i) {
      const auto x = t.point(i);
      double best = kInfinity;
      std::uint32_t arg = cand.front();
      for (auto c : cand) {
        const double dist = distance(x, a[c], norm);
        if (dist < best) {
          best = dist;
          arg = c;
        }
      }
      out.index[i] = arg;
      out.dist[i] = best;
    }
  }
  return out;
}

inline Distortion point_distortion(const PointTarget& t, const Assignment& as, double r, Norm norm) {
  Distortion out;
  double v = 0.0;
  double bound = 0.0;
  const double radius =
      t.exact_atoms ? 0.0 : (norm == Norm::Euclid ? t.cell_side * std::sqrt(static_cast<double>(t.dim)) / 2.0
                                                  : t.cell_side / 2.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dist = as.dist[i];
    v += t.weights[i] * kernel_value(dist, r);
    if (radius > 0.0) {
      const double lo = std::max(dist - radius, 0.0);
      const double hi = dist + radius;
      const double a = kernel_value(lo, r), b = kernel_value(hi, r);
      bound += t.weights[i] * std::abs(b - a);
    }
  }
  out.value = v;
  out.divergent = r < 0.0 && std::isinf(v) && v > 0.0;
  out.error_bound = bound;
  return out;
}

}  // namespace detail

inline Distortion distortion(const PointTarget& t, const Codebook& a, double r, Norm norm = Norm::Euclid) {
  if (a.empty()) throw DomainError("codebook must be nonempty");
  for (const auto& p : a)
    if (static_cast<int>(p.size()) != t.dim) throw DomainError("codebook dimension mismatch");
  return detail::point_distortion(t, detail::assign(t, a, norm), r, norm);
}

inline Distortion distortion(const IntegrationTarget& t, const Codebook& a, double r, Norm norm = Norm::Euclid) {
  if (const auto* d = std::get_if<DensityTarget>(&t)) return distortion(*d, a, r);
  return distortion(std::get<PointTarget>(t), a, r, norm);
}

// ---------------------------------------------------------------------------
// Quantizer and optimization
// ---------------------------------------------------------------------------

struct Quantizer {
  Codebook codebook;
  double r = 0.0;
  double distortion = 0.0;
  double error = 0.0;
  bool divergent = false;
  bool budget_exceeded = false;
  double error_bound = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  int grid = 0;
  int iterations = 0;
};

struct OptimizeOptions {
  int grid = 10;                 ///< dp1d / exhaustive candidate grid 2^-G
  int starts = 4;                ///< Lloyd multistart count
  int max_iterations = 200;
  double rel_tol = 1e-9;
  Norm norm = Norm::Euclid;
  std::vector<Point> candidates; ///< Lloyd / exhaustive restricted to these points
  std::size_t max_subsets = 20'000'000;
};

inline Quantizer make_quantizer(Codebook a, double r, const Distortion& d, std::string method, std::uint64_t seed,
                                int grid) {
  Quantizer q;
  q.codebook = std::move(a);
  q.r = r;
  q.distortion = d.value;
  q.divergent = d.divergent;
  q.error = error_from_distortion(d.value, r);
  q.error_bound = d.error_bound;
  q.method = std::move(method);
  q.seed = seed;
  q.grid = grid;
  return q;
}

namespace detail {

/// Largest grid solved by the full O(M^2) dynamic program; finer grids are
/// reached by banded refinement around the coarser optimum.
inline constexpr int kExactGridMax = 10;
inline constexpr int kRefineHalfWidth = 3;

/// Side costs for the 1-d grid programs: cost(c, a, b) integrates k(|x-c|)
/// over the part of the target in (a, b].
class SideCost1d {
 public:
  SideCost1d(const IntegrationTarget& t, double r) : r_(r) {
    if (const auto* d = std::get_if<DensityTarget>(&t)) {
      density_ = &d->density;
    } else {
      const auto& p = std::get<PointTarget>(t);
      if (p.dim != 1) throw DomainError("dp1d needs a one-dimensional target");
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto i, auto j) { return p.coords[i] < p.coords[j]; });
      for (auto i : order) {
        xs_.push_back(p.coords[i]);
        ws_.push_back(p.weights[i]);
      }
    }
  }

  double operator()(double c, double a, double b) const {
    if (density_) return side_cost(*density_, c, a, b, r_);
    auto lo = std::upper_bound(xs_.begin(), xs_.end(), a);
    auto hi = std::upper_bound(xs_.begin(), xs_.end(), b);
    double v = 0.0;
    for (auto it = lo; it != hi; ++it) v += ws_[it - xs_.begin()] * kernel_value(std::abs(*it - c), r_);
    return v;
  }

 private:
  double r_;
  const Density1d* density_ = nullptr;
  std::vector<double> xs_, ws_;
};

/// Sum that keeps +inf and -inf absorbing in the optimization direction.
inline double add_cost(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) {
    if (std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)) return std::numeric_limits<double>::quiet_NaN();
    return std::isinf(a) ? a : b;
  }
  return a + b;
}

struct GridSolution {
  double value = 0.0;
  std::vector<int> idx;  // grid indices, increasing
};

/// Full dynamic program over grid points j/M, j = 0..M, for all sizes 1..n_max.
inline std::vector<GridSolution> grid_dp(const SideCost1d& cost, int grid, int n_max, double r) {
  const int m = 1 << grid;
  const int np = m + 1;
  const double inv = 1.0 / m;
  n_max = std::min(n_max, np);
  const bool maximize = orientation(r) > 0;
  auto pick = [&](double cand, double cur) {
    if (std::isnan(cand)) return false;
    if (std::isnan(cur)) return true;
    return maximize ? cand > cur : cand < cur;
  };
  std::vector<double> first(np), last(np);
  for (int j = 0; j < np; ++j) {
    first[j] = cost(j * inv, 0.0, j * inv);
    last[j] = cost(j * inv, j * inv, 1.0);
  }
  // pair(i, j), i < j, stored row-major in a triangle
  std::vector<double> pair(static_cast<std::size_t>(np) * (np - 1) / 2);
  auto pidx = [&](int i, int j) { return static_cast<std::size_t>(j) * (j - 1) / 2 + i; };
  for (int j = 1; j < np; ++j)
    for (int i = 0; i < j; ++i) {
      const double xi = i * inv, xj = j * inv, mid = 0.5 * (xi + xj);
      pair[pidx(i, j)] = add_cost(cost(xi, xi, mid), cost(xj, mid, xj));
    }
  const double worst = maximize ? -kInfinity : kInfinity;
  std::vector<std::vector<double>> f(n_max + 1, std::vector<double>(np, worst));
  std::vector<std::vector<int>> from(n_max + 1, std::vector<int>(np, -1));
  f[1] = first;
  for (int t = 2; t <= n_max; ++t)
    for (int j = t - 1; j < np; ++j) {
      double best = worst;
      int arg = -1;
      for (int i = t - 2; i < j; ++i) {
        const double v = add_cost(f[t - 1][i], pair[pidx(i, j)]);
        if (arg < 0 || pick(v, best)) {
          best = v;
          arg = i;
        }
      }
      f[t][j] = best;
      from[t][j] = arg;
    }
  std::vector<GridSolution> out(n_max + 1);
  for (int t = 1; t <= n_max; ++t) {
    double best = worst;
    int arg = -1;
    for (int j = t - 1; j < np; ++j) {
      const double v = add_cost(f[t][j], last[j]);
      if (arg < 0 || pick(v, best)) {
        best = v;
        arg = j;
      }
    }
    GridSolution s;
    s.value = best;
    for (int tt = t, j = arg; tt >= 1; j = from[tt][j], --tt) s.idx.push_back(j);
    std::reverse(s.idx.begin(), s.idx.end());
    out[t] = std::move(s);
  }
  return out;
}

/// Banded refinement of a grid solution from grid g to grid g+1.
inline GridSolution refine_once(const SideCost1d& cost, const GridSolution& coarse, int grid_fine, double r) {
  const int m = 1 << grid_fine;
  const double inv = 1.0 / m;
  const bool maximize = orientation(r) > 0;
  const std::size_t n = coarse.idx.size();
  std::vector<std::vector<int>> cand(n);
  for (std::size_t t = 0; t < n; ++t)
    for (int o = -kRefineHalfWidth; o <= kRefineHalfWidth; ++o) {
      const int c = 2 * coarse.idx[t] + o;
      if (c >= 0 && c <= m) cand[t].push_back(c);
    }
  auto pick = [&](double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return maximize ? a > b : a < b;
  };
  std::vector<std::vector<double>> f(n);
  std::vector<std::vector<int>> from(n);
  for (std::size_t t = 0; t < n; ++t) {
    f[t].assign(cand[t].size(), std::numeric_limits<double>::quiet_NaN());
    from[t].assign(cand[t].size(), -1);
    for (std::size_t b = 0; b < cand[t].size(); ++b) {
      const double xj = cand[t][b] * inv;
      if (t == 0) {
        f[t][b] = cost(xj, 0.0, xj);
        continue;
      }
      for (std::size_t a = 0; a < cand[t - 1].size(); ++a) {
        if (cand[t - 1][a] >= cand[t][b] || std::isnan(f[t - 1][a]) || from[t - 1][a] == -2) continue;
        const double xi = cand[t - 1][a] * inv, mid = 0.5 * (xi + xj);
        const double v = add_cost(f[t - 1][a], add_cost(cost(xi, xi, mid), cost(xj, mid, xj)));
        if (from[t][b] < 0 || pick(v, f[t][b])) {
          f[t][b] = v;
          from[t][b] = static_cast<int>(a);
        }
      }
      if (from[t][b] < 0) from[t][b] = -2;  // unreachable
    }
  }
  GridSolution s;
  double best = std::numeric_limits<double>::quiet_NaN();
  int arg = -1;
  for (std::size_t b = 0; b < cand[n - 1].size(); ++b) {
    if (n > 1 && from[n - 1][b] == -2) continue;
    const double v = add_cost(f[n - 1][b], cost(cand[n - 1][b] * inv, cand[n - 1][b] * inv, 1.0));
    if (arg < 0 || pick(v, best)) {
      best = v;
      arg = static_cast<int>(b);
    }
  }
  s.value = best;
  std::vector<int> idx(n);
  for (int t = static_cast<int>(n) - 1, b = arg; t >= 0; --t) {
    idx[t] = cand[t][b];
    b = from[t][b];
  }
  s.idx = std::move(idx);
  // the coarse solution is always among the candidates, so refinement never loses
  GridSolution carried;
  carried.idx = coarse.idx;
  for (auto& i : carried.idx) i *= 2;
  carried.value = coarse.value;
  if (!pick(s.value, carried.value) && !(s.value == carried.value)) return carried;
  return s;
}

inline Codebook codebook_from_grid(const std::vector<int>& idx, int grid) {
  Codebook a;
  for (int i : idx) a.push_back({std::ldexp(static_cast<double>(i), -grid)});
  return a;
}

}  // namespace detail

/// dp1d for every size 1..n_max at once; element n-1 is the size-n quantizer.
inline std::vector<Quantizer> dp1d_all(const IntegrationTarget& t, int n_max, double r, const OptimizeOptions& o = {}) {
  if (target_dim(t) != 1) throw DomainError("dp1d needs a one-dimensional target");
  if (o.grid < 1 || o.grid > 24) throw DomainError("grid resolution must be in 1..24");
  const detail::SideCost1d cost(t, r);
  const int g0 = std::min(o.grid, detail::kExactGridMax);
  auto sols = detail::grid_dp(cost, g0, n_max, r);
  std::vector<Quantizer> out;
  for (int n = 1; n <= n_max; ++n) {
    const auto& base = sols[std::min<std::size_t>(n, sols.size() - 1)];
    detail::GridSolution s = base;
    for (int g = g0 + 1; g <= o.grid; ++g) s = detail::refine_once(cost, s, g, r);
    Codebook a = detail::codebook_from_grid(s.idx, o.grid);
    const Distortion d = distortion(t, a, r, o.norm);
    out.push_back(make_quantizer(std::move(a), r, d, "dp1d", 0, o.grid));
  }
  return out;
}

namespace detail {

template <class F>
double golden_section(F&& f, double lo, double hi, bool maximize, int iterations = 60) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto score = [&](double x) {
    const double v = f(x);
    return maximize ? v : -v;
  };
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = score(x1), f2 = score(x2);
  for (int i = 0; i < iterations && b - a > 1e-13; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = score(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = score(x2);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

inline std::mt19937_64 start_rng(std::uint64_t seed, int start) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start)};
  return std::mt19937_64(seq);
}

/// Quantile codebook x_j with F(x_j) = (j - 1/2)/n.
inline Codebook quantile_codebook(const Density1d& h, int n) {
  Codebook a;
  for (int j = 0; j < n; ++j) {
    const double target = (j + 0.5) / n;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (h.mass(0.0, mid).value < target ? lo : hi) = mid;
    }
    a.push_back({0.5 * (lo + hi)});
  }
  return a;
}

/// Lloyd iterations on a 1-d density with golden-section cell updates.
inline Quantizer lloyd_density(const DensityTarget& t, Codebook a, double r, const OptimizeOptions& o) {
  const bool maximize = orientation(r) > 0;
  Distortion cur = distortion(t, a, r);
  int it = 0;
  for (; it < o.max_iterations && !cur.divergent; ++it) {
    auto xs = sorted_unique_1d(a);
    Codebook next;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double lo = j == 0 ? 0.0 : 0.5 * (xs[j - 1] + xs[j]);
      const double hi = j + 1 == xs.size() ? 1.0 : 0.5 * (xs[j] + xs[j + 1]);
      auto f = [&](double c) { return cell_cost(t.density, c, lo, hi, r); };
      double c = golden_section(f, lo, hi, maximize);
      if (better(f(xs[j]), f(c), r) || f(xs[j]) == f(c)) c = xs[j];
      next.push_back({c});
    }
    const Distortion d = distortion(t, next, r);
    if (!better(d.value, cur.value, r)) break;
    const double change = std::abs(d.value - cur.value) / std::max(std::abs(cur.value), 1e-300);
    a = std::move(next);
    cur = d;
    if (change < o.rel_tol) break;
  }
  Quantizer q = make_quantizer(std::move(a), r, cur, "lloyd", 0, 0);
  q.iterations = it;
  q.budget_exceeded = it >= o.max_iterations;
  return q;
}

/// Weighted k-means++ style seeding on target points.
inline Codebook seed_points(const PointTarget& t, int n, std::mt19937_64& rng, Norm norm) {
  Codebook a;
  std::discrete_distribution<std::size_t> pick(t.weights.begin(), t.weights.end());
  const auto first = t.point(pick(rng));
  a.emplace_back(first.begin(), first.end());
  std::vector<double> dist(t.size(), kInfinity);
  while (static_cast<int>(a.size()) < n) {
    std::vector<double> score(t.size());
    double total = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      dist[i] = std::min(dist[i], distance(t.point(i), a.back(), norm));
      score[i] = t.weights[i] * dist[i] * dist[i];
      total += score[i];
    }
    if (!(total > 0.0)) break;  // every point already covered
    std::discrete_distribution<std::size_t> d2(score.begin(), score.end());
    const auto p = t.point(d2(rng));
    a.emplace_back(p.begin(), p.end());
  }
  return a;
}

/// Weiszfeld steps per Lloyd update; the outer loop keeps iterating anyway.
inline constexpr int kWeiszfeldSteps = 8;

/// Best point for one Voronoi cell of a point target.
inline Point update_cell(const PointTarget& t, const std::vector<std::size_t>& members, const Point& current,
                         double r, const OptimizeOptions& o) {
  const int d = t.dim;
  auto cost = [&](std::span<const double> c) {
    double v = 0.0;
    for (auto i : members) v += t.weights[i] * kernel_value(distance(t.point(i), c, o.norm), r);
    return v;
  };
  if (!o.candidates.empty()) {
    Point best = current;
    double bv = cost(current);
    for (const auto& c : o.candidates) {
      const double v = cost(c);
      if (better(v, bv, r)) {
        bv = v;
        best = c;
      }
    }
    return best;
  }
  double wsum = 0.0;
  for (auto i : members) wsum += t.weights[i];
  if (r == 2.0 && o.norm == Norm::Euclid) {
    Point m(d, 0.0);
    for (auto i : members)
      for (int k = 0; k < d; ++k) m[k] += t.weights[i] * t.point(i)[k];
    for (auto& x : m) x /= wsum;
    return m;
  }
  if (r == 1.0 && o.norm == Norm::Euclid) {
    Point y = current;
    for (int it = 0; it < kWeiszfeldSteps; ++it) {
      Point num(d, 0.0);
      double den = 0.0;
      bool hit = false;
      for (auto i : members) {
        const double dist = distance(t.point(i), y, o.norm);
        if (dist < 1e-15) {
          hit = true;
          continue;
        }
        const double w = t.weights[i] / dist;
        for (int k = 0; k < d; ++k) num[k] += w * t.point(i)[k];
        den += w;
      }
      if (den == 0.0) break;
      Point z(d);
      double step = 0.0;
      for (int k = 0; k < d; ++k) {
        z[k] = num[k] / den;
        step = std::max(step, std::abs(z[k] - y[k]));
      }
      if (hit && cost(z) > cost(y)) break;
      y = std::move(z);
      if (step < 1e-12) break;
    }
    return cost(y) <= cost(current) ? y : current;
  }
  // coordinate-wise golden section inside the cell's bounding box
  Point y = current;
  for (int sweep = 0; sweep < 3; ++sweep)
    for (int k = 0; k < d; ++k) {
      double lo = kInfinity, hi = -kInfinity;
      for (auto i : members) {
        lo = std::min(lo, t.point(i)[k]);
        hi = std::max(hi, t.point(i)[k]);
      }
      Point z = y;
      auto f = [&](double x) {
        z[k] = x;
        return cost(z);
      };
      const double before = f(y[k]);
      const double x = golden_section(f, lo, hi, orientation(r) > 0);
      if (better(f(x), before, r)) y[k] = x;
    }
  return y;
}

inline Quantizer lloyd_points(const PointTarget& t, Codebook a, double r, const OptimizeOptions& o) {
  Assignment as = assign(t, a, o.norm);
  Distortion cur = point_distortion(t, as, r, o.norm);
  int it = 0;
  for (; it < o.max_iterations && !cur.divergent; ++it) {
    std::vector<std::vector<std::size_t>> cells(a.size());
    for (std::size_t i = 0; i < t.size(); ++i) cells[as.index[i]].push_back(i);
    Codebook next = a;
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (cells[c].empty()) {
        // move an idle point to the target point with the largest contribution
        std::size_t far = 0;
        double worst = -kInfinity;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double s = t.weights[i] * kernel_value(as.dist[i], std::max(r, 1.0));
          if (s > worst) {
            worst = s;
            far = i;
          }
        }
        next[c].assign(t.point(far).begin(), t.point(far).end());
        continue;
      }
      next[c] = update_cell(t, cells[c], a[c], r, o);
    }
    Assignment nas = assign(t, next, o.norm);
    const Distortion d = point_distortion(t, nas, r, o.norm);
    if (!better(d.value, cur.value, r)) break;
    const double change = std::abs(d.value - cur.value) / std::max(std::abs(cur.value), 1e-300);
    a = std::move(next);
    as = std::move(nas);
    cur = d;
    if (change < o.rel_tol) break;
  }
  Quantizer q = make_quantizer(std::move(a), r, cur, "lloyd", 0, 0);
  q.iterations = it;
  q.budget_exceeded = it >= o.max_iterations;
  return q;
}

/// Multistart Lloyd; the first start may be supplied by the caller.
inline Quantizer lloyd(const IntegrationTarget& t, int n, double r, std::uint64_t seed, const OptimizeOptions& o,
                       const std::optional<Codebook>& warm = std::nullopt) {
  std::optional<Quantizer> best;
  auto consider = [&](Quantizer q, int start) {
    q.seed = seed;
    if (!best || better(q.distortion, best->distortion, r)) {
      best = std::move(q);
      best->iterations += 0;
    }
    (void)start;
  };
  for (int s = 0; s < std::max(1, o.starts); ++s) {
    auto rng = start_rng(seed, s);
    Codebook init;
    if (s == 0 && warm) {
      init = *warm;
    } else if (const auto* d = std::get_if<DensityTarget>(&t)) {
      if (s == 0) {
        init = quantile_codebook(d->density, n);
      } else {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int j = 0; j < n; ++j) init.push_back({u(rng)});
      }
    } else {
      const auto& p = std::get<PointTarget>(t);
      if (!o.candidates.empty()) {
        std::vector<std::size_t> idx(o.candidates.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (int j = 0; j < n && j < static_cast<int>(idx.size()); ++j) init.push_back(o.candidates[idx[j]]);
      } else {
        init = seed_points(p, n, rng, o.norm);
      }
    }
    if (const auto* d = std::get_if<DensityTarget>(&t))
      consider(lloyd_density(*d, std::move(init), r, o), s);
    else
      consider(lloyd_points(std::get<PointTarget>(t), std::move(init), r, o), s);
  }
  return *best;
}

}  // namespace detail

/// All codebooks of size min(n, |C|) drawn from the candidate set C.
inline Quantizer exhaustive(const IntegrationTarget& t, int n, double r, const OptimizeOptions& o) {
  Codebook cands = o.candidates;
  if (cands.empty()) {
    if (const auto* p = std::get_if<PointTarget>(&t)) {
      for (std::size_t i = 0; i < p->size(); ++i) cands.emplace_back(p->point(i).begin(), p->point(i).end());
    } else {
      const int m = 1 << o.grid;
      for (int j = 0; j <= m; ++j) cands.push_back({static_cast<double>(j) / m});
    }
  }
  const int k = std::min<int>(n, static_cast<int>(cands.size()));
  double combos = 1.0;
  for (int i = 0; i < k; ++i) combos = combos * (cands.size() - i) / (i + 1);
  if (combos > static_cast<double>(o.max_subsets)) throw DomainError("exhaustive search too large");
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  std::optional<Quantizer> best;
  while (true) {
    Codebook a;
    for (int i : pick) a.push_back(cands[i]);
    const Distortion d = distortion(t, a, r, o.norm);
    if (!best || better(d.value, best->distortion, r)) best = make_quantizer(std::move(a), r, d, "exhaustive", 0, o.grid);
    int i = k - 1;
    while (i >= 0 && pick[i] == static_cast<int>(cands.size()) - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return *best;
}

/// Divergent cases settled before any search: r <= -d on a density, r < 0
/// on point targets (a codebook point on a target point), and r < 0 with a
/// codebook point on a singular point of the density.
inline std::optional<Quantizer> divergence_shortcut(const IntegrationTarget& t, double r) {
  if (!(r < 0.0)) return std::nullopt;
  if (const auto* d = std::get_if<DensityTarget>(&t)) {
    if (r <= -1.0) {
      Distortion inf{kInfinity, true, 0.0};
      return make_quantizer({{0.5}}, r, inf, "divergence", 0, 0);
    }
    for (double s : d->density.singular_points()) {
      Codebook a{{s}};
      const Distortion v = distortion(*d, a, r);
      if (v.divergent) return make_quantizer(std::move(a), r, v, "divergence", 0, 0);
    }
    return std::nullopt;
  }
  const auto& p = std::get<PointTarget>(t);
  std::size_t heavy = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p.weights[i] > p.weights[heavy]) heavy = i;
  Codebook a{Point(p.point(heavy).begin(), p.point(heavy).end())};
  return make_quantizer(std::move(a), r, Distortion{kInfinity, true, 0.0}, "divergence", 0, 0);
}

inline Quantizer optimize_codebook(const IntegrationTarget& t, int n, double r, Strategy strategy,
                                   std::uint64_t seed, const OptimizeOptions& o = {}) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (auto q = divergence_shortcut(t, r)) return *q;
  switch (strategy) {
    case Strategy::Dp1d:
      return dp1d_all(t, n, r, o).back();
    case Strategy::Lloyd:
      return detail::lloyd(t, n, r, seed, o);
    case Strategy::Exhaustive:
      return exhaustive(t, n, r, o);
  }
  throw DomainError("unknown strategy");
}

// ---------------------------------------------------------------------------
// Error curves
// ---------------------------------------------------------------------------

struct ErrorCurve {
  double r = 0.0;
  double kappa = 1.0;
  std::vector<std::pair<int, double>> points;  ///< (n, e_n), nonincreasing
  std::vector<Quantizer> quantizers;
  double dimension = 0.0;          ///< slope of log n against -log e
  double dimension_stderr = 0.0;
  double coefficient = 0.0;        ///< geometric mean of n^(1/kappa) e_n
  int fit_from = 0;                ///< smallest n in the fit window
  bool divergent = false;
  std::string strategy;
  std::uint64_t seed = 0;
};

inline void fit_error_curve(ErrorCurve& c) {
  const std::size_t keep = (c.points.size() + 1) / 2;
  const std::size_t from = c.points.size() - keep;
  if (c.points.empty()) return;
  c.fit_from = c.points[from].first;
  std::vector<double> xs, ys;
  double logc = 0.0;
  for (std::size_t i = from; i < c.points.size(); ++i) {
    const auto [n, e] = c.points[i];
    xs.push_back(-std::log(e));
    ys.push_back(std::log(static_cast<double>(n)));
    logc += std::log(n) / c.kappa + std::log(e);
  }
  const LineFit f = fit_line(xs, ys);
  c.dimension = f.slope;
  c.dimension_stderr = f.slope_stderr;
  c.coefficient = std::exp(logc / static_cast<double>(xs.size()));
}

struct ErrorCurveOptions {
  OptimizeOptions optimize;
  double kappa = 1.0;
  /// measure mode: distortion re-evaluated on this finer target when given
  const PointTarget* evaluation = nullptr;
};

/// Nested-codebook error curve: each size starts from the previous codebook
/// and the reported error never exceeds the error at a smaller size.
inline ErrorCurve error_curve(const IntegrationTarget& t, double r, std::span<const int> n_list, Strategy strategy,
                              std::uint64_t seed, const ErrorCurveOptions& opt = {}) {
  if (n_list.empty()) throw DomainError("n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw DomainError("n_list must be increasing");
  ErrorCurve c;
  c.r = r;
  c.kappa = opt.kappa;
  c.strategy = strategy_name(strategy);
  c.seed = seed;
  if (auto q = divergence_shortcut(t, r)) {
    c.divergent = true;
    c.quantizers.push_back(*q);
    return c;
  }
  std::vector<Quantizer> dp;
  if (strategy == Strategy::Dp1d) dp = dp1d_all(t, n_list.back(), r, opt.optimize);
  std::optional<Quantizer> prev;
  for (int n : n_list) {
    Quantizer q;
    if (strategy == Strategy::Dp1d) {
      q = dp[n - 1];
    } else if (strategy == Strategy::Lloyd) {
      std::optional<Codebook> warm;
      if (prev) {
        // previous codebook plus points seeded where the cost is largest
        Codebook w = prev->codebook;
        auto rng = detail::start_rng(seed, 1000 + n);
        if (const auto* p = std::get_if<PointTarget>(&t)) {
          const auto extra = detail::seed_points(*p, n, rng, opt.optimize.norm);
          for (std::size_t i = 0; static_cast<int>(w.size()) < n && i < extra.size(); ++i) w.push_back(extra[i]);
        } else {
          std::uniform_real_distribution<double> u(0.0, 1.0);
          while (static_cast<int>(w.size()) < n) w.push_back({u(rng)});
        }
        warm = std::move(w);
      }
      q = detail::lloyd(t, n, r, seed, opt.optimize, warm);
    } else {
      q = exhaustive(t, n, r, opt.optimize);
    }
    if (opt.evaluation) {
      const Distortion d = distortion(*opt.evaluation, q.codebook, r, opt.optimize.norm);
      q.distortion = d.value;
      q.divergent = d.divergent;
      q.error = error_from_distortion(d.value, r);
      q.error_bound = d.error_bound;
    }
    if (prev && prev->error < q.error) {
      // nested protocol: the smaller codebook is a valid size-n codebook
      Quantizer keep = *prev;
      q.codebook = keep.codebook;
      q.distortion = keep.distortion;
      q.error = keep.error;
    }
    if (q.divergent || !(q.error > 0.0)) {
      c.divergent = true;
      c.quantizers.push_back(q);
      break;
    }
    c.points.emplace_back(n, q.error);
    c.quantizers.push_back(q);
    prev = q;
  }
  if (!c.divergent) fit_error_curve(c);
  return c;
}

// ---------------------------------------------------------------------------
// Density functional and bound checks
// ---------------------------------------------------------------------------

struct PhiValue {
  double value = 0.0;
  bool norm_divergent = false;
};

/// Phi_r(h) = ||h||_{d/(d+r)}^(1/r); exp(-int h log h / d) at r = 0; 0 for r <= -d.
inline PhiValue phi_r(const Density1d& h, double r, int d = 1) {
  if (d != 1) throw DomainError("phi_r is implemented for one-dimensional densities");
  PhiValue out;
  if (r <= -static_cast<double>(d)) return out;
  if (r == 0.0) {
    const Integral e = h.entropy_integral();
    if (e.divergent) return out;
    out.value = std::exp(-e.value / d);
    return out;
  }
  const double s = d / (d + r);
  const Integral p = h.power_integral(s);
  if (p.divergent) {
    out.norm_divergent = true;
    out.value = r < 0.0 ? 0.0 : kInfinity;
    return out;
  }
  out.value = std::pow(std::pow(p.value, 1.0 / s), 1.0 / r);
  return out;
}

inline PhiValue phi_r(const std::string& name, double r, int d = 1) {
  return phi_r(oracles::example_density(name).density, r, d);
}

/// Constant of the Lebesgue distortion bound: 2^-r + 18^d / (2^r - 2^-d).
inline double lebesgue_constant(double r, int d) { return std::exp2(-r) + std::pow(18.0, d) / (std::exp2(r) - std::exp2(-d)); }

struct BoundCheck {
  double lhs = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// int d(x,A)^r dLambda <= C_{r,d} card(A)^(-r/d) for r in (-d, 0).
inline BoundCheck lebesgue_bound_check(const Codebook& a, double r, int d = 1) {
  if (d != 1) throw DomainError("lebesgue_bound_check is implemented for d = 1");
  if (!(r > -d && r < 0.0)) throw DomainError("order must lie in (-d, 0)");
  BoundCheck b;
  const auto xs = detail::sorted_unique_1d(a);
  b.lhs = distortion(uniform_on(0.0, 1.0), a, r).value;
  b.bound = lebesgue_constant(r, d) * std::pow(static_cast<double>(xs.size()), -r / d);
  b.holds = b.lhs <= b.bound;
  return b;
}

struct MixtureReport {
  double v_mixture = 0.0;
  double upper = 0.0;       ///< sum s_i V_n(nu_i)
  double lower = 0.0;       ///< sum s_i V_{n_i}(nu_i)
  bool upper_holds = false; ///< V(nu) <= upper (slack)
  bool lower_holds = false; ///< V(nu) >= lower (slack)
  double slack = 0.02;
};

/// Mixture inequalities for r < 0 on 1-d piecewise components.
inline MixtureReport mixture_bounds_check(const std::vector<DensityTarget>& comps, const std::vector<double>& weights,
                                          int n, const std::vector<int>& n_parts, double r,
                                          const OptimizeOptions& o = {}, double slack = 0.02) {
  if (!(r < 0.0)) throw DomainError("mixture bounds need r < 0");
  if (comps.size() != weights.size() || comps.size() != n_parts.size()) throw DomainError("size mismatch");
  if (std::accumulate(n_parts.begin(), n_parts.end(), 0) > n) throw DomainError("parts exceed n");
  MixtureReport rep;
  rep.slack = slack;
  // the mixture as one piecewise density
  std::vector<PolyPiece> pieces;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i].density.is_piecewise()) throw DomainError("mixture components must be piecewise");
    for (auto p : comps[i].density.pieces()) {
      for (auto& c : p.coeffs) c *= weights[i] * comps[i].density.scale();
      pieces.push_back(p);
    }
  }
  // merge overlapping pieces into a common refinement
  std::vector<double> cuts;
  for (const auto& p : pieces) {
    cuts.push_back(p.lo);
    cuts.push_back(p.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<PolyPiece> merged;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    PolyPiece m{cuts[k], cuts[k + 1], {}};
    for (const auto& p : pieces) {
      if (p.lo <= cuts[k] && p.hi >= cuts[k + 1]) {
        if (m.coeffs.size() < p.coeffs.size()) m.coeffs.resize(p.coeffs.size(), 0.0);
        for (std::size_t j = 0; j < p.coeffs.size(); ++j) m.coeffs[j] += p.coeffs[j];
      }
    }
    if (!m.coeffs.empty()) merged.push_back(m);
  }
  const DensityTarget mix{"mixture", Density1d::piecewise(merged, comps.front().density.quadrature())};
  rep.v_mixture = optimize_codebook(mix, n, r, Strategy::Dp1d, 0, o).distortion;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    rep.upper += weights[i] * optimize_codebook(comps[i], n, r, Strategy::Dp1d, 0, o).distortion;
    if (n_parts[i] > 0)
      rep.lower += weights[i] * optimize_codebook(comps[i], n_parts[i], r, Strategy::Dp1d, 0, o).distortion;
  }
  rep.upper_holds = rep.v_mixture <= rep.upper * (1.0 + slack);
  rep.lower_holds = rep.v_mixture >= rep.lower * (1.0 - slack);
  return rep;
}

}  // namespace quantdim
