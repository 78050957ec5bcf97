#pragma once

// Dyadic cubes of (0,1]^d and truncated measure trees.
//
// Cubes are half-open: (k_i 2^-n, (k_i+1) 2^-n]. A level-n cube is keyed by
// the Morton interleave of its coordinates with coordinate 0 as the most
// significant bit of every d-bit group, so the children of a cube are the
// key range [key << d, (key << d) + 2^d) and appear in lexicographic
// coordinate order.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "quantdim/density.hpp"
#include "quantdim/error.hpp"
#include "quantdim/oracles.hpp"
#include "quantdim/quadrature.hpp"

namespace quantdim {

inline constexpr int kMaxDim = 4;
/// Masses below this are dropped (and counted) during construction.
inline constexpr double kPruneThreshold = 1e-300;

struct CubeIndex {
  int dim = 1;
  int level = 0;
  std::array<std::uint64_t, kMaxDim> coords{};

  friend auto operator<=>(const CubeIndex&, const CubeIndex&) = default;

  double side() const { return std::ldexp(1.0, -level); }
  double volume() const { return std::ldexp(1.0, -level * dim); }
  double lower(int i) const { return std::ldexp(static_cast<double>(coords[i]), -level); }
  double upper(int i) const { return std::ldexp(static_cast<double>(coords[i] + 1), -level); }
  double center(int i) const { return std::ldexp(2.0 * static_cast<double>(coords[i]) + 1.0, -level - 1); }

  static CubeIndex root(int dim) {
    CubeIndex q;
    q.dim = dim;
    return q;
  }

  std::string str() const {
    std::string s = "(" + std::to_string(level) + ",(";
    for (int i = 0; i < dim; ++i) s += (i ? "," : "") + std::to_string(coords[i]);
    return s + "))";
  }
};

/// Whether the cube can be split without overflowing 64-bit keys.
inline bool can_split(const CubeIndex& q) { return q.level < 62.0 / q.dim; }

inline std::uint64_t morton_key(const CubeIndex& q) {
  std::uint64_t key = 0;
  for (int b = q.level - 1; b >= 0; --b)
    for (int i = 0; i < q.dim; ++i) key = (key << 1) | ((q.coords[i] >> b) & 1u);
  return key;
}

inline CubeIndex cube_from_key(int dim, int level, std::uint64_t key) {
  CubeIndex q;
  q.dim = dim;
  q.level = level;
  for (int b = 0; b < level; ++b)
    for (int i = 0; i < dim; ++i) {
      const int bit = b * dim + (dim - 1 - i);
      q.coords[i] |= ((key >> bit) & 1u) << b;
    }
  return q;
}

/// The 2^d children of q in lexicographic coordinate order.
inline std::vector<CubeIndex> children(const CubeIndex& q) {
  if (!can_split(q))
    throw CapacityError("cannot split level " + std::to_string(q.level) + " in dimension " + std::to_string(q.dim));
  std::vector<CubeIndex> out;
  out.reserve(std::size_t{1} << q.dim);
  for (unsigned bits = 0; bits < (1u << q.dim); ++bits) {
    CubeIndex c = q;
    c.level = q.level + 1;
    for (int i = 0; i < q.dim; ++i) c.coords[i] = 2 * q.coords[i] + ((bits >> (q.dim - 1 - i)) & 1u);
    out.push_back(c);
  }
  return out;
}

/// Cube of level n containing point x (half-open convention).
inline CubeIndex locate(std::span<const double> x, int level) {
  CubeIndex q;
  q.dim = static_cast<int>(x.size());
  q.level = level;
  const double scale = std::ldexp(1.0, level);
  const double top = scale - 1.0;
  for (int i = 0; i < q.dim; ++i) {
    double k = std::ceil(x[i] * scale) - 1.0;
    k = std::clamp(k, 0.0, top);
    q.coords[i] = static_cast<std::uint64_t>(k);
  }
  return q;
}

// ---------------------------------------------------------------------------
// Measure specifications
// ---------------------------------------------------------------------------

/// Dyadic cascade: maps z -> z/2 + offset with offset in {0, 1/2}^d.
struct IfsCascadeSpec {
  std::vector<std::vector<double>> offsets;
  std::vector<double> probabilities;
};

/// Density on (0,1]^d: a registered name, or a piecewise-polynomial table (d = 1).
struct DensitySpec {
  std::string name;
  std::vector<PolyPiece> pieces;
  std::vector<double> singular_points;
  std::optional<double> s_h;
  std::optional<double> dim_infty;
};

struct AtomicSpec {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

struct MeasureSpec {
  int dim = 1;
  std::variant<IfsCascadeSpec, DensitySpec, AtomicSpec> variant;

  bool is_cascade() const { return std::holds_alternative<IfsCascadeSpec>(variant); }
  bool is_density() const { return std::holds_alternative<DensitySpec>(variant); }
  bool is_atomic() const { return std::holds_alternative<AtomicSpec>(variant); }
};

inline MeasureSpec menger_sponge_spec() {
  MeasureSpec s;
  s.dim = 3;
  s.variant = IfsCascadeSpec{{{0, 0, 0}, {0.5, 0, 0}, {0, 0.5, 0}, {0, 0, 0.5}}, {0.66, 0.2, 0.08, 0.06}};
  return s;
}

inline MeasureSpec density_spec(const std::string& name, int dim = 1) {
  MeasureSpec s;
  s.dim = dim;
  DensitySpec d;
  d.name = name;
  s.variant = d;
  return s;
}

inline MeasureSpec cascade_spec(int dim, std::vector<std::vector<double>> offsets, std::vector<double> p) {
  MeasureSpec s;
  s.dim = dim;
  s.variant = IfsCascadeSpec{std::move(offsets), std::move(p)};
  return s;
}

inline MeasureSpec atomic_spec(int dim, std::vector<std::vector<double>> points, std::vector<double> weights) {
  MeasureSpec s;
  s.dim = dim;
  s.variant = AtomicSpec{std::move(points), std::move(weights)};
  return s;
}

/// The normalized 1-d density a density spec describes.
inline Density1d resolve_density(const DensitySpec& spec, const QuadratureSettings& q = {}) {
  if (!spec.name.empty()) return oracles::example_density(spec.name).density;
  if (spec.pieces.empty()) throw SpecError("density spec needs a registered name or pieces");
  Density1d d = Density1d::piecewise(spec.pieces, q);
  for (const auto& p : spec.pieces)
    for (double x : {p.lo, 0.5 * (p.lo + p.hi), p.hi})
      if (p(x) < 0.0) throw SpecError("density must be nonnegative");
  const double total = d.mass(0.0, 1.0).value;
  if (!(total > 0.0) || !std::isfinite(total)) throw SpecError("density must have positive finite mass");
  return d.scaled(1.0 / total);
}

// ---------------------------------------------------------------------------
// DyadicMeasure
// ---------------------------------------------------------------------------

/// Truncated tree of cube masses. Level n stores the positive-mass cubes of
/// D_n sorted by Morton key; children of cube i at level n occupy
/// [child_begin[i], child_begin[i+1]) in level n+1. Immutable once built.
class DyadicMeasure {
 public:
  struct Level {
    std::vector<std::uint64_t> keys;
    std::vector<double> mass;
    std::vector<std::uint64_t> child_begin;  // size keys.size()+1, empty at max depth
  };

  DyadicMeasure() = default;
  DyadicMeasure(int dim, std::vector<Level> levels, std::size_t pruned)
      : dim_(dim), levels_(std::move(levels)), pruned_(pruned) {
    link_children();
  }

  int dimension() const { return dim_; }
  int max_depth() const { return static_cast<int>(levels_.size()) - 1; }
  double total() const { return levels_.at(0).mass.empty() ? 0.0 : levels_[0].mass[0]; }
  std::size_t pruned() const { return pruned_; }

  const Level& level(int n) const { return levels_.at(n); }
  std::size_t level_size(int n) const { return levels_.at(n).keys.size(); }
  std::span<const double> masses(int n) const { return levels_.at(n).mass; }
  std::span<const std::uint64_t> keys(int n) const { return levels_.at(n).keys; }

  std::pair<std::size_t, std::size_t> child_range(int n, std::size_t i) const {
    const auto& cb = levels_.at(n).child_begin;
    if (cb.empty()) return {0, 0};
    return {cb[i], cb[i + 1]};
  }

  CubeIndex cube(int n, std::size_t i) const { return cube_from_key(dim_, n, levels_.at(n).keys[i]); }

  /// Index of the cube within its level, if it carries positive mass.
  std::optional<std::size_t> find(const CubeIndex& q) const {
    if (q.dim != dim_ || q.level > max_depth()) return std::nullopt;
    const auto& ks = levels_[q.level].keys;
    const auto key = morton_key(q);
    auto it = std::lower_bound(ks.begin(), ks.end(), key);
    if (it == ks.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - ks.begin());
  }

  double mass(const CubeIndex& q) const {
    if (auto i = find(q)) return levels_[q.level].mass[*i];
    return 0.0;
  }

  double max_mass(int n) const {
    const auto& m = levels_.at(n).mass;
    return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
  }

 private:
  void link_children() {
    for (int n = 0; n + 1 < static_cast<int>(levels_.size()); ++n) {
      auto& lv = levels_[n];
      const auto& next = levels_[n + 1].keys;
      lv.child_begin.assign(lv.keys.size() + 1, next.size());
      std::size_t j = 0;
      for (std::size_t i = 0; i < lv.keys.size(); ++i) {
        while (j < next.size() && (next[j] >> dim_) < lv.keys[i]) ++j;
        lv.child_begin[i] = j;
      }
    }
  }

  int dim_ = 1;
  std::vector<Level> levels_;
  std::size_t pruned_ = 0;
};

namespace detail {

/// Builds the levels above a complete leaf level by summing children.
inline std::vector<DyadicMeasure::Level> aggregate_up(int dim, DyadicMeasure::Level leaves, int depth) {
  std::vector<DyadicMeasure::Level> levels(depth + 1);
  levels[depth] = std::move(leaves);
  for (int n = depth - 1; n >= 0; --n) {
    const auto& child = levels[n + 1];
    auto& lv = levels[n];
    for (std::size_t i = 0; i < child.keys.size(); ++i) {
      const std::uint64_t pk = child.keys[i] >> dim;
      if (lv.keys.empty() || lv.keys.back() != pk) {
        lv.keys.push_back(pk);
        lv.mass.push_back(0.0);
      }
      lv.mass.back() += child.mass[i];
    }
  }
  return levels;
}

inline DyadicMeasure build_cascade(int dim, const IfsCascadeSpec& spec, int depth) {
  const std::size_t k = spec.offsets.size();
  if (k == 0 || k != spec.probabilities.size()) throw SpecError("cascade needs matching offsets and probabilities");
  double sum = 0.0;
  for (double p : spec.probabilities) {
    if (!(p > 0.0)) throw SpecError("cascade probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw SpecError("cascade probabilities must sum to 1");
  // child bits of each map, coordinate 0 most significant
  std::vector<std::pair<unsigned, double>> maps;
  for (std::size_t m = 0; m < k; ++m) {
    if (static_cast<int>(spec.offsets[m].size()) != dim) throw SpecError("offset dimension mismatch");
    unsigned bits = 0;
    for (int i = 0; i < dim; ++i) {
      const double o = spec.offsets[m][i];
      if (o != 0.0 && o != 0.5) throw SpecError("offsets must lie in {0, 1/2}^d");
      bits = (bits << 1) | (o == 0.5 ? 1u : 0u);
    }
    maps.emplace_back(bits, spec.probabilities[m]);
  }
  std::sort(maps.begin(), maps.end());
  for (std::size_t m = 1; m < k; ++m)
    if (maps[m].first == maps[m - 1].first) throw SpecError("cascade offsets must be distinct");

  std::vector<DyadicMeasure::Level> levels(depth + 1);
  levels[0].keys = {0};
  levels[0].mass = {1.0};
  std::size_t pruned = 0;
  for (int n = 1; n <= depth; ++n) {
    const auto& parent = levels[n - 1];
    auto& lv = levels[n];
    lv.keys.reserve(parent.keys.size() * k);
    lv.mass.reserve(parent.keys.size() * k);
    for (std::size_t i = 0; i < parent.keys.size(); ++i) {
      for (const auto& [bits, p] : maps) {
        const double m = parent.mass[i] * p;
        if (m < kPruneThreshold) {
          ++pruned;
          continue;
        }
        lv.keys.push_back((parent.keys[i] << dim) | bits);
        lv.mass.push_back(m);
      }
    }
  }
  return DyadicMeasure(dim, std::move(levels), pruned);
}

inline DyadicMeasure build_density(int dim, const DensitySpec& spec, int depth, const QuadratureSettings& q) {
  if (dim != 1) {
    if (spec.name != "uniform") throw SpecError("only the uniform density is available for d > 1");
    // product Lebesgue measure: every cube of level n has mass 2^-nd
    std::vector<DyadicMeasure::Level> levels(depth + 1);
    for (int n = 0; n <= depth; ++n) {
      const std::uint64_t count = std::uint64_t{1} << (n * dim);
      levels[n].keys.resize(count);
      std::iota(levels[n].keys.begin(), levels[n].keys.end(), std::uint64_t{0});
      levels[n].mass.assign(count, std::ldexp(1.0, -n * dim));
    }
    return DyadicMeasure(dim, std::move(levels), 0);
  }
  const Density1d h = resolve_density(spec, q);
  DyadicMeasure::Level leaves;
  const std::uint64_t count = std::uint64_t{1} << depth;
  std::size_t pruned = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    const double a = std::ldexp(static_cast<double>(k), -depth);
    const double b = std::ldexp(static_cast<double>(k + 1), -depth);
    Integral m = h.mass(a, b);
    if (m.divergent || !std::isfinite(m.value))
      throw ConstructionError("density integral not finite on cube (" + std::to_string(depth) + ",(" +
                              std::to_string(k) + "))");
    if (m.value < kPruneThreshold) {
      if (m.value > 0.0) ++pruned;
      continue;
    }
    leaves.keys.push_back(k);
    leaves.mass.push_back(m.value);
  }
  return DyadicMeasure(dim, aggregate_up(dim, std::move(leaves), depth), pruned);
}

inline DyadicMeasure build_atomic(int dim, const AtomicSpec& spec, int depth) {
  if (spec.points.empty() || spec.points.size() != spec.weights.size())
    throw SpecError("atomic spec needs matching points and weights");
  double total = 0.0;
  for (double w : spec.weights) {
    if (!(w > 0.0)) throw SpecError("atom weights must be positive");
    total += w;
  }
  std::map<std::uint64_t, double> cells;
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const auto& x = spec.points[i];
    if (static_cast<int>(x.size()) != dim) throw SpecError("atom dimension mismatch");
    for (double c : x)
      if (!(c > 0.0 && c <= 1.0)) throw SpecError("atoms must lie in (0,1]^d");
    cells[morton_key(locate(x, depth))] += spec.weights[i] / total;
  }
  DyadicMeasure::Level leaves;
  for (const auto& [k, m] : cells) {
    leaves.keys.push_back(k);
    leaves.mass.push_back(m);
  }
  return DyadicMeasure(dim, aggregate_up(dim, std::move(leaves), depth), 0);
}

}  // namespace detail

/// Builds the truncated measure tree of depth `depth` described by `spec`.
inline DyadicMeasure build_measure(const MeasureSpec& spec, int depth, const QuadratureSettings& quadrature = {}) {
  if (depth < 1) throw SpecError("depth must be >= 1");
  if (spec.dim < 1 || spec.dim > kMaxDim) throw SpecError("dimension must be in 1..4");
  if (!(depth < 62.0 / spec.dim)) throw CapacityError("depth too large for dimension");
  return std::visit(
      [&](const auto& v) -> DyadicMeasure {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IfsCascadeSpec>)
          return detail::build_cascade(spec.dim, v, depth);
        else if constexpr (std::is_same_v<T, DensitySpec>)
          return detail::build_density(spec.dim, v, depth, quadrature);
        else
          return detail::build_atomic(spec.dim, v, depth);
      },
      spec.variant);
}

// ---------------------------------------------------------------------------
// Least squares helpers shared by the finite-depth estimators
// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit f;
  const std::size_t n = x.size();
  f.points = n;
  if (n == 0) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.rms_residual = std::sqrt(ss / n);
  if (n > 2 && sxx > 0.0) f.slope_stderr = std::sqrt(ss / (n - 2) / sxx);
  return f;
}

/// First level of the deepest ceil(N/2) levels 1..N.
inline int deepest_half_start(int depth) { return depth - (depth + 1) / 2 + 1; }

struct DimInftyEstimate {
  double value = 0.0;                               ///< regression slope
  double last_level = 0.0;                          ///< -log2(max mass)/N at N
  std::vector<std::pair<int, double>> per_level;    ///< (n, -log2(max_n)/n)
  LineFit fit;
};

/// Finite-depth estimate of the infinity-dimension: slope of n -> -log2 max_Q nu(Q)
/// over the deepest half of the levels, plus the per-level quotients.
inline DimInftyEstimate dim_infty_estimate(const DyadicMeasure& m) {
  if (m.max_depth() < 4) throw DomainError("dim_infty_estimate needs depth >= 4");
  DimInftyEstimate e;
  std::vector<double> xs, ys;
  const int start = deepest_half_start(m.max_depth());
  for (int n = 1; n <= m.max_depth(); ++n) {
    const double y = -std::log2(m.max_mass(n) / m.total());
    e.per_level.emplace_back(n, y / n);
    if (n >= start) {
      xs.push_back(n);
      ys.push_back(y);
    }
  }
  e.fit = fit_line(xs, ys);
  e.value = e.fit.slope;
  e.last_level = e.per_level.back().second;
  return e;
}

}  // namespace quantdim
