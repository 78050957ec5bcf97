#pragma once

// Greedy optimal dyadic partitions for the dual problem, partition entropy
// and coarse multifractal counts on a truncated measure tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/error.hpp"
#include "quantdim/spectra.hpp"

namespace quantdim {

/// Relative slack for J-threshold comparisons done in the log2 domain, so
/// thresholds that equal a J value exactly are not lost to rounding.
inline constexpr double kThresholdSlack = 1e-12;

inline bool log2_at_least(double lj, double log2_t) {
  return lj >= log2_t - kThresholdSlack * std::max(1.0, std::abs(log2_t));
}

struct Partition {
  std::vector<CubeIndex> cubes;     ///< sorted by (level, coords)
  std::vector<double> j_values;     ///< 0 for zero-mass cubes
  double max_j = 0.0;
  double log2_max_j = -std::numeric_limits<double>::infinity();
  std::size_t cardinality = 0;      ///< cubes with positive mass
  bool depth_limited = false;
};

namespace detail {

struct QueueEntry {
  double lj;
  CubeIndex cube;
  std::size_t index;
};

/// Larger J first; among equal J the earliest (level, coords) cube.
struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.lj != b.lj) return a.lj < b.lj;
    return b.cube < a.cube;
  }
};

class GreedyRefiner {
 public:
  GreedyRefiner(const DyadicMeasure& m, const JTable& jt) : m_(m), jt_(jt) {
    queue_.push({jt.log2_j(0)[0], CubeIndex::root(m.dimension()), 0});
    card_ = 1;
  }

  const QueueEntry& top() const { return queue_.top(); }
  std::size_t cardinality() const { return card_; }
  bool top_at_depth() const { return queue_.top().cube.level >= m_.max_depth(); }

  std::size_t positive_children_of_top() const {
    const auto& t = queue_.top();
    const auto [b, e] = m_.child_range(t.cube.level, t.index);
    return e - b;
  }

  void split_top() {
    const QueueEntry t = queue_.top();
    queue_.pop();
    const int n = t.cube.level;
    const auto [b, e] = m_.child_range(n, t.index);
    const auto keys = m_.keys(n + 1);
    std::size_t c = b;
    for (const auto& child : children(t.cube)) {
      if (c < e && keys[c] == morton_key(child)) {
        queue_.push({jt_.log2_j(n + 1)[c], child, c});
        ++c;
      } else {
        zero_.push_back(child);
      }
    }
    card_ += (e - b);
    card_ -= 1;
  }

  Partition finish() && {
    Partition p;
    p.cardinality = card_;
    p.log2_max_j = queue_.top().lj;
    p.max_j = std::exp2(p.log2_max_j);
    std::vector<std::pair<CubeIndex, double>> all;
    while (!queue_.empty()) {
      all.emplace_back(queue_.top().cube, std::exp2(queue_.top().lj));
      queue_.pop();
    }
    for (const auto& z : zero_) all.emplace_back(z, 0.0);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [q, j] : all) {
      p.cubes.push_back(q);
      p.j_values.push_back(j);
    }
    return p;
  }

 private:
  const DyadicMeasure& m_;
  const JTable& jt_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue_;
  std::vector<CubeIndex> zero_;
  std::size_t card_ = 0;
};

}  // namespace detail

/// Greedy refinement for the dual problem: split the cube of largest J while
/// the positive-mass cardinality stays within `budget`.
inline Partition greedy_partition(const DyadicMeasure& m, const JTable& jt, std::size_t budget) {
  if (budget < 1) throw DomainError("budget must be >= 1");
  detail::GreedyRefiner g(m, jt);
  bool limited = false;
  while (true) {
    if (g.top_at_depth()) {
      limited = true;
      break;
    }
    if (g.cardinality() - 1 + g.positive_children_of_top() > budget) break;
    g.split_top();
  }
  Partition p = std::move(g).finish();
  p.depth_limited = limited;
  return p;
}

inline Partition greedy_partition(const DyadicMeasure& m, double r, std::size_t budget) {
  return greedy_partition(m, JTable(m, r), budget);
}

struct EntropyResult {
  std::size_t m = 0;
  Partition partition;
};

/// Smallest cardinality of a dyadic partition with every J < 1/x, found by
/// splitting the largest-J cube until the threshold is met.
inline EntropyResult partition_entropy(const DyadicMeasure& m, const JTable& jt, double x) {
  if (!(x > 0.0)) throw DomainError("x must be positive");
  const double log2_t = -std::log2(x);
  detail::GreedyRefiner g(m, jt);
  while (log2_at_least(g.top().lj, log2_t)) {
    if (g.top_at_depth())
      throw DepthLimitError("threshold 1/x unreachable within depth " + std::to_string(m.max_depth()),
                            std::exp2(g.top().lj));
    g.split_top();
  }
  EntropyResult r;
  r.partition = std::move(g).finish();
  r.m = r.partition.cardinality;
  return r;
}

inline EntropyResult partition_entropy(const DyadicMeasure& m, double r, double x) {
  return partition_entropy(m, JTable(m, r), x);
}

/// Checks that the cubes are pairwise disjoint and cover (0,1]^d exactly.
inline bool is_valid_partition(std::span<const CubeIndex> cubes, int dim) {
  if (cubes.empty()) return false;
  int deepest = 0;
  for (const auto& q : cubes) {
    if (q.dim != dim) return false;
    deepest = std::max(deepest, q.level);
  }
  if (deepest * dim > 62) return false;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  for (const auto& q : cubes) {
    const int shift = (deepest - q.level) * dim;
    const std::uint64_t lo = morton_key(q) << shift;
    spans.emplace_back(lo, lo + (std::uint64_t{1} << shift));
  }
  std::sort(spans.begin(), spans.end());
  std::uint64_t at = 0;
  for (const auto& [lo, hi] : spans) {
    if (lo != at) return false;
    at = hi;
  }
  return at == (std::uint64_t{1} << (deepest * dim));
}

struct CoarseCounts {
  double r = 0.0;
  double alpha = 0.0;
  std::vector<std::pair<int, double>> counts;  ///< (n, N(n)); counts are integers
  double f_upper = 0.0;
  double f_lower = 0.0;
  int window_start = 1;
};

/// log2^+ N / n max and min over the deepest half of the listed levels.
inline void fill_coarse_estimates(CoarseCounts& c) {
  if (c.counts.empty()) return;
  const std::size_t keep = (c.counts.size() + 1) / 2;
  const std::size_t from = c.counts.size() - keep;
  c.window_start = c.counts[from].first;
  c.f_upper = -std::numeric_limits<double>::infinity();
  c.f_lower = std::numeric_limits<double>::infinity();
  for (std::size_t i = from; i < c.counts.size(); ++i) {
    const auto [n, count] = c.counts[i];
    const double f = count > 1.0 ? std::log2(count) / n : 0.0;
    c.f_upper = std::max(c.f_upper, f);
    c.f_lower = std::min(c.f_lower, f);
  }
}

/// N(n) = #{Q in D_n : J(Q) >= 2^(-alpha n)} for n = 1..levels.
inline CoarseCounts coarse_counts(const JTable& jt, double alpha, int levels) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (levels < 1 || levels > jt.max_depth()) throw DomainError("levels outside the truncated tree");
  CoarseCounts c;
  c.r = jt.r();
  c.alpha = alpha;
  for (int n = 1; n <= levels; ++n) {
    const double t = -alpha * n;
    std::size_t count = 0;
    for (double lj : jt.log2_j(n))
      if (log2_at_least(lj, t)) ++count;
    c.counts.emplace_back(n, static_cast<double>(count));
  }
  fill_coarse_estimates(c);
  return c;
}

inline CoarseCounts coarse_counts(const DyadicMeasure& m, double r, double alpha, int levels) {
  return coarse_counts(JTable(m, r), alpha, levels);
}

struct CoarseDimension {
  double f_upper = 0.0;
  double f_lower = 0.0;
  double argmax_upper = 0.0;
  double argmax_lower = 0.0;
  std::vector<CoarseCounts> per_alpha;
};

inline CoarseDimension optimize_over_alpha(std::vector<CoarseCounts> per_alpha) {
  CoarseDimension d;
  for (const auto& c : per_alpha) {
    if (c.f_upper / c.alpha > d.f_upper) {
      d.f_upper = c.f_upper / c.alpha;
      d.argmax_upper = c.alpha;
    }
    if (c.f_lower / c.alpha > d.f_lower) {
      d.f_lower = c.f_lower / c.alpha;
      d.argmax_lower = c.alpha;
    }
  }
  d.per_alpha = std::move(per_alpha);
  return d;
}

/// Suprema of F(alpha)/alpha over a finite alpha grid.
inline CoarseDimension optimized_coarse_dimension(const JTable& jt, std::span<const double> alpha_grid,
                                                  int levels) {
  std::vector<CoarseCounts> per;
  for (double a : alpha_grid) per.push_back(coarse_counts(jt, a, levels));
  return optimize_over_alpha(std::move(per));
}

inline CoarseDimension optimized_coarse_dimension(const DyadicMeasure& m, double r,
                                                  std::span<const double> alpha_grid, int levels) {
  return optimized_coarse_dimension(JTable(m, r), alpha_grid, levels);
}

}  // namespace quantdim
