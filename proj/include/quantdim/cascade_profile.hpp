#pragma once

// Exact partition statistics of a dyadic cascade at depths no tree can reach.
//
// For a cascade with J-factors f_i = p_i 2^(-r) < 1, J of the cube reached by
// a word is the product of its factors, so J depends only on the word's count
// vector and every count can be summed over type classes with multinomial
// weights. Greedy refinement splits words in decreasing J order, which gives
//   M(x)      = 1 + (k-1) #{words : J >= 1/x}
//   gamma(n)  = (s+1)-th largest J over all words, s = floor((n-1)/(k-1)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/error.hpp"
#include "quantdim/partitions.hpp"

namespace quantdim {

class CascadeProfile {
 public:
  CascadeProfile(std::span<const double> p, double r) : r_(r) {
    if (p.size() < 2) throw DomainError("cascade needs at least two maps");
    for (double x : p) {
      const double w = -std::log2(x) + r;
      if (!(w > 0.0)) throw DomainError("J factor p_i 2^-r >= 1: J is not decreasing along words");
      w_.push_back(w);
    }
    std::sort(w_.begin(), w_.end());
  }

  explicit CascadeProfile(const MeasureSpec& spec, double r)
      : CascadeProfile(std::get<IfsCascadeSpec>(spec.variant).probabilities, r) {}

  std::size_t maps() const { return w_.size(); }
  double r() const { return r_; }
  /// -log2 of the J factors, ascending.
  std::span<const double> weights() const { return w_; }

  /// Visits every type class of length n with sum c_i w_i <= cost_max + slack
  /// as (cost, multiplicity).
  void for_each_class(int n, double cost_max, const std::function<void(double, double)>& visit) const {
    ensure_binomials(n);
    const double limit = cost_max + kThresholdSlack * std::max(1.0, std::abs(cost_max));
    const std::size_t k = w_.size();
    // c_0 (lightest weight) is implied; distribute the others recursively
    std::function<void(std::size_t, int, double, double)> rec = [&](std::size_t i, int left, double extra,
                                                                    double mult) {
      if (i == k) {
        const double cost = extra + n * w_[0];
        if (cost <= limit) visit(cost, mult);
        return;
      }
      const double dw = w_[i] - w_[0];
      for (int c = 0; c <= left; ++c) {
        const double e = extra + c * dw;
        if (n * w_[0] + e > limit && c > 0) break;
        rec(i + 1, left - c, e, mult * binom(left, c));
      }
    };
    if (n * w_[0] > limit) return;
    rec(1, n, 0.0, 1.0);
  }

  /// #{words of length n : log2 J >= log2_t}.
  double count_level(int n, double log2_t) const {
    double total = 0.0;
    for_each_class(n, -log2_t, [&](double, double m) { total += m; });
    return total;
  }

  /// #{words of any length : log2 J >= log2_t}.
  double count_all_lengths(double log2_t) const {
    if (!log2_at_least(0.0, log2_t)) return 0.0;
    double total = 0.0;
    const int longest = static_cast<int>(std::floor(-log2_t / w_[0] + 1e-9));
    for (int n = 0; n <= longest; ++n) total += count_level(n, log2_t);
    return total;
  }

  /// Partition entropy M(x).
  double partition_entropy(double x) const {
    return 1.0 + (static_cast<double>(maps()) - 1.0) * count_all_lengths(-std::log2(x));
  }

  /// log2 gamma(budget): (s+1)-th largest log2 J over all words.
  double log2_gamma(double budget) const {
    if (budget < 1.0) throw DomainError("budget must be >= 1");
    const double s = std::floor((budget - 1.0) / (static_cast<double>(maps()) - 1.0));
    // widen the cost window until it holds s+1 words
    double cost_max = 4.0 * w_.back();
    while (true) {
      std::vector<std::pair<double, double>> classes;
      const int longest = static_cast<int>(std::floor(cost_max / w_[0] + 1e-9));
      for (int n = 0; n <= longest; ++n)
        for_each_class(n, cost_max, [&](double c, double m) { classes.emplace_back(c, m); });
      std::sort(classes.begin(), classes.end());
      double seen = 0.0;
      for (const auto& [c, m] : classes) {
        seen += m;
        if (seen >= s + 1.0) return -c;
      }
      cost_max *= 2.0;
    }
  }

  /// N(n, alpha) for every alpha of a sorted grid in one pass over the classes.
  std::vector<double> level_counts(int n, std::span<const double> alphas) const {
    std::vector<double> bins(alphas.size() + 1, 0.0);
    std::vector<double> cuts(alphas.size());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const double t = alphas[j] * n;
      cuts[j] = t + kThresholdSlack * std::max(1.0, t);
    }
    for_each_class(n, alphas.empty() ? 0.0 : alphas.back() * n, [&](double c, double m) {
      const auto j = std::lower_bound(cuts.begin(), cuts.end(), c) - cuts.begin();
      bins[j] += m;
    });
    std::vector<double> out(alphas.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      acc += bins[j];
      out[j] = acc;
    }
    return out;
  }

  /// Coarse counts at the listed levels and optimized coarse dimensions.
  CoarseDimension optimized_coarse_dimension(std::span<const double> alpha_grid, std::span<const int> levels) const {
    std::vector<double> alphas(alpha_grid.begin(), alpha_grid.end());
    if (!std::is_sorted(alphas.begin(), alphas.end())) throw DomainError("alpha grid must be increasing");
    std::vector<CoarseCounts> per(alphas.size());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      if (!(alphas[j] > 0.0)) throw DomainError("alpha must be positive");
      per[j].r = r_;
      per[j].alpha = alphas[j];
    }
    for (int n : levels) {
      const auto counts = level_counts(n, alphas);
      for (std::size_t j = 0; j < alphas.size(); ++j) per[j].counts.emplace_back(n, counts[j]);
    }
    for (auto& c : per) fill_coarse_estimates(c);
    return optimize_over_alpha(std::move(per));
  }

 private:
  double binom(int n, int k) const { return binom_[n][k]; }

  void ensure_binomials(int n) const {
    for (int m = static_cast<int>(binom_.size()); m <= n; ++m) {
      std::vector<double> row(m + 1, 1.0);
      for (int k = 1; k < m; ++k) row[k] = binom_[m - 1][k - 1] + binom_[m - 1][k];
      binom_.push_back(std::move(row));
    }
  }

  double r_;
  std::vector<double> w_;
  mutable std::vector<std::vector<double>> binom_;
};

}  // namespace quantdim
