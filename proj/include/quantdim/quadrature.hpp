#pragma once

// One-dimensional quadrature used for density integrals: fixed-order
// Gauss-Legendre panels, adaptive bisection, and geometric shell grading
// toward integrable (or not) endpoint singularities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

namespace quantdim {

struct QuadratureSettings {
  int order = 20;                      ///< Gauss-Legendre points per panel
  double abs_tol = 1e-15;
  double rel_tol = 1e-13;
  std::size_t max_nodes = 2'000'000;   ///< node budget per adaptive call
  int max_shells = 400;                ///< shells per graded endpoint
  int growth_window = 8;               ///< monotone-growth rounds that mean +inf
  int version = 1;                     ///< pinned by tests; bump when defaults change
};

/// Result of a quadrature. `divergent` means the integral was classified +inf.
struct Integral {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
  bool converged = true;
  bool divergent = false;

  Integral& operator+=(const Integral& o) {
    value += o.value;
    error += o.error;
    nodes += o.nodes;
    converged = converged && o.converged;
    divergent = divergent || o.divergent;
    if (divergent) value = std::numeric_limits<double>::infinity();
    return *this;
  }

  static Integral infinite() {
    Integral r;
    r.value = std::numeric_limits<double>::infinity();
    r.divergent = true;
    r.converged = false;
    return r;
  }
};

namespace detail {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

inline GaussRule make_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline const GaussRule& gauss_rule(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
  return it->second;
}

template <class F>
double gauss_panel(const GaussRule& rule, F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

}  // namespace detail

/// Adaptive bisection with Gauss-Legendre panels on [a, b].
template <class F>
Integral integrate_adaptive(F&& f, double a, double b, const QuadratureSettings& s = {}) {
  Integral out;
  if (!(b > a)) return out;
  const auto& rule = detail::gauss_rule(s.order);
  const double total_width = b - a;
  struct Panel {
    double a, b, est;
  };
  std::vector<Panel> stack;
  stack.push_back({a, b, detail::gauss_panel(rule, f, a, b)});
  out.nodes = rule.nodes.size();
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double l = detail::gauss_panel(rule, f, p.a, m);
    const double r = detail::gauss_panel(rule, f, m, p.b);
    out.nodes += 2 * rule.nodes.size();
    const double refined = l + r;
    const double diff = std::abs(refined - p.est);
    if (!std::isfinite(refined)) {
      out.value = refined;
      out.converged = false;
      out.divergent = refined > 0;
      return out;
    }
    const double local_tol =
        std::max(s.abs_tol * (p.b - p.a) / total_width, s.rel_tol * std::abs(refined));
    const bool tiny = (p.b - p.a) <= 1e-14 * std::max(1.0, std::abs(p.a));
    if (diff <= local_tol || tiny || out.nodes >= s.max_nodes) {
      if (diff > local_tol && !tiny) out.converged = false;
      out.value += refined;
      out.error += diff;
    } else {
      stack.push_back({p.a, m, l});
      stack.push_back({m, p.b, r});
    }
  }
  return out;
}

/// Integrates g over (0, length] where g may be singular at 0, using
/// geometric shells (length 2^-k-1, length 2^-k]. Shell sums that keep
/// growing over the last `growth_window` rounds of an exhausted budget
/// classify the integral as +inf.
template <class G>
Integral integrate_graded_from_zero(G&& g, double length, const QuadratureSettings& s = {}) {
  Integral out;
  if (!(length > 0)) return out;
  std::vector<double> shells;
  shells.reserve(64);
  double hi = length;
  for (int k = 0; k < s.max_shells; ++k) {
    const double lo = hi * 0.5;
    Integral shell = integrate_adaptive(g, lo, hi, s);
    out.nodes += shell.nodes;
    out.error += shell.error;
    out.converged = out.converged && shell.converged;
    if (!std::isfinite(shell.value)) return Integral::infinite();
    out.value += shell.value;
    shells.push_back(shell.value);
    hi = lo;
    if (k >= 3) {
      const double a = std::abs(shells[k]);
      const double b = std::abs(shells[k - 1]);
      const double c = std::abs(shells[k - 2]);
      if (a == 0.0 && b == 0.0 && c == 0.0) return out;
      if (a < b && b < c) {
        const double rho = std::max(a / b, b / c);
        const double tail = a * rho / (1.0 - rho);
        if (tail <= std::max(s.abs_tol, s.rel_tol * std::abs(out.value))) {
          out.value += std::copysign(tail, shells[k]);
          out.error += tail;
          return out;
        }
      }
    }
  }
  // Budget exhausted: decide between slow convergence and divergence.
  const int w = s.growth_window;
  const int n = static_cast<int>(shells.size());
  bool growing = n > w;
  for (int i = n - w; growing && i < n; ++i) growing = std::abs(shells[i]) >= std::abs(shells[i - 1]);
  if (growing) {
    Integral inf = Integral::infinite();
    inf.nodes = out.nodes;
    return inf;
  }
  out.converged = false;
  if (n >= 2) out.error += std::abs(shells[n - 1]) * n;  // crude remainder bound
  return out;
}

/// Integrates f on [a, b]; `sing_a` / `sing_b` request grading at that end.
template <class F>
Integral integrate(F&& f, double a, double b, bool sing_a, bool sing_b, const QuadratureSettings& s = {}) {
  if (!(b > a)) return {};
  if (!sing_a && !sing_b) return integrate_adaptive(f, a, b, s);
  if (sing_a && sing_b) {
    const double m = 0.5 * (a + b);
    Integral left = integrate(f, a, m, true, false, s);
    left += integrate(f, m, b, false, true, s);
    return left;
  }
  if (sing_a) {
    auto g = [&](double u) { return f(a + u); };
    return integrate_graded_from_zero(g, b - a, s);
  }
  auto g = [&](double u) { return f(b - u); };
  return integrate_graded_from_zero(g, b - a, s);
}

/// Sums shell contributions term(k), k = start, start+1, ... with the same
/// convergence and divergence rules as the graded integrator.
template <class T>
Integral sum_shells(T&& term, int start, const QuadratureSettings& s = {}) {
  Integral out;
  std::vector<double> shells;
  for (int k = 0; k < s.max_shells * 8; ++k) {
    const double v = term(start + k);
    if (!std::isfinite(v)) return Integral::infinite();
    out.value += v;
    out.nodes += 1;
    shells.push_back(v);
    if (k >= 3) {
      const double a = std::abs(shells[k]);
      const double b = std::abs(shells[k - 1]);
      const double c = std::abs(shells[k - 2]);
      if (a == 0.0 && b == 0.0 && c == 0.0) return out;
      if (a < b && b < c) {
        const double rho = std::max(a / b, b / c);
        const double tail = a * rho / (1.0 - rho);
        if (tail <= std::max(s.abs_tol, s.rel_tol * std::abs(out.value))) {
          out.value += tail;
          out.error += tail;
          return out;
        }
      }
    }
  }
  const int w = s.growth_window;
  const int n = static_cast<int>(shells.size());
  bool growing = true;
  for (int i = n - w; growing && i < n; ++i) growing = std::abs(shells[i]) >= std::abs(shells[i - 1]);
  if (growing) return Integral::infinite();
  out.converged = false;
  return out;
}

}  // namespace quantdim
