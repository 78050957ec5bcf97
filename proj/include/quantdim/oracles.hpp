#pragma once

// Closed-form reference values and the registry of example densities that
// serve as ground truth for the numerical modules.

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "quantdim/density.hpp"
#include "quantdim/error.hpp"
#include "quantdim/quadrature.hpp"

namespace quantdim::oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A normalized density on (0,1] together with its declared metadata.
struct RegisteredDensity {
  std::string name;
  std::string description;
  Density1d density;                 ///< normalized to total mass 1
  double normalization = 1.0;        ///< integral of the unnormalized formula
  std::vector<double> singular_points;
  double s_h = kInf;                 ///< critical integrability exponent
  double dim_infty = 1.0;
  bool norm_at_s_h_finite = false;   ///< whether ||h||_{s_h} < inf
  std::string notes;
};

// ---------------------------------------------------------------------------
// Spread interval family: for n >= 1 the region (2^-n, 2^(1-n)] is cut into
// 2^n cells of length 2^-2n, and the k-th cell starts with an interval of
// length 2^(1-3n) carrying density 2^((3n-1)/2). Cells never share a dyadic
// cube of the interval's own scale, so the local mass exponent stays 1/2.
// ---------------------------------------------------------------------------
namespace spread_family {

inline double region_lo(int n) { return std::ldexp(1.0, -n); }
inline double cell_width(int n) { return std::ldexp(1.0, -2 * n); }
inline double piece_length(int n) { return std::ldexp(1.0, 1 - 3 * n); }
inline double piece_value(int n) { return std::exp2((3.0 * n - 1.0) / 2.0); }
inline double piece_mass(int n) { return std::exp2((1.0 - 3.0 * n) / 2.0); }
inline double family_mass(int n) { return std::exp2((1.0 - n) / 2.0); }
inline double tail_mass(int n0) { return std::exp2((1.0 - n0) / 2.0) / (1.0 - std::exp2(-0.5)); }
inline double total_mass() { return tail_mass(1); }

/// Family index n with x in (2^-n, 2^(1-n)].
inline int family_of(double x) {
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m 2^e, m in [0.5, 1)
  return m == 0.5 ? 2 - e : 1 - e;
}

inline double value(double x) {
  if (!(x > 0.0) || x > 1.0) return 0.0;
  const int n = family_of(x);
  if (n > 300) return 0.0;  // below 2^-300; never sampled
  const double t = x - region_lo(n);
  const double w = cell_width(n);
  const double j = std::ceil(t / w) - 1.0;
  const double o = t - j * w;
  return o <= piece_length(n) ? piece_value(n) : 0.0;
}

/// Length of the family-n pieces inside (region_lo, region_lo + t].
inline double covered(int n, double t) {
  if (t <= 0.0) return 0.0;
  const double w = cell_width(n);
  const double len = piece_length(n);
  const double full = std::floor(t / w);
  return full * len + std::min(t - full * w, len);
}

inline double interval_mass(double a, double b) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  const int n_hi = family_of(b);
  for (int n = n_hi;; ++n) {
    const double lo = region_lo(n), hi = 2.0 * lo;
    if (hi <= a) break;
    if ((a == 0.0 && n > n_hi + 1 && n > 60) || n > 300) {
      total += tail_mass(n);
      break;
    }
    if (a <= lo && b >= hi) {
      total += family_mass(n);
    } else {
      const double ca = std::max(a, lo) - lo;
      const double cb = std::min(b, hi) - lo;
      total += piece_mass(n) * (covered(n, cb) - covered(n, ca)) / piece_length(n);
    }
  }
  return total;
}

inline double shell_power(double s, int n) {
  // 2^n pieces of length 2^(1-3n) at height 2^((3n-1)/2)
  return std::exp2(n + (1.0 - 3.0 * n) + s * (3.0 * n - 1.0) / 2.0);
}

}  // namespace spread_family

inline double log_density_value(double x) {
  if (!(x > 0.0) || x > 1.0) return 0.0;
  const double l = std::log(x / 10.0);
  return 1.0 / (std::sqrt(x) * l * l);
}

namespace detail {

inline RegisteredDensity make(const std::string& name) {
  RegisteredDensity r;
  r.name = name;
  if (name == "uniform") {
    r.description = "h = 1 on (0,1]";
    r.density = Density1d::piecewise({{0.0, 1.0, {1.0}}});
    r.s_h = kInf;
    r.dim_infty = 1.0;
  } else if (name == "linear2x") {
    r.description = "h = 2x on (0,1]";
    r.density = Density1d::piecewise({{0.0, 1.0, {0.0, 2.0}}});
    r.s_h = kInf;
    r.dim_infty = 1.0;
  } else if (name == "ex28") {
    r.description = "spread interval family, |I_nk| = 2^(1-3n), h = |I_nk|^(-1/2) on I_nk";
    const double z = spread_family::total_mass();
    r.normalization = z;
    r.density = Density1d::pointwise(spread_family::value, {0.0})
                    .with_interval_mass(spread_family::interval_mass)
                    .with_shell_powers(spread_family::shell_power, 1)
                    .scaled(1.0 / z);
    r.singular_points = {0.0};
    r.s_h = 4.0 / 3.0;
    r.dim_infty = 0.5;
    r.norm_at_s_h_finite = false;
    r.notes =
        "family n occupies (2^-n, 2^(1-n)], one piece per cell of length 2^-2n; all families kept "
        "(no truncation), masses exact";
  } else if (name == "ex29") {
    r.description = "h = x^(-1/2) (log(x/10))^(-2)";
    Density1d raw = Density1d::pointwise(log_density_value, {0.0});
    Integral z = raw.mass(0.0, 1.0);
    if (!z.converged || !(z.value > 0.0) || z.error > 1e-8)
      throw ConstructionError("ex29 normalization did not converge");
    r.normalization = z.value;
    r.density = raw.scaled(1.0 / z.value);
    r.singular_points = {0.0};
    r.s_h = 2.0;
    r.dim_infty = 0.5;
    r.norm_at_s_h_finite = true;
  } else {
    throw LookupError("unknown density '" + name + "'");
  }
  return r;
}

}  // namespace detail

inline const std::vector<std::string>& registered_names() {
  static const std::vector<std::string> names{"uniform", "linear2x", "ex28", "ex29"};
  return names;
}

/// Registered example density by name; built once and cached.
inline const RegisteredDensity& example_density(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, RegisteredDensity> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, detail::make(name)).first;
  return it->second;
}

/// log2 sum_i p_i^q for a dyadic cascade.
inline double cascade_beta(std::span<const double> p, double q) {
  double s = 0.0;
  for (double x : p) s += std::pow(x, q);
  return std::log2(s);
}

/// log2 sum_i (p_i 2^-r)^q, the cascade J-partition function.
inline double cascade_tau(std::span<const double> p, double r, double q) { return cascade_beta(p, q) - q * r; }

/// Shannon entropy in bits, sum p log2(1/p); the cascade's -beta'(1).
inline double cascade_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log2(x);
  return h;
}

/// Root of q -> cascade_tau(p, r, q) by plain bisection on [lo, hi].
inline double cascade_critical_q(std::span<const double> p, double r, double lo = 1e-9, double hi = 1e3) {
  double flo = cascade_tau(p, r, lo);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    const double fm = cascade_tau(p, r, m);
    if ((fm > 0) == (flo > 0)) {
      lo = m;
      flo = fm;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

/// Error of the equal-cell midpoint codebook of n points for Lebesgue on (0,1].
inline double uniform_midpoint_error(int n, double r) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(r > -1.0)) throw DomainError("order must exceed -1 for the uniform law on (0,1]");
  if (r == 0.0) return std::exp(-1.0) / (2.0 * n);
  return std::pow(std::exp2(-r) / (1.0 + r), 1.0 / r) / n;
}

/// ||h||_s = (int h^s)^(1/s) of a registered density; divergent flag when infinite.
inline Integral s_norm(const std::string& name, double s) {
  Integral p = example_density(name).density.power_integral(s);
  if (!p.divergent) p.value = std::pow(p.value, 1.0 / s);
  return p;
}

/// exp(-int h log h) of a registered density, computed once and cached.
inline Integral phi_zero_reference(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, Integral> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(name); it != cache.end()) return it->second;
  }
  Integral e = example_density(name).density.entropy_integral();
  Integral out = e;
  if (e.divergent) {
    out.value = 0.0;
  } else {
    out.value = std::exp(-e.value);
    out.error = out.value * e.error;
  }
  std::lock_guard lock(mu);
  cache.emplace(name, out);
  return out;
}

}  // namespace quantdim::oracles
