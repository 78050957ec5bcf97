#pragma once

// L^q-spectrum, J-partition function, critical exponent q_r and the
// quantities derived from it. All limsup-type quantities are finite-depth
// estimates under a named depth protocol.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/error.hpp"

namespace quantdim {

/// How a per-level sequence becomes a point estimate. MaxLastIntercept_v1:
/// max of the deepest-level value and the intercept of the least-squares
/// fit of value_n against 1/n over the deepest ceil(N/2) levels.
enum class DepthProtocol { MaxLastIntercept_v1 };

inline const char* protocol_name(DepthProtocol p) {
  switch (p) {
    case DepthProtocol::MaxLastIntercept_v1:
      return "max-last-intercept-v1";
  }
  return "unknown";
}

inline constexpr const char* kArtifactVersion = "quantdim 1.0.0";

struct Extrapolated {
  std::vector<std::pair<int, double>> per_level;  ///< (n, value_n) over the fit window
  double deepest = 0.0;
  double intercept = 0.0;
  double value = 0.0;
};

inline Extrapolated extrapolate(std::vector<std::pair<int, double>> per_level, DepthProtocol p) {
  Extrapolated e;
  e.per_level = std::move(per_level);
  if (e.per_level.empty()) return e;
  e.deepest = e.per_level.back().second;
  std::vector<double> xs, ys;
  for (const auto& [n, v] : e.per_level) {
    xs.push_back(1.0 / n);
    ys.push_back(v);
  }
  e.intercept = xs.size() > 1 ? fit_line(xs, ys).intercept : e.deepest;
  switch (p) {
    case DepthProtocol::MaxLastIntercept_v1:
      e.value = std::max(e.deepest, e.intercept);
      break;
  }
  return e;
}

/// log2 sum_i 2^(q l_i), exact count branch at q = 0.
inline double log2_sum_pow(std::span<const double> l, double q) {
  if (l.empty()) return -std::numeric_limits<double>::infinity();
  if (q == 0.0) return std::log2(static_cast<double>(l.size()));
  double top = -std::numeric_limits<double>::infinity();
  for (double x : l) top = std::max(top, q * x);
  double s = 0.0;
  for (double x : l) s += std::exp2(q * x - top);
  return top + std::log2(s);
}

/// log2 J(Q) for every stored cube, J(Q) = max over descendants Q' (down to
/// the truncation depth) of nu(Q') Lambda(Q')^(r/d), nu normalized.
class JTable {
 public:
  JTable(const DyadicMeasure& m, double r) : r_(r) {
    const int depth = m.max_depth();
    const double lt = std::log2(m.total());
    local_.resize(depth + 1);
    for (int n = 0; n <= depth; ++n) {
      auto mass = m.masses(n);
      local_[n].resize(mass.size());
      for (std::size_t i = 0; i < mass.size(); ++i) local_[n][i] = std::log2(mass[i]) - lt - n * r;
    }
    if (r >= 0.0) {
      // children never exceed their parent when r >= 0
      argmax_.assign(depth + 1, {});
      return;
    }
    lj_ = local_;
    argmax_.resize(depth + 1);
    argmax_[depth].assign(lj_[depth].size(), depth);
    for (int n = depth - 1; n >= 0; --n) {
      argmax_[n].assign(lj_[n].size(), n);
      for (std::size_t i = 0; i < lj_[n].size(); ++i) {
        const auto [b, e] = m.child_range(n, i);
        for (auto c = b; c < e; ++c)
          if (lj_[n + 1][c] > lj_[n][i]) {
            lj_[n][i] = lj_[n + 1][c];
            argmax_[n][i] = argmax_[n + 1][c];
          }
      }
    }
  }

  double r() const { return r_; }
  int max_depth() const { return static_cast<int>(local_.size()) - 1; }
  std::span<const double> log2_j(int n) const { return r_ >= 0.0 ? local_.at(n) : lj_.at(n); }
  /// log2 nu(Q) Lambda(Q)^(r/d): J truncated at the cube's own level.
  std::span<const double> log2_local(int n) const { return local_.at(n); }
  /// Level of the descendant attaining J(Q).
  int argmax_level(int n, std::size_t i) const { return r_ >= 0.0 ? n : argmax_[n][i]; }

 private:
  double r_;
  std::vector<std::vector<double>> local_;
  std::vector<std::vector<double>> lj_;
  std::vector<std::vector<int>> argmax_;
};

struct JValue {
  double value = 0.0;
  double log2_value = -std::numeric_limits<double>::infinity();
  int argmax_level = 0;
  /// r < 0 and the maximizing descendant sits at the truncation depth, so J
  /// may keep growing with depth.
  bool growth_suspect = false;
};

/// J(q) by a scan of the stored subtree below q.
inline JValue j_value(const DyadicMeasure& m, double r, const CubeIndex& q) {
  JValue out;
  if (q.level > m.max_depth()) throw DomainError("cube below the truncation depth");
  auto idx = m.find(q);
  if (!idx) {
    out.argmax_level = q.level;
    return out;
  }
  const double lt = std::log2(m.total());
  std::size_t lo = *idx, hi = *idx + 1;
  for (int n = q.level; n <= m.max_depth(); ++n) {
    auto mass = m.masses(n);
    for (std::size_t i = lo; i < hi; ++i) {
      const double l = std::log2(mass[i]) - lt - n * r;
      if (l > out.log2_value) {
        out.log2_value = l;
        out.argmax_level = n;
      }
    }
    if (r >= 0.0 || n == m.max_depth()) break;
    const std::size_t nlo = m.child_range(n, lo).first;
    const std::size_t nhi = m.child_range(n, hi - 1).second;
    lo = nlo;
    hi = nhi;
    if (lo >= hi) break;
  }
  out.value = std::exp2(out.log2_value);
  out.growth_suspect = r < 0.0 && out.argmax_level == m.max_depth() && m.max_depth() > q.level;
  return out;
}

struct TauValue {
  double value = 0.0;
  double truncated_value = 0.0;  ///< same sum with J replaced by nu Lambda^(r/d)
  bool truncation_sensitive = false;
  std::string warning;
};

struct CriticalExponent {
  double r = 0.0;
  double q_r = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};         ///< qr_bounds output
  std::pair<double, double> search_bracket{0.0, 0.0};  ///< padded interval bisected
  /// r < 0: 1 + tau-hat(1)/(dim_inf + r), the convexity bound that the upper
  /// end of `bracket` relaxes; it exceeds that end when -r > dim_M - dim_inf
  double tau_upper = 0.0;
  bool outside_bracket = false;                        ///< q_r beyond `bracket`
  double residual = 0.0;                               ///< tau-hat(q_r)
  double d_r = 0.0;                                    ///< r q_r / (1 - q_r)
  double dim_m = 0.0;
  double dim_inf = 0.0;
  bool degenerate = false;
  std::string note;
  DepthProtocol protocol = DepthProtocol::MaxLastIntercept_v1;
};

/// Sandwich bracket for q_r from the upper Minkowski and infinity dimensions.
inline std::pair<double, double> qr_bounds(double dim_m, double dim_inf, double r) {
  if (!(dim_inf > 0.0) || dim_m < dim_inf - 1e-12) throw DomainError("need dim_M >= dim_inf > 0");
  if (!(r > -dim_inf)) throw DomainError("order must exceed -dim_inf");
  if (r == 0.0) return {1.0, 1.0};
  if (r > 0.0) return {0.0, dim_m / (dim_m + r)};
  return {dim_m / (dim_m + r), 1.0 + (dim_m - dim_inf) / (dim_inf + r)};
}

inline constexpr double kBisectionTol = 1e-6;
inline constexpr double kOrderMargin = 1e-3;
inline constexpr double kDegenerateDim = 1e-9;

/// Shared per-measure state: log-masses, J tables per order, dim_inf.
class SpectrumContext {
 public:
  explicit SpectrumContext(const DyadicMeasure& m, DepthProtocol p = DepthProtocol::MaxLastIntercept_v1)
      : m_(&m), protocol_(p) {
    const double lt = std::log2(m.total());
    log_mass_.resize(m.max_depth() + 1);
    for (int n = 0; n <= m.max_depth(); ++n) {
      auto mass = m.masses(n);
      log_mass_[n].resize(mass.size());
      for (std::size_t i = 0; i < mass.size(); ++i) log_mass_[n][i] = std::log2(mass[i]) - lt;
    }
  }

  const DyadicMeasure& measure() const { return *m_; }
  DepthProtocol protocol() const { return protocol_; }
  int depth() const { return m_->max_depth(); }
  int window_start() const { return deepest_half_start(depth()); }

  const JTable& jtable(double r) const {
    auto it = jtables_.find(r);
    if (it == jtables_.end()) it = jtables_.emplace(r, std::make_unique<JTable>(*m_, r)).first;
    return *it->second;
  }

  const DimInftyEstimate& dim_inf() const {
    if (!dim_inf_) dim_inf_ = dim_infty_estimate(*m_);
    return *dim_inf_;
  }

  double beta_n(double q, int n) const {
    check_level(n);
    if (n == 0) return 0.0;
    return log2_sum_pow(log_mass_[n], q) / n;
  }

  double tau_n(double r, double q, int n) const {
    check_level(n);
    if (n == 0) return q * jtable(r).log2_j(0)[0];
    return log2_sum_pow(jtable(r).log2_j(n), q) / n;
  }

  TauValue tau_n_checked(double r, double q, int n) const {
    TauValue t;
    t.value = tau_n(r, q, n);
    t.truncated_value = n == 0 ? q * jtable(r).log2_local(0)[0] : log2_sum_pow(jtable(r).log2_local(n), q) / n;
    t.truncation_sensitive = std::abs(t.value - t.truncated_value) > 1e-6;
    if (r <= -dim_inf().value) t.warning = "order at or below -dim_inf estimate; tau may be +inf in the limit";
    return t;
  }

  Extrapolated beta_hat(double q) const {
    std::vector<std::pair<int, double>> v;
    for (int n = window_start(); n <= depth(); ++n) v.emplace_back(n, beta_n(q, n));
    return extrapolate(std::move(v), protocol_);
  }

  Extrapolated tau_hat(double r, double q) const {
    std::vector<std::pair<int, double>> v;
    for (int n = window_start(); n <= depth(); ++n) v.emplace_back(n, tau_n(r, q, n));
    return extrapolate(std::move(v), protocol_);
  }

  /// Per-level entropy quotient sum nu log2(1/nu) / n.
  double entropy_n(int n) const {
    check_level(n);
    if (n == 0) return 0.0;
    double h = 0.0;
    for (double l : log_mass_[n]) h -= std::exp2(l) * l;
    return h / n;
  }

  Extrapolated entropy_hat() const {
    std::vector<std::pair<int, double>> v;
    for (int n = window_start(); n <= depth(); ++n) v.emplace_back(n, entropy_n(n));
    return extrapolate(std::move(v), protocol_);
  }

  CriticalExponent critical_q(double r) const {
    if (depth() < 8) throw DomainError("critical_q needs depth >= 8");
    CriticalExponent c;
    c.r = r;
    c.protocol = protocol_;
    c.dim_m = beta_hat(0.0).value;
    c.dim_inf = dim_inf().value;
    if (c.dim_m <= kDegenerateDim && r > 0.0) {
      // single cube per level: tau(q) = -q r < 0 for every q > 0
      c.degenerate = true;
      c.q_r = 0.0;
      c.d_r = 0.0;
      c.note = "degenerate: one positive-mass cube per level (purely atomic), q_r = 0";
      return c;
    }
    if (!(r > -c.dim_inf + kOrderMargin))
      throw DomainError("order " + std::to_string(r) + " not above -dim_inf estimate " + std::to_string(c.dim_inf));
    if (c.dim_m < c.dim_inf) c.dim_m = c.dim_inf;  // finite-depth estimates may cross by rounding
    c.bracket = qr_bounds(c.dim_m, c.dim_inf, r);
    double upper = c.bracket.second;
    if (r < 0.0) {
      c.tau_upper = 1.0 + tau_hat(r, 1.0).value / (c.dim_inf + r);
      upper = std::max(upper, c.tau_upper);
    }
    if (c.bracket.first > upper + 1e-9 * std::max(1.0, upper)) throw BracketError("inverted bracket");
    if (r == 0.0) {
      c.q_r = 1.0;
      c.search_bracket = c.bracket;
      c.note = "r = 0: q_r = 1, D_0 from -beta'(1)";
      return c;
    }
    const double pad = 1e-2 + 0.05 * (upper - c.bracket.first);
    double lo = std::max(0.0, c.bracket.first - pad);
    double hi = upper + pad;
    c.search_bracket = {lo, hi};
    auto f = [&](double q) { return tau_hat(r, q).value; };
    double flo = f(lo);
    const double fhi = f(hi);
    if (fhi > 0.0) throw NoCrossingError("tau-hat positive on the whole bracket; q_r out of range");
    if (flo <= 0.0 && lo > 0.0) throw BracketError("tau-hat already nonpositive at the lower bracket end");
    while (hi - lo > kBisectionTol) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (fm > 0.0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    c.q_r = 0.5 * (lo + hi);
    c.residual = f(c.q_r);
    c.d_r = r * c.q_r / (1.0 - c.q_r);
    c.outside_bracket = c.q_r < c.bracket.first - kBisectionTol || c.q_r > c.bracket.second + kBisectionTol;
    if (c.outside_bracket) c.note = "q_r beyond the dimension bracket; inside the tau(1) bound";
    return c;
  }

 private:
  void check_level(int n) const {
    if (n < 0 || n > depth()) throw DomainError("level outside the truncated tree");
  }

  const DyadicMeasure* m_;
  DepthProtocol protocol_;
  std::vector<std::vector<double>> log_mass_;
  mutable std::map<double, std::unique_ptr<JTable>> jtables_;
  mutable std::optional<DimInftyEstimate> dim_inf_;
};

inline double beta_n(const DyadicMeasure& m, double q, int n) { return SpectrumContext(m).beta_n(q, n); }

inline TauValue tau_n(const DyadicMeasure& m, double r, double q, int n) {
  return SpectrumContext(m).tau_n_checked(r, q, n);
}

inline CriticalExponent critical_q(const DyadicMeasure& m, double r,
                                   DepthProtocol p = DepthProtocol::MaxLastIntercept_v1) {
  return SpectrumContext(m, p).critical_q(r);
}

/// Generalized Renyi dimension (tau-hat(q) + r q) / (1 - q); entropy quotient at q = 1.
inline double renyi(const SpectrumContext& ctx, double r, double q) {
  if (q < 0.0) throw DomainError("q must be >= 0");
  if (q == 1.0) return ctx.entropy_hat().value;
  return (ctx.tau_hat(r, q).value + r * q) / (1.0 - q);
}

inline double renyi(const DyadicMeasure& m, double r, double q) { return renyi(SpectrumContext(m), r, q); }

struct DZero {
  double value = 0.0;
  double half_step_value = 0.0;
  bool non_differentiable = false;
};

inline constexpr double kDZeroStep = 1e-3;

/// -beta'(1) by central differences of beta-hat, checked at half the step.
inline DZero d_zero(const SpectrumContext& ctx) {
  if (ctx.depth() < 8) throw DomainError("d_zero needs depth >= 8");
  auto diff = [&](double h) { return -(ctx.beta_hat(1.0 + h).value - ctx.beta_hat(1.0 - h).value) / (2.0 * h); };
  DZero z;
  z.value = diff(kDZeroStep);
  z.half_step_value = diff(kDZeroStep / 2);
  z.non_differentiable = std::abs(z.value - z.half_step_value) > 1e-3;
  return z;
}

inline DZero d_zero(const DyadicMeasure& m) { return d_zero(SpectrumContext(m)); }

struct BoundaryLimit {
  double a_nu = 0.0;
  double limit_dim = 0.0;
  bool capped = false;
  std::vector<std::pair<double, double>> q_by_r;
};

inline constexpr double kBoundaryCap = 1e6;

/// a_nu = max q_r over r_grid and a/(a-1) dim_inf.
/// `dim_inf` replaces the finite-depth estimate in the limit formula when given.
inline BoundaryLimit boundary_limit(const SpectrumContext& ctx, std::span<const double> r_grid,
                                    std::optional<double> dim_inf = std::nullopt) {
  if (r_grid.size() < 5) throw DomainError("boundary_limit needs at least 5 grid points");
  BoundaryLimit b;
  const double dinf = dim_inf.value_or(ctx.dim_inf().value);
  for (double r : r_grid) {
    if (!(r < 0.0)) throw DomainError("boundary_limit grid must be negative");
    const auto c = ctx.critical_q(r);
    b.q_by_r.emplace_back(r, c.q_r);
    b.a_nu = std::max(b.a_nu, c.q_r);
  }
  if (b.a_nu > kBoundaryCap) {
    b.capped = true;
    b.limit_dim = dinf;
  } else {
    b.limit_dim = b.a_nu / (b.a_nu - 1.0) * dinf;
  }
  return b;
}

struct PfRegularityReport {
  double r = 0.0;
  std::optional<CriticalExponent> critical;
  std::string error;
  std::vector<double> q_grid;
  std::vector<double> spreads;
  double max_spread = 0.0;
  double derivative_gap = 0.0;
  bool consistent = false;
  std::string note;
};

/// Finite-depth evidence for partition-function regularity near q_r.
inline PfRegularityReport pf_regularity_report(const SpectrumContext& ctx, double r) {
  PfRegularityReport rep;
  rep.r = r;
  double qr = 0.0;
  try {
    rep.critical = ctx.critical_q(r);
    qr = rep.critical->q_r;
    if (rep.critical->degenerate) rep.note = rep.critical->note;
  } catch (const Error& e) {
    rep.error = e.what();
    return rep;
  }
  for (double dq : {-0.1, -0.05, 0.0, 0.05, 0.1}) {
    const double q = qr + dq;
    if (q < 0.0) continue;
    rep.q_grid.push_back(q);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int n = ctx.window_start(); n <= ctx.depth(); ++n) {
      const double t = ctx.tau_n(r, q, n);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    rep.spreads.push_back(hi - lo);
    rep.max_spread = std::max(rep.max_spread, hi - lo);
  }
  const double h = 1e-3;
  const double t0 = ctx.tau_hat(r, qr).value;
  const double right = (ctx.tau_hat(r, qr + h).value - t0) / h;
  const double left = qr >= h ? (t0 - ctx.tau_hat(r, qr - h).value) / h : right;
  rep.derivative_gap = right - left;
  rep.consistent = rep.max_spread <= 1e-3;
  if (rep.note.empty())
    rep.note = rep.consistent ? "per-level tau spread within 1e-3: consistent with PF-regularity"
                              : "per-level tau spread exceeds 1e-3: no evidence of PF-regularity";
  return rep;
}

inline PfRegularityReport pf_regularity_report(const DyadicMeasure& m, double r) {
  return pf_regularity_report(SpectrumContext(m), r);
}

enum class SpectrumKind { Beta, TauJ, Renyi };

inline const char* kind_name(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::Beta:
      return "beta";
    case SpectrumKind::TauJ:
      return "tau";
    case SpectrumKind::Renyi:
      return "renyi";
  }
  return "unknown";
}

struct SpectrumSample {
  double q = 0.0;
  std::vector<std::pair<int, double>> per_level;
  double extrapolated = 0.0;
};

struct SpectrumCurve {
  SpectrumKind kind = SpectrumKind::Beta;
  double r = 0.0;
  int first_level = 1;
  int last_level = 1;
  DepthProtocol protocol = DepthProtocol::MaxLastIntercept_v1;
  std::vector<SpectrumSample> samples;
};

/// Samples beta, tau_J or the Renyi quotient at every level 1..N over a q-grid.
inline SpectrumCurve spectrum_curve(const SpectrumContext& ctx, SpectrumKind kind, double r,
                                    std::span<const double> q_grid) {
  SpectrumCurve c;
  c.kind = kind;
  c.r = kind == SpectrumKind::Beta ? 0.0 : r;
  c.first_level = 1;
  c.last_level = ctx.depth();
  c.protocol = ctx.protocol();
  for (double q : q_grid) {
    SpectrumSample s;
    s.q = q;
    for (int n = 1; n <= ctx.depth(); ++n) {
      double v = 0.0;
      switch (kind) {
        case SpectrumKind::Beta:
          v = ctx.beta_n(q, n);
          break;
        case SpectrumKind::TauJ:
          v = ctx.tau_n(r, q, n);
          break;
        case SpectrumKind::Renyi:
          v = q == 1.0 ? ctx.entropy_n(n) : (ctx.tau_n(r, q, n) + r * q) / (1.0 - q);
          break;
      }
      s.per_level.emplace_back(n, v);
    }
    switch (kind) {
      case SpectrumKind::Beta:
        s.extrapolated = ctx.beta_hat(q).value;
        break;
      case SpectrumKind::TauJ:
        s.extrapolated = ctx.tau_hat(r, q).value;
        break;
      case SpectrumKind::Renyi:
        s.extrapolated = renyi(ctx, r, q);
        break;
    }
    c.samples.push_back(std::move(s));
  }
  return c;
}

}  // namespace quantdim
