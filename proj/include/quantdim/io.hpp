#pragma once

// CSV / JSON serialization of results. Every CSV starts with a comment row
// naming the artifact version and the depth protocol.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "quantdim/partitions.hpp"
#include "quantdim/quantizer.hpp"
#include "quantdim/spec_json.hpp"
#include "quantdim/spectra.hpp"

namespace quantdim::io {

/// Round-trip formatting; identical inputs give identical bytes.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or the strings "inf" / "-inf" / "nan".
inline json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

inline std::string csv_banner(DepthProtocol p = DepthProtocol::MaxLastIntercept_v1) {
  return std::string("# ") + kArtifactVersion + "; depth protocol " + protocol_name(p) + "\n";
}

inline std::string spectrum_csv(const SpectrumCurve& c) {
  std::string s = csv_banner(c.protocol);
  s += "# kind " + std::string(kind_name(c.kind)) + "; r " + num(c.r) + "\n";
  s += "q,n,value,extrapolated\n";
  for (const auto& sm : c.samples)
    for (const auto& [n, v] : sm.per_level) s += num(sm.q) + "," + std::to_string(n) + "," + num(v) + "," + num(sm.extrapolated) + "\n";
  return s;
}

inline json spectrum_json(const SpectrumCurve& c) {
  json j;
  j["kind"] = kind_name(c.kind);
  j["r"] = c.r;
  j["depth_range"] = {c.first_level, c.last_level};
  j["protocol"] = protocol_name(c.protocol);
  j["samples"] = json::array();
  for (const auto& sm : c.samples) {
    json js;
    js["q"] = sm.q;
    js["per_level"] = json::array();
    for (const auto& [n, v] : sm.per_level) js["per_level"].push_back({n, jnum(v)});
    js["extrapolated"] = jnum(sm.extrapolated);
    j["samples"].push_back(js);
  }
  return j;
}

inline json critical_json(const CriticalExponent& c) {
  json j;
  j["r"] = c.r;
  j["q_r"] = c.q_r;
  j["D_r"] = jnum(c.d_r);
  j["bracket"] = {jnum(c.bracket.first), jnum(c.bracket.second)};
  j["search_bracket"] = {jnum(c.search_bracket.first), jnum(c.search_bracket.second)};
  j["tau_upper"] = jnum(c.tau_upper);
  j["outside_bracket"] = c.outside_bracket;
  j["residual"] = c.residual;
  j["dim_M"] = c.dim_m;
  j["dim_inf"] = c.dim_inf;
  j["degenerate"] = c.degenerate;
  j["note"] = c.note;
  j["protocol"] = protocol_name(c.protocol);
  return j;
}

inline json quantizer_json(const Quantizer& q) {
  json j;
  j["codebook"] = q.codebook;
  j["r"] = q.r;
  j["V"] = jnum(q.distortion);
  j["e"] = jnum(q.error);
  j["divergent"] = q.divergent;
  j["error_bound"] = jnum(q.error_bound);
  j["method"] = q.method;
  j["seed"] = q.seed;
  j["grid"] = q.grid;
  j["iterations"] = q.iterations;
  j["budget_exceeded"] = q.budget_exceeded;
  return j;
}

inline std::string error_curve_csv(const ErrorCurve& c) {
  std::string s = csv_banner();
  s += "# strategy " + c.strategy + "; r " + num(c.r) + "; seed " + std::to_string(c.seed) + "\n";
  s += "n,e,log_n,neg_log_e\n";
  for (const auto& [n, e] : c.points)
    s += std::to_string(n) + "," + num(e) + "," + num(std::log(n)) + "," + num(-std::log(e)) + "\n";
  return s;
}

inline json error_curve_json(const ErrorCurve& c) {
  json j;
  j["r"] = c.r;
  j["strategy"] = c.strategy;
  j["seed"] = c.seed;
  j["points"] = json::array();
  for (const auto& [n, e] : c.points) j["points"].push_back({n, jnum(e)});
  j["divergent"] = c.divergent;
  j["fit"] = {{"dimension", c.dimension},
              {"dimension_stderr", c.dimension_stderr},
              {"coefficient", c.coefficient},
              {"kappa", c.kappa},
              {"from_n", c.fit_from}};
  j["quantizers"] = json::array();
  for (const auto& q : c.quantizers) j["quantizers"].push_back(quantizer_json(q));
  return j;
}

inline json cube_json(const CubeIndex& q) {
  json a = json::array();
  a.push_back(q.level);
  for (int i = 0; i < q.dim; ++i) a.push_back(q.coords[i]);
  return a;
}

inline json partition_json(const Partition& p) {
  json j;
  j["cardinality"] = p.cardinality;
  j["max_j"] = p.max_j;
  j["depth_limited"] = p.depth_limited;
  j["cubes"] = json::array();
  j["j_values"] = json::array();
  for (std::size_t i = 0; i < p.cubes.size(); ++i) {
    j["cubes"].push_back(cube_json(p.cubes[i]));
    j["j_values"].push_back(p.j_values[i]);
  }
  return j;
}

inline std::string partition_csv(const Partition& p) {
  std::string s = csv_banner();
  s += "level,coords,j\n";
  for (std::size_t i = 0; i < p.cubes.size(); ++i) {
    std::string coords;
    for (int k = 0; k < p.cubes[i].dim; ++k) coords += (k ? " " : "") + std::to_string(p.cubes[i].coords[k]);
    s += std::to_string(p.cubes[i].level) + "," + coords + "," + num(p.j_values[i]) + "\n";
  }
  return s;
}

inline std::string counts_csv(const CoarseCounts& c) {
  std::string s = csv_banner();
  s += "# r " + num(c.r) + "; alpha " + num(c.alpha) + "\n";
  s += "n,count,F_upper,F_lower\n";
  for (const auto& [n, k] : c.counts) s += std::to_string(n) + "," + num(k) + "," + num(c.f_upper) + "," + num(c.f_lower) + "\n";
  return s;
}

/// gnuplot script drawing beta-hat, the line -r q and the markers.
inline std::string spectrum_gnuplot(const std::string& beta_csv, double r, double q_r, double d0) {
  std::string s;
  s += "set datafile separator ','\n";
  s += "set key top right\n";
  s += "set xlabel 'q'\n";
  s += "set arrow from " + num(q_r) + ", graph 0 to " + num(q_r) + ", graph 1 nohead dt 2\n";
  s += "set label 'q_r' at " + num(q_r) + ", graph 0.95\n";
  s += "set label 'D_0 = " + num(d0) + "' at graph 0.05, graph 0.05\n";
  s += "plot '" + beta_csv + "' every ::1 using 1:4 with lines title 'beta', " + num(-r) + "*x with lines dt 2 title '-r q'\n";
  return s;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace quantdim::io
