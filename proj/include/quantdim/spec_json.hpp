#pragma once

// MeasureSpec <-> JSON:
//   {"d": 3, "variant": "ifs", "offsets": [[0,0,0], ...], "probabilities": [...]}
//   {"d": 1, "variant": "density", "name": "ex29"}
//   {"d": 1, "variant": "density", "pieces": [{"lo": 0, "hi": 1, "coeffs": [0, 2]}],
//    "singular_points": [], "s_h": null, "dim_infty": 1}
//   {"d": 1, "variant": "atomic", "points": [[0.25], [0.75]], "weights": [0.5, 0.5]}

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "quantdim/dyadic_measure.hpp"
#include "quantdim/error.hpp"

namespace quantdim {

using json = nlohmann::ordered_json;

namespace detail {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SpecError(std::string("bad field '") + key + "': " + e.what());
  }
}

inline std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (j.at(key).is_string() && j.at(key).get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (!j.at(key).is_number()) throw SpecError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

inline MeasureSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("measure spec must be a JSON object");
  MeasureSpec s;
  s.dim = detail::field<int>(j, "d");
  if (s.dim < 1 || s.dim > kMaxDim) throw SpecError("d must be in 1..4");
  const auto variant = detail::field<std::string>(j, "variant");
  if (variant == "ifs") {
    IfsCascadeSpec c;
    c.offsets = detail::field<std::vector<std::vector<double>>>(j, "offsets");
    c.probabilities = detail::field<std::vector<double>>(j, "probabilities");
    s.variant = c;
  } else if (variant == "density") {
    DensitySpec d;
    if (j.contains("name")) d.name = detail::field<std::string>(j, "name");
    if (j.contains("pieces")) {
      for (const auto& p : j.at("pieces"))
        d.pieces.push_back({detail::field<double>(p, "lo"), detail::field<double>(p, "hi"),
                            detail::field<std::vector<double>>(p, "coeffs")});
    }
    if (j.contains("singular_points")) d.singular_points = detail::field<std::vector<double>>(j, "singular_points");
    d.s_h = detail::optional_number(j, "s_h");
    d.dim_infty = detail::optional_number(j, "dim_infty");
    if (d.name.empty() && d.pieces.empty()) throw SpecError("density needs 'name' or 'pieces'");
    s.variant = d;
  } else if (variant == "atomic") {
    AtomicSpec a;
    a.points = detail::field<std::vector<std::vector<double>>>(j, "points");
    a.weights = detail::field<std::vector<double>>(j, "weights");
    s.variant = a;
  } else {
    throw SpecError("variant must be ifs, density or atomic");
  }
  return s;
}

inline MeasureSpec spec_from_string(const std::string& text) {
  try {
    return spec_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("invalid JSON: ") + e.what());
  }
}

inline MeasureSpec spec_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_string(ss.str());
}

inline json spec_to_json(const MeasureSpec& s) {
  json j;
  j["d"] = s.dim;
  if (const auto* c = std::get_if<IfsCascadeSpec>(&s.variant)) {
    j["variant"] = "ifs";
    j["offsets"] = c->offsets;
    j["probabilities"] = c->probabilities;
  } else if (const auto* d = std::get_if<DensitySpec>(&s.variant)) {
    j["variant"] = "density";
    if (!d->name.empty()) j["name"] = d->name;
    if (!d->pieces.empty()) {
      j["pieces"] = json::array();
      for (const auto& p : d->pieces) j["pieces"].push_back({{"lo", p.lo}, {"hi", p.hi}, {"coeffs", p.coeffs}});
    }
    if (!d->singular_points.empty()) j["singular_points"] = d->singular_points;
    if (d->s_h) j["s_h"] = std::isinf(*d->s_h) ? json("inf") : json(*d->s_h);
    if (d->dim_infty) j["dim_infty"] = *d->dim_infty;
  } else {
    const auto& a = std::get<AtomicSpec>(s.variant);
    j["variant"] = "atomic";
    j["points"] = a.points;
    j["weights"] = a.weights;
  }
  return j;
}

}  // namespace quantdim
