#pragma once

#include "dmspec/newton.hpp"
#include "dmspec/pseries.hpp"
#include "dmspec/spectral.hpp"
#include "dmspec/tower.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace dmspec {

using Json = nlohmann::json;

// Rationals serialize as strings, never floats: exactness end to end.

inline Json to_json(const Rational& r) { return Json(r.str()); }

inline Json to_json(const Valuation& v) { return v.is_infinite() ? Json("inf") : Json(v.finite().str()); }

inline Json to_json(const FFElem& c) {
  Json arr = Json::array();
  for (unsigned x : c.coords()) arr.push_back(x);
  return arr;
}

inline Json field_desc_json(const Field& f) {
  Json poly = Json::array();
  for (unsigned c : f.poly) poly.push_back(c);
  return Json{{"p", f.p}, {"m", f.m}, {"defining_poly", poly}};
}

inline Json to_json(const PSeries& x) {
  Json terms = Json::array();
  for (const auto& [e, c] : x.terms())
    terms.push_back(Json{{"exp", e.str()}, {"coeff", to_json(c)}, {"m", c.degree()}});
  return Json{{"terms", terms}, {"prec", to_json(x.precision())}};
}

inline Json to_json(const NewtonPolygon& np) {
  Json verts = Json::array();
  for (const auto& [x, y] : np.vertices) verts.push_back(Json::array({x.str(), y.str()}));
  return Json{{"vertices", verts}};
}

inline Json to_json(const RootSizeMultiset& ms) {
  Json arr = Json::array();
  for (const auto& [s, c] : ms.entries) arr.push_back(Json::array({s.str(), c.str()}));
  return arr;
}

inline Json to_json(const Spectrum& spec) {
  Json arr = Json::array();
  for (const Rational& l : spec.logs) arr.push_back(l.str());
  return arr;
}

inline Json to_json(const Filtration& f) {
  Json arr = Json::array();
  for (const auto& pk : f.packets)
    arr.push_back(Json{{"log", pk.log_value.str()}, {"r_tau", pk.r_tau}});
  return arr;
}

inline Json to_json(const TowerReport& rep) {
  Json weights = Json::array();
  for (const auto& [w, d] : rep.weights)
    weights.push_back(Json{{"w", w.str()}, {"d", d.str()}});
  Json caps = Json::array();
  for (const BigInt& c : rep.f_tau_caps) caps.push_back(c.str());
  Json out{{"filtration", to_json(rep.filtration)},
           {"weights", weights},
           {"f_tau_caps", caps},
           {"galois_order_bound", rep.galois_order.str()},
           {"f_bound", rep.f_bound.str()}};
  out["ram_divisor"] = rep.ram_divisor ? Json(rep.ram_divisor->str()) : Json(nullptr);
  return out;
}

/// CSV sweep columns, fixed order and header.
inline std::string sweep_csv_header() {
  return "log_delta,s,denom_s,ram_divisor,f_bound,e_obs,f_obs,status";
}

inline std::string sweep_csv_row(const SweepRow& row) {
  auto opt_rat = [](const std::optional<Rational>& v) { return v ? v->str() : std::string(); };
  auto opt_int = [](const std::optional<BigInt>& v) { return v ? v->str() : std::string(); };
  std::string status = row.status;
  for (auto& ch : status)
    if (ch == ',' || ch == '\n') ch = ';';
  return row.log_delta.str() + "," + opt_rat(row.s) + "," + opt_int(row.denom_s) + "," +
         opt_int(row.ram_divisor) + "," + opt_int(row.f_bound) + "," + opt_int(row.e_obs) + "," +
         opt_int(row.f_obs) + "," + status;
}

}  // namespace dmspec
