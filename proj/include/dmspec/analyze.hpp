#pragma once

#include "dmspec/json_io.hpp"
#include "dmspec/oracle.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace dmspec {

/// One coefficient g_i given by its valuation and an optional leading
/// residue (coordinates over F_p in the generator of F_q; default 1).
struct CoeffSpec {
  unsigned i = 0;
  Rational v;
  std::vector<unsigned> residue;
};

struct AnalyzeRequest {
  unsigned q = 2, p = 2, r = 2;
  std::vector<CoeffSpec> coeffs;
  bool with_oracle = false;
  unsigned depth = 3;
  Rational precision = Rational(64);
  long e_max = PSeries::kDefaultEMax;
  BigInt field_cap = BigInt(1) << 20;
};

/// Parses the CLI shorthand "1:v=0,2:v=5" (optionally "1:v=0:r=1.0" with
/// residue coordinates over F_p, dot separated, little-endian).
inline std::vector<CoeffSpec> parse_coeff_spec(const std::string& s) {
  std::vector<CoeffSpec> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    CoeffSpec cs;
    std::stringstream fs(item);
    std::string field;
    bool have_index = false, have_v = false;
    while (std::getline(fs, field, ':')) {
      if (!have_index) {
        cs.i = static_cast<unsigned>(std::stoul(field));
        have_index = true;
      } else if (field.rfind("v=", 0) == 0) {
        cs.v = Rational::parse(field.substr(2));
        have_v = true;
      } else if (field.rfind("r=", 0) == 0) {
        std::stringstream rs(field.substr(2));
        std::string digit;
        while (std::getline(rs, digit, '.'))
          cs.residue.push_back(static_cast<unsigned>(std::stoul(digit)));
      } else {
        throw Error("cannot parse coefficient spec item: '" + item + "'");
      }
    }
    if (!have_index || !have_v) throw Error("coefficient spec needs i:v=<rational>: '" + item + "'");
    out.push_back(std::move(cs));
  }
  return out;
}

inline DrinfeldModule module_from_request(FieldTower& tower, const AnalyzeRequest& req) {
  std::map<unsigned, PSeries> coeffs;
  for (const CoeffSpec& cs : req.coeffs) {
    FFElem c = cs.residue.empty() ? tower.one(AddPoly::factor_prime_power(req.q).second)
                                  : tower.from_coords(AddPoly::factor_prime_power(req.q).second,
                                                      cs.residue);
    if (c.is_zero()) throw Error("coefficient residue must be nonzero");
    if (coeffs.count(cs.i)) throw Error("duplicate coefficient index");
    coeffs.emplace(cs.i, PSeries::monomial(c, cs.v, Valuation::infinity(), req.e_max));
  }
  return drinfeld_from_coeffs(tower, req.q, req.p, req.r, std::move(coeffs));
}

struct AnalyzeOutcome {
  Json doc;
  int exit_code = 0;
};

/// Full single-module analysis: polygon, case classification, spectrum
/// (closed form in the 1-sparse case (b), oracle-derived otherwise when
/// requested), filtration, weights, and all bounds.
inline AnalyzeOutcome cmd_analyze(const AnalyzeRequest& req) {
  Json doc;
  try {
    const auto [p_check, e] = AddPoly::factor_prime_power(req.q);
    if (p_check != req.p) throw Error("q must be a power of p");
    if (req.r < 2) throw Error("rank r must be >= 2");
    if (req.depth < 1) throw Error("depth must be >= 1");

    FieldTower tower(req.p, req.field_cap);
    const DrinfeldModule mod = module_from_request(tower, req);

    Json reqj{{"q", req.q}, {"p", req.p}, {"r", req.r}};
    Json coeffj = Json::array();
    for (const CoeffSpec& cs : req.coeffs) coeffj.push_back(Json{{"i", cs.i}, {"v", cs.v.str()}});
    reqj["coeffs"] = coeffj;
    doc["request"] = reqj;

    const NewtonPolygon np = np_from_addpoly(mod.phi_T());
    doc["newton_polygon"] = to_json(np);
    doc["root_sizes"] = to_json(np_root_valuations(np));

    const auto sizes = packet_sizes_from_np(np, req.q, req.r);
    Json sizesj = Json::array();
    for (unsigned s : sizes) sizesj.push_back(s);
    doc["packet_sizes"] = sizesj;
    {
      BigInt fb = 1;
      for (unsigned s : sizes) fb *= int_pow(req.q, s) - 1;
      fb *= int_pow(req.p, static_cast<unsigned>(sizes.size()) - 1);
      doc["f_bound"] = fb.str();
      doc["constant_field_bound"] =
          constant_field_degree_bound(1, req.q, req.r, static_cast<unsigned>(sizes.size()), req.p)
              .str();
    }

    // 1-sparse detection and case classification
    std::optional<SparseParams> sparse;
    Json case_label(nullptr);
    bool only_sparse_indices = true;
    for (const auto& [i, g] : mod.phi_T().coeffs())
      if (i != 0 && i != 1 && i != req.r && !g.is_zero_at_precision()) only_sparse_indices = false;
    if (only_sparse_indices) {
      const PSeries* g1 = mod.phi_T().coeff(1);
      if (g1 != nullptr && !g1->is_zero_at_precision() && req.r >= 2) {
        sparse = SparseParams{req.q, req.r, -g1->val().finite(),
                              -mod.phi_T().coeff(req.r)->val().finite()};
        case_label = sparse_is_case_b(*sparse) ? "b" : "a";
      } else {
        case_label = "a";  // no g_1 break point: the polygon is a straight line
      }
    }
    doc["case"] = case_label;

    std::optional<Spectrum> spectrum;
    Json spectrum_source(nullptr);
    if (sparse && sparse_is_case_b(*sparse)) {
      spectrum = sparse_np_to_spectrum(*sparse);
      spectrum_source = "closed_form";
    }

    doc["status"] = "ok";
    int exit_code = 0;
    if (req.with_oracle) {
      try {
        OracleConfig cfg{req.precision, req.depth, req.e_max};
        const OracleAnalysis oa = oracle_analyze(tower, mod, cfg);
        Json oj;
        Json rv = Json::array();
        {
          std::map<Rational, BigInt> agg;
          for (const PSeries& root : oa.tower.levels[0])
            if (!root.is_zero_at_precision()) agg[root.val().finite()] += 1;
          for (const auto& [v, c] : agg) rv.push_back(Json::array({v.str(), c.str()}));
        }
        oj["root_valuations"] = rv;
        oj["e_obs"] = oa.measure.e_obs.str();
        oj["f_obs"] = oa.measure.f_obs;
        oj["spectrum_obs"] = to_json(oa.spectrum);
        oj["depth_used"] = oa.periods.depth_used;
        doc["oracle"] = oj;
        if (!spectrum) {
          spectrum = oa.spectrum;
          spectrum_source = "oracle";
        }
      } catch (const Error& err) {
        doc["oracle"] = Json(nullptr);
        doc["status"] = std::string("oracle_failed: ") + err.what();
        exit_code = 3;
      }
    }

    if (spectrum) {
      doc["spectrum"] = to_json(*spectrum);
      doc["spectrum_source"] = spectrum_source;
      const TowerReport rep = tower_report(*spectrum, req.p, sparse);
      doc["tower"] = to_json(rep);
      if (sparse && sparse_is_case_b(*sparse)) {
        doc["s"] = (spectrum->logs.back() - spectrum->logs.front()).str();
        doc["ram_divisor"] = ramification_divisor(*sparse).str();
      } else {
        doc["s"] = Json(nullptr);
        doc["ram_divisor"] = Json(nullptr);
      }
    } else {
      doc["spectrum"] = Json(nullptr);
      doc["spectrum_source"] = Json(nullptr);
      doc["tower"] = Json(nullptr);
      doc["s"] = Json(nullptr);
      doc["ram_divisor"] = Json(nullptr);
    }
    return AnalyzeOutcome{doc, exit_code};
  } catch (const Error& err) {
    return AnalyzeOutcome{Json{{"status", "error"}, {"error", err.what()}}, 2};
  }
}

struct SweepRequest {
  unsigned q = 2, p = 2, r = 2;
  Rational log_g;
  std::vector<Rational> log_deltas;
  bool with_oracle = false;
  unsigned depth = 3;
  Rational precision = Rational(64);
  long e_max = PSeries::kDefaultEMax;
  BigInt field_cap = BigInt(1) << 20;
};

/// Oracle hook for sweep rows: builds the 1-sparse module and measures
/// (e_obs, f_obs) over its torsion tower.
inline SweepMeasure sweep_oracle_hook(const SweepRequest& req) {
  return [req](const SparseParams& sp) {
    FieldTower tower(req.p, req.field_cap);
    const auto [p, e] = AddPoly::factor_prime_power(sp.q);
    std::map<unsigned, PSeries> coeffs;
    coeffs.emplace(1u, PSeries::monomial(tower.one(e), -sp.log_g, Valuation::infinity(), req.e_max));
    coeffs.emplace(sp.r, PSeries::monomial(tower.one(e), -sp.log_delta, Valuation::infinity(), req.e_max));
    const DrinfeldModule mod = drinfeld_from_coeffs(tower, sp.q, p, sp.r, std::move(coeffs));
    const TorsionTower t = torsion_tower(tower, mod, req.depth, req.precision, req.e_max);
    const RamificationMeasure m = torsion_measure(t);
    return std::make_pair(m.e_obs, BigInt(m.f_obs));
  };
}

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::string csv;
  int exit_code = 0;
};

inline SweepOutcome cmd_sweep(const SweepRequest& req) {
  SweepOutcome out;
  try {
    const auto [p_check, e] = AddPoly::factor_prime_power(req.q);
    if (p_check != req.p) throw Error("q must be a power of p");
    if (req.r < 2) throw Error("rank r must be >= 2");
  } catch (const Error& err) {
    out.csv = std::string("error: ") + err.what();
    out.exit_code = 2;
    return out;
  }
  out.rows = sweep(req.q, req.p, req.r, req.log_g, req.log_deltas,
                   req.with_oracle ? sweep_oracle_hook(req) : SweepMeasure{});
  std::ostringstream csv;
  csv << sweep_csv_header() << "\n";
  bool any_ok = out.rows.empty();
  for (const SweepRow& row : out.rows) {
    csv << sweep_csv_row(row) << "\n";
    if (row.status == "ok") any_ok = true;
  }
  out.csv = csv.str();
  out.exit_code = any_ok ? 0 : 1;
  return out;
}

struct OracleCheckRequest {
  AnalyzeRequest base;
  std::optional<std::vector<Rational>> expect_spectrum;
  unsigned samples = 10;
  unsigned trunc = 2;
};

/// Runs the oracle invariant suite on one module. Exit 0 iff all checks
/// pass; the report names any failing invariant.
inline AnalyzeOutcome cmd_oracle_check(const OracleCheckRequest& req) {
  Json doc;
  try {
    const auto [p_check, e] = AddPoly::factor_prime_power(req.base.q);
    if (p_check != req.base.p) throw Error("q must be a power of p");
    if (req.base.r < 2) throw Error("rank r must be >= 2");
    if (req.base.depth < 1) throw Error("depth must be >= 1");

    FieldTower tower(req.base.p, req.base.field_cap);
    const DrinfeldModule mod = module_from_request(tower, req.base);
    OracleConfig cfg{req.base.precision, req.base.depth, req.base.e_max};
    const OracleAnalysis oa = oracle_analyze(tower, mod, cfg);

    Json checks = Json::array();
    bool all_pass = true;
    auto record = [&](const std::string& name, bool pass) {
      checks.push_back(Json{{"name", name}, {"pass", pass}});
      all_pass = all_pass && pass;
    };

    // phi_roots valuations against the Newton polygon
    const NewtonPolygon np = np_from_addpoly(mod.phi_T());
    const RootSizeMultiset expected_sizes = np_root_valuations(np);
    std::map<Rational, BigInt> seen;
    Json rv = Json::array();
    for (const PSeries& root : oa.tower.levels[0])
      if (!root.is_zero_at_precision()) seen[-root.val().finite()] += 1;
    for (auto it = seen.rbegin(); it != seen.rend(); ++it)
      rv.push_back(Json::array({(-it->first).str(), it->second.str()}));
    {
      std::map<Rational, BigInt> expect;
      for (const auto& [s, c] : expected_sizes.entries) expect[s] += c;
      record("root valuations match newton polygon", seen == expect);
    }
    doc["root_valuations"] = rv;

    // spectrum against the closed form (or a caller-provided expectation)
    std::optional<std::vector<Rational>> expected = req.expect_spectrum;
    if (!expected) {
      bool sparse_shape = true;
      for (const auto& [i, g] : mod.phi_T().coeffs())
        if (i != 0 && i != 1 && i != req.base.r && !g.is_zero_at_precision()) sparse_shape = false;
      const PSeries* g1 = mod.phi_T().coeff(1);
      if (sparse_shape && g1 != nullptr && !g1->is_zero_at_precision()) {
        const SparseParams sp{req.base.q, req.base.r, -g1->val().finite(),
                              -mod.phi_T().coeff(req.base.r)->val().finite()};
        if (sparse_is_case_b(sp)) expected = sparse_np_to_spectrum(sp).logs;
      }
    }
    doc["spectrum_obs"] = to_json(oa.spectrum);
    if (expected) record("spectrum mismatch", oa.spectrum.logs == *expected);

    // spectrum invariance under the other tie-break choice
    {
      const OracleAnalysis ob = oracle_analyze(tower, mod, cfg, TieBreak::LexLargest);
      record("spectrum invariant under chain choice", ob.spectrum.logs == oa.spectrum.logs);
    }

    // orthogonality of the recovered basis
    {
      std::mt19937_64 rng(0x0dd5eedULL);
      bool ok = true;
      const FFElem one = tower.one(mod.e());
      for (unsigned trial = 0; trial < 25 && ok; ++trial) {
        PSeries sum;
        bool first = true;
        std::optional<Rational> expect_log;
        for (unsigned i = 0; i < mod.r(); ++i) {
          for (unsigned k = 0; k <= 2; ++k) {
            const std::uint64_t c = rng() % mod.q();
            if (c == 0) continue;
            const PSeries term = oa.periods.basis[i].mul_monomial(
                tower.element(mod.e(), c), Rational(-static_cast<long long>(k)));
            sum = first ? term : sum + term;
            first = false;
            const Rational lg = Rational(k) + oa.periods.logs[i];
            if (!expect_log || lg > *expect_log) expect_log = lg;
          }
        }
        if (!expect_log) continue;
        ok = !sum.is_zero_at_precision() && sum.val().finite() == -*expect_log;
      }
      record("orthogonality of recovered periods", ok);
    }

    // bounds
    const Filtration filt = packets(oa.spectrum);
    const BigInt f_bound = residue_degree_bound(filt, req.base.p);
    doc["e_obs"] = oa.measure.e_obs.str();
    doc["f_obs"] = oa.measure.f_obs;
    record("residue degree bound respected", BigInt(oa.measure.f_obs) <= f_bound);
    if (expected && !expected->empty() && expected->front() != expected->back()) {
      // two-packet 1-sparse case: the ramification divisor must divide e_obs
      const PSeries* g1 = mod.phi_T().coeff(1);
      if (g1 != nullptr && req.base.depth >= 2) {
        const SparseParams sp{req.base.q, req.base.r, -g1->val().finite(),
                              -mod.phi_T().coeff(req.base.r)->val().finite()};
        if (sparse_is_case_b(sp))
          record("ramification divisor divides e_obs",
                 oa.measure.e_obs % ramification_divisor(sp) == 0);
      }
    }

    // functional equation margin
    {
      const FunctionalEqReport fer =
          verify_functional_equation(tower, mod, oa.periods, req.samples, req.trunc);
      doc["functional_eq_margin"] = fer.min_margin.str();
      record("functional equation margin positive", fer.min_margin > Rational(0));
    }

    doc["checks"] = checks;
    doc["status"] = all_pass ? "ok" : "mismatch";
    if (!all_pass) {
      for (const auto& c : checks)
        if (!c["pass"].get<bool>()) {
          doc["failed"] = c["name"];
          break;
        }
    }
    return AnalyzeOutcome{doc, all_pass ? 0 : 1};
  } catch (const Error& err) {
    return AnalyzeOutcome{Json{{"status", "error"}, {"error", err.what()}}, 2};
  }
}

}  // namespace dmspec
