// dmspec: analyze Drinfeld F_q[T]-modules over F_q((1/T)) -- Newton polygon,
// period-lattice spectrum, spectral filtration, ramification and residue
// bounds -- and cross-check everything against the root-solving oracle.

#include "dmspec/dmspec.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
  unsigned q = 2, p = 2, r = 2;
  unsigned depth = 3;
  std::string precision = "64";
  long e_max = 4096;
  long field_cap_log2 = 20;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--q", f.q, "base field size (prime power)")->required();
  cmd->add_option("--p", f.p, "characteristic")->required();
  cmd->add_option("--r", f.r, "rank")->required();
  cmd->add_option("--depth", f.depth, "torsion depth for the oracle (default 3)");
  cmd->add_option("--precision", f.precision, "series precision in u = 1/T exponents (default 64)");
  cmd->add_option("--e-max", f.e_max, "exponent denominator bound (default 4096)");
  cmd->add_option("--field-cap-log2", f.field_cap_log2, "log2 of the finite field size cap (default 20)");
}

dmspec::AnalyzeRequest to_request(const CommonFlags& f, const std::string& coeffs, bool with_oracle) {
  dmspec::AnalyzeRequest req;
  req.q = f.q;
  req.p = f.p;
  req.r = f.r;
  req.coeffs = dmspec::parse_coeff_spec(coeffs);
  req.with_oracle = with_oracle;
  req.depth = f.depth;
  req.precision = dmspec::Rational::parse(f.precision);
  req.e_max = f.e_max;
  req.field_cap = dmspec::BigInt(1) << f.field_cap_log2;
  return req;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral invariants of Drinfeld modules over F_q((1/T))"};
  app.require_subcommand(1);

  // analyze
  CommonFlags af;
  std::string a_coeffs;
  bool a_oracle = false;
  CLI::App* analyze = app.add_subcommand("analyze", "analyze a single module; emits JSON");
  add_common(analyze, af);
  analyze->add_option("--coeffs", a_coeffs, "coefficients, e.g. \"1:v=0,2:v=5\"")->required();
  analyze->add_flag("--with-oracle", a_oracle, "also run the root-solving oracle");

  // sweep
  CommonFlags sf;
  std::string s_log_g = "0";
  std::vector<std::string> s_deltas;
  bool s_oracle = false;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep log Delta over a 1-sparse family; emits CSV");
  add_common(sweep, sf);
  sweep->add_option("--log-g", s_log_g, "log|g| (default 0)");
  sweep->add_option("--log-delta", s_deltas, "log|Delta| values (repeatable)");
  sweep->add_flag("--with-oracle", s_oracle, "measure (e_obs, f_obs) per row");

  // oracle-check
  CommonFlags of;
  std::string o_coeffs;
  std::string o_expect;
  unsigned o_samples = 10, o_trunc = 2;
  CLI::App* ocheck = app.add_subcommand("oracle-check", "run the oracle invariant suite; emits JSON");
  add_common(ocheck, of);
  ocheck->add_option("--coeffs", o_coeffs, "coefficients, e.g. \"1:v=0,2:v=5\"")->required();
  ocheck->add_option("--expect-spectrum", o_expect, "comma-separated expected log sizes");
  ocheck->add_option("--samples", o_samples, "functional equation sample count (default 10)");
  ocheck->add_option("--trunc", o_trunc, "exponential truncation degree (default 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      const auto out = dmspec::cmd_analyze(to_request(af, a_coeffs, a_oracle));
      std::cout << out.doc.dump(2) << "\n";
      return out.exit_code;
    }
    if (sweep->parsed()) {
      dmspec::SweepRequest req;
      req.q = sf.q;
      req.p = sf.p;
      req.r = sf.r;
      req.log_g = dmspec::Rational::parse(s_log_g);
      for (const std::string& d : s_deltas) req.log_deltas.push_back(dmspec::Rational::parse(d));
      req.with_oracle = s_oracle;
      req.depth = sf.depth;
      req.precision = dmspec::Rational::parse(sf.precision);
      req.e_max = sf.e_max;
      req.field_cap = dmspec::BigInt(1) << sf.field_cap_log2;
      const auto out = dmspec::cmd_sweep(req);
      std::cout << out.csv;
      return out.exit_code;
    }
    if (ocheck->parsed()) {
      dmspec::OracleCheckRequest req;
      req.base = to_request(of, o_coeffs, true);
      if (!o_expect.empty()) {
        std::vector<dmspec::Rational> logs;
        std::stringstream ss(o_expect);
        std::string item;
        while (std::getline(ss, item, ',')) logs.push_back(dmspec::Rational::parse(item));
        req.expect_spectrum = std::move(logs);
      }
      req.samples = o_samples;
      req.trunc = o_trunc;
      const auto out = dmspec::cmd_oracle_check(req);
      std::cout << out.doc.dump(2) << "\n";
      return out.exit_code;
    }
  } catch (const dmspec::Error& err) {
    std::cout << dmspec::Json{{"status", "error"}, {"error", err.what()}}.dump(2) << "\n";
    return 2;
  }
  return 2;
}
