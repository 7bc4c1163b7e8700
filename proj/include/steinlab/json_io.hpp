#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinlab/analytic.hpp"
#include "steinlab/domain4.hpp"
#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"
#include "steinlab/steinness.hpp"
#include "steinlab/szenum.hpp"
#include "steinlab/version.hpp"

namespace steinlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scalars and small aggregates. Integer entries serialize as decimal strings
// whenever they do not fit a 64-bit signed integer; parsers accept both.
// ---------------------------------------------------------------------------

inline json interval_to_json(const Interval& x) { return json{{"lo", x.lo}, {"hi", x.hi}}; }

inline Interval interval_from_json(const json& j) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
    throw SchemaViolation("interval must be an object with lo/hi");
  return {j.at("lo").get<double>(), j.at("hi").get<double>()};
}

inline json complex_to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

inline std::complex<double> complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw SchemaViolation("complex number must be a [re, im] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json mpz_to_json(const mpz_class& v) {
  if (v.fits_slong_p()) return json(static_cast<std::int64_t>(v.get_si()));
  return json(v.get_str());
}

inline mpz_class mpz_from_json(const json& j) {
  if (j.is_number_integer()) return mpz_class(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) {
    try {
      return mpz_class(j.get<std::string>());
    } catch (const std::invalid_argument&) {
      throw SchemaViolation("malformed integer literal: " + j.get<std::string>());
    }
  }
  throw SchemaViolation("integer entry must be a number or a decimal string");
}

inline json lattice_to_json(const LatticeVector& v) {
  json a = json::array();
  for (std::size_t i = 0; i < v.dim(); ++i) a.push_back(mpz_to_json(v.at(i)));
  return a;
}

inline LatticeVector lattice_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("entries") ? j.at("entries") : j;
  if (!arr.is_array() || arr.empty())
    throw SchemaViolation("lattice vector must be a nonempty array");
  std::vector<mpz_class> ent;
  for (const auto& e : arr) ent.push_back(mpz_from_json(e));
  return LatticeVector(std::move(ent));
}

inline json matrix_to_json(const IntMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(mpz_to_json(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return json{{"rows", rows}};
}

inline IntMatrix matrix_from_json(const json& j) {
  const json& rows = j.is_object() && j.contains("rows") ? j.at("rows") : j;
  if (!rows.is_array() || rows.empty())
    throw SchemaViolation("matrix must be an array of rows (or {\"rows\": ...})");
  std::vector<mpz_class> flat;
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != rows.size())
      throw SchemaViolation("matrix rows must be arrays of equal square size");
    for (const auto& e : r) flat.push_back(mpz_from_json(e));
  }
  return IntMatrix(rows.size(), std::move(flat));
}

inline json polynomial_to_json(const IntPolynomial& p) {
  json coeffs = json::array();
  for (const auto& c : p.coeffs()) coeffs.push_back(mpz_to_json(c));
  return json{{"coeffs_low_to_high", coeffs}, {"pretty", p.pretty()}};
}

inline IntPolynomial polynomial_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("coeffs_low_to_high")
                        ? j.at("coeffs_low_to_high")
                        : j;
  if (!arr.is_array() || arr.empty())
    throw SchemaViolation("polynomial must be a coefficient array, low to high");
  std::vector<mpz_class> coeffs;
  for (const auto& e : arr) coeffs.push_back(mpz_from_json(e));
  return IntPolynomial(std::move(coeffs));
}

inline json complex_point_to_json(const ComplexPoint& z) {
  json a = json::array();
  for (std::size_t i = 0; i < z.dim(); ++i) a.push_back(complex_to_json(z.at(i)));
  return a;
}

inline ComplexPoint complex_point_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw SchemaViolation("point must be an array of [re, im]");
  std::vector<std::complex<double>> c;
  for (const auto& e : j) c.push_back(complex_from_json(e));
  return ComplexPoint(std::move(c));
}

inline json strip_point_to_json(const StripPoint& w) {
  return json{{"w", complex_to_json(w.w)}, {"modulus", w.m.to_string()}};
}

inline StripPoint strip_point_from_json(const json& j) {
  if (!j.is_object() || !j.contains("w"))
    throw SchemaViolation("strip point must be an object with w (and modulus)");
  ModulusSpec m = ModulusSpec::two_infinity();
  if (j.contains("modulus")) {
    const json& jm = j.at("modulus");
    m = jm.is_number() ? ModulusSpec::finite(jm.get<double>())
                       : ModulusSpec::parse(jm.get<std::string>());
  }
  return StripPoint(complex_from_json(j.at("w")), m);
}

// ---------------------------------------------------------------------------
// Module result types.
// ---------------------------------------------------------------------------

inline json spectral_profile_to_json(const SpectralProfile& p) {
  json eigs = json::array();
  for (const auto& c : p.eigenvalues)
    eigs.push_back(json{{"center", complex_to_json(c.center)},
                        {"radius", c.radius},
                        {"multiplicity", c.multiplicity}});
  return json{{"rho", interval_to_json(p.rho)},
              {"mu", interval_to_json(p.mu)},
              {"mu_plus", interval_to_json(p.mu_plus)},
              {"mu_minus", interval_to_json(p.mu_minus)},
              {"exact_one", p.exact_one},
              {"eigenvalues", eigs}};
}

inline json critical_modulus_to_json(const CriticalModulus& c) {
  return json{{"infinite", c.infinite}, {"value", interval_to_json(c.value)}};
}

inline json verdict_to_json(const SteinVerdict& v) {
  return json{{"verdict", to_string(v.kind)},
              {"certified", v.certified},
              {"enclosure_width", v.width},
              {"critical_modulus", critical_modulus_to_json(v.critical)},
              {"profile", spectral_profile_to_json(v.profile)}};
}

inline json margin_result_to_json(const MarginResult& r) {
  json recs = json::array();
  for (const auto& rec : r.records) recs.push_back(szdetail::record_to_json(rec));
  return json{{"degree", r.degree},
              {"mu_prime", interval_to_json(r.mu_prime)},
              {"argmin", polynomial_to_json(r.argmin)},
              {"ceiling", r.ceiling},
              {"visited_count", r.visited_count},
              {"records", recs},
              {"wall_ms", r.wall_ms}};
}

inline json gap_set_to_json(const GapSet& g) {
  return json{{"epsilon", g.epsilon},
              {"horizon", g.horizon},
              {"members", g.members},
              {"max_gap", g.max_gap},
              {"exhaustive", g.exhaustive}};
}

inline GapSet gap_set_from_json(const json& j) {
  GapSet g;
  g.epsilon = j.at("epsilon").get<double>();
  g.horizon = j.at("horizon").get<long>();
  g.members = j.at("members").get<std::vector<long>>();
  g.max_gap = j.at("max_gap").get<long>();
  g.exhaustive = j.at("exhaustive").get<bool>();
  return g;
}

inline json section_value_to_json(const SectionValue& v) {
  return json{{"value", complex_to_json(v.value)},
              {"tail_bound", v.tail_bound},
              {"horizon", v.horizon}};
}

inline json series_spec_to_json(const SeriesSpec& s) {
  json j{{"matrix", matrix_to_json(s.M)},
         {"modulus", s.m.to_string()},
         {"k", lattice_to_json(s.k)},
         {"anchor", complex_to_json(s.anchor.w)},
         {"variant", s.variant.kind == SeriesVariant::Kind::Cosh ? "cosh" : "polynomial"},
         {"horizon", s.horizon},
         {"tail_bound", s.tail_bound}};
  if (s.variant.kind == SeriesVariant::Kind::Cosh) {
    j["rho_hi"] = s.rho_hi;
    j["epsilon"] = s.epsilon;
    j["lambda"] = s.lambda;
    j["growth_C"] = s.growth_C;
  } else {
    j["p"] = s.variant.p;
    j["p_prime"] = s.p_prime;
    j["torsion_order"] = s.torsion_order;
    j["nilpotency"] = s.nilpotency;
  }
  return j;
}

inline json witness_to_json(const WitnessCertificate& c) {
  return json{{"matrix", matrix_to_json(c.M)},
              {"z", complex_point_to_json(c.z)},
              {"k", lattice_to_json(c.k)},
              {"delta", c.delta},
              {"mu_plus", interval_to_json(c.mu_plus)},
              {"mu_minus", interval_to_json(c.mu_minus)},
              {"J_plus", gap_set_to_json(c.J_plus)},
              {"J_minus", gap_set_to_json(c.J_minus)},
              {"verified_horizon", c.verified_horizon},
              {"retained_plus", c.retained_plus},
              {"retained_minus", c.retained_minus},
              {"margins_plus", c.margins_plus},
              {"margins_minus", c.margins_minus},
              {"discarded_prefix_plus", c.discarded_prefix_plus},
              {"discarded_prefix_minus", c.discarded_prefix_minus},
              {"seed", c.seed},
              {"draws", c.draws}};
}

inline WitnessCertificate witness_from_json(const json& j) {
  WitnessCertificate c(matrix_from_json(j.at("matrix")),
                       complex_point_from_json(j.at("z")),
                       lattice_from_json(j.at("k")));
  c.delta = j.at("delta").get<double>();
  c.mu_plus = interval_from_json(j.at("mu_plus"));
  c.mu_minus = interval_from_json(j.at("mu_minus"));
  c.J_plus = gap_set_from_json(j.at("J_plus"));
  c.J_minus = gap_set_from_json(j.at("J_minus"));
  c.verified_horizon = j.at("verified_horizon").get<long>();
  c.retained_plus = j.at("retained_plus").get<std::vector<long>>();
  c.retained_minus = j.at("retained_minus").get<std::vector<long>>();
  c.margins_plus = j.at("margins_plus").get<std::vector<double>>();
  c.margins_minus = j.at("margins_minus").get<std::vector<double>>();
  c.discarded_prefix_plus = j.at("discarded_prefix_plus").get<long>();
  c.discarded_prefix_minus = j.at("discarded_prefix_minus").get<long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.draws = j.at("draws").get<int>();
  return c;
}

inline json rectangle_measure_to_json(const RectangleMeasure& r) {
  return json{{"omega0", r.omega0},
              {"decay_rate", r.decay_rate},
              {"residual", r.residual},
              {"grid_x", r.grid_x},
              {"grid_y", r.grid_y}};
}

inline json domain_pipeline_to_json(const FindJResult& fj, const LogPolytope& poly,
                                    const PolytopeReport& rep, const ReinhardtReport& rr) {
  return json{
      {"J", fj.J},
      {"worst_violation", fj.worst_violation},
      {"seed_coeffs",
       json{{"a1", fj.seed_coeffs.a1},
            {"a2", fj.seed_coeffs.a2},
            {"ap", fj.seed_coeffs.ap},
            {"app", fj.seed_coeffs.app},
            {"residual", fj.seed_coeffs.residual}}},
      {"alpha1", interval_to_json(fj.frame.alpha1)},
      {"alpha2", interval_to_json(fj.frame.alpha2)},
      {"omega_re", interval_to_json(fj.frame.omega_re)},
      {"omega_im", interval_to_json(fj.frame.omega_im)},
      {"tail_entry_forward", fj.forward_tail.entry_index},
      {"tail_entry_backward", fj.backward_tail.entry_index},
      {"polytope",
       json{{"H", poly.H},
            {"vertex_count", poly.vertices.size()},
            {"invariance_ok", rep.invariance_ok},
            {"negativity_ok", rep.negativity_ok},
            {"tail_certified", rep.tail_certified},
            {"affine_rank_seed", rep.affine_rank_seed},
            {"affine_rank_shifted", rep.affine_rank_shifted},
            {"interior_ok", rep.interior_ok},
            {"J_minimal", rep.J_minimal}}},
      {"reinhardt",
       json{{"samples", rr.samples},
            {"forward_ok", rr.forward_ok},
            {"backward_ok", rr.backward_ok},
            {"barycenter_ok", rr.barycenter_ok},
            {"rho_m", interval_to_json(rr.rho_m)},
            {"alpha1_pow", interval_to_json(rr.alpha1_pow)},
            {"rho_consistent", rr.rho_consistent},
            {"point_action_residual", rr.point_action_residual}}}};
}

// ---------------------------------------------------------------------------
// Report envelope with provenance.
// ---------------------------------------------------------------------------

struct Provenance {
  std::string inputs_hash; // FNV-1a 64 over all input bytes, hex
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  long wall_time_ms = 0; // 0 unless timing emission is enabled
};

struct Report {
  std::string kind;
  int schema_version = kSchemaVersion;
  json payload;
  Provenance provenance;
};

inline std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Hash a list of input files: each file's name and bytes are folded into one
// running FNV-1a state, so any changed input byte changes the digest.
inline std::string hash_inputs(const std::vector<std::string>& paths) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& p : paths) {
    h = fnv1a64(p + "\n", h);
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SchemaViolation("cannot read input file: " + p);
    std::ostringstream ss;
    ss << in.rdbuf();
    h = fnv1a64(ss.str(), h);
  }
  return to_hex64(h);
}

inline json report_to_json(const Report& r) {
  return json{{"kind", r.kind},
              {"schema_version", r.schema_version},
              {"payload", r.payload},
              {"provenance",
               json{{"inputs_hash", r.provenance.inputs_hash},
                    {"tool_version", r.provenance.tool_version},
                    {"seed", r.provenance.seed},
                    {"wall_time_ms", r.provenance.wall_time_ms}}}};
}

// CSV rendering of an enumeration run: fixed header, one row per record.
inline std::string margin_result_to_csv(const MarginResult& r) {
  std::ostringstream out;
  out << "poly,house_lo,house_hi,reciprocal,cyclotomic\n";
  char buf[64];
  for (const auto& rec : r.records) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", rec.house.lo, rec.house.hi);
    out << rec.poly.pretty() << buf << (rec.is_reciprocal ? 1 : 0) << ','
        << (rec.is_cyclotomic_product ? 1 : 0) << '\n';
  }
  return out.str();
}

// Stable serialization: keys sorted (nlohmann objects are ordered maps),
// shortest-roundtrip floats, trailing newline.
inline std::string render_report(const Report& r, const std::string& fmt) {
  if (fmt == "json") return report_to_json(r).dump(2) + "\n";
  if (fmt == "csv") {
    if (r.kind != "sz-margin")
      throw SchemaViolation("csv rendering is only defined for sz-margin reports");
    // Rebuild the rows from the payload to keep a single source of truth.
    std::ostringstream out;
    out << "poly,house_lo,house_hi,reciprocal,cyclotomic\n";
    char buf[64];
    for (const auto& rec : r.payload.at("records")) {
      IntPolynomial p = polynomial_from_json(rec.at("coeffs_low_to_high"));
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", rec.at("house_lo").get<double>(),
                    rec.at("house_hi").get<double>());
      out << p.pretty() << buf << (rec.at("reciprocal").get<bool>() ? 1 : 0) << ','
          << (rec.at("cyclotomic").get<bool>() ? 1 : 0) << '\n';
    }
    return out.str();
  }
  if (fmt == "text") {
    std::ostringstream out;
    out << r.kind << " (schema v" << r.schema_version << ")\n"
        << r.payload.dump(2) << "\n"
        << "inputs " << r.provenance.inputs_hash << ", tool " << r.provenance.tool_version
        << ", seed " << r.provenance.seed << "\n";
    return out.str();
  }
  throw SchemaViolation("unknown output format: " + fmt);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaViolation("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaViolation("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

} // namespace steinlab
