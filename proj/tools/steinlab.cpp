// steinlab: certified decision of the annulus-bundle Stein criterion
// m * log rho(M) <= 2 pi^2 and its constructive companions.
//
// Exit codes: 0 definite/success, 2 input error, 3 indeterminate verdict,
// 4 certification failure.

#include <chrono>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steinlab/steinlab.hpp"

namespace {

using namespace steinlab;
using Clock = std::chrono::steady_clock;

bool timing_enabled() {
  const char* e = std::getenv("STEINLAB_EMIT_TIMING");
  return e != nullptr && std::string(e) == "1";
}

int env_threads() {
  const char* e = std::getenv("STEINLAB_THREADS");
  if (e == nullptr) return 0;
  try {
    int v = std::stoi(e);
    return v >= 1 ? v : 0;
  } catch (...) {
    return 0;
  }
}

LatticeVector parse_lattice_csv(const std::string& s) {
  std::vector<mpz_class> ent;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw SchemaViolation("empty component in vector literal: " + s);
    try {
      ent.emplace_back(tok);
    } catch (const std::invalid_argument&) {
      throw SchemaViolation("malformed integer in vector literal: " + tok);
    }
  }
  if (ent.empty()) throw SchemaViolation("empty vector literal");
  return LatticeVector(std::move(ent));
}

std::complex<double> parse_complex_arg(const std::string& s) {
  std::stringstream ss(s);
  std::string a, b;
  if (!std::getline(ss, a, ',')) throw SchemaViolation("empty complex literal");
  double re, im = 0.0;
  try {
    re = std::stod(a);
    if (std::getline(ss, b, ',')) im = std::stod(b);
  } catch (...) {
    throw SchemaViolation("malformed complex literal: " + s);
  }
  return {re, im};
}

std::vector<double> parse_double_csv(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw SchemaViolation("malformed number in list: " + tok);
    }
  }
  if (out.empty()) throw SchemaViolation("empty number list");
  return out;
}

void emit(const Report& rep, const std::string& fmt) { std::cout << render_report(rep, fmt); }

struct Timer {
  Clock::time_point t0 = Clock::now();
  long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  }
};

// Shared finishing step: provenance, optional timing, report emission.
void finish(Report& rep, const std::vector<std::string>& inputs, std::uint64_t seed,
            const Timer& timer, const std::string& fmt) {
  rep.provenance.inputs_hash = hash_inputs(inputs);
  rep.provenance.seed = seed;
  const long ms = timer.ms();
  std::cerr << rep.kind << ": " << ms << " ms\n";
  rep.provenance.wall_time_ms = timing_enabled() ? ms : 0;
  emit(rep, fmt);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified Stein criterion for flat annulus bundles"};
  app.require_subcommand(1);
  std::string fmt = "json";
  app.add_option("--format", fmt, "output format: json|csv|text")->capture_default_str();

  // ---- classify ----
  auto* c_cls = app.add_subcommand("classify", "decide m log rho(M) <= 2 pi^2");
  std::string cls_matrix, cls_modulus = "2inf";
  double cls_tol = 1e-12;
  c_cls->add_option("--matrix", cls_matrix, "matrix JSON file")->required();
  c_cls->add_option("--modulus", cls_modulus, "positive number, inf, or 2inf");
  c_cls->add_option("--tol", cls_tol, "certification tolerance");

  // ---- critical-modulus ----
  auto* c_cm = app.add_subcommand("critical-modulus", "enclose 2 pi^2 / log rho(M)");
  std::string cm_matrix;
  double cm_tol = 1e-9;
  c_cm->add_option("--matrix", cm_matrix, "matrix JSON file")->required();
  c_cm->add_option("--tol", cm_tol, "enclosure width tolerance");

  // ---- sz-margin ----
  auto* c_sz = app.add_subcommand("sz-margin", "smallest house margin mu'(d) by enumeration");
  int sz_d = 2;
  double sz_tol = 1e-9;
  int sz_shards = 8;
  std::string sz_checkpoint, sz_csv;
  c_sz->add_option("-d,--degree", sz_d, "polynomial degree")->required();
  c_sz->add_option("--tol", sz_tol, "leaf certification tolerance");
  c_sz->add_option("--shards", sz_shards, "enumeration shards");
  c_sz->add_option("--checkpoint", sz_checkpoint, "checkpoint directory");
  c_sz->add_option("--csv", sz_csv, "also write the record table as CSV to this file");

  // ---- build-domain4 ----
  auto* c_d4 = app.add_subcommand("build-domain4", "4-d counterexample domain pipeline");
  std::string d4_matrix, d4_seed;
  long d4_horizon = 8;
  int d4_samples = 8;
  c_d4->add_option("--matrix", d4_matrix, "base matrix JSON (default: embedded instance)");
  c_d4->add_option("--seed", d4_seed, "seed vector JSON (default: embedded instance)");
  c_d4->add_option("--horizon", d4_horizon, "polytope truncation horizon H");
  c_d4->add_option("--samples", d4_samples, "interior sample count for the action check");

  // ---- monomial-extend ----
  auto* c_me = app.add_subcommand("monomial-extend", "evaluate the extension series of z^k");
  std::string me_matrix, me_modulus = "10", me_k = "1,0", me_anchor = "0";
  std::string me_w, me_z;
  double me_tol = 1e-8;
  long me_horizon = -1;
  c_me->add_option("--matrix", me_matrix, "matrix JSON file")->required();
  c_me->add_option("-m,--modulus", me_modulus, "base modulus: number, inf, or 2inf");
  c_me->add_option("-k,--covector", me_k, "lattice covector, comma separated");
  c_me->add_option("--anchor", me_anchor, "anchor re[,im]");
  c_me->add_option("--eval", me_w, "strip point JSON file")->required();
  c_me->add_option("--point", me_z, "fiber point JSON file")->required();
  c_me->add_option("--tol", me_tol, "certified tail tolerance");
  c_me->add_option("--horizon", me_horizon, "fixed truncation horizon (default: auto)");

  // ---- witness ----
  auto* c_wt = app.add_subcommand("witness", "search a doubly-exponential growth witness");
  std::string wt_matrix;
  double wt_tol = 1e-9;
  long wt_horizon = 30;
  std::uint64_t wt_seed = 20240717ull;
  c_wt->add_option("--matrix", wt_matrix, "matrix JSON file")->required();
  c_wt->add_option("--tol", wt_tol, "numeric tolerance");
  c_wt->add_option("--horizon", wt_horizon, "verification horizon");
  c_wt->add_option("--seed", wt_seed, "deterministic draw seed");

  // ---- gaps ----
  auto* c_gp = app.add_subcommand("gaps", "bounded-gap return set of a torus orbit");
  std::string gp_theta;
  double gp_eps = 0.1;
  long gp_horizon = 10000;
  c_gp->add_option("--theta", gp_theta, "torus point JSON: array of args in units of 2 pi")
      ->required();
  c_gp->add_option("--eps", gp_eps, "return distance epsilon");
  c_gp->add_option("--horizon", gp_horizon, "scan horizon");

  // ---- laurent ----
  auto* c_lr = app.add_subcommand("laurent", "extract one fiberwise Laurent coefficient");
  std::string lr_matrix, lr_modulus = "10", lr_k = "1,0", lr_anchor = "0", lr_coeff;
  std::string lr_w, lr_radii = "1,1";
  double lr_tol = 1e-9;
  std::size_t lr_samples = 16;
  c_lr->add_option("--matrix", lr_matrix, "matrix JSON file")->required();
  c_lr->add_option("-m,--modulus", lr_modulus, "base modulus: number, inf, or 2inf");
  c_lr->add_option("-k,--covector", lr_k, "series covector, comma separated");
  c_lr->add_option("--anchor", lr_anchor, "series anchor re[,im]");
  c_lr->add_option("--coeff", lr_coeff, "coefficient index to extract")->required();
  c_lr->add_option("--eval", lr_w, "strip point JSON file")->required();
  c_lr->add_option("--radii", lr_radii, "torus radii, comma separated");
  c_lr->add_option("--samples", lr_samples, "samples per axis (power of two)");
  c_lr->add_option("--tol", lr_tol, "series evaluation tolerance");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help
    app.exit(e);
    return 2;
  }

  Timer timer;
  try {
    if (c_cls->parsed()) {
      IntMatrix M = matrix_from_json(load_json_file(cls_matrix));
      ModulusSpec mod = ModulusSpec::parse(cls_modulus);
      SteinVerdict v = classify(M, mod, cls_tol);
      Report rep;
      rep.kind = "classify";
      rep.payload = verdict_to_json(v);
      rep.payload["modulus"] = mod.to_string();
      rep.payload["tol"] = cls_tol;
      finish(rep, {cls_matrix}, 0, timer, fmt);
      return v.kind == SteinKind::Indeterminate ? 3 : 0;
    }

    if (c_cm->parsed()) {
      IntMatrix M = matrix_from_json(load_json_file(cm_matrix));
      CriticalModulus cm = critical_modulus(M, cm_tol);
      Report rep;
      rep.kind = "critical-modulus";
      rep.payload = critical_modulus_to_json(cm);
      rep.payload["tol"] = cm_tol;
      finish(rep, {cm_matrix}, 0, timer, fmt);
      return 0;
    }

    if (c_sz->parsed()) {
      SzOptions opt;
      opt.shards = sz_shards;
      opt.threads = env_threads();
      opt.checkpoint_dir = sz_checkpoint;
      opt.leaf_tol = sz_tol;
      MarginResult r = sz_margin(sz_d, sz_tol, opt);
      if (!timing_enabled()) r.wall_ms = 0.0;
      Report rep;
      rep.kind = "sz-margin";
      rep.payload = margin_result_to_json(r);
      if (!sz_csv.empty()) {
        std::ofstream out(sz_csv);
        if (!out) throw SchemaViolation("cannot write CSV file: " + sz_csv);
        out << margin_result_to_csv(r);
      }
      finish(rep, {}, 0, timer, fmt);
      return 0;
    }

    if (c_d4->parsed()) {
      IntMatrix N = d4_matrix.empty() ? default_base_matrix()
                                      : matrix_from_json(load_json_file(d4_matrix));
      LatticeVector u =
          d4_seed.empty() ? default_seed() : lattice_from_json(load_json_file(d4_seed));
      FindJResult fj = find_J(N, u);
      auto [poly, prep] = build_polytope(N, u, fj.J, d4_horizon);
      ReinhardtReport rr = verify_reinhardt_instance(poly, d4_samples);
      Report rep;
      rep.kind = "build-domain4";
      rep.payload = domain_pipeline_to_json(fj, poly, prep, rr);
      std::vector<std::string> inputs;
      if (!d4_matrix.empty()) inputs.push_back(d4_matrix);
      if (!d4_seed.empty()) inputs.push_back(d4_seed);
      finish(rep, inputs, 0, timer, fmt);
      return 0;
    }

    if (c_me->parsed()) {
      IntMatrix M = matrix_from_json(load_json_file(me_matrix));
      ModulusSpec mod = ModulusSpec::parse(me_modulus);
      LatticeVector k = parse_lattice_csv(me_k);
      SeriesSpec spec = make_series_spec(M, mod, k, parse_complex_arg(me_anchor));
      json jw = load_json_file(me_w);
      StripPoint w = jw.is_array() ? StripPoint(complex_from_json(jw), mod)
                                   : strip_point_from_json(jw);
      ComplexPoint z = complex_point_from_json(load_json_file(me_z));
      SectionValue v = monomial_section(spec, w, z, me_tol, me_horizon);
      Report rep;
      rep.kind = "monomial-extend";
      rep.payload = json{{"series", series_spec_to_json(spec)},
                         {"at", strip_point_to_json(w)},
                         {"point", complex_point_to_json(z)},
                         {"result", section_value_to_json(v)}};
      finish(rep, {me_matrix, me_w, me_z}, 0, timer, fmt);
      return 0;
    }

    if (c_wt->parsed()) {
      IntMatrix M = matrix_from_json(load_json_file(wt_matrix));
      WitnessCertificate cert = witness_search(M, wt_tol, wt_horizon, wt_seed);
      const bool revalidated = validate_witness(cert);
      Report rep;
      rep.kind = "witness";
      rep.payload = witness_to_json(cert);
      rep.payload["revalidated"] = revalidated;
      finish(rep, {wt_matrix}, wt_seed, timer, fmt);
      return revalidated ? 0 : 4;
    }

    if (c_gp->parsed()) {
      json jt = load_json_file(gp_theta);
      const json& arr = jt.is_object() && jt.contains("args_2pi") ? jt.at("args_2pi") : jt;
      if (!arr.is_array() || arr.empty())
        throw SchemaViolation("theta file must hold an array of args in units of 2 pi");
      TorusPoint theta = TorusPoint::from_args_2pi(arr.get<std::vector<double>>());
      GapSet g = gap_set(theta, gp_eps, gp_horizon);
      Report rep;
      rep.kind = "gaps";
      rep.payload = gap_set_to_json(g);
      finish(rep, {gp_theta}, 0, timer, fmt);
      return 0;
    }

    if (c_lr->parsed()) {
      IntMatrix M = matrix_from_json(load_json_file(lr_matrix));
      ModulusSpec mod = ModulusSpec::parse(lr_modulus);
      LatticeVector k = parse_lattice_csv(lr_k);
      SeriesSpec spec = make_series_spec(M, mod, k, parse_complex_arg(lr_anchor));
      json jw = load_json_file(lr_w);
      StripPoint w = jw.is_array() ? StripPoint(complex_from_json(jw), mod)
                                   : strip_point_from_json(jw);
      LatticeVector target = parse_lattice_csv(lr_coeff);
      std::vector<double> radii = parse_double_csv(lr_radii);
      SectionFn f = [&spec, lr_tol](const StripPoint& wp, const ComplexPoint& zp) {
        return monomial_section(spec, wp, zp, lr_tol).value;
      };
      std::complex<double> c = laurent_coefficient(f, target, w, radii, lr_samples);
      Report rep;
      rep.kind = "laurent";
      rep.payload = json{{"series", series_spec_to_json(spec)},
                         {"at", strip_point_to_json(w)},
                         {"coeff_index", lattice_to_json(target)},
                         {"radii", radii},
                         {"samples_per_axis", lr_samples},
                         {"coefficient", complex_to_json(c)}};
      finish(rep, {lr_matrix, lr_w}, 0, timer, fmt);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Input ? 2 : 4;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
