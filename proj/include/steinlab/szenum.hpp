#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"

namespace steinlab {

// One enumerated monic polynomial with its certified house (max root
// modulus). `is_cyclotomic_product` marks the Kronecker class x^r times a
// product of cyclotomics, so house is exactly 1 (or 0 for a pure power of
// x); `is_reciprocal` is the palindrome test below.
struct HouseRecord {
  IntPolynomial poly;
  Interval house{0.0, 0.0};
  bool is_cyclotomic_product = false;
  bool is_reciprocal = false;

  bool straddles(double a) const { return house.lo <= a && house.hi > a; }
};

// Palindrome up to sign: x^d P(1/x) == +/- P; false whenever 0 is a root.
inline bool is_reciprocal(const IntPolynomial& p) {
  if (p.constant() == 0) return false;
  const IntPolynomial rev = p.reversed();
  return p == rev || p == -rev;
}

// Companion matrix with the coefficients in the last column and a unit
// subdiagonal; unimodular exactly when |P(0)| = 1, which is required.
inline IntMatrix companion_matrix(const IntPolynomial& p) {
  const std::size_t d = p.degree();
  if (d == 0) throw DegenerateDegreeZero("companion needs degree >= 1");
  if (!p.is_monic()) throw SchemaViolation("companion needs a monic polynomial");
  if (p.constant() != 1 && p.constant() != -1)
    throw NonUnitConstantTerm("companion is unimodular only for |P(0)| = 1");
  IntMatrix a(d);
  for (std::size_t i = 0; i < d; ++i) a.at(i, d - 1) = -p.at(i);
  for (std::size_t i = 1; i < d; ++i) a.at(i, i - 1) = 1;
  return a;
}

namespace szdetail {

inline long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Certify one leaf polynomial against the ceiling. Returns nullopt when the
// house is certified strictly above a_eff (not visited). Separation from
// house 1 is decided exactly: after stripping x^r, house == 1 iff the rest
// is a product of cyclotomics, so an enclosure touching 1 is either snapped
// to the exact point or refined until its lower end clears 1.
inline std::optional<HouseRecord> certify_leaf(const IntPolynomial& p, double a_eff,
                                               double leaf_tol) {
  HouseRecord rec;
  rec.poly = p;
  rec.is_reciprocal = is_reciprocal(p);

  // Strip x^r.
  std::size_t r = 0;
  while (r < p.degree() && p.at(r) == 0) ++r;
  if (r == p.degree()) { // pure power of x: Kronecker class, house 0
    rec.house = {0.0, 0.0};
    rec.is_cyclotomic_product = true;
    return rec;
  }
  std::vector<mpz_class> qc(p.coeffs().begin() + static_cast<long>(r), p.coeffs().end());
  IntPolynomial q(std::move(qc));

  RootRadiusResult rr = root_radius(q, leaf_tol);
  Interval h = rr.modulus;
  if (h.lo > a_eff) return std::nullopt;

  if (h.lo <= 1.0 + 1e-9) {
    if (is_cyclotomic_product(q)) {
      rec.house = {1.0, 1.0};
      rec.is_cyclotomic_product = true;
      return rec;
    }
    // House > 1 strictly; refine until the gap is certified.
    double t = leaf_tol;
    for (int i = 0; i < 5 && h.lo <= 1.0; ++i) {
      t /= 100.0;
      h = root_radius(q, t).modulus;
    }
    if (h.lo <= 1.0)
      throw CertificationFailed("house could not be separated from 1 for " + p.pretty());
  }

  if (h.lo <= a_eff && h.hi > a_eff) {
    // Boundary straddle: re-certify sharper before flagging.
    h = root_radius(q, leaf_tol / 256.0).modulus;
  }
  if (h.lo > a_eff) return std::nullopt;
  rec.house = h;
  return rec;
}

struct EnumFrame {
  int d = 0;
  double a_eff = 0.0;
  double leaf_tol = 1e-9;
  std::vector<long> box;        // box[k] = max |c_k|, 1-based size d+1
  std::vector<double> psum_cap; // psum_cap[k] = d * a_eff^k + slack
};

inline EnumFrame make_frame(int d, double a) {
  if (d < 1) throw DegenerateDegreeZero("degree must be >= 1");
  if (!(a >= 0.0) || !std::isfinite(a)) throw NonPositiveMargin("ceiling must be >= 0");
  EnumFrame f;
  f.d = d;
  f.a_eff = a * (1.0 + 1e-12) + 1e-12;
  f.box.assign(d + 1, 0);
  f.psum_cap.assign(d + 1, 0.0);
  for (int k = 1; k <= d; ++k) {
    f.box[k] = static_cast<long>(
        std::floor(binom(d, k) * std::pow(f.a_eff, k) + 1e-9));
    f.psum_cap[k] = d * std::pow(f.a_eff, k) * (1.0 + 1e-12) + 1e-9;
  }
  return f;
}

// Depth-first enumeration over coefficient prefixes (c_1 .. c_d), pruning by
// the Newton power-sum bounds |p_k| <= d a^k, which hold whenever the house
// is at most a.  c1_filter restricts the top-level branch for sharding.
template <class Emit>
std::uint64_t enumerate_prefixes(const EnumFrame& f,
                                 const std::function<bool(long)>& c1_filter,
                                 Emit&& emit) {
  std::vector<long> c(f.d + 1, 0);  // c[k] = coefficient of x^{d-k}
  std::vector<long> psum(f.d + 1, 0);
  std::uint64_t visited = 0;

  auto rec = [&](auto&& self, int k) -> void {
    for (long ck = -f.box[k]; ck <= f.box[k]; ++ck) {
      if (k == 1 && c1_filter && !c1_filter(ck)) continue;
      c[k] = ck;
      // Newton: p_k = -(k c_k + sum_{i<k} c_i p_{k-i})
      long s = static_cast<long>(k) * ck;
      for (int i = 1; i < k; ++i) s += c[i] * psum[k - i];
      psum[k] = -s;
      if (std::fabs(static_cast<double>(psum[k])) > f.psum_cap[k]) continue;
      if (k == f.d) {
        std::vector<mpz_class> coeffs(f.d + 1);
        for (int j = 0; j <= f.d; ++j)
          coeffs[j] = (j == f.d) ? 1 : c[f.d - j];
        IntPolynomial poly(std::move(coeffs));
        if (auto r = certify_leaf(poly, f.a_eff, f.leaf_tol)) {
          ++visited;
          emit(std::move(*r));
        }
      } else {
        self(self, k + 1);
      }
    }
  };
  rec(rec, 1);
  return visited;
}

inline nlohmann::json record_to_json(const HouseRecord& r) {
  nlohmann::json j;
  std::vector<std::string> coeffs;
  for (const auto& v : r.poly.coeffs()) coeffs.push_back(v.get_str());
  j["coeffs_low_to_high"] = coeffs;
  j["house_lo"] = r.house.lo;
  j["house_hi"] = r.house.hi;
  j["cyclotomic"] = r.is_cyclotomic_product;
  j["reciprocal"] = r.is_reciprocal;
  return j;
}

inline HouseRecord record_from_json(const nlohmann::json& j) {
  HouseRecord r;
  std::vector<mpz_class> coeffs;
  for (const auto& s : j.at("coeffs_low_to_high"))
    coeffs.emplace_back(s.get<std::string>());
  r.poly = IntPolynomial(std::move(coeffs));
  r.house = {j.at("house_lo").get<double>(), j.at("house_hi").get<double>()};
  r.is_cyclotomic_product = j.at("cyclotomic").get<bool>();
  r.is_reciprocal = j.at("reciprocal").get<bool>();
  return r;
}

// Lexicographic key in visit order: (c_1, ..., c_d) ascending.
inline bool record_less(const HouseRecord& a, const HouseRecord& b) {
  const auto& ca = a.poly.coeffs();
  const auto& cb = b.poly.coeffs();
  if (ca.size() != cb.size()) return ca.size() < cb.size();
  for (std::size_t k = ca.size() - 1; k-- > 0;) {
    const mpz_class& x = ca[k];
    const mpz_class& y = cb[k];
    if (x != y) return x < y;
  }
  return false;
}

} // namespace szdetail

// Visit every monic integer polynomial of the given degree whose house is
// certified <= a (boundary straddles included, flagged via the enclosure).
// Sequential, deterministic visit order: coefficients (c_1, ..., c_d)
// ascending lexicographically. Returns the visit count.
inline std::uint64_t enumerate_bounded_house(
    int d, double a, const std::function<void(const HouseRecord&)>& sink) {
  szdetail::EnumFrame f = szdetail::make_frame(d, a);
  return szdetail::enumerate_prefixes(f, nullptr,
                                      [&](HouseRecord&& r) { if (sink) sink(r); });
}

struct SzOptions {
  int shards = 8;
  int threads = 0; // 0: min(shards, hardware)
  std::string checkpoint_dir;
  double leaf_tol = 1e-9;
};

struct MarginResult {
  int degree = 0;
  Interval mu_prime{0.0, 0.0};
  IntPolynomial argmin;
  double ceiling = 0.0;
  std::uint64_t visited_count = 0;
  std::vector<HouseRecord> records; // full visited set, lexicographic order
  double wall_ms = 0.0;
};

inline constexpr int kSzMarginDegreeCap = 6;

// Smallest house above 1 among monic integer polynomials of degree d, with
// certified enclosure of the margin mu'(d) = min house - 1 and the
// lexicographically canonical argmin. The search ceiling 2^{1/d} is sharp
// because x^d - 2 always qualifies. Sharded by the leading coefficient
// branch; each shard checkpoints completed branches so interrupted runs
// resume, and the shard merge is a deterministic sort, so the result is
// independent of shard count and thread schedule.
inline MarginResult sz_margin(int d, double tol, const SzOptions& opt = {}) {
  if (d < 1) throw DegenerateDegreeZero("degree must be >= 1");
  if (d > kSzMarginDegreeCap)
    throw DegreeTooLarge("margin enumeration capped at degree " +
                         std::to_string(kSzMarginDegreeCap));
  if (tol <= 0.0) throw NonPositiveMargin("tol must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  const double a = std::pow(2.0, 1.0 / d) * (1.0 + 1e-9);
  szdetail::EnumFrame frame = szdetail::make_frame(d, a);
  frame.leaf_tol = opt.leaf_tol;

  const int shards = std::max(1, opt.shards);
  int threads = opt.threads > 0 ? opt.threads
                                : static_cast<int>(std::min<unsigned>(
                                      shards, std::max(1u, std::thread::hardware_concurrency())));
  threads = std::min(threads, shards);

  namespace fs = std::filesystem;
  const bool use_ckpt = !opt.checkpoint_dir.empty();
  if (use_ckpt) fs::create_directories(opt.checkpoint_dir);
  auto ckpt_path = [&](int s) {
    return fs::path(opt.checkpoint_dir) /
           ("shard-" + std::to_string(s) + "-of-" + std::to_string(shards) + ".json");
  };

  std::vector<std::vector<HouseRecord>> shard_records(shards);
  std::vector<std::uint64_t> shard_counts(shards, 0);
  std::atomic<int> next_shard{0};
  std::vector<std::string> shard_errors(shards);

  auto run_shard = [&](int s) {
    std::vector<long> done_c1;
    std::vector<HouseRecord>& recs = shard_records[s];
    std::uint64_t count = 0;

    if (use_ckpt && fs::exists(ckpt_path(s))) {
      std::ifstream in(ckpt_path(s));
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.value("d", -1) == d && j.value("shards", -1) == shards &&
          std::fabs(j.value("ceiling", 0.0) - a) < 1e-15) {
        for (const auto& v : j.at("completed_c1")) done_c1.push_back(v.get<long>());
        for (const auto& v : j.at("records"))
          recs.push_back(szdetail::record_from_json(v));
        count = j.at("count").get<std::uint64_t>();
      }
    }

    auto write_ckpt = [&]() {
      if (!use_ckpt) return;
      nlohmann::json j;
      j["schema_version"] = 1;
      j["d"] = d;
      j["shards"] = shards;
      j["ceiling"] = a;
      j["shard"] = s;
      j["completed_c1"] = done_c1;
      j["count"] = count;
      nlohmann::json rj = nlohmann::json::array();
      for (const auto& r : recs) rj.push_back(szdetail::record_to_json(r));
      j["records"] = std::move(rj);
      fs::path tmp = ckpt_path(s);
      tmp += ".tmp";
      {
        std::ofstream out(tmp);
        out << j.dump();
      }
      fs::rename(tmp, ckpt_path(s));
    };

    const long b1 = frame.box[1];
    for (long c1 = -b1; c1 <= b1; ++c1) {
      if ((c1 + b1) % shards != s) continue;
      if (std::find(done_c1.begin(), done_c1.end(), c1) != done_c1.end()) continue;
      count += szdetail::enumerate_prefixes(
          frame, [c1](long v) { return v == c1; },
          [&](HouseRecord&& r) { recs.push_back(std::move(r)); });
      done_c1.push_back(c1);
      write_ckpt();
    }
    shard_counts[s] = count;
  };

  auto worker = [&]() {
    for (;;) {
      const int s = next_shard.fetch_add(1);
      if (s >= shards) return;
      try {
        run_shard(s);
      } catch (const std::exception& e) {
        shard_errors[s] = e.what();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : shard_errors)
    if (!err.empty()) throw CertificationFailed("shard failed: " + err);

  MarginResult res;
  res.degree = d;
  res.ceiling = a;
  for (int s = 0; s < shards; ++s) {
    res.visited_count += shard_counts[s];
    for (auto& r : shard_records[s]) res.records.push_back(std::move(r));
  }
  std::sort(res.records.begin(), res.records.end(), szdetail::record_less);

  // Candidates: certified house strictly above 1.
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < res.records.size(); ++i)
    if (res.records[i].house.lo > 1.0) cand.push_back(i);
  if (cand.empty()) throw SearchFailed("no candidate above house 1 inside the ceiling");

  // Interval minimum with refinement of the near-minimal shortlist.
  double refine_tol = std::max(tol * 1e-3, 1e-14);
  for (int round = 0; round < 5; ++round) {
    double min_hi = HUGE_VAL, short_lo = HUGE_VAL;
    for (std::size_t i : cand) min_hi = std::min(min_hi, res.records[i].house.hi);
    for (std::size_t i : cand)
      if (res.records[i].house.lo <= min_hi)
        short_lo = std::min(short_lo, res.records[i].house.lo);
    if (min_hi - short_lo <= tol) break;
    for (std::size_t i : cand) {
      HouseRecord& r = res.records[i];
      if (r.house.lo <= min_hi) {
        auto rec2 = szdetail::certify_leaf(r.poly, frame.a_eff, refine_tol);
        if (rec2) r.house = rec2->house;
      }
    }
    refine_tol /= 100.0;
  }

  double min_hi = HUGE_VAL;
  for (std::size_t i : cand) min_hi = std::min(min_hi, res.records[i].house.hi);
  double short_lo = HUGE_VAL;
  std::vector<std::size_t> shortlist;
  for (std::size_t i : cand)
    if (res.records[i].house.lo <= min_hi) {
      shortlist.push_back(i);
      short_lo = std::min(short_lo, res.records[i].house.lo);
    }
  if (min_hi - short_lo > tol)
    throw CertificationFailed("margin enclosure did not reach tol");

  // Canonical argmin among the (possibly tied) shortlist: smallest
  // coefficient magnitude sum, then lexicographic low-to-high.
  auto canon_less = [&](std::size_t ia, std::size_t ib) {
    const auto& pa = res.records[ia].poly.coeffs();
    const auto& pb = res.records[ib].poly.coeffs();
    mpz_class sa = 0, sb = 0;
    for (const auto& v : pa) sa += abs(v);
    for (const auto& v : pb) sb += abs(v);
    if (sa != sb) return sa < sb;
    for (std::size_t k = 0; k < pa.size(); ++k)
      if (pa[k] != pb[k]) return pa[k] < pb[k];
    return false;
  };
  std::size_t best = shortlist.front();
  for (std::size_t i : shortlist)
    if (canon_less(i, best)) best = i;
  res.argmin = res.records[best].poly;
  res.mu_prime = {rootdetail::dbl_dn(short_lo - 1.0), rootdetail::dbl_up(min_hi - 1.0)};

  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

} // namespace steinlab
