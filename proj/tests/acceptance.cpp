// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "opideal/experiments.hpp"
#include "opideal/interpolation.hpp"
#include "opideal/limit_order.hpp"
#include "opideal/summing.hpp"
#include "oracles.hpp"

using namespace opideal;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& text) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += (ok ? "" : "VIOLATED ") + text;
}

Exponent ex(const char* s) { return Exponent::parse(s); }

SamplingConfig sampling(std::size_t samples, std::uint64_t seed) {
  SamplingConfig c;
  c.samples = samples;
  c.seed = seed;
  c.force_sampling = true;
  return c;
}

std::vector<std::pair<double, double>> lower_points(const RunReport& r, double u_recip, double v_recip) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows)
    if (row.kind == "lower" && row.u_recip == u_recip && row.v_recip == v_recip)
      pts.emplace_back(static_cast<double>(*row.n), *row.value);
  return pts;
}

Outcome exact_ell_norm() {
  Outcome o;
  const auto t0 = Clock::now();
  for (std::size_t n : {4u, 16u, 64u}) {
    const auto l2 = SpaceDescriptor::sequence(n, Exponent::two());
    const auto t = SpaceMap::identity(l2, l2);
    const double root = std::sqrt(static_cast<double>(n));
    const NormEstimate exact = ell_norm_mc(t, {});
    note(o, exact.value == root && exact.cert == Certification::Exact,
         "n=" + std::to_string(n) + " closed form " + fmt(exact.value, 17) + " == " + fmt(root, 17));
    const NormEstimate mc = ell_norm_mc(t, sampling(100000, 7));
    const double rel = std::abs(mc.value - root) / root;
    note(o, rel <= 0.01, "MC " + fmt(mc.value) + " rel err " + fmt(rel, 3) + " <= 0.01");
  }
  const double secs = seconds_since(t0);
  note(o, secs < 5.0, "time " + fmt(secs, 3) + " s < 5 s");
  return o;
}

Outcome schatten_hilbert_row() {
  Outcome o;
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Theorem2Schatten;
  cfg.n_grid = {8, 16, 32, 64};
  cfg.pairs = {parse_pair("2:2"), parse_pair("2:4"), parse_pair("2:inf")};
  cfg.seed = 7;
  cfg.samples = 100000;
  const RunReport r = run_theorem2(cfg, false);
  for (const auto& pr : cfg.pairs) {
    const auto fit = fit_exponent(lower_points(r, 0.5, pr.v.recip()));
    const double ref = 0.5 + pr.v.recip();
    note(o, std::abs(fit.slope - ref) <= 0.05,
         "v=" + pr.v.to_string() + " slope " + fmt(fit.slope, 4) + " vs " + fmt(ref, 4) + " (+-0.05)");
  }
  const double secs = seconds_since(t0);
  note(o, secs < 120.0, "time " + fmt(secs, 3) + " s < 120 s");
  return o;
}

Outcome schatten_trace_class_row() {
  Outcome o;
  const auto gauss = OrthonormalSystem::gaussian({2000, 7, GaussianKind::Real, 0});
  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const auto t = SpaceMap::identity(SpaceDescriptor::schatten(n, Exponent::one()),
                                      SpaceDescriptor::schatten(n, Exponent::two()));
    const NormEstimate e = pi_b_search(t, gauss);
    const ReferenceValue ref = reference_norm(Ideal::Pi2, {SpaceKind::Schatten, Exponent::one(), Exponent::two(), n});
    note(o, e.cert == Certification::CertifiedLower && e.value == *ref.value,
         "n=" + std::to_string(n) + " " + fmt(e.value, 17) + " == " + fmt(*ref.value, 17));
    pts.emplace_back(static_cast<double>(n), e.value);
  }
  const auto fit = fit_exponent(pts);
  note(o, std::abs(fit.slope - 0.5) < 1e-10 && fit.max_rel_residual < 1e-10,
       "slope " + fmt(fit.slope, 15) + ", residual " + fmt(fit.max_rel_residual, 3) + " < 1e-10");
  return o;
}

Outcome limit_order_closed_form() {
  Outcome o;
  const std::vector<Exponent> grid{ex("1"), ex("2"), ex("inf")};
  const LimitOrderTable t = limit_order_table(IdealTag::Gamma, grid, grid);
  // Rows u = 1, 2, inf; columns v = 1, 2, inf.
  const double expected[3][3] = {{0.5, 0.0, 0.0}, {1.0, 0.5, 0.0}, {1.0, 0.5, 0.0}};
  bool table_ok = true;
  std::string printed;
  for (int i = 0; i < 3; ++i) {
    printed += i ? ",(" : "(";
    for (int j = 0; j < 3; ++j) {
      table_ok = table_ok && t.values(i, j) == expected[i][j];
      printed += (j ? "," : "") + fmt(t.values(i, j));
    }
    printed += ")";
  }
  note(o, table_ok, "table " + printed + " (u=2, v=1 follows the 1/v branch: 1)");
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const Exponent u = Exponent::from_recip(i / 49.0), v = Exponent::from_recip(j / 49.0);
      worst = std::max(worst, std::abs(theorem2_exponent(u, v) - 0.5 - gamma_limit_order(u, v).value));
    }
  note(o, worst <= 1e-14, "50x50 identity max dev " + fmt(worst, 3) + " <= 1e-14");
  return o;
}

Outcome convexity() {
  Outcome o;
  oracle::Gen g(2024);
  auto dyadic = [&](std::size_t lo, std::size_t hi) { return static_cast<double>(g.index(lo, hi)) / 1024.0; };
  double min_dyadic = std::numeric_limits<double>::infinity();
  double min_cont = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    for (bool exact_grid : {true, false}) {
      const double ru0 = exact_grid ? dyadic(512, 1024) : g.uniform(0.5, 1.0);
      const double ru1 = exact_grid ? dyadic(512, 1024) : g.uniform(0.5, 1.0);
      const double rv0 = exact_grid ? dyadic(0, 1024) : g.uniform(0.0, 1.0);
      const double rv1 = exact_grid ? dyadic(0, 1024) : g.uniform(0.0, 1.0);
      const double theta = exact_grid ? dyadic(1, 1023) : g.uniform(0.001, 0.999);
      const Exponent u0 = Exponent::from_recip(ru0), u1 = Exponent::from_recip(ru1);
      const Exponent v0 = Exponent::from_recip(rv0), v1 = Exponent::from_recip(rv1);
      const Exponent ut = Exponent::from_recip((1 - theta) * ru0 + theta * ru1);
      const Exponent vt = Exponent::from_recip((1 - theta) * rv0 + theta * rv1);
      const double slack = corollary4_check({u0, v0, gamma_limit_order(u0, v0).value},
                                            {u1, v1, gamma_limit_order(u1, v1).value}, theta,
                                            {ut, vt, gamma_limit_order(ut, vt).value})
                               .slack;
      (exact_grid ? min_dyadic : min_cont) = std::min(exact_grid ? min_dyadic : min_cont, slack);
    }
  }
  note(o, min_dyadic >= 0.0, "1000 exact-arithmetic triples: min slack " + fmt(min_dyadic, 3) + " >= 0");
  note(o, min_cont >= -8 * std::numeric_limits<double>::epsilon(),
       "1000 continuous triples: min slack " + fmt(min_cont, 3) + " (rounding only)");
  const Exponent u = ex("4/3");
  const double theta = 2.0 * u.dual().recip();
  const Exponent vt = interp_exponent(ex("2"), ex("inf"), theta);
  const auto c = corollary4_check({ex("1"), ex("2"), gamma_limit_order(ex("1"), ex("2")).value},
                                  {ex("2"), ex("inf"), gamma_limit_order(ex("2"), ex("inf")).value}, theta,
                                  {u, vt, gamma_limit_order(u, vt).value});
  note(o, std::abs(c.slack) <= 1e-12, "(1,2),(2,inf) at u=4/3, theta=" + fmt(theta) + " slack " + fmt(c.slack, 3));
  return o;
}

Outcome interpolation_audit() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::InterpAudit;
  cfg.n_grid = {8, 16, 32};
  cfg.seed = 7;
  cfg.theta = 0.5;
  const RunReport r = run_interp_audit(cfg, false);
  int audits = 0;
  for (const auto& row : r.rows) {
    if (row.kind != "audit" || row.space.empty() || row.space[0] != 'l') continue;
    ++audits;
    const bool ok = row.verdict == "PASS" && *row.slack >= -3.0 * *row.std_error &&
                    row.detail.find("d_theta=" + fmt(std::sqrt(2.0))) != std::string::npos;
    note(o, ok, "n=" + std::to_string(*row.n) + " slack " + fmt(*row.slack, 4) + " >= -3*" + fmt(*row.std_error, 3));
  }
  note(o, audits == 3, std::to_string(audits) + " sequence audits");
  return o;
}

Outcome lambda_p_constants() {
  Outcome o;
  const AscentConfig cfg{64, 500, 0.1, 1e-8, 7, 0};
  const NormEstimate single = kp_constant_lower(CharacterSet::cyclic(16, {5}), ex("4"), cfg);
  note(o, single.value == 1.0, "singleton K_4 = " + fmt(single.value, 17));
  for (std::int64_t n : {8, 16}) {
    for (const char* p : {"4", "8"}) {
      const double target = std::pow(static_cast<double>(n), 0.5 - ex(p).recip());
      const double k = kp_constant_lower(CharacterSet::full(n), ex(p), cfg).value;
      note(o, std::abs(k - target) <= 0.05 * target,
           "N=" + std::to_string(n) + " p=" + p + " " + fmt(k, 5) + " vs " + fmt(target, 5));
    }
  }
  oracle::Gen g(77);
  int ones = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = static_cast<std::int64_t>(g.index(2, 128));
    std::vector<std::int64_t> freqs;
    for (std::int64_t k = 0; k < n; ++k)
      if (g.uniform(0, 1) < 0.3) freqs.push_back(k);
    if (freqs.empty()) freqs.push_back(0);
    if (kp_constant_lower(CharacterSet::cyclic(n, freqs), Exponent::two()).value == 1.0) ++ones;
  }
  note(o, ones == 100, "K_2 = 1 on " + std::to_string(ones) + "/100 random sets");
  return o;
}

Outcome character_controls() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Theorem1Characters;
  cfg.seed = 7;
  const RunReport lac = run_theorem1(cfg, false);
  for (const auto& row : lac.rows) {
    if (row.kind != "fit-lower") continue;
    const double ref = gamma_limit_order(Exponent::from_recip(*row.u_recip), Exponent::from_recip(*row.v_recip)).value;
    note(o, std::abs(*row.slope - ref) <= 0.1,
         "lacunary (" + Exponent::from_recip(*row.u_recip).to_string() + "," +
             Exponent::from_recip(*row.v_recip).to_string() + ") slope " + fmt(*row.slope, 4) + " vs " + fmt(ref, 3) + " (+-0.1)");
  }
  ExperimentConfig full = cfg;
  full.generator = "full";
  full.expectation = "exceed";
  full.pairs = {parse_pair("2:inf")};
  const RunReport neg = run_theorem1(full, false);
  for (const auto& row : neg.rows) {
    if (row.kind != "fit-lower") continue;
    note(o, *row.slope >= 0.2, "full set (2,inf) slope " + fmt(*row.slope, 4) + " >= 0.2");
  }
  return o;
}

Outcome reproducibility() {
  Outcome o;
  std::vector<ExperimentConfig> cfgs;
  ExperimentConfig c;
  c.seed = 99;
  c.kind = ExperimentKind::Theorem2Schatten;
  c.n_grid = {4, 8, 16};
  c.samples = 4000;
  c.search_samples = 500;
  cfgs.push_back(c);
  c.kind = ExperimentKind::Theorem1Characters;
  c.n_grid = {2, 4, 8};
  c.pairs.clear();
  cfgs.push_back(c);
  c.kind = ExperimentKind::InterpAudit;
  c.n_grid = {4, 8, 16};
  cfgs.push_back(c);
  c.kind = ExperimentKind::KpProfile;
  c.n_grid = {8};
  cfgs.push_back(c);
  c.kind = ExperimentKind::LimitOrderTable;
  cfgs.push_back(c);
  for (auto cfg : cfgs) {
    cfg.threads = 1;
    const std::string a = run_experiment(cfg, false).to_json().dump();
    const std::string b = run_experiment(cfg, false).to_json().dump();
    cfg.threads = 4;
    const std::string d = run_experiment(cfg, false).to_json().dump();
    note(o, a == b && a == d, std::string(to_string(cfg.kind)) + " byte-identical (" + std::to_string(a.size()) +
                                  " bytes, threads 1/1/4)");
  }
  return o;
}

Outcome property_suites() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const char* name : {"test_core", "test_family", "test_systems", "test_summing", "test_limit_order",
                           "test_interpolation", "test_experiments"}) {
    const std::string cmd = std::string(OPIDEAL_TEST_DIR) + "/" + name + " --gtest_brief=1 > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    note(o, status == 0, std::string(name) + (status == 0 ? " ok" : " failed"));
  }
  const double secs = seconds_since(t0);
  note(o, secs < 60.0, "time " + fmt(secs, 3) + " s < 60 s");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exact l-norm of the Hilbert identity", exact_ell_norm},
      {"Schatten row u=2 exponents", schatten_hilbert_row},
      {"Schatten S_1 -> S_2 rank-one lower bounds", schatten_trace_class_row},
      {"Gaussian limit-order closed form", limit_order_closed_form},
      {"convexity of the closed form", convexity},
      {"interpolation audit, Gaussian l couple", interpolation_audit},
      {"Lambda(p) constants", lambda_p_constants},
      {"character-system positive and negative controls", character_controls},
      {"seeded reproducibility", reproducibility},
      {"property suites", property_suites},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s [%zu] %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
