// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"
#include "cwtloc/optimizer.hpp"
#include "cwtloc/oracle.hpp"
#include "cwtloc/uncertainty.hpp"
#include "cwtloc/variation.hpp"

using namespace cwtloc;

namespace {

constexpr double kOmegaMax = 8.0;
constexpr std::size_t kN = 1024;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

double bump(double w, double lo, double hi) {
  if (w <= lo || w >= hi) return 0.0;
  const double t = (w - lo) / (hi - lo);
  return std::exp(-1.0 / (t * (1.0 - t)) + 4.0);
}

GridFunction from(const GridPtr& g, auto&& f) {
  GridFunction u(g);
  for (std::size_t k = 0; k < g->size(); ++k) u[k] = f((*g)[k]);
  return u;
}

GridPtr default_grid() { return make_grid(kOmegaMax, kN); }

ScanResult optimal_gaussian(const GridPtr& g) { return optimize_initial_variance(g, 1.0, 0.25, 2.0, 16); }

GridFunction two_bump(const GridPtr& g, int sweeps = 3) {
  auto two = from(g, [](double x) { return cplx(bump(x, 0.3, 1.3) + 0.6 * bump(x, 1.1, 3.2)); });
  GridFunction t = enforce_constraints(two, 1e-9, sweeps);
  t *= 1.0 / norm(t, Space::S);
  return t;
}

struct TestWindow {
  std::string name;
  GridFunction u;
};

std::vector<TestWindow> test_windows(const GridPtr& g) {
  std::vector<TestWindow> w;
  for (auto [m, s] : {std::pair{1.0, 0.5}, std::pair{1.0, 0.8}, std::pair{1.5, 0.4}, std::pair{0.8, 0.3}}) {
    char name[64];
    std::snprintf(name, sizeof name, "gaussian m=%.2f s=%.2f", m, s);
    w.push_back({name, init_truncated_gaussian(g, {m, s})});
  }
  w.push_back({"two-bump", two_bump(g)});
  return w;
}

// 1 and 2 share the oracle fields
std::vector<ConsistencyReport>& consistency_reports() {
  static std::vector<ConsistencyReport> reps;
  static bool done = false;
  if (!done) {
    auto g = default_grid();
    for (const auto& w : test_windows(g)) reps.push_back(pullback_consistency(w.u, PhaseSpaceGrid{}, 1));
    done = true;
  }
  return reps;
}

Outcome criterion1() {
  Outcome o;
  auto g = default_grid();
  auto ws = test_windows(g);
  auto& reps = consistency_reports();
  double worst = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    const double bound = 0.02 * r.oracle_total + r.truncation_allowance;
    const bool ok = std::abs(r.gap_total) <= bound;
    o.pass = o.pass && ok;
    worst = std::max(worst, r.rel_gap_total);
    note("%-22s L=%.6f vA+vB=%.6f gap=%.3e bound=%.3e mass=%.5f %s", ws[i].name.c_str(), r.report.total,
         r.oracle_total, r.gap_total, bound, r.moments.mass, ok ? "ok" : "FAIL");
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "5 windows, worst relative gap %.3f%%", 100.0 * worst);
  o.detail = buf;
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto g = default_grid();
  auto ws = test_windows(g);
  auto& reps = consistency_reports();
  double wa = 0.0, wb = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    const bool ok = r.rel_gap_A <= 0.02 && r.rel_gap_B <= 0.05;
    o.pass = o.pass && ok;
    wa = std::max(wa, r.rel_gap_A);
    wb = std::max(wb, r.rel_gap_B);
    note("%-22s scale %.6f vs vA %.6f (%.3f%%), time %.6f vs vB %.6f (%.3f%%) %s", ws[i].name.c_str(), r.pull_A,
         r.moments.v_A, 100 * r.rel_gap_A, r.pull_B, r.moments.v_B, 100 * r.rel_gap_B, ok ? "ok" : "FAIL");
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "worst gaps A %.3f%% (<= 2%%), B %.3f%% (<= 5%%)", 100 * wa, 100 * wb);
  o.detail = buf;
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto g = default_grid();
  auto u = optimal_gaussian(g).window;
  const auto k = ambiguity_field(u, PhaseSpaceGrid{}, 1);
  double kmax = 0.0;
  for (auto v : k.values) kmax = std::max(kmax, std::abs(v));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> A(-3.0, 3.0), B(-20.0, 20.0);
  std::bernoulli_distribution C(0.8);
  double ws = 0.0, wt = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = A(rng), b = B(rng);
    const int c = C(rng) ? 1 : -1;
    const auto s = scale_identity(u, a, b, c);
    const auto t = time_identity(u, a, b, c);
    ws = std::max(ws, std::abs(s.lhs - s.rhs) / kmax);
    wt = std::max(wt, std::abs(t.lhs - t.rhs) / kmax);
  }
  o.pass = ws <= 0.01 && wt <= 0.01;
  char buf[160];
  std::snprintf(buf, sizeof buf, "100 points, max error / max|K|: scale %.3e, time %.3e (<= 1e-2)", ws, wt);
  o.detail = buf;
  return o;
}

GridFunction smooth_direction(const GridPtr& g, std::mt19937_64& rng, bool complex) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GridFunction h(g);
  for (int j = 0; j < 4; ++j) {
    const double mu = 0.2 + 3.3 * U(rng);
    const double sg = 0.1 + 0.5 * U(rng);
    const cplx amp(2 * U(rng) - 1, complex ? 2 * U(rng) - 1 : 0.0);
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double w = (*g)[k];
      if (w <= 0) continue;
      const double d = (w - mu) / sg;
      h[k] += amp * std::exp(-0.5 * d * d);
    }
  }
  return h;
}

// Removes the W-components along both constraint gradients.
GridFunction tangent(const GridFunction& h, const ConstraintGradients& cg) {
  const double g11 = norm_sq(cg.scale, Space::W), g22 = norm_sq(cg.time, Space::W);
  const double g12 = inner_product(cg.scale, cg.time, Space::W).real();
  const double r1 = inner_product(h, cg.scale, Space::W).real(), r2 = inner_product(h, cg.time, Space::W).real();
  const double det = g11 * g22 - g12 * g12;
  if (g22 == 0.0 || det <= 1e-14 * g11 * g22) return h - (r1 / g11) * cg.scale;
  const double x = (g22 * r1 - g12 * r2) / det, y = (g11 * r2 - g12 * r1) / det;
  return h - x * cg.scale - y * cg.time;
}

Outcome criterion4() {
  Outcome o;
  auto g = default_grid();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  int checks = 0;
  for (int p = 0; p < 20; ++p) {
    const bool complex = p % 4 == 3;
    GridFunction u = init_truncated_gaussian(g, {0.8 + 0.6 * U(rng), 0.3 + 0.6 * U(rng)});
    if (complex) {
      const double c0 = 0.5 + U(rng);
      u += cplx(0.0, 0.3) * from(g, [&](double w) { return cplx(bump(w, 0.2, 2.8) * (w - c0)); });
      u = enforce_constraints(u, 1e-10);
    }
    const GridFunction h = smooth_direction(g, rng, complex);
    // unconstrained
    for (Functional f : {Functional::L, Functional::vA, Functional::vB}) {
      const double an = analytic_gateaux(f, u, h), fd = finite_difference_gateaux(f, u, h);
      const double rel = std::abs(an - fd) / std::abs(fd);
      worst = std::max(worst, rel);
      o.pass = o.pass && rel <= 1e-4;
      ++checks;
    }
    // constrained, along a tangent direction
    const auto vf = constrained_variation(u);
    const GridFunction ht = tangent(h, constraint_gradients(u));
    const double an = inner_product(vf.field, ht, Space::W).real();
    const double fd = finite_difference_gateaux(Functional::L, u, ht);
    const double rel = std::abs(an - fd) / std::abs(fd);
    worst = std::max(worst, rel);
    o.pass = o.pass && rel <= 1e-4;
    ++checks;
    if (rel > 1e-4) note("pair %d constrained: analytic %.9e fd %.9e", p, an, fd);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "20 pairs (5 complex), %d comparisons, worst relative error %.2e (<= 1e-4)", checks,
                worst);
  o.detail = buf;
  return o;
}

struct CovarianceError {
  double dilation = 0.0, translation = 0.0;
};

CovarianceError covariance_error(const GridFunction& u) {
  CovarianceError e;
  const double es = expected_value(Observable::NegLnAbsOmega, u, Space::S);
  const double et = expected_value(Observable::TimeDeriv, u, Space::S);
  for (int i = -8; i <= 8; ++i) {
    const double x = i / 8.0;
    e.dilation = std::max(
        e.dilation,
        std::abs(expected_value(Observable::NegLnAbsOmega, apply_group_element(x, 0, 1, u), Space::S) - (es + x)));
    e.translation = std::max(
        e.translation,
        std::abs(expected_value(Observable::TimeDeriv, apply_group_element(0, x, 1, u), Space::S) - (et + x)));
  }
  return e;
}

Outcome criterion5() {
  Outcome o;
  auto g = default_grid();
  const auto init = optimal_gaussian(g).window;
  const auto fin = run_descent(init, DescentOptions{}).final_window;
  double wd = 0.0, wl = 0.0;
  // the converged window carries ~1% of its mass beyond w_max/e; a = -1 pushes it off the grid,
  // so it is also checked zero-padded to twice the extent at the same step
  const auto wide = make_grid(2.0 * kOmegaMax, 2 * kN);
  GridFunction padded(wide);
  for (std::size_t k = 0; k < kN; ++k) padded[k + kN / 2] = fin[k];
  const auto eb = covariance_error(fin);
  note("%-22s dilation %.2e translation %.2e (w_max %.0f, truncated tail, not asserted)", "converged window",
       eb.dilation, eb.translation, kOmegaMax);
  for (const auto& [name, u] : {std::pair<const char*, const GridFunction&>{"optimal gaussian", init},
                                {"converged, padded", padded}}) {
    const auto e = covariance_error(u);
    note("%-22s dilation %.2e translation %.2e", name, e.dilation, e.translation);
    wd = std::max(wd, e.dilation);
    wl = std::max(wl, e.translation);
  }
  // steep window, reported only: the stencil bias grows with the time spread
  const auto steep = from(g, [](double x) { return cplx(bump(x, 0.3, 1.3) + 0.6 * bump(x, 1.1, 3.2)); });
  const auto es = covariance_error(steep);
  note("%-22s dilation %.2e translation %.2e (v_time_S %.1f, not asserted)", "two-bump", es.dilation,
       es.translation, uncertainty(steep).v_time_S);
  o.pass = wd <= 1e-3 && wl <= 1e-3;
  char buf[160];
  std::snprintf(buf, sizeof buf, "|a|,|b| <= 1: dilation error %.2e, translation error %.2e (<= 1e-3)", wd, wl);
  o.detail = buf;
  return o;
}

Outcome criterion6() {
  Outcome o;
  auto g = default_grid();
  // frequency and phase grids are refined together; the last pair is the default
  const std::size_t ns[] = {256, 512, kN};
  const PhaseSpaceGrid seq[] = {{2.5, 30.0, 40, 256}, {3.0, 60.0, 64, 512}, {4.0, 120.0, 128, 1024}};
  for (int which = 0; which < 2; ++which) {
    double prev = 0.0;
    std::string row;
    for (int i = 0; i < 3; ++i) {
      const auto gi = make_grid(kOmegaMax, ns[i]);
      const GridFunction u = which == 0 ? init_truncated_gaussian(gi, {1.0, 0.5}) : two_bump(gi, 8);
      const double mass = ambiguity_field(u, seq[i], 1).mass;
      char buf[48];
      std::snprintf(buf, sizeof buf, " %zu:%.6f", ns[i], mass);
      row += buf;
      o.pass = o.pass && mass > prev;
      prev = mass;
    }
    o.pass = o.pass && prev >= 0.95 && prev <= 1.001;
    note("%-22s mass under refinement:%s", which == 0 ? "gaussian m=1.00 s=0.50" : "two-bump", row.c_str());
  }
  for (const auto& r : consistency_reports()) o.pass = o.pass && r.moments.mass >= 0.95 && r.moments.mass <= 1.001;
  o.detail = "mass in [0.95, 1.001] at the default grid, increasing under refinement";
  return o;
}

Outcome criterion7() {
  Outcome o;
  auto g = default_grid();
  const auto scan = optimal_gaussian(g);
  const auto t = run_descent(scan.window, DescentOptions{});
  double worst_res = 0.0;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    worst_res = std::max({worst_res, std::abs(r.report.res_scale), std::abs(r.report.res_time)});
    if (i > 0) o.pass = o.pass && r.report.total < t.records[i - 1].report.total;
  }
  const double gn = constrained_variation(t.final_window).relative_norm;
  o.pass = o.pass && worst_res <= 1e-9 && gn < 1e-5 && t.termination == Termination::GradTol;
  char buf[200];
  std::snprintf(buf, sizeof buf, "L %.6f -> %.6f in %d iters (%s), max residual %.2e, final |grad|_W/|u|_W %.2e",
                t.records.front().report.total, t.last().report.total, t.last().iter,
                termination_name(t.termination), worst_res, gn);
  o.detail = buf;
  return o;
}

Outcome criterion8() {
  Outcome o;
  constexpr double kPublishedInit = 11.427, kPublishedFinal = 8.0619;
  bool any_match = false, all_improve = true;
  for (double wm : {4.0, 8.0, 16.0}) {
    for (std::size_t n : {512, 1024, 2048}) {
      auto g = make_grid(wm, n);
      const auto scan = optimize_initial_variance(g, 1.0, 0.25, 0.45 * wm, 16);
      const auto t = run_descent(scan.window, DescentOptions{});
      const double l0 = t.records.front().report.total, l1 = t.last().report.total;
      const double imp = (l0 - l1) / l0;
      const bool match = std::abs(l0 - kPublishedInit) <= 0.1 * kPublishedInit && std::abs(l1 - kPublishedFinal) <= 0.1 * kPublishedFinal;
      any_match = any_match || match;
      all_improve = all_improve && imp >= 0.25;
      note("omega_max=%-4g n=%-5zu init %.4f final %.4f improvement %.1f%% iters %d%s", wm, n, l0, l1, 100 * imp,
           t.last().iter, match ? " (matches published)" : "");
    }
  }
  o.pass = any_match && all_improve;
  o.detail = std::string("published values within 10%: ") + (any_match ? "yes" : "no") +
             ", improvement >= 25% everywhere: " + (all_improve ? "yes" : "no");
  return o;
}

Outcome criterion9() {
  Outcome o;
  auto g = default_grid();
  const auto u = optimal_gaussian(g).window;
  const double l0 = uncertainty(u).total;
  double ws = 0.0, wp = 0.0;
  for (double al : {1e-6, 0.01, 2.5, 1e5}) ws = std::max(ws, std::abs(uncertainty(cplx(al) * u).total - l0) / l0);
  for (double th : {0.1, 1.0, 2.0, 3.0, 6.0})
    wp = std::max(wp, std::abs(uncertainty(std::polar(1.0, th) * u).total - l0) / l0);
  o.pass = ws <= 1e-10 && wp <= 1e-10;

  bool real = true;
  for (int iters : {1, 2, 5, 10}) {
    DescentOptions d;
    d.max_iters = iters;
    real = real && run_descent(u, d).final_window.real_valued();
  }
  o.pass = o.pass && real;

  // group action on the four terms: ln spreads and the S time spread are central
  // moments; the dilation rescales both time terms by e^{2a}
  const auto raw = sample_truncated_gaussian(g, {1.4, 0.5});
  const double a = -expected_value(Observable::NegLnAbsOmega, raw, Space::S);
  const auto proj = enforce_constraints(raw, 1e-10);
  const auto r0 = uncertainty(raw), r1 = uncertainty(proj);
  auto dev = [](double x, double y) { return std::abs(x - y) / std::abs(y); };
  const double dev_scale = std::max(dev(r1.v_scale_S, r0.v_scale_S), dev(r1.v_scale_W, r0.v_scale_W));
  const double dev_time = std::max(dev(r1.v_time_S, std::exp(2 * a) * r0.v_time_S),
                                   dev(r1.v_time_W_factor, std::exp(2 * a) * r0.v_time_W_factor));
  const auto mod = apply_group_element(0.0, 0.7, 1, u);
  const auto rm = uncertainty(mod), ru = uncertainty(u);
  const double dev_mod =
      std::max({dev(rm.v_scale_S, ru.v_scale_S), dev(rm.v_scale_W, ru.v_scale_W), dev(rm.v_time_S, ru.v_time_S)});
  const double dev_fixed = std::abs(uncertainty(enforce_constraints(u)).total - l0) / l0;
  o.pass = o.pass && dev_scale <= 1e-3 && dev_time <= 1e-2 && dev_mod <= 1e-3 && dev_fixed <= 1e-6;
  note("projection of an off-center window (a=%.3f): scale spreads %.2e, time spreads vs e^{2a} law %.2e", a,
       dev_scale, dev_time);
  note("modulation b=0.7 (ln spreads, S time spread): %.2e; reprojecting a centered window: %.2e", dev_mod,
       dev_fixed);
  char buf[200];
  std::snprintf(buf, sizeof buf, "scaling %.1e, phase %.1e (<= 1e-10), real iterates %s, group checks %s", ws, wp,
                real ? "yes" : "no", (dev_scale <= 1e-3 && dev_time <= 1e-2 && dev_mod <= 1e-3) ? "ok" : "FAIL");
  o.detail = buf;
  return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> m = {
      {1, {"pull-back equivalence", criterion1}}, {2, {"term-wise pull-back", criterion2}},
      {3, {"pointwise identities", criterion3}},  {4, {"gradient correctness", criterion4}},
      {5, {"covariance laws", criterion5}},       {6, {"isometry", criterion6}},
      {7, {"descent behavior", criterion7}},      {8, {"published-value reproduction", criterion8}},
      {9, {"invariance suite", criterion9}},
  };
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criterion numbers to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (const auto& [k, _] : criteria()) which.push_back(k);

  int failed = 0;
  for (int c : which) {
    const auto& [name, fn] = criteria().at(c);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c, name, o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
