#include <cmath>
#include <sstream>

#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"
#include "cwtloc/optimizer.hpp"
#include "cwtloc/uncertainty.hpp"
#include "cwtloc/variation.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cwtloc;
using testutil::from;

TEST_CASE("truncated Gaussian sampling") {
  auto g = make_grid(8.0, 1024);
  TruncatedGaussianParams p{1.0, 0.5};
  CHECK(p.cutoff() == doctest::Approx(std::exp(-2.0)));
  auto raw = sample_truncated_gaussian(g, p);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double w = (*g)[k];
    const double want = w > 0 ? std::max(0.0, std::exp(-(w - 1) * (w - 1) / 0.5) - p.cutoff()) : 0.0;
    CHECK(raw[k].real() == doctest::Approx(want).epsilon(1e-14));
    CHECK(raw[k].imag() == 0.0);
  }
}

TEST_CASE("initializer is centered, real and admissible") {
  auto g = make_grid(8.0, 1024);
  TruncatedGaussianParams eff;
  auto u = init_truncated_gaussian(g, {1.0, 0.5}, &eff);
  CHECK(u.real_valued());
  for (std::size_t k = 0; k < g->size(); ++k) {
    CHECK(u[k].real() >= 0.0);
    if ((*g)[k] <= 0) CHECK(u[k] == cplx(0.0));
  }
  CHECK(std::abs(expected_value(Observable::LnAbsOmega, u, Space::S)) <= 1e-10);
  CHECK(norm(u, Space::S) == doctest::Approx(1.0));
  CHECK(check_domain(u).ok());
  CHECK(eff.s / eff.m == doctest::Approx(0.5));  // dilation keeps the shape

  CHECK_THROWS_AS(init_truncated_gaussian(g, {5.0, 0.5}), Error);
  CHECK_THROWS_AS(init_truncated_gaussian(g, {1.0, -0.5}), Error);
}

TEST_CASE("constraint enforcement") {
  auto g = make_grid(8.0, 1024);
  auto raw = sample_truncated_gaussian(g, {1.3, 0.45});
  auto tilt = raw + cplx(0, 0.2) * from(g, [](double w) { return cplx(testutil::bump(w, 0.2, 2.6) * (w - 1.0)); });
  for (const auto& u : {raw, tilt}) {
    auto p = enforce_constraints(u, 1e-10);
    auto r = uncertainty(p);
    CHECK(std::abs(r.res_scale) <= 1e-10);
    CHECK(std::abs(r.res_time) <= 1e-10);
  }
  // already centered: essentially unchanged, and L too
  auto c = init_truncated_gaussian(g, {1.0, 0.5});
  auto again = enforce_constraints(c);
  CHECK(norm(again - c, Space::S) <= 1e-6);
  CHECK(testutil::rel(uncertainty(again).total, uncertainty(c).total) <= 1e-6);
  CHECK_THROWS_AS(enforce_constraints(GridFunction(g)), Error);
}

TEST_CASE("initial variance scan") {
  auto g = make_grid(8.0, 1024);
  auto r = optimize_initial_variance(g, 1.0, 0.25, 2.0, 16);
  REQUIRE(r.probes.size() == 16);
  for (const auto& p : r.probes)
    if (p.valid) CHECK(r.report.total <= p.report.total);
  CHECK(r.unimodal);
  CHECK_FALSE(r.boundary_warning);
  CHECK(r.report.total == doctest::Approx(uncertainty(r.window).total));
  CHECK(r.params.s > 0.25);
  CHECK(r.params.s < 2.0);
  // log-spaced probes
  CHECK(r.probes[1].s / r.probes[0].s == doctest::Approx(r.probes[15].s / r.probes[14].s));

  auto edge = optimize_initial_variance(g, 1.0, 0.05, 0.15, 8);
  CHECK(edge.boundary_warning);
  CHECK_THROWS_AS(optimize_initial_variance(g, 1.0, 0.2, 2.0, 4), Error);
  CHECK_THROWS_AS(optimize_initial_variance(g, 1.0, 2.0, 0.2, 8), Error);
}

TEST_CASE("descent options validation") {
  DescentOptions o;
  CHECK_NOTHROW(o.validate());
  o.backtrack_factor = 1.0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = DescentOptions{};
  o.step0 = 0.0;
  CHECK_THROWS_AS(o.validate(), Error);
  CHECK(parse_metric("sobolev") == DescentMetric::Sobolev);
  CHECK(parse_metric("w") == DescentMetric::W);
  CHECK_THROWS_AS(parse_metric("l2"), Error);
}

TEST_CASE("descent from an off-constraint window is refused") {
  auto g = make_grid(8.0, 512);
  auto raw = sample_truncated_gaussian(g, {1.5, 0.5});
  CHECK_THROWS_AS(run_descent(raw, {}), Error);
  try {
    run_descent(raw, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Constraint);
  }
}

TEST_CASE("descent trace") {
  auto g = make_grid(8.0, 512);
  auto u0 = init_truncated_gaussian(g, {1.0, 0.7});
  auto t = run_descent(u0, {});
  REQUIRE(t.records.size() >= 2);
  CHECK(t.records.front().iter == 0);
  CHECK(t.termination == Termination::GradTol);
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    CHECK(t.records[i].report.total < t.records[i - 1].report.total);
    CHECK(t.records[i].iter == static_cast<int>(i));
  }
  for (const auto& r : t.records) {
    CHECK(std::abs(r.report.res_scale) <= 1e-9);
    CHECK(std::abs(r.report.res_time) <= 1e-9);
  }
  CHECK(t.last().field_norm < 1e-5);
  CHECK(t.final_window.real_valued());
  CHECK(constrained_variation(t.final_window).relative_norm < 1e-5);

  std::stringstream ss;
  write_trace_csv(t, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "iter,total,vS_scale,vW_scale,vS_time,vW_time_factor,lambda,mu,res_scale,res_time,step");
}

TEST_CASE("plain W metric also descends") {
  auto g = make_grid(8.0, 256);
  auto u0 = init_truncated_gaussian(g, {1.0, 0.7});
  DescentOptions o;
  o.metric = DescentMetric::W;
  o.step0 = 0.1;
  o.max_iters = 30;
  auto t = run_descent(u0, o);
  CHECK(t.last().report.total < t.records.front().report.total);
  for (std::size_t i = 1; i < t.records.size(); ++i) CHECK(t.records[i].report.total < t.records[i - 1].report.total);
}

TEST_CASE("max_iters terminates") {
  auto g = make_grid(8.0, 256);
  DescentOptions o;
  o.max_iters = 3;
  auto t = run_descent(init_truncated_gaussian(g, {1.0, 0.7}), o);
  CHECK(t.termination == Termination::MaxIters);
  CHECK(t.last().iter == 3);
}
