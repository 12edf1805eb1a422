#include "cwtloc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"
#include "cwtloc/variation.hpp"

namespace cwtloc {

double TruncatedGaussianParams::cutoff() const { return std::exp(-m * m / (2.0 * s * s)); }

GridFunction sample_truncated_gaussian(const GridPtr& grid, const TruncatedGaussianParams& p) {
  if (!(p.m > 0.0) || !(p.s > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncated Gaussian needs m > 0, s > 0");
  const double c0 = p.cutoff();
  GridFunction u(grid);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double w = (*grid)[k];
    if (w <= 0.0) continue;
    const double d = (w - p.m) / p.s;
    u[k] = std::max(0.0, std::exp(-0.5 * d * d) - c0);
  }
  return u;
}

namespace {

void normalize_S(GridFunction& u) {
  const double n = norm(u, Space::S);
  if (!(n > 0.0)) throw Error(ErrorCode::ZeroInput, "zero window");
  u *= 1.0 / n;
}

void check_support(const FrequencyGrid& g, const TruncatedGaussianParams& p) {
  // support is (0, 2m)
  if (2.0 * p.m >= g.omega_max())
    throw Error(ErrorCode::Domain, "truncated Gaussian support (0, " + std::to_string(2.0 * p.m) +
                                       ") escapes the grid");
}

}  // namespace

GridFunction init_truncated_gaussian(const GridPtr& grid, const TruncatedGaussianParams& p,
                                     TruncatedGaussianParams* effective) {
  check_support(*grid, p);
  TruncatedGaussianParams q = p;
  GridFunction u = sample_truncated_gaussian(grid, q);
  if (u.max_abs() == 0.0) throw Error(ErrorCode::Domain, "truncated Gaussian is not resolved by the grid");
  for (int it = 0; it < 30; ++it) {
    const double e = expected_value(Observable::LnAbsOmega, u, Space::S);
    if (std::abs(e) < 1e-14) break;
    // dilation by a = e maps (m, s) to (m, s) e^{-a}
    const double f = std::exp(-e);
    q.m *= f;
    q.s *= f;
    check_support(*grid, q);
    u = sample_truncated_gaussian(grid, q);
  }
  u = enforce_constraints(u, 1e-12, 3);
  normalize_S(u);
  if (effective) *effective = q;
  return u;
}

GridFunction enforce_constraints(const GridFunction& u0, double tol, int max_sweeps) {
  // Each sweep re-applies the accumulated (a, b) to u0, so interpolation does not compound.
  // After the first sweep the step uses the measured response of the residual (secant).
  double a = 0.0, b = 0.0;
  double a_prev = 0.0, b_prev = 0.0;
  double es_prev = 0.0, et_prev = 0.0;
  GridFunction u = u0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double es = expected_value(Observable::LnAbsOmega, u, Space::S);
    if (std::abs(es) >= tol) {
      double step = es;
      if (sweep > 0 && a != a_prev && es != es_prev) step = -es * (a - a_prev) / (es - es_prev);
      a_prev = a;
      es_prev = es;
      a += step;
      u = apply_group_element(a, 0.0, 1, u0);
      if (b != 0.0) u = apply_group_element(0.0, b, 1, u);
    }
    const double et = expected_value(Observable::TimeDeriv, u, Space::S);
    if (std::abs(es) < tol && std::abs(et) < tol) return u;
    if (std::abs(et) >= tol) {
      double step = -et;
      if (b != b_prev && et != et_prev) step = -et * (b - b_prev) / (et - et_prev);
      b_prev = b;
      et_prev = et;
      b += step;
      u = apply_group_element(0.0, b, 1, a != 0.0 ? apply_group_element(a, 0.0, 1, u0) : u0);
    }
  }
  const double es = expected_value(Observable::LnAbsOmega, u, Space::S);
  const double et = expected_value(Observable::TimeDeriv, u, Space::S);
  if (std::abs(es) < tol && std::abs(et) < tol) return u;
  char buf[160];
  std::snprintf(buf, sizeof buf, "constraint projection did not converge in %d sweeps (e_scale=%.3g, e_time=%.3g)",
                max_sweeps, es, et);
  throw Error(ErrorCode::Constraint, buf);
}

ScanResult optimize_initial_variance(const GridPtr& grid, double m, double s_min, double s_max, int n_probe) {
  if (!(s_min > 0.0) || !(s_max > s_min)) throw Error(ErrorCode::InvalidArgument, "s_range must be positive and increasing");
  if (n_probe < 8) throw Error(ErrorCode::InvalidArgument, "n_probe must be >= 8");
  if (!(m > 0.0)) throw Error(ErrorCode::InvalidArgument, "m must be positive");

  auto eval = [&](double s, ScanProbe& pr) {
    pr.s = s;
    try {
      const GridFunction u = init_truncated_gaussian(grid, {m, s}, &pr.effective);
      pr.report = uncertainty(u);
      pr.valid = std::isfinite(pr.report.total);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Domain && e.code() != ErrorCode::Constraint) throw;
      pr.valid = false;
    }
    return pr.valid ? pr.report.total : std::numeric_limits<double>::infinity();
  };

  ScanResult res;
  res.probes.resize(static_cast<std::size_t>(n_probe));
  const double l0 = std::log(s_min), l1 = std::log(s_max);
  std::size_t best = 0;
  for (int i = 0; i < n_probe; ++i) {
    const double s = std::exp(l0 + (l1 - l0) * i / (n_probe - 1));
    eval(s, res.probes[static_cast<std::size_t>(i)]);
    const auto& p = res.probes[static_cast<std::size_t>(i)];
    if (p.valid && (!res.probes[best].valid || p.report.total < res.probes[best].report.total))
      best = static_cast<std::size_t>(i);
  }
  if (!res.probes[best].valid) throw Error(ErrorCode::Domain, "no admissible truncated Gaussian in s_range");

  // unimodal: valid totals decrease then increase
  {
    int turns = 0;
    double prev = NAN;
    int dir = -1;
    for (const auto& p : res.probes) {
      if (!p.valid) continue;
      if (!std::isnan(prev)) {
        const int d = p.report.total < prev ? -1 : 1;
        if (d != dir) {
          ++turns;
          dir = d;
        }
      }
      prev = p.report.total;
    }
    res.unimodal = turns <= 1;
  }
  res.boundary_warning = best == 0 || best + 1 == res.probes.size();

  // golden section in log s on the bracket around the best probe
  const std::size_t lo = best == 0 ? 0 : best - 1;
  const std::size_t hi = std::min(best + 1, res.probes.size() - 1);
  double a = std::log(res.probes[lo].s), b = std::log(res.probes[hi].s);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  ScanProbe pc, pd;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = eval(std::exp(c), pc), fd = eval(std::exp(d), pd);
  for (int it = 0; it < 60 && (b - a) > 1e-9; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      pd = pc;
      c = b - g * (b - a);
      fc = eval(std::exp(c), pc);
    } else {
      a = c;
      c = d;
      fc = fd;
      pc = pd;
      d = a + g * (b - a);
      fd = eval(std::exp(d), pd);
    }
  }
  ScanProbe fin = fc < fd ? pc : pd;
  if (!fin.valid || res.probes[best].report.total < fin.report.total) fin = res.probes[best];
  res.params = {m, fin.s};
  res.window = init_truncated_gaussian(grid, res.params, &res.effective);
  res.report = uncertainty(res.window);
  return res;
}

const char* metric_name(DescentMetric m) { return m == DescentMetric::Sobolev ? "sobolev" : "w"; }

DescentMetric parse_metric(const std::string& name) {
  if (name == "sobolev") return DescentMetric::Sobolev;
  if (name == "w" || name == "W") return DescentMetric::W;
  throw Error(ErrorCode::Config, "unknown descent metric: " + name);
}

void DescentOptions::validate() const {
  if (max_iters < 0) throw Error(ErrorCode::Config, "descent.max_iters must be >= 0");
  if (!(step0 > 0.0)) throw Error(ErrorCode::Config, "descent.step0 must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw Error(ErrorCode::Config, "descent.backtrack_factor must lie in (0, 1)");
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::Config, "descent.grad_tol must be positive");
  if (!(constraint_tol > 0.0)) throw Error(ErrorCode::Config, "descent.constraint_tol must be positive");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::GradTol: return "grad_tol";
    case Termination::MaxIters: return "max_iters";
    case Termination::StepUnderflow: return "step_underflow";
  }
  return "?";
}

namespace {

double plain_re(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].real() * b[k].real() + a[k].imag() * b[k].imag();
  return s;
}

// Field in the metric of the tridiagonal operator A built from the stiffness
// of the time terms and the diagonal of the scale terms.
GridFunction sobolev_direction(const GridFunction& u) {
  const FrequencyGrid& g = u.grid();
  const std::size_t n = g.size();
  const double dw = g.step();
  const double ns = norm_sq(u, Space::S);
  const double nw = norm_sq(u, Space::W);
  const double ratio = norm_sq(apply_observable(Observable::InvOmega, u), Space::S) / ns;
  const double ew = expected_value(Observable::LnAbsOmega, u, Space::W);
  const double vwt = variance(Observable::OmegaDeriv, u, Space::W);

  Tridiagonal a = stiffness_matrix(g, Weight::One);
  const Tridiagonal kw = stiffness_matrix(g, Weight::AbsOmega);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::abs(g[k]);
    const double l = std::log(w);
    a.diag[k] = a.diag[k] / ns + ratio * kw.diag[k] / nw +
                2.0 * dw * (l * l / ns + (l - ew) * (l - ew) / (nw * w) + vwt / (ns * w * w) + 1.0 / ns);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    a.lower[k] = a.lower[k] / ns + ratio * kw.lower[k] / nw;
    a.upper[k] = a.lower[k];
  }

  auto to_plain = [&](const GridFunction& f) {
    std::vector<cplx> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = f[k] * (dw / std::abs(g[k]));
    return r;
  };
  const std::vector<cplx> gr = to_plain(unconstrained_variation(u));
  const ConstraintGradients c = constraint_gradients(u);
  const std::vector<cplx> c1 = to_plain(c.scale), c2 = to_plain(c.time);
  const std::vector<cplx> pg = solve_tridiagonal(a, gr);
  const std::vector<cplx> p1 = solve_tridiagonal(a, c1);
  const std::vector<cplx> p2 = solve_tridiagonal(a, c2);

  const double m11 = plain_re(c1, p1), m12 = plain_re(c1, p2), m22 = plain_re(c2, p2);
  const double r1 = plain_re(c1, pg), r2 = plain_re(c2, pg);
  double lambda, mu;
  if (u.real_valued() || m22 <= 0.0) {
    lambda = r1 / m11;
    mu = 0.0;
  } else {
    const double det = m11 * m22 - m12 * m12;
    if (!(det > 0.0)) throw Error(ErrorCode::Degenerate, "degenerate constraint Gram matrix in the Sobolev metric");
    lambda = (m22 * r1 - m12 * r2) / det;
    mu = (m11 * r2 - m12 * r1) / det;
  }
  GridFunction p(u.grid_ptr());
  for (std::size_t k = 0; k < n; ++k) p[k] = pg[k] - lambda * p1[k] - mu * p2[k];
  return p;
}

}  // namespace

GridFunction descent_direction(const GridFunction& u, DescentMetric metric) {
  if (metric == DescentMetric::W) return constrained_variation(u).field;
  return sobolev_direction(u);
}

DescentTrace run_descent(const GridFunction& u0, const DescentOptions& opts) {
  opts.validate();
  const DomainReport dom = check_domain(u0);
  if (!dom.ok()) throw Error(ErrorCode::Domain, "initial window fails domain check: " + dom.failures().front());
  GridFunction u = u0;
  normalize_S(u);
  UncertaintyReport rep = uncertainty(u);
  if (std::abs(rep.res_scale) > opts.constraint_tol || std::abs(rep.res_time) > opts.constraint_tol)
    throw Error(ErrorCode::Constraint, "initial window is off the constraint set");

  DescentTrace trace;
  trace.records.push_back({0, rep, 0.0, 0.0, 0.0, 0.0});
  const double min_step = opts.step0 * 1e-16;
  for (int iter = 0;; ++iter) {
    const VariationField vf = constrained_variation(u);
    DescentRecord& cur = trace.records.back();
    cur.lambda = vf.lambda;
    cur.mu = vf.mu;
    cur.field_norm = vf.relative_norm;
    if (vf.relative_norm < opts.grad_tol) {
      trace.termination = Termination::GradTol;
      break;
    }
    if (iter >= opts.max_iters) {
      trace.termination = Termination::MaxIters;
      break;
    }
    const GridFunction p = opts.metric == DescentMetric::W ? vf.field : sobolev_direction(u);
    bool accepted = false;
    for (double eta = opts.step0; eta >= min_step; eta *= opts.backtrack_factor) {
      GridFunction cand = u;
      for (std::size_t k = 0; k < cand.size(); ++k) cand[k] -= eta * p[k];
      try {
        normalize_S(cand);
        cand = enforce_constraints(cand, opts.constraint_tol, 3);
        normalize_S(cand);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Constraint || e.code() == ErrorCode::ZeroInput) continue;
        throw;
      }
      const UncertaintyReport cr = uncertainty(cand);
      if (cr.total < rep.total) {
        u = std::move(cand);
        rep = cr;
        trace.records.push_back({iter + 1, rep, 0.0, 0.0, eta, 0.0});
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace.termination = Termination::StepUnderflow;
      break;
    }
  }
  trace.final_window = u;
  return trace;
}

void write_trace_csv(const DescentTrace& t, std::ostream& os) {
  os << "iter,total,vS_scale,vW_scale,vS_time,vW_time_factor,lambda,mu,res_scale,res_time,step\n";
  char buf[512];
  for (const auto& r : t.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                  r.report.total, r.report.v_scale_S, r.report.v_scale_W, r.report.v_time_S,
                  r.report.v_time_W_factor, r.lambda, r.mu, r.report.res_scale, r.report.res_time, r.step);
    os << buf;
  }
}

void write_trace_csv(const DescentTrace& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  write_trace_csv(t, os);
}

}  // namespace cwtloc
