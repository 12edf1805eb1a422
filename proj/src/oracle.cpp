#include "cwtloc/oracle.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <thread>

#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"

namespace cwtloc {

void PhaseSpaceGrid::validate() const {
  if (!(a_max > 0.0) || !(b_max > 0.0) || n_a < 1 || n_b < 1)
    throw Error(ErrorCode::InvalidArgument, "phase-space grid needs positive extents and sizes");
}

double PhaseSpaceGrid::haar(int j) const { return std::exp(-a(j)) * da() * db() / (2.0 * std::numbers::pi); }

namespace {

// Sampled integrand of <signal, pi(a, b, c) window>_S as sum_k p_k e^{i b x_k} dw.
// For a > 0 the window would be squeezed below the grid spacing, so the sum
// runs over the window samples instead (x = c e^a w) with the signal stretched.
void integrand(const GridFunction& window, const GridFunction& signal, double a, int c, std::vector<double>& x,
               std::vector<cplx>& p) {
  const FrequencyGrid& g = signal.grid();
  x.clear();
  p.clear();
  if (a <= 0.0) {
    const double ea = std::exp(a), amp = std::exp(0.5 * a);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (signal[k] == 0.0) continue;
      const cplx fk = amp * interpolate(window, c * ea * g[k]);
      if (fk == 0.0) continue;
      x.push_back(g[k]);
      p.push_back(signal[k] * std::conj(fk));
    }
  } else {
    const double ea = std::exp(-a), amp = std::exp(-0.5 * a);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (window[k] == 0.0) continue;
      const double y = c * ea * g[k];
      const cplx sk = amp * interpolate(signal, y);
      if (sk == 0.0) continue;
      x.push_back(y);
      p.push_back(sk * std::conj(window[k]));
    }
  }
}

}  // namespace

cplx cwt_point(const GridFunction& window, const GridFunction& signal, double a, double b, int c) {
  require_same_grid(window, signal);
  if (c != 1 && c != -1) throw Error(ErrorCode::InvalidArgument, "reflection c must be +1 or -1");
  std::vector<double> x;
  std::vector<cplx> p;
  integrand(window, signal, a, c, x, p);
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc += p[k] * std::polar(1.0, b * x[k]);
  return acc * signal.grid().step();
}

namespace {

struct Normalized {
  GridFunction s;  // u / |u|_S
  GridFunction f;  // u / |u|_W
};

Normalized normalized(const GridFunction& u) {
  const double ns = norm(u, Space::S);
  const double nw = norm(u, Space::W);
  if (!(ns > 0.0)) throw Error(ErrorCode::ZeroInput, "zero window");
  return {(1.0 / ns) * u, (1.0 / nw) * u};
}

// One (c, a) row of the field.
void field_row(const Normalized& nf, const PhaseSpaceGrid& ps, int c, int j, cplx* out) {
  const double dw = nf.s.grid().step();
  std::vector<double> w;
  std::vector<cplx> p;
  integrand(nf.f, nf.s, ps.a(j), c, w, p);
  const double db = ps.db();
  std::vector<cplx> z(p.size()), rot(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) rot[k] = std::polar(1.0, db * w[k]);
  for (int i = 0; i < ps.n_b; ++i) {
    if (i % 32 == 0) {
      const double b = ps.b(i);
      for (std::size_t k = 0; k < p.size(); ++k) z[k] = p[k] * std::polar(1.0, b * w[k]);
    }
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += z[k];
      z[k] *= rot[k];
    }
    out[i] = acc * dw;
  }
}

}  // namespace

AmbiguityField ambiguity_field(const GridFunction& u, const PhaseSpaceGrid& ps, int threads) {
  ps.validate();
  const Normalized nf = normalized(u);
  AmbiguityField k;
  k.ps = ps;
  k.values.assign(static_cast<std::size_t>(2) * ps.n_a * ps.n_b, cplx(0.0, 0.0));
  const int rows = 2 * ps.n_a;
  auto run_row = [&](int r) {
    const int ci = r / ps.n_a, j = r % ps.n_a;
    field_row(nf, ps, ci == 0 ? 1 : -1, j, &k.values[static_cast<std::size_t>(r) * ps.n_b]);
  };
  if (threads <= 1) {
    for (int r = 0; r < rows; ++r) run_row(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int r = next++; r < rows; r = next++) run_row(r);
      });
    for (auto& th : pool) th.join();
  }
  double mass = 0.0;
  for (int r = 0; r < rows; ++r) {
    const double h = ps.haar(r % ps.n_a);
    for (int i = 0; i < ps.n_b; ++i) mass += std::norm(k.values[static_cast<std::size_t>(r) * ps.n_b + i]) * h;
  }
  k.mass = mass;
  return k;
}

PhaseMoments phase_moments(const AmbiguityField& k, double min_mass) {
  const PhaseSpaceGrid& ps = k.ps;
  PhaseMoments m;
  m.mass = k.mass;
  if (!(k.mass > min_mass)) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "ambiguity mass %.4f below %.2f; enlarge the phase-space grid (a_max, b_max)", k.mass, min_mass);
    throw Error(ErrorCode::Truncation, buf);
  }
  std::vector<double> pa(static_cast<std::size_t>(ps.n_a), 0.0), pb(static_cast<std::size_t>(ps.n_b), 0.0);
  for (int ci = 0; ci < 2; ++ci)
    for (int j = 0; j < ps.n_a; ++j) {
      const double h = ps.haar(j);
      for (int i = 0; i < ps.n_b; ++i) {
        const double q = std::norm(k.values[(static_cast<std::size_t>(ci) * ps.n_a + j) * ps.n_b + i]) * h / k.mass;
        pa[static_cast<std::size_t>(j)] += q;
        pb[static_cast<std::size_t>(i)] += q;
      }
    }
  for (int j = 0; j < ps.n_a; ++j) m.e_A += ps.a(j) * pa[static_cast<std::size_t>(j)];
  for (int i = 0; i < ps.n_b; ++i) m.e_B += ps.b(i) * pb[static_cast<std::size_t>(i)];
  for (int j = 0; j < ps.n_a; ++j) m.v_A += (ps.a(j) - m.e_A) * (ps.a(j) - m.e_A) * pa[static_cast<std::size_t>(j)];
  for (int i = 0; i < ps.n_b; ++i) m.v_B += (ps.b(i) - m.e_B) * (ps.b(i) - m.e_B) * pb[static_cast<std::size_t>(i)];
  // |K|^2 ~ x^-4 beyond the edge: lost second moment per side = density * edge^3
  const double dens_a = (pa.front() + pa.back()) / ps.da();
  const double dens_b = (pb.front() + pb.back()) / ps.db();
  m.tail_A = dens_a * ps.a_max * ps.a_max * ps.a_max;
  m.tail_B = dens_b * ps.b_max * ps.b_max * ps.b_max;
  return m;
}

ConsistencyReport pullback_consistency(const GridFunction& u, const PhaseSpaceGrid& ps, int threads) {
  return pullback_consistency(u, ambiguity_field(u, ps, threads));
}

ConsistencyReport pullback_consistency(const GridFunction& u, const AmbiguityField& field) {
  const DomainReport dom = check_domain(u);
  if (!dom.ok()) throw Error(ErrorCode::Domain, "window fails domain check: " + dom.failures().front());
  ConsistencyReport r;
  r.report = uncertainty(u);
  if (std::abs(r.report.res_scale) > 1e-8 || std::abs(r.report.res_time) > 1e-8)
    throw Error(ErrorCode::Constraint, "pull-back comparison needs constraint residuals <= 1e-8");
  r.moments = phase_moments(field);
  r.pull_A = r.report.scale_part();
  r.pull_B = r.report.time_part();
  r.oracle_total = r.moments.v_A + r.moments.v_B;
  r.gap_A = r.pull_A - r.moments.v_A;
  r.gap_B = r.pull_B - r.moments.v_B;
  r.gap_total = r.report.total - r.oracle_total;
  r.rel_gap_A = std::abs(r.gap_A) / r.moments.v_A;
  r.rel_gap_B = std::abs(r.gap_B) / r.moments.v_B;
  r.rel_gap_total = std::abs(r.gap_total) / r.oracle_total;
  r.truncation_allowance = r.moments.tail_A + r.moments.tail_B;
  r.e_A_pullback = -expected_value(Observable::LnAbsOmega, u, Space::S) +
                   expected_value(Observable::LnAbsOmega, u, Space::W);
  return r;
}

IdentitySample scale_identity(const GridFunction& u, double a, double b, int c) {
  const Normalized nf = normalized(u);
  const cplx k = cwt_point(nf.f, nf.s, a, b, c);
  const GridFunction s_ln = apply_observable(Observable::NegLnAbsOmega, nf.s);
  const GridFunction f_ln = apply_observable(Observable::LnAbsOmega, nf.f);
  return {a * k, cwt_point(nf.f, s_ln, a, b, c) + cwt_point(f_ln, nf.s, a, b, c)};
}

IdentitySample time_identity(const GridFunction& u, double a, double b, int c) {
  const Normalized nf = normalized(u);
  const cplx k = cwt_point(nf.f, nf.s, a, b, c);
  const GridFunction s_t = apply_observable(Observable::TimeDeriv, nf.s);
  const GridFunction f_t = apply_observable(Observable::OmegaDeriv, nf.f);
  const GridFunction s_inv = apply_observable(Observable::InvOmega, nf.s);
  return {b * k, cwt_point(nf.f, s_t, a, b, c) - cwt_point(f_t, s_inv, a, b, c)};
}

void to_json(nlohmann::json& j, const PhaseMoments& m) {
  j = nlohmann::json{{"mass", m.mass}, {"e_A", m.e_A}, {"v_A", m.v_A}, {"e_B", m.e_B},
                     {"v_B", m.v_B},   {"tail_A", m.tail_A}, {"tail_B", m.tail_B}};
}

void to_json(nlohmann::json& j, const ConsistencyReport& r) {
  j = nlohmann::json{{"mass", r.moments.mass},
                     {"oracle", r.moments},
                     {"uncertainty", r.report},
                     {"v_A", r.moments.v_A},
                     {"v_B", r.moments.v_B},
                     {"pullback_A", r.pull_A},
                     {"pullback_B", r.pull_B},
                     {"oracle_total", r.oracle_total},
                     {"pullback_total", r.report.total},
                     {"gap_A", r.gap_A},
                     {"gap_B", r.gap_B},
                     {"gap_total", r.gap_total},
                     {"rel_gap_A", r.rel_gap_A},
                     {"rel_gap_B", r.rel_gap_B},
                     {"rel_gap_total", r.rel_gap_total},
                     {"truncation_allowance", r.truncation_allowance},
                     {"e_A_pullback", r.e_A_pullback}};
}

void write_field_csv(const AmbiguityField& k, std::ostream& os) {
  const PhaseSpaceGrid& ps = k.ps;
  os << "a,b,c,absK,re,im\n";
  char buf[160];
  for (int ci = 0; ci < 2; ++ci)
    for (int j = 0; j < ps.n_a; ++j)
      for (int i = 0; i < ps.n_b; ++i) {
        const cplx v = k.values[(static_cast<std::size_t>(ci) * ps.n_a + j) * ps.n_b + i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", ps.a(j), ps.b(i), ci == 0 ? 1 : -1,
                      std::abs(v), v.real(), v.imag());
        os << buf;
      }
}

void write_weighted_field_csv(const AmbiguityField& k, double e_B, std::ostream& os) {
  const PhaseSpaceGrid& ps = k.ps;
  os << "a,b,c,weighted\n";
  char buf[128];
  for (int ci = 0; ci < 2; ++ci)
    for (int j = 0; j < ps.n_a; ++j)
      for (int i = 0; i < ps.n_b; ++i) {
        const cplx v = k.values[(static_cast<std::size_t>(ci) * ps.n_a + j) * ps.n_b + i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", ps.a(j), ps.b(i), ci == 0 ? 1 : -1,
                      std::abs((ps.b(i) - e_B) * v));
        os << buf;
      }
}

void write_field(const AmbiguityField& k, const PhaseMoments& m, const std::string& base) {
  auto open = [](const std::string& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + p);
    return os;
  };
  {
    auto os = open(base + ".csv");
    write_field_csv(k, os);
  }
  {
    auto os = open(base + "_weighted.csv");
    write_weighted_field_csv(k, m.e_B, os);
  }
  {
    auto os = open(base + ".json");
    nlohmann::json j{{"mass", m.mass}, {"e_A", m.e_A}, {"v_A", m.v_A}, {"e_B", m.e_B}, {"v_B", m.v_B}};
    os << j.dump(2) << "\n";
  }
}

}  // namespace cwtloc
