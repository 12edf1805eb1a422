#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cwtloc/grid.hpp"
#include "cwtloc/uncertainty.hpp"
#include "json.hpp"

namespace cwtloc {

// Cell-centered (a, b) samples on [-a_max, a_max] x [-b_max, b_max], both c.
// Cell weight e^{-a} da db / (2 pi).
struct PhaseSpaceGrid {
  double a_max = 4.0;
  double b_max = 120.0;
  int n_a = 128;
  int n_b = 1024;

  void validate() const;
  double da() const { return 2.0 * a_max / n_a; }
  double db() const { return 2.0 * b_max / n_b; }
  double a(int j) const { return -a_max + (j + 0.5) * da(); }
  double b(int i) const { return -b_max + (i + 0.5) * db(); }
  double haar(int j) const;
};

struct AmbiguityField {
  PhaseSpaceGrid ps;
  std::vector<cplx> values;  // [(ci * n_a + j) * n_b + i], ci = 0 for c = +1
  double mass = 0.0;

  static int branch_index(int c) { return c == 1 ? 0 : 1; }
  cplx at(int c, int j, int i) const {
    return values[(static_cast<std::size_t>(branch_index(c)) * ps.n_a + j) * ps.n_b + i];
  }
};

// <signal, pi(a, b, c) window>_S
cplx cwt_point(const GridFunction& window, const GridFunction& signal, double a, double b, int c);

// K = V_{u/|u|_W}(u/|u|_S) on every cell; threads <= 1 runs inline.
AmbiguityField ambiguity_field(const GridFunction& u, const PhaseSpaceGrid& ps, int threads = 1);

struct PhaseMoments {
  double mass = 0.0;
  double e_A = 0.0, v_A = 0.0;
  double e_B = 0.0, v_B = 0.0;
  // tail estimates of the second moments lost beyond the grid edges
  double tail_A = 0.0, tail_B = 0.0;
};

constexpr double kMinOracleMass = 0.9;

PhaseMoments phase_moments(const AmbiguityField& k, double min_mass = kMinOracleMass);

struct ConsistencyReport {
  PhaseMoments moments;
  UncertaintyReport report;
  double pull_A = 0.0;      // v_scale_S + v_scale_W
  double pull_B = 0.0;      // v_time_S + v_time_W_factor
  double oracle_total = 0.0;
  double gap_A = 0.0, gap_B = 0.0, gap_total = 0.0;
  double rel_gap_A = 0.0, rel_gap_B = 0.0, rel_gap_total = 0.0;
  double truncation_allowance = 0.0;
  double e_A_pullback = 0.0;  // -e^S(ln|w|)(s) + e^W(ln|w'|)(f)
};

ConsistencyReport pullback_consistency(const GridFunction& u, const PhaseSpaceGrid& ps, int threads = 1);
// Same, reusing a field already computed for u.
ConsistencyReport pullback_consistency(const GridFunction& u, const AmbiguityField& field);

// Pointwise identities at one phase-space point; lhs and rhs should agree.
struct IdentitySample {
  cplx lhs;
  cplx rhs;
};
// a K = V_f(-ln|w| s) + V_{ln|w'| f}(s)
IdentitySample scale_identity(const GridFunction& u, double a, double b, int c);
// b K = V_f(i d/dw s) - V_{i w' d/dw' f}(s / w)
IdentitySample time_identity(const GridFunction& u, double a, double b, int c);

void to_json(nlohmann::json& j, const PhaseMoments& m);
void to_json(nlohmann::json& j, const ConsistencyReport& r);

// CSV `a,b,c,absK,re,im`
void write_field_csv(const AmbiguityField& k, std::ostream& os);
// CSV `a,b,c,weighted` with |(b - e_B) K|
void write_weighted_field_csv(const AmbiguityField& k, double e_B, std::ostream& os);
void write_field(const AmbiguityField& k, const PhaseMoments& m, const std::string& base_path);

}  // namespace cwtloc
