#include "cwtloc/variation.hpp"

#include <cmath>
#include <fstream>

#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"
#include "cwtloc/uncertainty.hpp"

namespace cwtloc {

namespace {

const cplx I(0.0, 1.0);

void require_nonzero(const GridFunction& u) {
  if (u.empty() || u.max_abs() == 0.0) throw Error(ErrorCode::ZeroInput, "zero window");
}

double re_ip(const GridFunction& u, const GridFunction& v, Space s) { return inner_product(u, v, s).real(); }

// i (D - D^T) u / 2, the symmetric part of i D
GridFunction sym_time_deriv(const GridFunction& u) {
  GridFunction r = derivative(u);
  r -= derivative_transpose(u);
  r *= 0.5 * I;
  return r;
}

}  // namespace

GridFunction variation_scale_term(const GridFunction& u) {
  require_nonzero(u);
  const double ns = norm_sq(u, Space::S);
  const double nw = norm_sq(u, Space::W);
  const double vs = variance(Observable::LnAbsOmega, u, Space::S);
  const double ew = expected_value(Observable::LnAbsOmega, u, Space::W);
  const double vw = variance(Observable::LnAbsOmega, u, Space::W);
  return multiply_pointwise(u, [&](double w) {
    const double a = std::abs(w);
    const double l = std::log(a);
    return 2.0 * a * (l * l - vs) / ns + 2.0 * ((l - ew) * (l - ew) - vw) / nw;
  });
}

GridFunction variation_time_term(const GridFunction& u) {
  require_nonzero(u);
  const FrequencyGrid& g = u.grid();
  const double dw = g.step();
  const double ns = norm_sq(u, Space::S);
  const double nw = norm_sq(u, Space::W);
  const double vst = variance(Observable::TimeDeriv, u, Space::S);
  const double vwt = variance(Observable::OmegaDeriv, u, Space::W);
  const double ratio = norm_sq(apply_observable(Observable::InvOmega, u), Space::S) / ns;
  // K u / dw approximates -u'' (resp. -(|w| u')'), K the stiffness matrix
  const GridFunction ks = derivative_energy_gradient(u, Weight::One);
  const GridFunction kw = derivative_energy_gradient(u, Weight::AbsOmega);
  GridFunction r(u.grid_ptr());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double a = std::abs(g[k]);
    r[k] = 2.0 * a * (ks[k] / (2.0 * dw) - vst * u[k]) / ns +
           2.0 * (a * kw[k] / (2.0 * dw) - vwt * u[k]) * ratio / nw +
           2.0 * vwt * (u[k] / a - a * ratio * u[k]) / ns;
  }
  return r;
}

GridFunction unconstrained_variation(const GridFunction& u) {
  return variation_scale_term(u) + variation_time_term(u);
}

ConstraintGradients constraint_gradients(const GridFunction& u) {
  require_nonzero(u);
  const double es = expected_value(Observable::LnAbsOmega, u, Space::S);
  const double et = expected_value(Observable::TimeDeriv, u, Space::S);
  ConstraintGradients c;
  c.scale = multiply_pointwise(u, [&](double w) { return std::abs(w) * (std::log(std::abs(w)) - es); });
  GridFunction t = sym_time_deriv(u);
  t -= et * u;
  c.time = multiply_pointwise(t, [](double w) { return std::abs(w); });
  return c;
}

VariationField unconstrained_field(const GridFunction& u) {
  VariationField v;
  v.field = unconstrained_variation(u);
  v.res_scale = expected_value(Observable::LnAbsOmega, u, Space::S);
  v.res_time = expected_value(Observable::TimeDeriv, u, Space::S);
  v.relative_norm = norm(v.field, Space::W) / norm(u, Space::W);
  return v;
}

VariationField constrained_variation(const GridFunction& u, bool allow_degenerate) {
  VariationField v = unconstrained_field(u);
  v.constrained = true;
  const ConstraintGradients c = constraint_gradients(u);
  const double g11 = re_ip(c.scale, c.scale, Space::W);
  const double g12 = re_ip(c.scale, c.time, Space::W);
  const double g22 = re_ip(c.time, c.time, Space::W);
  const double r1 = re_ip(v.field, c.scale, Space::W);
  const double r2 = re_ip(v.field, c.time, Space::W);

  // eigenvalues of the symmetric Gram matrix
  const double tr = 0.5 * (g11 + g22);
  const double disc = std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + g12 * g12);
  const double emax = tr + disc;
  const double emin = tr - disc;
  v.gram_condition = emin > 0.0 ? emax / emin : INFINITY;
  v.degenerate = !(v.gram_condition <= kMaxGramCondition);

  double lambda = 0.0, mu = 0.0;
  if (!v.degenerate) {
    const double det = g11 * g22 - g12 * g12;
    lambda = (g22 * r1 - g12 * r2) / det;
    mu = (g11 * r2 - g12 * r1) / det;
  } else {
    if (!allow_degenerate)
      throw Error(ErrorCode::Degenerate, "constraint gradients are numerically co-linear (Gram condition " +
                                             std::to_string(v.gram_condition) + ")");
    // minimum-norm least squares on the dominant eigenvector
    if (emax > 0.0) {
      double e1 = g12, e2 = emax - g11;
      if (std::abs(e1) + std::abs(e2) == 0.0) {
        e1 = g11 >= g22 ? 1.0 : 0.0;
        e2 = 1.0 - e1;
      }
      const double len = std::hypot(e1, e2);
      e1 /= len;
      e2 /= len;
      const double coef = (e1 * r1 + e2 * r2) / emax;
      lambda = coef * e1;
      mu = coef * e2;
    }
  }
  v.mu_general = mu;
  if (u.real_valued() && !v.degenerate) {
    // real windows: the time gradient is imaginary, so mu vanishes
    lambda = r1 / g11;
    mu = 0.0;
  }
  v.lambda = lambda;
  v.mu = mu;
  v.field -= lambda * c.scale;
  v.field -= mu * c.time;
  v.relative_norm = norm(v.field, Space::W) / norm(u, Space::W);
  return v;
}

const char* functional_name(Functional f) {
  switch (f) {
    case Functional::L: return "L";
    case Functional::vA: return "vA";
    case Functional::vB: return "vB";
    case Functional::eLn: return "eLn";
    case Functional::eTime: return "eTime";
  }
  return "?";
}

Functional parse_functional(const std::string& name) {
  for (Functional f : {Functional::L, Functional::vA, Functional::vB, Functional::eLn, Functional::eTime})
    if (name == functional_name(f)) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown functional tag: " + name);
}

double evaluate_functional(Functional f, const GridFunction& u) {
  switch (f) {
    case Functional::L: return uncertainty(u).total;
    case Functional::vA: return uncertainty(u).scale_part();
    case Functional::vB: return uncertainty(u).time_part();
    case Functional::eLn: return expected_value(Observable::LnAbsOmega, u, Space::S);
    case Functional::eTime: return expected_value(Observable::TimeDeriv, u, Space::S);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown functional");
}

double analytic_gateaux(Functional f, const GridFunction& u, const GridFunction& h) {
  require_same_grid(u, h);
  switch (f) {
    case Functional::L: return re_ip(unconstrained_variation(u), h, Space::W);
    case Functional::vA: return re_ip(variation_scale_term(u), h, Space::W);
    case Functional::vB: return re_ip(variation_time_term(u), h, Space::W);
    case Functional::eLn: {
      const double ns = norm_sq(u, Space::S);
      const double e = expected_value(Observable::LnAbsOmega, u, Space::S);
      GridFunction g = multiply_pointwise(u, [](double w) { return 2.0 * std::log(std::abs(w)); });
      g -= (2.0 * e) * u;
      return re_ip(g, h, Space::S) / ns;
    }
    case Functional::eTime: {
      const double ns = norm_sq(u, Space::S);
      const double e = expected_value(Observable::TimeDeriv, u, Space::S);
      GridFunction g = sym_time_deriv(u);
      g -= e * u;
      return 2.0 * re_ip(g, h, Space::S) / ns;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown functional");
}

double finite_difference_gateaux(Functional f, const GridFunction& u, const GridFunction& h, double eps) {
  require_same_grid(u, h);
  require_nonzero(u);
  if (eps <= 0.0) {
    const double nh = norm(h, Space::S);
    if (nh == 0.0) return 0.0;
    eps = 1e-5 * norm(u, Space::S) / nh;
  }
  GridFunction up = u, um = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    up[k] += eps * h[k];
    um[k] -= eps * h[k];
  }
  return (evaluate_functional(f, up) - evaluate_functional(f, um)) / (2.0 * eps);
}

void to_json(nlohmann::json& j, const VariationField& v) {
  j = nlohmann::json{{"lambda", v.lambda},
                     {"mu", v.mu},
                     {"mu_general", v.mu_general},
                     {"constrained", v.constrained},
                     {"gram_condition", v.gram_condition},
                     {"degenerate", v.degenerate},
                     {"relative_norm", v.relative_norm},
                     {"residuals", {{"scale", v.res_scale}, {"time", v.res_time}}}};
}

void write_variation(const VariationField& v, const std::string& csv_path, const std::string& json_path) {
  write_csv(v.field, csv_path);
  std::ofstream os(json_path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + json_path);
  nlohmann::json j = v;
  os << j.dump(2) << "\n";
}

}  // namespace cwtloc
