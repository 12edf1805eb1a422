#include "cwtloc/uncertainty.hpp"

#include <cmath>

#include "cwtloc/error.hpp"
#include "cwtloc/observables.hpp"

namespace cwtloc {

UncertaintyReport uncertainty(const GridFunction& u) {
  if (u.empty() || u.max_abs() == 0.0) throw Error(ErrorCode::ZeroInput, "zero window");
  UncertaintyReport r;
  r.v_scale_S = variance(Observable::LnAbsOmega, u, Space::S);
  r.v_scale_W = variance(Observable::LnAbsOmega, u, Space::W);
  r.v_time_S = variance(Observable::TimeDeriv, u, Space::S);
  const double ratio = norm_sq(apply_observable(Observable::InvOmega, u), Space::S) / norm_sq(u, Space::S);
  r.v_time_W_factor = variance(Observable::OmegaDeriv, u, Space::W) * ratio;
  r.total = r.v_scale_S + r.v_scale_W + r.v_time_S + r.v_time_W_factor;
  r.res_scale = expected_value(Observable::LnAbsOmega, u, Space::S);
  r.res_time = expected_value(Observable::TimeDeriv, u, Space::S);
  return r;
}

void to_json(nlohmann::json& j, const UncertaintyReport& r) {
  j = nlohmann::json{{"v_scale_S", r.v_scale_S},
                     {"v_scale_W", r.v_scale_W},
                     {"v_time_S", r.v_time_S},
                     {"v_time_W_factor", r.v_time_W_factor},
                     {"total", r.total},
                     {"res_scale", r.res_scale},
                     {"res_time", r.res_time}};
}

DomainReport check_domain(const GridFunction& u, double threshold) {
  DomainReport d;
  d.threshold = threshold;
  d.norm_S = norm(u, Space::S);
  d.nonzero_norm = d.norm_S > 0.0;
  d.ln_weighted_norm = norm(apply_observable(Observable::LnAbsOmega, u), Space::S);
  d.inv_omega_norm = norm(apply_observable(Observable::InvOmega, u), Space::S);
  d.derivative_S_norm = std::sqrt(derivative_energy(u, Weight::One));
  d.derivative_W_norm = std::sqrt(derivative_energy(u, Weight::AbsOmega));
  const GridFunction d2 = derivative(derivative(u));
  d.second_derivative_S_norm = norm(d2, Space::S);
  d.second_derivative_W_norm = norm(multiply_pointwise(d2, [](double w) { return w; }), Space::W);
  const double lim = threshold * d.norm_S;
  d.ln_weighted = d.ln_weighted_norm <= lim;
  d.inv_omega = d.inv_omega_norm <= lim;
  d.derivative_S = d.derivative_S_norm <= lim;
  d.derivative_W = d.derivative_W_norm <= lim;
  d.second_derivative_S = d.second_derivative_S_norm <= lim;
  d.second_derivative_W = d.second_derivative_W_norm <= lim;
  return d;
}

bool DomainReport::ok() const { return failures().empty(); }

std::vector<std::string> DomainReport::failures() const {
  std::vector<std::string> f;
  if (!nonzero_norm) f.emplace_back("nonzero_norm");
  if (!ln_weighted) f.emplace_back("ln_weighted");
  if (!inv_omega) f.emplace_back("inv_omega");
  if (!derivative_S) f.emplace_back("derivative_S");
  if (!derivative_W) f.emplace_back("derivative_W");
  if (!second_derivative_S) f.emplace_back("second_derivative_S");
  if (!second_derivative_W) f.emplace_back("second_derivative_W");
  return f;
}

void to_json(nlohmann::json& j, const DomainReport& r) {
  j = nlohmann::json{{"threshold", r.threshold},
                     {"norm_S", r.norm_S},
                     {"ln_weighted", {{"ok", r.ln_weighted}, {"value", r.ln_weighted_norm}}},
                     {"inv_omega", {{"ok", r.inv_omega}, {"value", r.inv_omega_norm}}},
                     {"derivative_S", {{"ok", r.derivative_S}, {"value", r.derivative_S_norm}}},
                     {"derivative_W", {{"ok", r.derivative_W}, {"value", r.derivative_W_norm}}},
                     {"second_derivative_S",
                      {{"ok", r.second_derivative_S}, {"value", r.second_derivative_S_norm}}},
                     {"second_derivative_W",
                      {{"ok", r.second_derivative_W}, {"value", r.second_derivative_W_norm}}},
                     {"nonzero_norm", r.nonzero_norm}};
}

}  // namespace cwtloc
