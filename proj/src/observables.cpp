#include "cwtloc/observables.hpp"

#include <cmath>

#include "cwtloc/error.hpp"

namespace cwtloc {

namespace {

const cplx I(0.0, 1.0);

void require_nonzero(const GridFunction& u) {
  if (u.empty() || u.max_abs() == 0.0) throw Error(ErrorCode::ZeroInput, "zero window");
}

Weight energy_weight(Observable obs, Space space) {
  if (obs == Observable::TimeDeriv) return space == Space::S ? Weight::One : Weight::InvAbsOmega;
  return space == Space::S ? Weight::OmegaSq : Weight::AbsOmega;
}

}  // namespace

GridFunction apply_observable(Observable obs, const GridFunction& u) {
  switch (obs) {
    case Observable::LnAbsOmega:
      return multiply_pointwise(u, [](double w) { return std::log(std::abs(w)); });
    case Observable::NegLnAbsOmega:
      return multiply_pointwise(u, [](double w) { return -std::log(std::abs(w)); });
    case Observable::InvOmega:
      return multiply_pointwise(u, [](double w) { return 1.0 / w; });
    case Observable::TimeDeriv:
      return I * derivative(u);
    case Observable::OmegaDeriv:
      return multiply_pointwise(I * derivative(u), [](double w) { return w; });
  }
  throw Error(ErrorCode::InvalidArgument, "unknown observable");
}

double expected_value(Observable obs, const GridFunction& u, Space space) {
  require_nonzero(u);
  return inner_product(apply_observable(obs, u), u, space).real() / norm_sq(u, space);
}

double variance(Observable obs, const GridFunction& u, Space space) {
  require_nonzero(u);
  const double nrm = norm_sq(u, space);
  const double e = inner_product(apply_observable(obs, u), u, space).real() / nrm;
  if (obs == Observable::TimeDeriv || obs == Observable::OmegaDeriv)
    return derivative_energy(u, energy_weight(obs, space)) / nrm - e * e;
  GridFunction t = apply_observable(obs, u);
  t -= e * u;
  return norm_sq(t, space) / nrm;
}

GridFunction apply_group_element(double a, double b, int c, const GridFunction& u) {
  if (c != 1 && c != -1) throw Error(ErrorCode::InvalidArgument, "reflection c must be +1 or -1");
  const auto& w = u.grid().samples();
  const double ea = std::exp(a);
  const double amp = std::exp(0.5 * a);
  GridFunction r(u.grid_ptr());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const cplx v = interpolate(u, c * ea * w[k]);
    r[k] = b == 0.0 ? amp * v : amp * std::polar(1.0, -b * w[k]) * v;
  }
  return r;
}

double ScaleSpaceField::norm_sq() const {
  const std::size_t m = sigma.size();
  if (m < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double wt = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
    acc += wt * (std::norm(plus[i]) + std::norm(minus[i]));
  }
  return acc * step();
}

ScaleSpaceField scale_transform(const GridFunction& u, double sigma_min, double sigma_max,
                                std::size_t n_sigma) {
  if (!(sigma_max > sigma_min) || n_sigma < 2)
    throw Error(ErrorCode::InvalidArgument, "invalid sigma grid");
  ScaleSpaceField f;
  f.sigma.resize(n_sigma);
  f.plus.resize(n_sigma);
  f.minus.resize(n_sigma);
  const double ds = (sigma_max - sigma_min) / static_cast<double>(n_sigma - 1);
  for (std::size_t i = 0; i < n_sigma; ++i) {
    const double s = sigma_min + ds * static_cast<double>(i);
    const double x = std::exp(-s);
    const double amp = std::exp(-0.5 * s);
    f.sigma[i] = s;
    f.plus[i] = amp * interpolate(u, x);
    f.minus[i] = amp * interpolate(u, -x);
  }
  return f;
}

ScaleSpaceField scale_transform(const GridFunction& u, std::size_t n_sigma) {
  const FrequencyGrid& g = u.grid();
  if (n_sigma == 0) n_sigma = 4 * g.size();
  return scale_transform(u, -std::log(g.omega_max()), -std::log(0.5 * g.step()), n_sigma);
}

GridFunction inverse_scale_transform(const ScaleSpaceField& f, const GridPtr& grid) {
  const std::size_t m = f.sigma.size();
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "sigma grid too small");
  const double s0 = f.sigma.front();
  const double ds = f.step();
  GridFunction u(grid);
  const auto& w = grid->samples();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double s = -std::log(std::abs(w[k]));
    const double t = (s - s0) / ds;
    if (t < 0.0 || t > static_cast<double>(m - 1)) continue;
    auto i = static_cast<std::size_t>(t);
    if (i >= m - 1) i = m - 2;
    const double fr = t - static_cast<double>(i);
    const auto& side = w[k] > 0.0 ? f.plus : f.minus;
    const cplx v = side[i] + fr * (side[i + 1] - side[i]);
    u[k] = v / std::sqrt(std::abs(w[k]));
  }
  return u;
}

}  // namespace cwtloc
