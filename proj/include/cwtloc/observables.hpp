#pragma once

#include <cstddef>
#include <vector>

#include "cwtloc/grid.hpp"

namespace cwtloc {

enum class Observable {
  LnAbsOmega,     // ln|w|
  NegLnAbsOmega,  // -ln|w|
  TimeDeriv,      // i d/dw
  OmegaDeriv,     // i w d/dw
  InvOmega,       // 1/w
};

GridFunction apply_observable(Observable obs, const GridFunction& u);

// Re<obs(u/|u|), u/|u|> in the given space.
double expected_value(Observable obs, const GridFunction& u, Space space);

// |(obs - e) u/|u||^2. For the derivative kinds |obs u|^2 is the derivative
// energy of the interpolant, see derivative_energy().
double variance(Observable obs, const GridFunction& u, Space space);

// e^{-ibw} e^{a/2} u~(c e^a w), c in {+1, -1}.
GridFunction apply_group_element(double a, double b, int c, const GridFunction& u);

// f~(sigma, +1) = e^{-sigma/2} u~(e^{-sigma}), f~(sigma, -1) = e^{-sigma/2} u~(-e^{-sigma}).
struct ScaleSpaceField {
  std::vector<double> sigma;  // uniform, endpoints included
  std::vector<cplx> plus;
  std::vector<cplx> minus;

  double step() const { return sigma.size() > 1 ? sigma[1] - sigma[0] : 0.0; }
  // trapezoid sum of |plus|^2 + |minus|^2
  double norm_sq() const;
};

// sigma in [-ln omega_max, -ln(dw/2)]; n_sigma = 0 picks 4n.
ScaleSpaceField scale_transform(const GridFunction& u, std::size_t n_sigma = 0);
ScaleSpaceField scale_transform(const GridFunction& u, double sigma_min, double sigma_max,
                                std::size_t n_sigma);
GridFunction inverse_scale_transform(const ScaleSpaceField& f, const GridPtr& grid);

}  // namespace cwtloc
