#pragma once

#include <cmath>
#include <random>

#include "cwtloc/grid.hpp"

namespace testutil {

using cwtloc::cplx;
using cwtloc::GridFunction;
using cwtloc::GridPtr;

inline GridFunction from(const GridPtr& g, auto&& f) {
  GridFunction u(g);
  for (std::size_t k = 0; k < g->size(); ++k) u[k] = f((*g)[k]);
  return u;
}

inline GridFunction indicator(const GridPtr& g, double lo, double hi) {
  return from(g, [&](double w) { return (w >= lo && w <= hi) ? cplx(1.0) : cplx(0.0); });
}

// Smooth bump supported in (lo, hi).
inline double bump(double w, double lo, double hi) {
  if (w <= lo || w >= hi) return 0.0;
  const double t = (w - lo) / (hi - lo);
  return std::exp(-1.0 / (t * (1.0 - t)) + 4.0);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
