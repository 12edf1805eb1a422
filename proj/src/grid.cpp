#include "cwtloc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cwtloc/error.hpp"

namespace cwtloc {

FrequencyGrid::FrequencyGrid(double omega_max, std::size_t n) : omega_max_(omega_max), dw_(0.0) {
  if (!(omega_max > 0.0) || !std::isfinite(omega_max))
    throw Error(ErrorCode::InvalidArgument, "omega_max must be positive and finite");
  if (n < 2 || n % 2 != 0) throw Error(ErrorCode::InvalidArgument, "grid size n must be even and >= 2");
  dw_ = 2.0 * omega_max / static_cast<double>(n);
  samples_.resize(n);
  const double shift = 0.5 - static_cast<double>(n / 2);
  for (std::size_t k = 0; k < n; ++k) samples_[k] = (static_cast<double>(k) + shift) * dw_;
}

GridPtr make_grid(double omega_max, std::size_t n) {
  return std::make_shared<const FrequencyGrid>(omega_max, n);
}

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw Error(ErrorCode::InvalidArgument, "null grid");
  values_.assign(grid_->size(), cplx(0.0, 0.0));
}

GridFunction::GridFunction(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorCode::InvalidArgument, "null grid");
  if (values_.size() != grid_->size())
    throw Error(ErrorCode::GridMismatch, "value count does not match grid size");
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::real_valued() const {
  const double tol = 1e-12 * max_abs();
  for (const auto& v : values_)
    if (std::abs(v.imag()) > tol) return false;
  return true;
}

void require_same_grid(const GridFunction& u, const GridFunction& v) {
  if (!u.grid_ptr() || !v.grid_ptr()) throw Error(ErrorCode::InvalidArgument, "function without grid");
  if (u.grid_ptr() != v.grid_ptr() && !(u.grid() == v.grid()))
    throw Error(ErrorCode::GridMismatch, "functions live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& v) {
  require_same_grid(*this, v);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += v.values_[k];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& v) {
  require_same_grid(*this, v);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= v.values_[k];
  return *this;
}

GridFunction& GridFunction::operator*=(cplx alpha) {
  for (auto& x : values_) x *= alpha;
  return *this;
}

GridFunction operator+(GridFunction u, const GridFunction& v) { return u += v; }
GridFunction operator-(GridFunction u, const GridFunction& v) { return u -= v; }
GridFunction operator*(cplx alpha, GridFunction u) { return u *= alpha; }

cplx inner_product(const GridFunction& u, const GridFunction& v, Space space) {
  require_same_grid(u, v);
  const auto& w = u.grid().samples();
  const double dw = u.grid().step();
  cplx acc(0.0, 0.0);
  if (space == Space::S) {
    for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * std::conj(v[k]);
  } else {
    for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * std::conj(v[k]) / std::abs(w[k]);
  }
  return acc * dw;
}

double norm_sq(const GridFunction& u, Space space) {
  const auto& w = u.grid().samples();
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = std::norm(u[k]);
    acc += space == Space::S ? a : a / std::abs(w[k]);
  }
  return acc * u.grid().step();
}

double norm(const GridFunction& u, Space space) { return std::sqrt(norm_sq(u, space)); }

GridFunction derivative(const GridFunction& u) {
  const std::size_t n = u.size();
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "derivative needs n >= 4");
  const double dw = u.grid().step();
  GridFunction r(u.grid_ptr());
  for (std::size_t k = 1; k + 1 < n; ++k) r[k] = (u[k + 1] - u[k - 1]) / (2.0 * dw);
  r[0] = (u[1] - u[0]) / dw;
  r[n - 1] = (u[n - 1] - u[n - 2]) / dw;
  return r;
}

GridFunction derivative_transpose(const GridFunction& v) {
  const std::size_t n = v.size();
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "derivative needs n >= 4");
  const double dw = v.grid().step();
  GridFunction r(v.grid_ptr());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    r[k + 1] += v[k] / (2.0 * dw);
    r[k - 1] -= v[k] / (2.0 * dw);
  }
  r[0] -= v[0] / dw;
  r[1] += v[0] / dw;
  r[n - 1] += v[n - 1] / dw;
  r[n - 2] -= v[n - 1] / dw;
  return r;
}

cplx interpolate(const GridFunction& u, double x) {
  const FrequencyGrid& g = u.grid();
  const double wmax = g.omega_max();
  if (!(std::abs(x) < wmax) || x == 0.0) return {0.0, 0.0};
  const std::size_t h = g.half();
  const double dw = g.step();
  const double y = std::abs(x);
  const double t = y / dw - 0.5;
  // sample index at distance (j + 1/2) dw from 0 on the side of x
  auto at = [&](std::size_t j) { return x > 0.0 ? u[h + j] : u[h - 1 - j]; };
  if (t < 0.0) return at(0) * (2.0 * y / dw);
  const auto j = static_cast<std::size_t>(t);
  if (j >= h - 1) return at(h - 1) * std::max(0.0, 2.0 * (wmax - y) / dw);
  const double f = t - static_cast<double>(j);
  return at(j) + f * (at(j + 1) - at(j));
}

namespace {

// Knots: -wmax, w_0..w_{h-1}, 0, w_h..w_{n-1}, +wmax.
struct Knots {
  std::vector<double> x;
  std::vector<cplx> v;
};

Knots knots(const GridFunction& u) {
  const FrequencyGrid& g = u.grid();
  const std::size_t n = g.size();
  const std::size_t h = g.half();
  Knots k;
  k.x.reserve(n + 3);
  k.v.reserve(n + 3);
  k.x.push_back(-g.omega_max());
  k.v.push_back(0.0);
  for (std::size_t i = 0; i < h; ++i) {
    k.x.push_back(g[i]);
    k.v.push_back(u[i]);
  }
  k.x.push_back(0.0);
  k.v.push_back(0.0);
  for (std::size_t i = h; i < n; ++i) {
    k.x.push_back(g[i]);
    k.v.push_back(u[i]);
  }
  k.x.push_back(g.omega_max());
  k.v.push_back(0.0);
  return k;
}

double rho_at(Weight rho, double x) {
  switch (rho) {
    case Weight::One: return 1.0;
    case Weight::AbsOmega: return std::abs(x);
    case Weight::OmegaSq: return x * x;
    case Weight::InvAbsOmega: return 1.0 / std::abs(x);
  }
  return 1.0;
}

// rho(mid) / length per segment
std::vector<double> segment_coeffs(const std::vector<double>& x, Weight rho) {
  std::vector<double> c(x.size() - 1);
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const double len = x[j + 1] - x[j];
    c[j] = rho_at(rho, 0.5 * (x[j] + x[j + 1])) / len;
  }
  return c;
}

// knot index of sample k
std::size_t knot_of(std::size_t k, std::size_t h) { return k < h ? k + 1 : k + 2; }

}  // namespace

double derivative_energy(const GridFunction& u, Weight rho) {
  const Knots k = knots(u);
  const auto c = segment_coeffs(k.x, rho);
  double e = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) e += c[j] * std::norm(k.v[j + 1] - k.v[j]);
  return e;
}

GridFunction derivative_energy_gradient(const GridFunction& u, Weight rho) {
  const Knots k = knots(u);
  const auto c = segment_coeffs(k.x, rho);
  const std::size_t h = u.grid().half();
  GridFunction g(u.grid_ptr());
  for (std::size_t s = 0; s < u.size(); ++s) {
    const std::size_t i = knot_of(s, h);
    g[s] = 2.0 * (c[i - 1] * (k.v[i] - k.v[i - 1]) - c[i] * (k.v[i + 1] - k.v[i]));
  }
  return g;
}

Tridiagonal stiffness_matrix(const FrequencyGrid& grid, Weight rho) {
  const std::size_t n = grid.size();
  const std::size_t h = grid.half();
  std::vector<double> x;
  x.reserve(n + 3);
  x.push_back(-grid.omega_max());
  for (std::size_t i = 0; i < h; ++i) x.push_back(grid[i]);
  x.push_back(0.0);
  for (std::size_t i = h; i < n; ++i) x.push_back(grid[i]);
  x.push_back(grid.omega_max());
  const auto c = segment_coeffs(x, rho);
  Tridiagonal m;
  m.diag.resize(n);
  m.lower.assign(n - 1, 0.0);
  m.upper.assign(n - 1, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = knot_of(s, h);
    m.diag[s] = 2.0 * (c[i - 1] + c[i]);
  }
  for (std::size_t s = 0; s + 1 < n; ++s) {
    if (s + 1 == h) continue;  // the anchor at 0 separates the half-lines
    const std::size_t i = knot_of(s, h);
    m.lower[s] = m.upper[s] = -2.0 * c[i];
  }
  return m;
}

std::vector<cplx> solve_tridiagonal(const Tridiagonal& m, const std::vector<cplx>& rhs) {
  const std::size_t n = m.diag.size();
  if (rhs.size() != n || m.lower.size() + 1 != n || m.upper.size() + 1 != n)
    throw Error(ErrorCode::InvalidArgument, "tridiagonal size mismatch");
  std::vector<double> cp(n, 0.0);
  std::vector<cplx> dp(n);
  double beta = m.diag[0];
  if (beta == 0.0) throw Error(ErrorCode::Degenerate, "singular tridiagonal system");
  dp[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    cp[i - 1] = m.upper[i - 1] / beta;
    beta = m.diag[i] - m.lower[i - 1] * cp[i - 1];
    if (beta == 0.0) throw Error(ErrorCode::Degenerate, "singular tridiagonal system");
    dp[i] = (rhs[i] - m.lower[i - 1] * dp[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) dp[i] -= cp[i] * dp[i + 1];
  return dp;
}

void write_csv(const GridFunction& u, std::ostream& os) {
  os << "omega,re,im\n";
  char buf[96];
  const auto& w = u.grid().samples();
  for (std::size_t k = 0; k < u.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", w[k], u[k].real(), u[k].imag());
    os << buf;
  }
}

void write_csv(const GridFunction& u, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  write_csv(u, os);
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path);
}

namespace {

struct Rows {
  std::vector<double> omega;
  std::vector<cplx> values;
};

Rows parse_rows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, "empty grid function CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "omega,re,im") throw Error(ErrorCode::Io, "unexpected CSV header: " + line);
  Rows r;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    double f[3];
    const char* p = line.c_str();
    for (int i = 0; i < 3; ++i) {
      char* end = nullptr;
      f[i] = std::strtod(p, &end);
      if (end == p) throw Error(ErrorCode::Io, "malformed CSV row: " + line);
      p = end;
      if (i < 2) {
        if (*p != ',') throw Error(ErrorCode::Io, "malformed CSV row: " + line);
        ++p;
      }
    }
    r.omega.push_back(f[0]);
    r.values.emplace_back(f[1], f[2]);
  }
  return r;
}

void check_omegas(const std::vector<double>& omega, const FrequencyGrid& g) {
  if (omega.size() != g.size()) throw Error(ErrorCode::GridMismatch, "CSV row count does not match grid");
  for (std::size_t k = 0; k < omega.size(); ++k)
    if (std::abs(omega[k] - g[k]) > 1e-9 * g.step())
      throw Error(ErrorCode::GridMismatch, "CSV omega column is not the expected grid");
}

}  // namespace

GridFunction read_csv(std::istream& is, const GridPtr& grid) {
  Rows r = parse_rows(is);
  check_omegas(r.omega, *grid);
  return GridFunction(grid, std::move(r.values));
}

GridFunction read_csv(std::istream& is) {
  Rows r = parse_rows(is);
  const std::size_t n = r.omega.size();
  if (n < 4) throw Error(ErrorCode::Io, "grid function CSV has fewer than 4 rows");
  const double wmax = static_cast<double>(n) * (r.omega.back() - r.omega.front()) /
                      (2.0 * static_cast<double>(n - 1));
  GridPtr g = make_grid(wmax, n);
  check_omegas(r.omega, *g);
  return GridFunction(g, std::move(r.values));
}

GridFunction read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  return read_csv(is);
}

}  // namespace cwtloc
