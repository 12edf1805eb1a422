#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace cwtloc {

using cplx = std::complex<double>;

enum class Space { S, W };

// Cell-centered samples w_k = (k + 1/2 - n/2) dw, dw = 2 omega_max / n.
class FrequencyGrid {
 public:
  FrequencyGrid(double omega_max, std::size_t n);

  double omega_max() const noexcept { return omega_max_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double step() const noexcept { return dw_; }
  double weight(std::size_t) const noexcept { return dw_; }
  double operator[](std::size_t k) const { return samples_[k]; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  // index of the first positive sample
  std::size_t half() const noexcept { return samples_.size() / 2; }

  bool operator==(const FrequencyGrid& other) const noexcept {
    return omega_max_ == other.omega_max_ && samples_.size() == other.samples_.size();
  }

 private:
  double omega_max_;
  double dw_;
  std::vector<double> samples_;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

GridPtr make_grid(double omega_max, std::size_t n);

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridPtr grid);
  GridFunction(GridPtr grid, std::vector<cplx> values);

  const FrequencyGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  cplx operator[](std::size_t k) const { return values_[k]; }
  cplx& operator[](std::size_t k) { return values_[k]; }
  const std::vector<cplx>& values() const noexcept { return values_; }
  std::vector<cplx>& values() noexcept { return values_; }

  // all imaginary parts below 1e-12 max|values|
  bool real_valued() const;
  double max_abs() const;

  GridFunction& operator+=(const GridFunction& v);
  GridFunction& operator-=(const GridFunction& v);
  GridFunction& operator*=(cplx alpha);

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

GridFunction operator+(GridFunction u, const GridFunction& v);
GridFunction operator-(GridFunction u, const GridFunction& v);
GridFunction operator*(cplx alpha, GridFunction u);

void require_same_grid(const GridFunction& u, const GridFunction& v);

// u_k * f(w_k)
template <class F>
GridFunction multiply_pointwise(const GridFunction& u, F&& f) {
  GridFunction r = u;
  const auto& w = u.grid().samples();
  for (std::size_t k = 0; k < r.size(); ++k) r[k] *= f(w[k]);
  return r;
}

cplx inner_product(const GridFunction& u, const GridFunction& v, Space space);
double norm_sq(const GridFunction& u, Space space);
double norm(const GridFunction& u, Space space);

// Central differences inside, one-sided first order at the two ends.
GridFunction derivative(const GridFunction& u);
// Transpose of the derivative stencil matrix.
GridFunction derivative_transpose(const GridFunction& u);

// Piecewise-linear interpolant through the samples with zero anchors at
// -omega_max, 0 and +omega_max; zero outside [-omega_max, omega_max].
cplx interpolate(const GridFunction& u, double x);

// Segment weights for derivative energies.
enum class Weight { One, AbsOmega, OmegaSq, InvAbsOmega };

// Integral of rho(w) |d/dw u~|^2 for the anchored interpolant u~, rho taken at
// segment midpoints.
double derivative_energy(const GridFunction& u, Weight rho);
// Gradient of derivative_energy with respect to the plain sum sum_k Re(g_k conj h_k).
GridFunction derivative_energy_gradient(const GridFunction& u, Weight rho);

struct Tridiagonal {
  std::vector<double> lower;  // lower[k] couples k+1 to k
  std::vector<double> diag;
  std::vector<double> upper;  // upper[k] couples k to k+1
};

// Hessian of derivative_energy (symmetric, lower == upper).
Tridiagonal stiffness_matrix(const FrequencyGrid& grid, Weight rho);
// Thomas algorithm; the matrix must be diagonally dominant or SPD.
std::vector<cplx> solve_tridiagonal(const Tridiagonal& m, const std::vector<cplx>& rhs);

void write_csv(const GridFunction& u, std::ostream& os);
void write_csv(const GridFunction& u, const std::string& path);
// Reads `omega,re,im`; the grid is rebuilt from the omega column.
GridFunction read_csv(std::istream& is);
GridFunction read_csv(const std::string& path);
// Reads onto a known grid; omega column must match it.
GridFunction read_csv(std::istream& is, const GridPtr& grid);

}  // namespace cwtloc
