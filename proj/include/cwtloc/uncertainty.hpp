#pragma once

#include <string>
#include <vector>

#include "cwtloc/grid.hpp"
#include "json.hpp"

namespace cwtloc {

struct UncertaintyReport {
  double v_scale_S = 0.0;        // v^S(ln|w|)
  double v_scale_W = 0.0;        // v^W(ln|w|)
  double v_time_S = 0.0;         // v^S(i d/dw)
  double v_time_W_factor = 0.0;  // v^W(i w d/dw) |u/w|_S^2 / |u|_S^2
  double total = 0.0;
  double res_scale = 0.0;        // e^S(ln|w|)
  double res_time = 0.0;         // e^S(i d/dw)

  double scale_part() const { return v_scale_S + v_scale_W; }
  double time_part() const { return v_time_S + v_time_W_factor; }
};

UncertaintyReport uncertainty(const GridFunction& u);

void to_json(nlohmann::json& j, const UncertaintyReport& r);

struct DomainReport {
  double threshold = 1e6;
  double norm_S = 0.0;
  // surrogate norms, each compared against threshold * norm_S
  double ln_weighted_norm = 0.0;
  double inv_omega_norm = 0.0;
  double derivative_S_norm = 0.0;
  double derivative_W_norm = 0.0;
  double second_derivative_S_norm = 0.0;
  double second_derivative_W_norm = 0.0;

  bool nonzero_norm = false;
  bool ln_weighted = false;
  bool inv_omega = false;
  bool derivative_S = false;
  bool derivative_W = false;
  bool second_derivative_S = false;
  bool second_derivative_W = false;

  bool ok() const;
  std::vector<std::string> failures() const;
};

DomainReport check_domain(const GridFunction& u, double threshold = 1e6);

void to_json(nlohmann::json& j, const DomainReport& r);

}  // namespace cwtloc
