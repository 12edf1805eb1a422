#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cwtloc/grid.hpp"
#include "cwtloc/uncertainty.hpp"

namespace cwtloc {

struct TruncatedGaussianParams {
  double m = 1.0;
  double s = 0.5;
  double cutoff() const;
};

// max(0, exp(-(w-m)^2/(2s^2)) - cutoff) for w > 0, else 0; no projection.
GridFunction sample_truncated_gaussian(const GridPtr& grid, const TruncatedGaussianParams& p);

// Samples the truncated Gaussian, moves (m, s) along the dilation orbit until
// e^S(ln|w|) vanishes, then calls enforce_constraints. Normalized in S.
GridFunction init_truncated_gaussian(const GridPtr& grid, const TruncatedGaussianParams& p,
                                     TruncatedGaussianParams* effective = nullptr);

struct ScanProbe {
  double s = 0.0;
  TruncatedGaussianParams effective;
  UncertaintyReport report;
  bool valid = false;
};

struct ScanResult {
  TruncatedGaussianParams params;     // requested (m, s*)
  TruncatedGaussianParams effective;  // after centering
  UncertaintyReport report;
  GridFunction window;
  std::vector<ScanProbe> probes;      // coarse scan, log-spaced in s
  bool boundary_warning = false;
  bool unimodal = false;
};

ScanResult optimize_initial_variance(const GridPtr& grid, double m, double s_min, double s_max, int n_probe);

// Dilation then modulation until both residuals are below tol.
GridFunction enforce_constraints(const GridFunction& u, double tol = 1e-9, int max_sweeps = 3);

enum class DescentMetric { Sobolev, W };

const char* metric_name(DescentMetric m);
DescentMetric parse_metric(const std::string& name);

struct DescentOptions {
  int max_iters = 5000;
  double step0 = 1.0;
  double backtrack_factor = 0.5;
  double grad_tol = 1e-5;
  double constraint_tol = 1e-9;
  DescentMetric metric = DescentMetric::Sobolev;

  void validate() const;
};

struct DescentRecord {
  int iter = 0;
  UncertaintyReport report;
  double lambda = 0.0;
  double mu = 0.0;
  double step = 0.0;
  double field_norm = 0.0;  // |constrained field|_W / |u|_W
};

enum class Termination { GradTol, MaxIters, StepUnderflow };

const char* termination_name(Termination t);

struct DescentTrace {
  std::vector<DescentRecord> records;
  GridFunction final_window;
  Termination termination = Termination::MaxIters;

  const DescentRecord& last() const { return records.back(); }
};

// Search direction for one step: constrained field in the chosen metric.
GridFunction descent_direction(const GridFunction& u, DescentMetric metric);

DescentTrace run_descent(const GridFunction& u0, const DescentOptions& opts);

void write_trace_csv(const DescentTrace& t, std::ostream& os);
void write_trace_csv(const DescentTrace& t, const std::string& path);

}  // namespace cwtloc
