#include "cwtloc/cwtloc.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "cwtloc/error.hpp"
#include "cwtloc/grid.hpp"
#include "cwtloc/optimizer.hpp"
#include "cwtloc/oracle.hpp"
#include "cwtloc/pipeline.hpp"
#include "cwtloc/uncertainty.hpp"

struct cwtloc_grid_struct {
  cwtloc::GridPtr grid;
};

struct cwtloc_window_struct {
  cwtloc::GridFunction u;
};

namespace {

thread_local std::string g_last_error;

int status_of(cwtloc::ErrorCode c) {
  using cwtloc::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return CWTLOC_ERROR_INVALID_ARGUMENT;
    case ErrorCode::GridMismatch: return CWTLOC_ERROR_GRID_MISMATCH;
    case ErrorCode::ZeroInput: return CWTLOC_ERROR_ZERO_INPUT;
    case ErrorCode::Domain: return CWTLOC_ERROR_DOMAIN;
    case ErrorCode::Constraint: return CWTLOC_ERROR_CONSTRAINT;
    case ErrorCode::Degenerate: return CWTLOC_ERROR_DEGENERATE;
    case ErrorCode::Truncation: return CWTLOC_ERROR_TRUNCATION;
    case ErrorCode::Config: return CWTLOC_ERROR_CONFIG;
    case ErrorCode::Io: return CWTLOC_ERROR_IO;
    case ErrorCode::Internal: return CWTLOC_ERROR_UNKNOWN;
  }
  return CWTLOC_ERROR_UNKNOWN;
}

int fail(int status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

template <typename F>
int guard(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const cwtloc::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CWTLOC_ERROR_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return fail(CWTLOC_ERROR_UNKNOWN, e.what());
  } catch (...) {
    return fail(CWTLOC_ERROR_UNKNOWN, "unknown exception");
  }
}

#define CWTLOC_REQUIRE(p)                                                  \
  do {                                                                     \
    if ((p) == nullptr) return fail(CWTLOC_ERROR_NULL_POINTER, #p " is null"); \
  } while (0)

}  // namespace

extern "C" {

const char* cwtloc_error_description(int status) {
  switch (status) {
    case CWTLOC_OK: return "ok";
    case CWTLOC_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case CWTLOC_ERROR_GRID_MISMATCH: return "grid mismatch";
    case CWTLOC_ERROR_ZERO_INPUT: return "zero input";
    case CWTLOC_ERROR_DOMAIN: return "outside operator domain";
    case CWTLOC_ERROR_CONSTRAINT: return "constraint not satisfied";
    case CWTLOC_ERROR_DEGENERATE: return "degenerate constraint system";
    case CWTLOC_ERROR_TRUNCATION: return "phase-space truncation";
    case CWTLOC_ERROR_CONFIG: return "invalid configuration";
    case CWTLOC_ERROR_IO: return "i/o error";
    case CWTLOC_ERROR_NULL_POINTER: return "null pointer";
    case CWTLOC_ERROR_BUFFER_TOO_SMALL: return "buffer too small";
    default: return "unknown error";
  }
}

const char* cwtloc_last_error_message(void) { return g_last_error.c_str(); }

int cwtloc_exit_code(int status) {
  switch (status) {
    case CWTLOC_OK: return 0;
    case CWTLOC_ERROR_CONFIG: return 2;
    case CWTLOC_ERROR_DOMAIN:
    case CWTLOC_ERROR_CONSTRAINT:
    case CWTLOC_ERROR_DEGENERATE: return 3;
    case CWTLOC_ERROR_TRUNCATION: return 4;
    default: return 1;
  }
}

int cwtloc_grid_create(cwtloc_grid_t* grid, double omega_max, size_t n) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(grid);
    *grid = nullptr;
    auto g = cwtloc::make_grid(omega_max, n);
    *grid = new cwtloc_grid_struct{std::move(g)};
    return CWTLOC_OK;
  });
}

int cwtloc_grid_destroy(cwtloc_grid_t grid) {
  delete grid;
  return CWTLOC_OK;
}

int cwtloc_grid_size(cwtloc_grid_t grid, size_t* n) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(grid);
    CWTLOC_REQUIRE(n);
    *n = grid->grid->size();
    return CWTLOC_OK;
  });
}

int cwtloc_grid_samples(cwtloc_grid_t grid, double* out, size_t len) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(grid);
    CWTLOC_REQUIRE(out);
    const auto& w = grid->grid->samples();
    if (len < w.size()) return fail(CWTLOC_ERROR_BUFFER_TOO_SMALL, "need " + std::to_string(w.size()));
    std::memcpy(out, w.data(), w.size() * sizeof(double));
    return CWTLOC_OK;
  });
}

int cwtloc_window_create(cwtloc_window_t* win, cwtloc_grid_t grid, const double* re, const double* im, size_t len) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    *win = nullptr;
    CWTLOC_REQUIRE(grid);
    CWTLOC_REQUIRE(re);
    const std::size_t n = grid->grid->size();
    if (len != n) return fail(CWTLOC_ERROR_GRID_MISMATCH, "expected " + std::to_string(n) + " values");
    std::vector<cwtloc::cplx> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = {re[k], im ? im[k] : 0.0};
    *win = new cwtloc_window_struct{cwtloc::GridFunction(grid->grid, std::move(v))};
    return CWTLOC_OK;
  });
}

int cwtloc_window_truncated_gaussian(cwtloc_window_t* win, cwtloc_grid_t grid, double m, double s) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    *win = nullptr;
    CWTLOC_REQUIRE(grid);
    auto u = cwtloc::init_truncated_gaussian(grid->grid, {m, s});
    *win = new cwtloc_window_struct{std::move(u)};
    return CWTLOC_OK;
  });
}

int cwtloc_window_read_csv(cwtloc_window_t* win, const char* path) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    *win = nullptr;
    CWTLOC_REQUIRE(path);
    *win = new cwtloc_window_struct{cwtloc::read_csv(std::string(path))};
    return CWTLOC_OK;
  });
}

int cwtloc_window_write_csv(cwtloc_window_t win, const char* path) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    CWTLOC_REQUIRE(path);
    cwtloc::write_csv(win->u, std::string(path));
    return CWTLOC_OK;
  });
}

int cwtloc_window_destroy(cwtloc_window_t win) {
  delete win;
  return CWTLOC_OK;
}

int cwtloc_window_size(cwtloc_window_t win, size_t* n) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    CWTLOC_REQUIRE(n);
    *n = win->u.size();
    return CWTLOC_OK;
  });
}

int cwtloc_window_values(cwtloc_window_t win, double* re, double* im, size_t len) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    const std::size_t n = win->u.size();
    if (len < n) return fail(CWTLOC_ERROR_BUFFER_TOO_SMALL, "need " + std::to_string(n));
    for (std::size_t k = 0; k < n; ++k) {
      if (re) re[k] = win->u[k].real();
      if (im) im[k] = win->u[k].imag();
    }
    return CWTLOC_OK;
  });
}

int cwtloc_uncertainty(cwtloc_window_t win, cwtloc_uncertainty_report* out) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    CWTLOC_REQUIRE(out);
    const auto r = cwtloc::uncertainty(win->u);
    *out = {r.v_scale_S, r.v_scale_W, r.v_time_S, r.v_time_W_factor, r.total, r.res_scale, r.res_time};
    return CWTLOC_OK;
  });
}

int cwtloc_enforce_constraints(cwtloc_window_t win, double tol, cwtloc_window_t* out) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    CWTLOC_REQUIRE(out);
    *out = nullptr;
    auto v = cwtloc::enforce_constraints(win->u, tol > 0.0 ? tol : 1e-9);
    *out = new cwtloc_window_struct{std::move(v)};
    return CWTLOC_OK;
  });
}

int cwtloc_descent_options_default(cwtloc_descent_options* opts) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(opts);
    const cwtloc::DescentOptions d;
    *opts = {d.max_iters, d.step0, d.backtrack_factor, d.grad_tol, d.constraint_tol,
             d.metric == cwtloc::DescentMetric::W ? 1 : 0};
    return CWTLOC_OK;
  });
}

int cwtloc_descent(cwtloc_window_t start, const cwtloc_descent_options* opts, cwtloc_window_t* out,
                   cwtloc_descent_summary* summary) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(start);
    CWTLOC_REQUIRE(out);
    *out = nullptr;
    cwtloc::DescentOptions o;
    if (opts) {
      if (opts->metric != 0 && opts->metric != 1) return fail(CWTLOC_ERROR_INVALID_ARGUMENT, "metric must be 0 or 1");
      o.max_iters = opts->max_iters;
      o.step0 = opts->step0;
      o.backtrack_factor = opts->backtrack_factor;
      o.grad_tol = opts->grad_tol;
      o.constraint_tol = opts->constraint_tol;
      o.metric = opts->metric == 1 ? cwtloc::DescentMetric::W : cwtloc::DescentMetric::Sobolev;
    }
    o.validate();
    auto t = cwtloc::run_descent(start->u, o);
    if (summary) {
      const auto& last = t.last();
      summary->initial_L = t.records.front().report.total;
      summary->final_L = last.report.total;
      summary->iters = last.iter;
      summary->lambda_final = last.lambda;
      summary->final_grad_norm = last.field_norm;
      summary->termination = static_cast<int>(t.termination);
    }
    *out = new cwtloc_window_struct{std::move(t.final_window)};
    return CWTLOC_OK;
  });
}

int cwtloc_phase_grid_default(cwtloc_phase_grid* ps) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(ps);
    const cwtloc::PhaseSpaceGrid d;
    *ps = {d.a_max, d.b_max, d.n_a, d.n_b};
    return CWTLOC_OK;
  });
}

int cwtloc_pullback_consistency(cwtloc_window_t win, const cwtloc_phase_grid* ps, int threads,
                                cwtloc_consistency_report* out) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(win);
    CWTLOC_REQUIRE(out);
    cwtloc::PhaseSpaceGrid g;
    if (ps) g = {ps->a_max, ps->b_max, ps->n_a, ps->n_b};
    const auto r = cwtloc::pullback_consistency(win->u, g, threads);
    *out = {r.moments.mass, r.moments.v_A, r.moments.v_B, r.pull_A, r.pull_B,
            r.rel_gap_A, r.rel_gap_B, r.rel_gap_total, r.truncation_allowance};
    return CWTLOC_OK;
  });
}

int cwtloc_run(const char* command, const char* config_path, const char* out_dir, const uint64_t* seed,
               int threads) {
  return guard([&]() -> int {
    CWTLOC_REQUIRE(command);
    const auto cmd = cwtloc::parse_command(command);
    cwtloc::RunConfig cfg = config_path ? cwtloc::parse_config_file(config_path) : cwtloc::RunConfig{};
    if (out_dir) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    cwtloc::run(cmd, cfg);
    return CWTLOC_OK;
  });
}

}  // extern "C"
