#include "cwtloc/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>

#include "cwtloc/error.hpp"
#include "cwtloc/variation.hpp"
#include "json.hpp"

namespace cwtloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(d)) throw Error(ErrorCode::Config, key + ": not a number: " + v);
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw Error(ErrorCode::Config, key + ": not an integer: " + v);
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::Config, key + ": not a boolean: " + v);
}

}  // namespace

void RunConfig::validate() const {
  if (!(omega_max > 0.0)) throw Error(ErrorCode::Config, "grid.omega_max must be positive");
  if (n < 6 || n % 2 != 0) throw Error(ErrorCode::Config, "grid.n must be even and >= 6");
  if (!(init_m > 0.0)) throw Error(ErrorCode::Config, "init.m must be positive");
  if (!(s_min > 0.0) || !(s_max > s_min)) throw Error(ErrorCode::Config, "init.s_range must be positive and increasing");
  if (n_probe < 8) throw Error(ErrorCode::Config, "init.n_probe must be >= 8");
  descent.validate();
  if (!(oracle.a_max > 0.0) || !(oracle.b_max > 0.0) || oracle.n_a < 1 || oracle.n_b < 1)
    throw Error(ErrorCode::Config, "oracle extents and sizes must be positive");
  if (output_dir.empty()) throw Error(ErrorCode::Config, "output.dir must not be empty");
  if (threads < 1) throw Error(ErrorCode::Config, "run.threads must be >= 1");
  if (gradient_checks < 0) throw Error(ErrorCode::Config, "verify.gradient_checks must be >= 0");
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected `section.key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": key must be `section.key`");

    if (key == "grid.omega_max") c.omega_max = to_double(key, val);
    else if (key == "grid.n") {
      const long long n = to_int(key, val);
      if (n <= 0) throw Error(ErrorCode::Config, "grid.n must be positive");
      c.n = static_cast<std::size_t>(n);
    } else if (key == "init.m") c.init_m = to_double(key, val);
    else if (key == "init.s_min") c.s_min = to_double(key, val);
    else if (key == "init.s_max") c.s_max = to_double(key, val);
    else if (key == "init.s_range") {
      std::string v = val;
      for (char& ch : v)
        if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
      std::istringstream ss(v);
      std::string lo, hi, extra;
      if (!(ss >> lo >> hi) || (ss >> extra)) throw Error(ErrorCode::Config, "init.s_range expects two numbers");
      c.s_min = to_double(key, lo);
      c.s_max = to_double(key, hi);
    } else if (key == "init.n_probe") c.n_probe = static_cast<int>(to_int(key, val));
    else if (key == "descent.max_iters") c.descent.max_iters = static_cast<int>(to_int(key, val));
    else if (key == "descent.step0") c.descent.step0 = to_double(key, val);
    else if (key == "descent.backtrack_factor") c.descent.backtrack_factor = to_double(key, val);
    else if (key == "descent.grad_tol") c.descent.grad_tol = to_double(key, val);
    else if (key == "descent.constraint_tol") c.descent.constraint_tol = to_double(key, val);
    else if (key == "descent.metric") c.descent.metric = parse_metric(val);
    else if (key == "oracle.a_max") c.oracle.a_max = to_double(key, val);
    else if (key == "oracle.b_max") c.oracle.b_max = to_double(key, val);
    else if (key == "oracle.n_a") c.oracle.n_a = static_cast<int>(to_int(key, val));
    else if (key == "oracle.n_b") c.oracle.n_b = static_cast<int>(to_int(key, val));
    else if (key == "oracle.enabled") c.oracle_enabled = to_bool(key, val);
    else if (key == "output.dir") c.output_dir = val;
    else if (key == "run.seed") {
      const long long s = to_int(key, val);
      if (s < 0) throw Error(ErrorCode::Config, "run.seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "run.threads") c.threads = static_cast<int>(to_int(key, val));
    else if (key == "verify.gradient_checks") c.gradient_checks = static_cast<int>(to_int(key, val));
    else throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": unknown key " + key);
  }
  c.validate();
  return c;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Config, "cannot open config file " + path);
  return parse_config(is);
}

Command parse_command(const std::string& name) {
  if (name == "init-scan") return Command::InitScan;
  if (name == "optimize") return Command::Optimize;
  if (name == "verify") return Command::Verify;
  if (name == "all") return Command::All;
  throw Error(ErrorCode::Config, "unknown command: " + name);
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path);
  os << j.dump(2) << "\n";
}

void prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir))
    throw Error(ErrorCode::Io, "cannot create output directory " + cfg.output_dir);
}

json params_json(const TruncatedGaussianParams& p) { return json{{"m", p.m}, {"s", p.s}}; }

ScanResult scan(const RunConfig& cfg, const GridPtr& grid) {
  return optimize_initial_variance(grid, cfg.init_m, cfg.s_min, cfg.s_max, cfg.n_probe);
}

void run_init_scan(const RunConfig& cfg, const GridPtr& grid) {
  const ScanResult r = scan(cfg, grid);
  {
    const std::string p = out_path(cfg, "init_scan.csv");
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + p);
    os << "s,m_eff,s_eff,valid,total,v_scale_S,v_scale_W,v_time_S,v_time_W_factor\n";
    char buf[400];
    for (const auto& pr : r.probes) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", pr.s, pr.effective.m,
                    pr.effective.s, pr.valid ? 1 : 0, pr.report.total, pr.report.v_scale_S, pr.report.v_scale_W,
                    pr.report.v_time_S, pr.report.v_time_W_factor);
      os << buf;
    }
  }
  write_csv(r.window, out_path(cfg, "init_window.csv"));
  write_json(out_path(cfg, "init_scan.json"), json{{"requested", params_json(r.params)},
                                                   {"effective", params_json(r.effective)},
                                                   {"report", r.report},
                                                   {"boundary_warning", r.boundary_warning},
                                                   {"unimodal", r.unimodal},
                                                   {"n_probe", cfg.n_probe}});
}

void run_optimize(const RunConfig& cfg, const GridPtr& grid) {
  const ScanResult r = scan(cfg, grid);
  const DescentTrace t = run_descent(r.window, cfg.descent);
  write_trace_csv(t, out_path(cfg, "trace.csv"));
  write_csv(r.window, out_path(cfg, "initial_window.csv"));
  write_csv(t.final_window, out_path(cfg, "final_window.csv"));
  const DescentRecord& last = t.last();
  write_json(out_path(cfg, "summary.json"), json{{"initial_L", t.records.front().report.total},
                                                 {"final_L", last.report.total},
                                                 {"iters", last.iter},
                                                 {"lambda_final", last.lambda},
                                                 {"mu_final", last.mu},
                                                 {"final_grad_norm", last.field_norm},
                                                 {"termination", termination_name(t.termination)},
                                                 {"metric", metric_name(cfg.descent.metric)},
                                                 {"initial_params", params_json(r.effective)},
                                                 {"final_report", last.report},
                                                 {"grid", {{"omega_max", cfg.omega_max}, {"n", cfg.n}}}});
}

// smooth random direction on the positive half-line
GridFunction random_direction(const GridPtr& grid, std::mt19937_64& rng, bool complex) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GridFunction h(grid);
  const double top = std::min(4.0, 0.8 * grid->omega_max());
  for (int j = 0; j < 4; ++j) {
    const double mu = 0.2 + (top - 0.2) * unif(rng);
    const double sg = 0.1 + 0.5 * unif(rng);
    const cplx amp(2.0 * unif(rng) - 1.0, complex ? 2.0 * unif(rng) - 1.0 : 0.0);
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double w = (*grid)[k];
      if (w <= 0.0) continue;
      const double d = (w - mu) / sg;
      h[k] += amp * std::exp(-0.5 * d * d);
    }
  }
  return h;
}

json gradient_check(const GridFunction& u, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Functional tags[] = {Functional::L, Functional::vA, Functional::vB, Functional::eLn, Functional::eTime};
  const VariationField vf = constrained_variation(u);
  const ConstraintGradients cg = constraint_gradients(u);
  json rows = json::array();
  bool all_ok = true;
  for (int i = 0; i < count; ++i) {
    const Functional f = tags[i % 5];
    GridFunction h = random_direction(u.grid_ptr(), rng, false);
    double analytic;
    bool constrained = false;
    if (f == Functional::L && i % 10 == 0) {
      // tangent direction against the constrained field
      const double a1 = inner_product(h, cg.scale, Space::W).real() / norm_sq(cg.scale, Space::W);
      h -= a1 * cg.scale;
      analytic = inner_product(vf.field, h, Space::W).real();
      constrained = true;
    } else {
      analytic = analytic_gateaux(f, u, h);
    }
    const double fd = finite_difference_gateaux(f, u, h);
    const double err = std::abs(analytic - fd);
    all_ok = all_ok && err <= std::max(1e-4 * std::abs(analytic), 1e-7);
    rows.push_back(json{{"functional", functional_name(f)},
                        {"constrained", constrained},
                        {"analytic", analytic},
                        {"finite_difference", fd},
                        {"abs_error", err}});
  }
  return json{{"seed", seed}, {"checks", rows}, {"all_within_tolerance", all_ok}};
}

void run_verify(const RunConfig& cfg, const GridPtr& grid) {
  const std::string init_p = out_path(cfg, "initial_window.csv");
  const std::string final_p = out_path(cfg, "final_window.csv");
  if (!fs::exists(init_p) || !fs::exists(final_p)) run_optimize(cfg, grid);
  auto load = [&](const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error(ErrorCode::Io, "cannot read " + p);
    return read_csv(is, grid);
  };
  const GridFunction ui = load(init_p);
  const GridFunction uf = load(final_p);

  write_json(out_path(cfg, "gradient_check.json"), gradient_check(uf, cfg.gradient_checks, cfg.seed));
  write_json(out_path(cfg, "domain.json"), json{{"initial", check_domain(ui)}, {"final", check_domain(uf)}});
  if (!cfg.oracle_enabled) return;
  for (const auto& [name, u] : {std::pair<const char*, const GridFunction&>{"initial", ui}, {"final", uf}}) {
    const AmbiguityField k = ambiguity_field(u, cfg.oracle, cfg.threads);
    const ConsistencyReport rep = pullback_consistency(u, k);
    write_json(out_path(cfg, std::string("consistency_") + name + ".json"), rep);
    write_field(k, rep.moments, out_path(cfg, std::string("field_") + name));
  }
}

}  // namespace

void run(Command cmd, const RunConfig& cfg) {
  cfg.validate();
  prepare_output(cfg);
  const GridPtr grid = make_grid(cfg.omega_max, cfg.n);
  switch (cmd) {
    case Command::InitScan: run_init_scan(cfg, grid); break;
    case Command::Optimize: run_optimize(cfg, grid); break;
    case Command::Verify: run_verify(cfg, grid); break;
    case Command::All:
      run_init_scan(cfg, grid);
      run_optimize(cfg, grid);
      run_verify(cfg, grid);
      break;
  }
}

}  // namespace cwtloc
