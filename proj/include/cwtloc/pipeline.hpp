#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cwtloc/optimizer.hpp"
#include "cwtloc/oracle.hpp"

namespace cwtloc {

struct RunConfig {
  double omega_max = 8.0;
  std::size_t n = 1024;

  double init_m = 1.0;
  double s_min = 0.25;
  double s_max = 2.0;
  int n_probe = 16;

  DescentOptions descent;

  PhaseSpaceGrid oracle;
  bool oracle_enabled = true;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;
  int gradient_checks = 20;

  void validate() const;
};

// Flat `section.key = value` lines; `#` starts a comment.
RunConfig parse_config(std::istream& is);
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config_file(const std::string& path);

enum class Command { InitScan, Optimize, Verify, All };

Command parse_command(const std::string& name);

void run(Command cmd, const RunConfig& cfg);

}  // namespace cwtloc
