// cwtloc command-line front-end, built on the C API.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cwtloc/cwtloc.h"
#include "json.hpp"

namespace {

void report_error(int status, const std::optional<std::string>& out_dir) {
  const nlohmann::json j = {
      {"status", status},
      {"error", cwtloc_error_description(status)},
      {"message", cwtloc_last_error_message()},
      {"exit_code", cwtloc_exit_code(status)},
  };
  std::cerr << j.dump() << "\n";
  if (!out_dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*out_dir, ec);
  std::ofstream os(std::filesystem::path(*out_dir) / "error.json");
  if (os) os << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design of optimally localized mother wavelets"};
  std::optional<std::string> config;
  std::string command = "all";
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;

  app.add_option("--config", config, "Config file with section.key = value lines");
  app.add_option("--command", command, "init-scan | optimize | verify | all")
      ->check(CLI::IsMember({"init-scan", "optimize", "verify", "all"}));
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Seed for random test directions");
  app.add_option("--threads", threads, "Oracle worker threads")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    const nlohmann::json j = {{"status", CWTLOC_ERROR_CONFIG}, {"error", "invalid configuration"},
                              {"message", e.what()}, {"exit_code", 2}};
    std::cerr << j.dump() << "\n";
    return 2;
  }

  const std::uint64_t* seed_ptr = seed ? &*seed : nullptr;
  const int status = cwtloc_run(command.c_str(), config ? config->c_str() : nullptr,
                                out_dir ? out_dir->c_str() : nullptr, seed_ptr, threads);
  if (status != CWTLOC_OK) {
    report_error(status, out_dir);
    return cwtloc_exit_code(status);
  }
  return 0;
}
