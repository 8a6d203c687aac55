#pragma once

// Command-line entry points. Each returns the process exit code.
//
//   build   0 ok, 1 usage or I/O error, 2 construction invariant failed
//   leaves  0 ok, 1 usage or I/O error (including anchors outside the domain)
//   test    0 consistent, 3 violated, 4 inconclusive, 5 parse error, 1 other
//   verify  0 all checks pass, 2 some check failed, 1 usage or I/O error

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "folia/builder.hpp"

namespace folia {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kInvariant = 2;
inline constexpr int kViolated = 3;
inline constexpr int kInconclusive = 4;
inline constexpr int kParse = 5;
}  // namespace exit_code

struct BuildConfig {
  Domain domain;
  BuildParams params;
};

/// {"domain": {"kind", "n", "radii", "center"?}, "stages", "seed",
/// "resolution", "flow_steps", "k_bend", "candidates", "max_draws"}.
/// Missing radii default to 1. Throws DomainError on invalid input.
BuildConfig build_config_from_json(const nlohmann::json& j);
nlohmann::json build_config_to_json(const BuildConfig& c);

struct BuildOverrides {
  std::optional<int> stages;
  std::optional<std::uint64_t> seed;
  std::optional<double> resolution;
  std::optional<int> flow_steps;
  std::optional<double> k_bend;
};

int cmd_build(const std::filesystem::path& config, const std::filesystem::path& out, const BuildOverrides& overrides,
              std::ostream& log, std::ostream& err);

/// Anchor file: one point per line, 2n numbers separated by commas or
/// whitespace; blank lines and lines starting with '#' are ignored.
std::vector<Point> read_anchor_file(const std::filesystem::path& path, int n);

/// "N": N base anchors from a transverse low-discrepancy sequence through
/// the domain centre's Re z1. "a1xa2x..." with 2n-1 counts: a regular
/// lattice over the transverse coordinates, interior points only.
std::vector<Point> grid_anchors(const Domain& d, const std::string& spec);

int cmd_leaves(const std::filesystem::path& manifest, const std::optional<std::filesystem::path>& anchors,
               const std::optional<std::string>& grid, const std::filesystem::path& out_dir, std::ostream& log,
               std::ostream& err);

int cmd_test(const std::filesystem::path& manifest, const std::string& function, const std::filesystem::path& report,
             bool oracle, std::ostream& log, std::ostream& err);

int cmd_verify(const std::filesystem::path& manifest, const std::string& level, std::ostream& log, std::ostream& err);

/// Parses argv and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace folia
