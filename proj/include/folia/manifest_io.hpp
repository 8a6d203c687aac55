#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "folia/builder.hpp"

namespace folia {

inline constexpr const char* kManifestVersion = "folia-manifest/1";

nlohmann::json domain_to_json(const Domain& d);
Domain domain_from_json(const nlohmann::json& j);

nlohmann::json stage_to_json(const Stage& s);
Stage stage_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const BuildParams& p);
/// Fields absent from `j` keep their defaults.
BuildParams params_from_json(const nlohmann::json& j, BuildParams base = {});

nlohmann::json manifest_to_json(const FoliationManifest& m);
/// Structural validation only; construction invariants are left to the
/// diagnostics so that a damaged manifest can still be inspected.
FoliationManifest manifest_from_json(const nlohmann::json& j);

std::string manifest_text(const FoliationManifest& m);
void save_manifest(const FoliationManifest& m, const std::filesystem::path& path);
FoliationManifest load_manifest(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// 17 significant digits.
std::string format_double(double x);

/// CSV with header t,x_1,...,x_{2n}.
std::string leaf_csv(const LeafCurve& leaf);

}  // namespace folia
