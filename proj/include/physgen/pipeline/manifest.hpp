#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "physgen/core/error.hpp"

namespace physgen::pipeline {

inline constexpr std::array<const char*, 3> kSplitNames{"train", "eval", "test"};

struct ManifestRow {
  std::string sample_id;
  std::string task;
  std::uint64_t seed = 0;
  std::string input_path;  // relative to the dataset root
  std::string target_path;
  std::string params_json_path;
  std::string split;
  std::string status = "ok";  // "ok" or "error: <message>"

  bool ok() const { return status == "ok"; }
};

struct Manifest {
  std::vector<ManifestRow> rows;

  std::string to_csv() const;
  static Manifest from_csv(const std::string& text);
  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);
};

/// Assigns splits by ranking sample ids on their FNV-1a hash: the first
/// round(r0 n) ranks go to train, the next round(r1 n) to eval, the rest to
/// test. Depends only on the set of ids. Ratios must be non-negative and sum
/// to 1.
Manifest split_manifest(Manifest manifest, std::array<double, 3> ratios = {0.80, 0.15, 0.05});

/// Split of one id within the given id set; same rule as split_manifest.
std::string split_of(const std::string& id, const std::vector<std::string>& ids, std::array<double, 3> ratios);

}  // namespace physgen::pipeline
