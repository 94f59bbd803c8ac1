// Run manifest: resolved config, version, seeds, timing and checksums.
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kickchain {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

struct ManifestFile {
  std::string path;  // relative to the bundle directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string version;
  std::string config_yaml;  // resolved config, re-runnable as is
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::string started_utc;
  double wall_seconds = 0.0;
  std::vector<ManifestFile> files;

  std::string to_json() const;
};

/// Checksums every listed file under `dir`.
std::vector<ManifestFile> inventory(const std::filesystem::path& dir,
                                    const std::vector<std::filesystem::path>& files);

std::string utc_timestamp(std::chrono::system_clock::time_point t);

/// Library version string.
std::string version();

}  // namespace kickchain
