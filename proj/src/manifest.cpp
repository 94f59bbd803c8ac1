#include "kickchain/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

#include <openssl/evp.h>

#include <json.hpp>

#include "kickchain/csv.hpp"

namespace kickchain {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::vector<ManifestFile> inventory(const std::filesystem::path& dir,
                                    const std::vector<std::filesystem::path>& files) {
  std::vector<ManifestFile> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    const std::string bytes = io::read_file(dir / f);
    out.push_back({f.generic_string(), bytes.size(), sha256_hex(bytes)});
  }
  return out;
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string version() { return KICKCHAIN_VERSION; }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "kickchain";
  j["version"] = version;
  j["started_utc"] = started_utc;
  j["wall_seconds"] = wall_seconds;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [name, seed] : seeds) s[name] = seed;
  j["seeds"] = s;
  j["config"] = config_yaml;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    list.push_back({{"path", f.path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  j["files"] = list;
  return j.dump(2) + "\n";
}

}  // namespace kickchain
