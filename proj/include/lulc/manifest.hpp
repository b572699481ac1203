#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lulc {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct RunManifest {
  std::string command;
  std::string config_snapshot;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  // path -> sha256; inputs are stored as given, outputs relative to the
  // manifest's directory
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
};

std::string utc_timestamp();

// Digests every listed file and writes `path` atomically as JSON.
void write_manifest(const std::filesystem::path& path, RunManifest manifest,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::string>& outputs);

RunManifest read_manifest(const std::filesystem::path& path);

// Files whose current digest differs from the manifest (or are missing).
std::vector<std::string> verify_manifest(const std::filesystem::path& path);

}  // namespace lulc
