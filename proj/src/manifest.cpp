#include "lulc/manifest.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, RunManifest manifest,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::string>& outputs) {
  const auto dir = path.parent_path();
  for (const auto& in : inputs) manifest.inputs[in.string()] = sha256_file(in);
  for (const auto& out : outputs) manifest.outputs[out] = sha256_file(dir / out);
  if (manifest.finished_at.empty()) manifest.finished_at = utc_timestamp();

  nlohmann::ordered_json j;
  j["artifact"] = "lulc-ppo";
  j["version"] = kArtifactVersion;
  j["command"] = manifest.command;
  j["seed"] = manifest.seed;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["config"] = manifest.config_snapshot;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    m.command = j.at("command").get<std::string>();
    m.config_snapshot = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, "malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& path) {
  const auto m = read_manifest(path);
  std::vector<std::string> bad;
  auto check = [&](const std::filesystem::path& file, const std::string& digest,
                   const std::string& label) {
    if (!std::filesystem::exists(file) || sha256_file(file) != digest) bad.push_back(label);
  };
  for (const auto& [file, digest] : m.inputs) check(file, digest, file);
  for (const auto& [file, digest] : m.outputs) check(path.parent_path() / file, digest, file);
  return bad;
}

}  // namespace lulc
