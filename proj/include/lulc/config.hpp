#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lulc/environment.hpp"
#include "lulc/ppo.hpp"
#include "lulc/runoff.hpp"

namespace lulc {

// Sectioned key-value run configuration ([run], [grid], [runoff],
// [coefficients], [env], [ppo], [evaluate]). Relative paths resolve against
// the directory of the config file.
struct RunConfig {
  std::filesystem::path out_dir = "runs/default";
  int checkpoint_every = 25;

  std::filesystem::path grid_path;         // empty: bundled seed grid
  std::filesystem::path frozen_mask_path;  // empty: no extra frozen pixels
  std::filesystem::path coefficients_path; // empty: [coefficients] section

  CoefficientTable coefficients = default_coefficients();
  EnvConfig env;
  PpoConfig ppo;
  int evaluate_steps = 0;  // 0: one step per pixel
};

// Throws kConfig for malformed or unknown keys and invalid values.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Every key with its effective value; parse_run_config accepts the output.
std::string format_run_config(const RunConfig& cfg);

// Throws kConfig naming the first referenced path that does not exist.
void validate_paths(const RunConfig& cfg);

LulcGrid load_grid(const RunConfig& cfg);
CoefficientTable load_coefficients(const RunConfig& cfg);

}  // namespace lulc
