#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lulc/ppo.hpp"

namespace lulc {

// Text checkpoint, version 1. Line-oriented:
//
//   lulc-ppo-checkpoint 1
//   seed <decimal u64>
//   update <decimal>
//   rng_streams <k>
//   rng <16 hex> <16 hex> <16 hex> <16 hex>        (k lines)
//   net policy | net value                          (two blocks, policy first)
//   arch <layer sizes...>
//   params <n>      followed by n hex-float lines   (per-layer W col-major, then b)
//   adam_step <t>
//   adam_m <n>      followed by n hex-float lines
//   adam_v <n>      followed by n hex-float lines
//   sha256 <hex digest of every preceding byte>
//
// Hex floats (std::chars_format::hex) make the 64-bit round trip exact.
inline constexpr std::string_view kCheckpointMagic = "lulc-ppo-checkpoint";
inline constexpr int kCheckpointVersion = 1;

std::string format_checkpoint(const TrainerState& state);

// Throws kCheckpoint naming the first field that fails validation, including
// architecture mismatches against the fixed policy/value layer sizes.
TrainerState parse_checkpoint(std::string_view text);

void write_checkpoint(const std::filesystem::path& path, const TrainerState& state);
TrainerState read_checkpoint(const std::filesystem::path& path);

}  // namespace lulc
