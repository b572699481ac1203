#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace lulc {

// Land-use / land-cover categories. Codes are the on-disk raster values.
enum class LulcClass : std::uint8_t {
  kWater = 0,
  kUrban = 1,
  kBarren = 2,
  kForest = 3,
  kGrassland = 4,
  kAgriculture = 5,
  kWetland = 6,
};

inline constexpr std::size_t kNumClasses = 7;

inline constexpr std::array<LulcClass, kNumClasses> kAllClasses = {
    LulcClass::kWater,     LulcClass::kUrban,       LulcClass::kBarren,
    LulcClass::kForest,    LulcClass::kGrassland,   LulcClass::kAgriculture,
    LulcClass::kWetland};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "water", "urban", "barren", "forest", "grassland", "agriculture",
    "wetland"};

constexpr std::size_t index_of(LulcClass c) {
  return static_cast<std::size_t>(c);
}

constexpr std::string_view class_name(LulcClass c) {
  return kClassNames[index_of(c)];
}

constexpr std::optional<LulcClass> class_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kNumClasses)) return std::nullopt;
  return static_cast<LulcClass>(code);
}

constexpr std::optional<LulcClass> class_from_name(std::string_view name) {
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (kClassNames[k] == name) return kAllClasses[k];
  }
  return std::nullopt;
}

// Dense per-class storage indexed by LulcClass.
template <typename T>
using PerClass = std::array<T, kNumClasses>;

}  // namespace lulc
