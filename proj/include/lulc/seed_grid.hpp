#pragma once

#include "lulc/grid.hpp"

namespace lulc {

inline constexpr int kSeedGridWidth = 25;
inline constexpr int kSeedGridHeight = 40;
inline constexpr double kSeedGridCellArea = 900.0;  // 30 m pixels

// Class totals of the bundled study-area grid, by class code.
inline constexpr PerClass<std::int64_t> kSeedGridCounts = {5, 93, 4, 30, 138, 718, 12};

// Deterministic 25x40 grid with exactly kSeedGridCounts, placed by a fixed
// Fisher-Yates shuffle; urban and wetland pixels are frozen.
LulcGrid make_seed_grid();

}  // namespace lulc
