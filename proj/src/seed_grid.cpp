#include "lulc/seed_grid.hpp"

#include "lulc/rng.hpp"

namespace lulc {

LulcGrid make_seed_grid() {
  std::vector<LulcClass> cells;
  for (const auto c : kAllClasses) {
    cells.insert(cells.end(), static_cast<std::size_t>(kSeedGridCounts[index_of(c)]), c);
  }
  Xoshiro256 rng(0x5eed'6121'd0c5'0001ULL);
  deterministic_shuffle(cells.begin(), cells.end(), rng);
  const LulcGrid grid(kSeedGridWidth, kSeedGridHeight, std::move(cells), kSeedGridCellArea);
  const LulcClass frozen[] = {LulcClass::kUrban, LulcClass::kWetland};
  return grid.with_frozen_classes(frozen);
}

}  // namespace lulc
