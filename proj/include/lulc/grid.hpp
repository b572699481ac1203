#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lulc/lulc_class.hpp"

namespace lulc {

struct ClassHistogram {
  PerClass<std::int64_t> counts{};

  std::int64_t total() const;
  std::int64_t operator[](LulcClass c) const { return counts[index_of(c)]; }
  std::int64_t& operator[](LulcClass c) { return counts[index_of(c)]; }

  friend bool operator==(const ClassHistogram&, const ClassHistogram&) = default;
};

// Row-major raster of class codes with uniform cell area and a frozen mask.
// The mask is fixed at construction; only cell classes can be rewritten.
class LulcGrid {
 public:
  LulcGrid(int width, int height, std::vector<LulcClass> cells,
           double cell_area_m2, std::vector<std::uint8_t> frozen = {});

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }
  double cell_area_m2() const { return cell_area_m2_; }

  LulcClass at(std::size_t i) const { return cells_[i]; }
  bool frozen(std::size_t i) const { return frozen_[i] != 0; }
  std::span<const LulcClass> cells() const { return cells_; }
  std::span<const std::uint8_t> frozen_mask() const { return frozen_; }
  std::size_t frozen_count() const;

  void set_class(std::size_t i, LulcClass c) { cells_[i] = c; }

  // Copy whose mask additionally freezes every pixel of the given classes.
  LulcGrid with_frozen_classes(std::span<const LulcClass> classes) const;

  friend bool operator==(const LulcGrid&, const LulcGrid&) = default;

 private:
  int width_;
  int height_;
  std::vector<LulcClass> cells_;
  double cell_area_m2_;
  std::vector<std::uint8_t> frozen_;
};

ClassHistogram class_histogram(const LulcGrid& grid);

// CSV raster: first line `width,height,cell_area_m2` (values), then `height`
// lines of `width` comma-separated class codes.
std::string format_grid_csv(const LulcGrid& grid);
LulcGrid parse_grid_csv(std::string_view text);
std::string format_frozen_csv(const LulcGrid& grid);
// Returns `grid` with the mask read from a 0/1 raster of the same shape.
LulcGrid apply_frozen_csv(const LulcGrid& grid, std::string_view text);

LulcGrid read_grid_csv(const std::filesystem::path& path);
LulcGrid read_grid_with_mask(const std::filesystem::path& grid_path,
                             const std::filesystem::path& mask_path);

}  // namespace lulc
