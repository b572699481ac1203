#include "lulc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-empty lines, trailing CR stripped.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = trim(text.substr(start, pos - start));
    if (!line.empty()) out.push_back(line);
    start = pos + 1;
  }
  return out;
}

struct RasterHeader {
  int width;
  int height;
  double cell_area_m2;
};

// Accepts the value line, optionally preceded by the literal names line.
std::size_t parse_header(const std::vector<std::string_view>& lines,
                         RasterHeader& header) {
  std::size_t idx = 0;
  if (!lines.empty() && lines[0] == "width,height,cell_area_m2") idx = 1;
  if (idx >= lines.size()) fail(ErrorKind::kInvalidArgument, "raster: missing header");
  const auto fields = split(lines[idx], ',');
  if (fields.size() != 3) {
    fail(ErrorKind::kInvalidArgument,
         "raster: header must be width,height,cell_area_m2");
  }
  header.width = static_cast<int>(parse_int(fields[0]));
  header.height = static_cast<int>(parse_int(fields[1]));
  header.cell_area_m2 = parse_double(fields[2]);
  return idx + 1;
}

template <typename Fn>
void parse_body(const std::vector<std::string_view>& lines, std::size_t first,
                const RasterHeader& h, Fn&& on_value) {
  if (lines.size() - first != static_cast<std::size_t>(h.height)) {
    fail(ErrorKind::kShapeMismatch,
         "raster: expected " + std::to_string(h.height) + " rows, found " +
             std::to_string(lines.size() - first));
  }
  for (int r = 0; r < h.height; ++r) {
    const auto fields = split(lines[first + r], ',');
    if (fields.size() != static_cast<std::size_t>(h.width)) {
      fail(ErrorKind::kShapeMismatch,
           "raster: row " + std::to_string(r) + " has " +
               std::to_string(fields.size()) + " values, expected " +
               std::to_string(h.width));
    }
    for (const auto f : fields) on_value(parse_int(f));
  }
}

template <typename Fn>
std::string format_raster(const LulcGrid& grid, Fn&& value_at) {
  std::string out = std::to_string(grid.width()) + "," +
                    std::to_string(grid.height()) + "," +
                    format_double(grid.cell_area_m2()) + "\n";
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (c) out.push_back(',');
      out += std::to_string(value_at(static_cast<std::size_t>(r) * grid.width() + c));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace

std::int64_t ClassHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

LulcGrid::LulcGrid(int width, int height, std::vector<LulcClass> cells,
                   double cell_area_m2, std::vector<std::uint8_t> frozen)
    : width_(width),
      height_(height),
      cells_(std::move(cells)),
      cell_area_m2_(cell_area_m2),
      frozen_(std::move(frozen)) {
  if (width < 0 || height < 0) {
    fail(ErrorKind::kInvalidArgument, "grid dimensions must be non-negative");
  }
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (cells_.size() != n) {
    fail(ErrorKind::kShapeMismatch,
         "grid has " + std::to_string(cells_.size()) + " cells, expected " +
             std::to_string(n));
  }
  if (!(cell_area_m2_ > 0.0) || !std::isfinite(cell_area_m2_)) {
    fail(ErrorKind::kInvalidArgument, "cell_area_m2 must be positive");
  }
  if (frozen_.empty()) frozen_.assign(n, 0);
  if (frozen_.size() != n) {
    fail(ErrorKind::kShapeMismatch, "frozen mask shape differs from grid");
  }
  for (auto& f : frozen_) f = f ? 1 : 0;
}

std::size_t LulcGrid::frozen_count() const {
  return static_cast<std::size_t>(std::count(frozen_.begin(), frozen_.end(), 1));
}

LulcGrid LulcGrid::with_frozen_classes(std::span<const LulcClass> classes) const {
  auto mask = frozen_;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (std::find(classes.begin(), classes.end(), cells_[i]) != classes.end()) {
      mask[i] = 1;
    }
  }
  return LulcGrid(width_, height_, cells_, cell_area_m2_, std::move(mask));
}

ClassHistogram class_histogram(const LulcGrid& grid) {
  ClassHistogram h;
  for (const auto c : grid.cells()) ++h[c];
  return h;
}

std::string format_grid_csv(const LulcGrid& grid) {
  return format_raster(grid, [&](std::size_t i) {
    return static_cast<int>(grid.at(i));
  });
}

std::string format_frozen_csv(const LulcGrid& grid) {
  return format_raster(grid, [&](std::size_t i) {
    return grid.frozen(i) ? 1 : 0;
  });
}

LulcGrid parse_grid_csv(std::string_view text) {
  const auto lines = lines_of(text);
  RasterHeader h{};
  const auto first = parse_header(lines, h);
  if (h.width <= 0 || h.height <= 0) {
    fail(ErrorKind::kInvalidArgument, "raster: width and height must be positive");
  }
  std::vector<LulcClass> cells;
  cells.reserve(static_cast<std::size_t>(h.width) * h.height);
  parse_body(lines, first, h, [&](long long v) {
    const auto c = class_from_code(static_cast<int>(v));
    if (!c || v != static_cast<int>(v)) {
      fail(ErrorKind::kInvalidArgument,
           "raster: class code out of range: " + std::to_string(v));
    }
    cells.push_back(*c);
  });
  return LulcGrid(h.width, h.height, std::move(cells), h.cell_area_m2);
}

LulcGrid apply_frozen_csv(const LulcGrid& grid, std::string_view text) {
  const auto lines = lines_of(text);
  RasterHeader h{};
  const auto first = parse_header(lines, h);
  if (h.width != grid.width() || h.height != grid.height()) {
    fail(ErrorKind::kShapeMismatch, "frozen mask shape differs from grid");
  }
  std::vector<std::uint8_t> mask;
  mask.reserve(grid.size());
  parse_body(lines, first, h, [&](long long v) {
    if (v != 0 && v != 1) {
      fail(ErrorKind::kInvalidArgument, "frozen mask values must be 0 or 1");
    }
    mask.push_back(static_cast<std::uint8_t>(v));
  });
  return LulcGrid(grid.width(), grid.height(),
                  std::vector<LulcClass>(grid.cells().begin(), grid.cells().end()),
                  grid.cell_area_m2(), std::move(mask));
}

LulcGrid read_grid_csv(const std::filesystem::path& path) {
  return parse_grid_csv(read_text_file(path));
}

LulcGrid read_grid_with_mask(const std::filesystem::path& grid_path,
                             const std::filesystem::path& mask_path) {
  auto grid = read_grid_csv(grid_path);
  if (mask_path.empty()) return grid;
  return apply_frozen_csv(grid, read_text_file(mask_path));
}

}  // namespace lulc
