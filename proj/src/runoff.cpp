#include "lulc/runoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lulc/error.hpp"
#include "lulc/io.hpp"

namespace lulc {

double CoefficientTable::min() const { return *std::min_element(c.begin(), c.end()); }
double CoefficientTable::max() const { return *std::max_element(c.begin(), c.end()); }

void CoefficientTable::validate() const {
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (!(c[k] >= 0.0 && c[k] <= 1.0)) {
      fail(ErrorKind::kInvalidArgument,
           "coefficient for " + std::string(kClassNames[k]) + " outside [0,1]");
    }
  }
  if (!(intensity_mm_per_hr >= 0.0) || !std::isfinite(intensity_mm_per_hr)) {
    fail(ErrorKind::kInvalidArgument, "rainfall intensity must be >= 0");
  }
  const double wet = (*this)[LulcClass::kWetland];
  for (const auto k : kAllClasses) {
    if (k != LulcClass::kWetland && !((*this)[k] > wet)) {
      fail(ErrorKind::kInvalidArgument,
           "wetland coefficient must be strictly below " +
               std::string(class_name(k)));
    }
  }
}

CoefficientTable default_coefficients() {
  CoefficientTable t;
  t.c[index_of(LulcClass::kWater)] = 0.95;
  t.c[index_of(LulcClass::kUrban)] = 0.85;
  t.c[index_of(LulcClass::kBarren)] = 0.60;
  t.c[index_of(LulcClass::kForest)] = 0.15;
  t.c[index_of(LulcClass::kGrassland)] = 0.30;
  t.c[index_of(LulcClass::kAgriculture)] = 0.40;
  t.c[index_of(LulcClass::kWetland)] = 0.05;
  t.intensity_mm_per_hr = 10.0;
  return t;
}

CoefficientTable parse_coefficients_csv(std::string_view text,
                                        double intensity_mm_per_hr) {
  CoefficientTable t;
  t.intensity_mm_per_hr = intensity_mm_per_hr;
  PerClass<bool> seen{};
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line == "class_name,coefficient") continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      fail(ErrorKind::kInvalidArgument,
           "coefficients: expected class_name,coefficient in '" +
               std::string(line) + "'");
    }
    const auto name = trim(line.substr(0, comma));
    const auto cls = class_from_name(name);
    if (!cls) {
      fail(ErrorKind::kInvalidArgument,
           "coefficients: unknown class '" + std::string(name) + "'");
    }
    if (seen[index_of(*cls)]) {
      fail(ErrorKind::kInvalidArgument,
           "coefficients: duplicate class '" + std::string(name) + "'");
    }
    seen[index_of(*cls)] = true;
    t.c[index_of(*cls)] = parse_double(line.substr(comma + 1));
  }
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (!seen[k]) {
      fail(ErrorKind::kInvalidArgument,
           "coefficients: missing class '" + std::string(kClassNames[k]) + "'");
    }
  }
  t.validate();
  return t;
}

CoefficientTable read_coefficients_csv(const std::filesystem::path& path,
                                       double intensity_mm_per_hr) {
  return parse_coefficients_csv(read_text_file(path), intensity_mm_per_hr);
}

double composite_coefficient(const ClassHistogram& hist,
                             const CoefficientTable& table) {
  const auto n = hist.total();
  if (n <= 0) fail(ErrorKind::kEmptyGrid, "composite coefficient of an empty grid");
  double weighted = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    weighted += table.c[k] * static_cast<double>(hist.counts[k]);
  }
  return std::clamp(weighted / static_cast<double>(n), table.min(), table.max());
}

RunoffResult runoff_from_histogram(const ClassHistogram& hist,
                                   double cell_area_m2,
                                   const CoefficientTable& table) {
  RunoffResult r;
  r.composite_c = composite_coefficient(hist, table);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    r.per_class_m3_per_s[k] =
        rational_runoff(table.c[k], table.intensity_mm_per_hr,
                        static_cast<double>(hist.counts[k]) * cell_area_m2);
    r.total_m3_per_s += r.per_class_m3_per_s[k];
  }
  return r;
}

RunoffResult compute_runoff(const LulcGrid& grid, const CoefficientTable& table) {
  return runoff_from_histogram(class_histogram(grid), grid.cell_area_m2(), table);
}

}  // namespace lulc
