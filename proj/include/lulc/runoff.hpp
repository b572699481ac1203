#pragma once

#include <filesystem>
#include <string_view>

#include "lulc/grid.hpp"
#include "lulc/lulc_class.hpp"

namespace lulc {

// mm/hr * m^2 -> m^3/s
inline constexpr double kRationalUnitDivisor = 3.6e6;

// Rational method Q = C i A in m^3/s for i in mm/hr and A in m^2.
constexpr double rational_runoff(double coefficient, double intensity_mm_per_hr,
                                 double area_m2) {
  return coefficient * intensity_mm_per_hr * area_m2 / kRationalUnitDivisor;
}

struct CoefficientTable {
  PerClass<double> c{};
  double intensity_mm_per_hr = 10.0;

  double operator[](LulcClass k) const { return c[index_of(k)]; }
  double min() const;
  double max() const;

  // Throws kInvalidArgument unless every c is in [0,1], intensity is
  // non-negative and finite, and wetland is the strict minimum.
  void validate() const;
};

// water 0.95, urban 0.85, barren 0.60, forest 0.15, grassland 0.30,
// agriculture 0.40, wetland 0.05; intensity 10 mm/hr.
CoefficientTable default_coefficients();

// Reads `class_name,coefficient` rows (an optional header row is skipped).
// Every class must appear exactly once. Intensity is taken from `intensity`.
CoefficientTable parse_coefficients_csv(std::string_view text,
                                        double intensity_mm_per_hr);
CoefficientTable read_coefficients_csv(const std::filesystem::path& path,
                                       double intensity_mm_per_hr);

struct RunoffResult {
  double total_m3_per_s = 0.0;
  PerClass<double> per_class_m3_per_s{};
  double composite_c = 0.0;
};

// Area-weighted coefficient. Throws kEmptyGrid on an empty histogram.
double composite_coefficient(const ClassHistogram& hist,
                             const CoefficientTable& table);

RunoffResult runoff_from_histogram(const ClassHistogram& hist,
                                   double cell_area_m2,
                                   const CoefficientTable& table);

RunoffResult compute_runoff(const LulcGrid& grid, const CoefficientTable& table);

}  // namespace lulc
