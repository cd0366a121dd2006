#pragma once

#include <cmath>

#include "levelset/grid.hpp"

namespace lsk {

// Mean absolute change over interior cells.
inline double l1_change(const ScalarField& a_new, const ScalarField& a_old) {
  require_same_grid(a_new, a_old, "l1_change");
  CompensatedSum s;
  a_new.grid().for_each_cell([&](int, int, int, std::size_t n) { s.add(std::abs(a_new[n] - a_old[n])); });
  return s.value() / static_cast<double>(a_new.grid().interior_count());
}

// |an - num| / (|an| + eps); saturates near 1/eps where an vanishes.
inline ScalarField relative_error_field(const ScalarField& numeric, const ScalarField& analytic,
                                        double eps = 5e-16) {
  require_same_grid(numeric, analytic, "relative_error_field");
  ScalarField out(numeric.grid());
  numeric.grid().for_each_cell([&](int, int, int, std::size_t n) {
    out[n] = std::abs(analytic[n] - numeric[n]) / (std::abs(analytic[n]) + eps);
  });
  return out;
}

}  // namespace lsk
