#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rham {

// Real-valued function sampled at the grid nodes.
struct ScalarField {
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(std::size_t n, double c = 0.0) : values(n, c) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  bool all_finite() const {
    for (double x : values)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline double field_min(const ScalarField& a) {
  return *std::min_element(a.values.begin(), a.values.end());
}

inline double field_max(const ScalarField& a) {
  return *std::max_element(a.values.begin(), a.values.end());
}

inline double field_max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double x : a.values) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace rham
