#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "degentrace/jets.hpp"

namespace degentrace::testing {

inline Jet random_jet(std::mt19937& rng, int dim, int order, int lowest = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet a(dim, order);
  auto c = a.coefficients();
  for (std::size_t p = 0; p < c.size(); ++p)
    if (a.layout().degree_of(p) >= lowest) c[p] = u(rng);
  return a;
}

// Largest coefficient difference over degrees 0..deg.
inline double diff_through(const Jet& a, const Jet& b, int deg) {
  double m = 0.0;
  for (int j = 0; j <= deg; ++j) {
    auto x = a.degree_coefficients(j), y = b.degree_coefficients(j);
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

}  // namespace degentrace::testing
