#pragma once

#include <cmath>
#include <cstdint>

#include "hyperlfh/matrix.hpp"
#include "hyperlfh/rng.hpp"

namespace hyperlfh {

/// Xavier/Glorot uniform: entries in +-sqrt(6/(rows+cols)).
template <typename T>
Mat<T> xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat<T> m(rows, cols);
  for (std::size_t k = 0; k < m.size(); ++k)
    m.at(k) = static_cast<T>(rng.uniform(-bound, bound));
  return m;
}

template <typename T>
Mat<T> xavier_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return xavier_init<T>(rows, cols, rng);
}

/// Positive uniform draw in (0, bound] for reconstruction coefficients:
/// same scale as Xavier but nonnegative, so every candidate starts live
/// under the relu and the l1 term prunes from there. Capped below 1 to
/// stay inside the incidence clip.
template <typename T>
Mat<T> positive_coeff_init(std::size_t len, Rng& rng) {
  const double bound = std::min(0.9, std::sqrt(6.0 / static_cast<double>(len + 1)));
  Mat<T> m(len, 1);
  for (std::size_t k = 0; k < m.size(); ++k)
    m.at(k) = static_cast<T>(rng.uniform(0.05 * bound, bound));
  return m;
}

}  // namespace hyperlfh
