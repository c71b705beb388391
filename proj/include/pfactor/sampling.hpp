#pragma once

#include <cstdint>
#include <vector>

#include "pfactor/polynomial.hpp"

namespace pfactor {

/// Randomly shifted Halton sequence on [0,1)^dim. The shift comes from a
/// seeded mt19937_64, so equal seeds give equal point sets.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed);
  Vector next();
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t index_ = 1;
  std::vector<double> shift_;
};

/// `count` unit vectors in R^dim (Halton cube points kept inside the unit ball
/// and normalized). In R^1 the result alternates +1 and -1.
std::vector<Vector> sphere_points(int dim, int count, std::uint64_t seed);

/// `count` points of the closed ball of radius r around c.
std::vector<Vector> ball_points(const Vector& center, double radius, int count,
                                std::uint64_t seed);

/// Unit vectors at angles 2 pi j / count, j = 0..count-1.
std::vector<Vector> circle_grid(int count);

}  // namespace pfactor
