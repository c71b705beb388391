#include "pfactor/sampling.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

}  // namespace

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 1 || dim > static_cast<int>(std::size(kPrimes))) {
    throw InputError("Halton dimension out of supported range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  shift_.resize(static_cast<size_t>(dim));
  for (auto& s : shift_) s = u(rng);
}

Vector HaltonSequence::next() {
  Vector v(dim_);
  for (int j = 0; j < dim_; ++j) {
    double x = radical_inverse(index_, kPrimes[j]) + shift_[static_cast<size_t>(j)];
    v(j) = x - std::floor(x);
  }
  ++index_;
  return v;
}

std::vector<Vector> sphere_points(int dim, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(std::max(count, 0)));
  if (dim == 1) {
    for (int i = 0; i < count; ++i) out.push_back(Vector::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
    return out;
  }
  HaltonSequence seq(dim, seed);
  while (static_cast<int>(out.size()) < count) {
    Vector v = 2.0 * seq.next() - Vector::Ones(dim);
    const double r = v.norm();
    if (r > 1.0 || r < 1e-3) continue;
    out.push_back(v / r);
  }
  return out;
}

std::vector<Vector> ball_points(const Vector& center, double radius, int count,
                                std::uint64_t seed) {
  const int dim = static_cast<int>(center.size());
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(std::max(count, 0)));
  if (dim == 0) return out;
  HaltonSequence seq(dim, seed);
  while (static_cast<int>(out.size()) < count) {
    Vector v = 2.0 * seq.next() - Vector::Ones(dim);
    if (v.norm() > 1.0) continue;
    out.push_back(center + radius * v);
  }
  return out;
}

std::vector<Vector> circle_grid(int count) {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double t = 2.0 * std::numbers::pi * j / count;
    Vector v(2);
    v << std::cos(t), std::sin(t);
    out.push_back(v);
  }
  return out;
}

}  // namespace pfactor
