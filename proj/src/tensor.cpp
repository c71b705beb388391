#include "pfactor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

long ipow(int base, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void decode(long col, int n, int k, std::vector<int>& idx) {
  idx.assign(static_cast<size_t>(k), 0);
  for (int j = k - 1; j >= 0; --j) {
    idx[static_cast<size_t>(j)] = static_cast<int>(col % n);
    col /= n;
  }
}

long encode(std::span<const int> idx, int n) {
  long col = 0;
  for (int i : idx) col = col * n + i;
  return col;
}

double falling(int e, int c) {
  double r = 1.0;
  for (int i = 0; i < c; ++i) r *= e - i;
  return r;
}

}  // namespace

DerivativeTensor::DerivativeTensor(int order, int n, Vector base_point, Matrix entries)
    : order_(order), n_(n), base_point_(std::move(base_point)), entries_(std::move(entries)) {
  if (order < 0 || n < 0) throw DimensionMismatch("tensor order and dimension must be non-negative");
  if (entries_.cols() != ipow(n, order)) {
    throw DimensionMismatch(fmt::format("tensor of order {} over R^{} needs {} columns, got {}",
                                        order, n, ipow(n, order), entries_.cols()));
  }
  if (base_point_.size() != 0 && base_point_.size() != n) {
    throw DimensionMismatch("tensor base point has wrong dimension");
  }
}

DerivativeTensor DerivativeTensor::zero(int order, int n, int m, Vector base_point) {
  return DerivativeTensor(order, n, std::move(base_point),
                          Matrix::Zero(m, static_cast<Eigen::Index>(ipow(n, order))));
}

double DerivativeTensor::at(int row, std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw DimensionMismatch("index length != order");
  if (row < 0 || row >= m()) throw IndexOutOfRange("tensor row out of range");
  for (int i : index) {
    if (i < 0 || i >= n_) throw IndexOutOfRange("tensor index out of range");
  }
  return entries_(row, encode(index, n_));
}

DerivativeTensor DerivativeTensor::contract(const Vector& h) const {
  if (order_ < 1) throw DimensionMismatch("cannot contract an order-0 tensor");
  if (h.size() != n_) throw DimensionMismatch("contraction vector has wrong dimension");
  const long cols = ipow(n_, order_ - 1);
  Matrix out = Matrix::Zero(m(), cols);
  for (long c = 0; c < cols; ++c) {
    for (int j = 0; j < n_; ++j) out.col(c) += h(j) * entries_.col(c * n_ + j);
  }
  return DerivativeTensor(order_ - 1, n_, base_point_, std::move(out));
}

Matrix DerivativeTensor::contract_to_matrix(const Vector& h) const {
  if (order_ < 1) throw DimensionMismatch("order-0 tensor has no matrix form");
  if (h.size() != n_) throw DimensionMismatch("contraction vector has wrong dimension");
  if (order_ == 1) return entries_;
  DerivativeTensor t = contract(h);
  while (t.order() > 1) t = t.contract(h);
  return t.flattened();
}

Vector DerivativeTensor::apply(const Vector& h) const {
  if (order_ == 0) return entries_.col(0);
  return contract_to_matrix(h) * h;
}

DerivativeTensor DerivativeTensor::left_multiply(const Matrix& a) const {
  if (a.cols() != m()) throw DimensionMismatch("left factor has wrong column count");
  return DerivativeTensor(order_, n_, base_point_, a * entries_);
}

double DerivativeTensor::symmetry_defect(std::span<const int> permutation) const {
  if (static_cast<int>(permutation.size()) != order_) {
    throw DimensionMismatch("permutation length != order");
  }
  std::vector<int> idx, permuted(static_cast<size_t>(order_));
  double worst = 0.0;
  for (long c = 0; c < entries_.cols(); ++c) {
    decode(c, n_, order_, idx);
    for (int j = 0; j < order_; ++j) {
      permuted[static_cast<size_t>(j)] = idx[static_cast<size_t>(permutation[static_cast<size_t>(j)])];
    }
    const long pc = encode(permuted, n_);
    worst = std::max(worst, (entries_.col(c) - entries_.col(pc)).cwiseAbs().maxCoeff());
  }
  return worst;
}

DerivativeTensor derivative_tensor(const PolynomialMap& map, const Vector& x, int order) {
  if (order < 1) throw InputError("derivative order must be at least 1");
  const int n = map.n_in();
  if (x.size() != n) throw DimensionMismatch("evaluation point has wrong dimension");
  const long cols = ipow(n, order);
  Matrix entries = Matrix::Zero(map.n_out(), cols);
  if (order > map.degree()) return DerivativeTensor(order, n, x, std::move(entries));

  std::map<std::vector<int>, Eigen::VectorXd> cache;
  std::vector<int> idx, counts(static_cast<size_t>(n));
  for (long c = 0; c < cols; ++c) {
    decode(c, n, order, idx);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i : idx) ++counts[static_cast<size_t>(i)];
    auto it = cache.find(counts);
    if (it == cache.end()) {
      Vector col(map.n_out());
      for (int r = 0; r < map.n_out(); ++r) {
        double sum = 0.0;
        for (const auto& t : map.component(r).terms()) {
          double v = t.coeff;
          for (int j = 0; j < n && v != 0.0; ++j) {
            const int e = t.exps[static_cast<size_t>(j)];
            const int k = counts[static_cast<size_t>(j)];
            if (k > e) {
              v = 0.0;
              break;
            }
            v *= falling(e, k);
            for (int q = 0; q < e - k; ++q) v *= x(j);
          }
          sum += v;
        }
        col(r) = sum;
      }
      it = cache.emplace(counts, std::move(col)).first;
    }
    entries.col(c) = it->second;
  }
  return DerivativeTensor(order, n, x, std::move(entries));
}

Matrix jacobian(const PolynomialMap& map, const Vector& x) {
  return derivative_tensor(map, x, 1).flattened();
}

double default_fd_step(const Vector& x, int order) {
  return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 2)) * (1.0 + x.norm());
}

DerivativeTensor fd_derivative(const VectorFunction& f, const Vector& x, int order,
                               std::optional<double> step) {
  if (order < 1 || order > 4) throw InputError("finite-difference order must be in 1..4");
  const double s = step.value_or(default_fd_step(x, order));
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("finite-difference step must be positive");
  const int n = static_cast<int>(x.size());

  auto eval = [&](const Vector& pt) {
    Vector v = f(pt);
    if (!v.allFinite()) throw NonFiniteValue("non-finite function value inside the stencil");
    return v;
  };
  const int m = static_cast<int>(eval(x).size());
  const long cols = ipow(n, order);
  Matrix entries = Matrix::Zero(m, cols);
  const double scale = std::pow(2.0 * s, order);

  std::vector<int> idx, sorted;
  std::map<std::vector<int>, Vector> cache;
  for (long c = 0; c < cols; ++c) {
    decode(c, n, order, idx);
    sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    auto it = cache.find(sorted);
    if (it == cache.end()) {
      Vector acc = Vector::Zero(m);
      for (int mask = 0; mask < (1 << order); ++mask) {
        Vector pt = x;
        int sign = 1;
        for (int j = 0; j < order; ++j) {
          const bool minus = (mask >> j) & 1;
          pt(sorted[static_cast<size_t>(j)]) += minus ? -s : s;
          if (minus) sign = -sign;
        }
        acc += sign * eval(pt);
      }
      it = cache.emplace(sorted, acc / scale).first;
    }
    entries.col(c) = it->second;
  }
  return DerivativeTensor(order, n, x, std::move(entries));
}

}  // namespace pfactor
