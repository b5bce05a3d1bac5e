#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lloss {

#ifdef LLOSS_REAL_FLOAT32
using Real = float;
#else
using Real = double;
#endif

using Rng = std::mt19937_64;
using Shape = std::vector<std::size_t>;

// Error hierarchy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UnsupportedStrategy : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

std::string shape_str(const Shape& shape);
std::size_t shape_product(const Shape& shape);

/// Dense row-major array. Extents are positive; the empty default tensor
/// (rank 0, no data) is only used as a placeholder before assignment.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real{0});
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rank-2 helpers.
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }
  Real& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  std::span<Real> row(std::size_t r);
  std::span<const Real> row(std::size_t r) const;

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }
  const std::vector<Real>& storage() const noexcept { return data_; }

  void fill(Real v);
  void reshape(Shape shape);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Rows `ids` of a rank-2 tensor, in the given order.
Tensor gather_rows(const Tensor& src, std::span<const std::size_t> ids);

/// Throws NumericError naming `where` if any value is NaN or infinite.
void check_finite(const Tensor& t, std::string_view where);

void require_shape(const Tensor& t, const Shape& expected, std::string_view what);

/// A trainable tensor with its gradient accumulator and momentum buffer.
struct ParamBlock {
  Tensor value;
  Tensor gradient;
  Tensor velocity;

  ParamBlock() = default;
  explicit ParamBlock(Tensor initial);

  void zero_grad() { gradient.fill(Real{0}); }
  void reset_velocity() { velocity.fill(Real{0}); }
};

}  // namespace lloss
