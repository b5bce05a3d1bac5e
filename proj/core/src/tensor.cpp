#include "lloss/tensor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace lloss {

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

namespace {

void check_extents(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one extent");
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_str(shape_));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(shape_));
  }
  return shape_[axis];
}

std::span<Real> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<Real>(data_).subspan(r * c, c);
}

std::span<const Real> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const Real>(data_).subspan(r * c, c);
}

void Tensor::fill(Real v) {
  for (auto& x : data_) x = v;
}

void Tensor::reshape(Shape shape) {
  check_extents(shape);
  if (shape_product(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  shape_ = std::move(shape);
}

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> ids) {
  if (src.rank() != 2) throw ShapeError("gather_rows expects a rank-2 tensor, got " + shape_str(src.shape()));
  if (ids.empty()) throw ShapeError("gather_rows needs at least one row id");
  const std::size_t cols = src.cols();
  Tensor out({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= src.rows()) {
      throw ShapeError("row id " + std::to_string(ids[i]) + " out of range for " + shape_str(src.shape()));
    }
    auto from = src.row(ids[i]);
    auto to = out.row(i);
    for (std::size_t c = 0; c < cols; ++c) to[c] = from[c];
  }
  return out;
}

void check_finite(const Tensor& t, std::string_view where) {
  for (Real v : t.values()) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in " + std::string(where));
  }
}

void require_shape(const Tensor& t, const Shape& expected, std::string_view what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected shape " + shape_str(expected) + ", got " +
                     shape_str(t.shape()));
  }
}

ParamBlock::ParamBlock(Tensor initial)
    : value(std::move(initial)), gradient(Tensor::zeros_like(value)), velocity(Tensor::zeros_like(value)) {}

}  // namespace lloss
