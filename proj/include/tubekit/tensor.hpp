#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubekit/errors.hpp"

namespace tubekit {

// Dense row-major tensor of 64-bit floats. 4-D tensors use NCHW order.
// All numerics in this library run at double precision.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor scalar(double value);
  static Tensor from(std::vector<double> values);  // 1-D

  int64_t numel() const;
  int rank() const { return static_cast<int>(shape.size()); }
  int64_t dim(int axis) const;

  // 4-D accessors (NCHW). Bounds are the caller's responsibility.
  double& at4(int64_t n, int64_t c, int64_t h, int64_t w);
  double at4(int64_t n, int64_t c, int64_t h, int64_t w) const;
  double& at2(int64_t r, int64_t c);
  double at2(int64_t r, int64_t c) const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  std::string shape_str() const;
};

// Throws ShapeError naming `what` if the shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const std::string& what);
void require_rank(const Tensor& t, int rank, const std::string& what);

int64_t shape_numel(const std::vector<int64_t>& shape);
std::string shape_to_string(const std::vector<int64_t>& shape);

}  // namespace tubekit
