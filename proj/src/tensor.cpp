#include "tubekit/tensor.hpp"

#include <numeric>
#include <sstream>

namespace tubekit {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int64_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  for (int64_t dim : shape) {
    if (dim < 1) throw ShapeError("tensor dimension must be >= 1, got shape " + shape_to_string(shape));
  }
  if (static_cast<int64_t>(data.size()) != shape_numel(shape)) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_to_string(shape));
  }
}

Tensor Tensor::zeros(std::vector<int64_t> shape) {
  int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::from(std::vector<double> values) {
  int64_t n = static_cast<int64_t>(values.size());
  return Tensor({n}, std::move(values));
}

int64_t Tensor::numel() const { return static_cast<int64_t>(data.size()); }

int64_t Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str());
  return shape[static_cast<size_t>(axis)];
}

double& Tensor::at4(int64_t n, int64_t c, int64_t h, int64_t w) {
  return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
}

double Tensor::at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
  return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
}

double& Tensor::at2(int64_t r, int64_t c) {
  return data[static_cast<size_t>(r * shape[1] + c)];
}

double Tensor::at2(int64_t r, int64_t c) const {
  return data[static_cast<size_t>(r * shape[1] + c)];
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

void require_same_shape(const Tensor& a, const Tensor& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ShapeError(what + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

void require_rank(const Tensor& t, int rank, const std::string& what) {
  if (t.rank() != rank) {
    throw ShapeError(what + ": expected rank " + std::to_string(rank) + ", got shape " + t.shape_str());
  }
}

}  // namespace tubekit
