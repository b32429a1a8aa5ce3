#include "dab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "dab/errors.hpp"

namespace dab {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> dat)
    : shape(std::move(shp)), data(std::move(dat)) {
  if (data.size() != shape_size(shape)) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(std::vector<std::size_t> shp) {
  std::vector<double> d(shape_size(shp), 0.0);
  return Tensor(std::move(shp), std::move(d));
}

Tensor Tensor::full(std::vector<std::size_t> shp, double v) {
  std::vector<double> d(shape_size(shp), v);
  return Tensor(std::move(shp), std::move(d));
}

Tensor Tensor::row_vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t r, std::size_t c, std::vector<double> v) {
  return Tensor({r, c}, std::move(v));
}

std::size_t Tensor::size() const { return shape_size(shape); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on tensor of shape " + shape_str(shape));
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on tensor of shape " + shape_str(shape));
  return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dab
