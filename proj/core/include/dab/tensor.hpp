#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace dab {

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are what the rest of the library uses; nothing enforces an
// upper bound on rank but no op produces anything beyond rank 2.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shp, std::vector<double> dat);

  static Tensor scalar(double v);
  static Tensor zeros(std::vector<std::size_t> shp);
  static Tensor full(std::vector<std::size_t> shp, double v);
  static Tensor row_vector(std::vector<double> v);       // shape {n}
  static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> v);

  std::size_t size() const;          // product of shape (1 for rank 0)
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;          // rank-2 helpers
  std::size_t cols() const;

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

}  // namespace dab
