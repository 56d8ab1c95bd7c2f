#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace absa {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles, rank <= 3. Extents may be zero (an empty
// sentence embeds to a 0 x d matrix).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return rank() < 2 ? 1 : dim(1); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  // Row i of a matrix as a span; for a rank-1 tensor, the whole vector.
  std::span<const double> row(std::size_t r) const;
  std::span<double> row(std::size_t r);
  Tensor row_tensor(std::size_t r) const;

  // Rows [begin, end) of a matrix.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  void fill(double v);
  bool all_finite() const;
  double sum() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Row-wise concatenation [a | b]; both must have the same row count.
Tensor concat_cols(const Tensor& a, const Tensor& b);

// Stacks equal-length vectors into an n x k matrix. An empty list gives 0 x k.
Tensor stack_rows(const std::vector<Tensor>& rows, std::size_t width);

// Numerically stable softmax of a vector.
std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> xs);

}  // namespace absa
