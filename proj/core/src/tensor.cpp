#include "absa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "absa/error.hpp"

namespace absa {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  if (shape_.empty() || shape_.size() > 3) {
    throw ShapeError("Tensor: rank must be 1..3, got " + shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.empty() || shape_.size() > 3) {
    throw ShapeError("Tensor: rank must be 1..3, got " + shape_string(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("Tensor: shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Tensor::matrix: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("Tensor::dim: axis " + std::to_string(axis) +
                     " out of range for " + shape_string(shape_));
  }
  return shape_[axis];
}

std::span<const double> Tensor::row(std::size_t r) const {
  if (rank() == 1) return data_;
  if (r >= rows()) {
    throw ShapeError("Tensor::row: row " + std::to_string(r) +
                     " out of range for " + shape_string(shape_));
  }
  const std::size_t c = size() / rows();
  return std::span<const double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::row(std::size_t r) {
  if (rank() == 1) return data_;
  if (r >= rows()) {
    throw ShapeError("Tensor::row: row " + std::to_string(r) +
                     " out of range for " + shape_string(shape_));
  }
  const std::size_t c = size() / rows();
  return std::span<double>(data_).subspan(r * c, c);
}

Tensor Tensor::row_tensor(std::size_t r) const {
  auto s = row(r);
  return Tensor::vector(std::vector<double>(s.begin(), s.end()));
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t end) const {
  if (rank() != 2 || begin > end || end > rows()) {
    throw ShapeError("Tensor::slice_rows: [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for " +
                     shape_string(shape_));
  }
  const std::size_t c = cols();
  return Tensor({end - begin, c},
                std::vector<double>(data_.begin() + begin * c,
                                    data_.begin() + end * c));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Tensor::sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    throw ShapeError("concat_cols: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out({n, ca + cb});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * ca, ca, out.data() + i * (ca + cb));
    std::copy_n(b.data() + i * cb, cb, out.data() + i * (ca + cb) + ca);
  }
  return out;
}

Tensor stack_rows(const std::vector<Tensor>& rows, std::size_t width) {
  Tensor out({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw ShapeError("stack_rows: row " + std::to_string(i) + " has shape " +
                       shape_string(rows[i].shape()) + ", expected width " +
                       std::to_string(width));
    }
    std::copy_n(rows[i].data(), width, out.data() + i * width);
  }
  return out;
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

}  // namespace absa
