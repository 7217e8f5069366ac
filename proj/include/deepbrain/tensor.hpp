// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "signal_model.hpp"

namespace deepbrain {

/// Row-major dense matrix used for every 2-D activation and weight.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixView = Eigen::Map<const Matrix>;
using RowVectorView = Eigen::Map<const RowVector>;

/// Shape plus flat row-major values.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {
    if (element_count(shape) != values.size())
      throw ShapeError("tensor shape does not match value count");
  }
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), values(element_count(shape), 0.0) {}

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Stacks window features into an [n, T, 1] batch.
inline Tensor batch_from_windows(std::span<const ProcessedWindow> windows) {
  Tensor t({windows.size(), kWindowLength, 1});
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto f = windows[i].features();
    std::copy(f.begin(), f.end(), t.values.begin() + static_cast<std::ptrdiff_t>(i * kWindowLength));
  }
  return t;
}

/// [n x 4] one-hot label matrix.
inline Matrix one_hots_from_windows(std::span<const ProcessedWindow> windows) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(windows.size()), kClassCount);
  for (std::size_t i = 0; i < windows.size(); ++i)
    y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(class_index(windows[i].label()))) = 1.0;
  return y;
}

inline Tensor to_tensor(const Matrix& m) {
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                std::vector<double>(m.data(), m.data() + m.size()));
}

inline Matrix to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw ShapeError("expected a rank-2 tensor");
  return MatrixView(t.values.data(), static_cast<Eigen::Index>(t.dim(0)),
                    static_cast<Eigen::Index>(t.dim(1)));
}

}  // namespace deepbrain
