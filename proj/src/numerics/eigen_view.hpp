#pragma once

#include <Eigen/Core>

#include "fas/numerics/tensor.hpp"

namespace fas::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;
using Strided = Eigen::OuterStride<>;
using BlockView = Eigen::Map<RowMatrix, 0, Strided>;
using ConstBlockView = Eigen::Map<const RowMatrix, 0, Strided>;

inline MatrixView view(Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
inline ConstMatrixView view(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}

// Columns [col, col + width) of a row-major matrix.
inline BlockView columns(Tensor& t, std::size_t col, std::size_t width) {
  return {t.data() + col, static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(width),
          Strided(static_cast<Eigen::Index>(t.cols()))};
}
inline ConstBlockView columns(const Tensor& t, std::size_t col, std::size_t width) {
  return {t.data() + col, static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(width),
          Strided(static_cast<Eigen::Index>(t.cols()))};
}

}  // namespace fas::detail
