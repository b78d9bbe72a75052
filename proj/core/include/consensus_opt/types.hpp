#pragma once

#include <span>

#include <Eigen/Core>

namespace consensus_opt {

using Vector = Eigen::VectorXd;

// N particles by d coordinates; row-major so each particle is contiguous.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const Positions& positions, Eigen::Index row) {
  return {positions.data() + row * positions.cols(), static_cast<std::size_t>(positions.cols())};
}

inline std::span<double> row_span(Positions& positions, Eigen::Index row) {
  return {positions.data() + row * positions.cols(), static_cast<std::size_t>(positions.cols())};
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace consensus_opt
