#pragma once

#include <vector>

#include <Eigen/Core>

namespace consensus_opt {

struct Assignment {
  // row_to_col[i] is the column assigned to row i.
  std::vector<int> row_to_col;
  double cost = 0.0;
};

// Exact minimum-cost perfect matching on a square cost matrix
// (shortest augmenting path with dual potentials, O(n^3)).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace consensus_opt
