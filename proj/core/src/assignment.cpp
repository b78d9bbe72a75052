#include "consensus_opt/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace consensus_opt {

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  Assignment result;
  result.row_to_col.assign(static_cast<std::size_t>(n), -1);
  if (n == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual source row/column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (int row = 1; row <= n; ++row) {
    col_owner[0] = row;
    int col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const int i0 = col_owner[col0];
      double delta = kInf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (col_owner[col0] != 0);
    // Flip the augmenting path.
    do {
      const int col1 = way[col0];
      col_owner[col0] = col_owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  for (int j = 1; j <= n; ++j) result.row_to_col[static_cast<std::size_t>(col_owner[j] - 1)] = j - 1;
  for (int i = 0; i < n; ++i) result.cost += cost(i, result.row_to_col[static_cast<std::size_t>(i)]);
  return result;
}

}  // namespace consensus_opt
