#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "consensus_opt/types.hpp"

namespace consensus_opt {

// Ackley constants used throughout the experiments.
inline constexpr double kAckleyA = 20.0;
inline constexpr double kAckleyB = 0.2;
inline constexpr double kAckleyC = 6.283185307179586476925286766559;

// All evaluators throw std::domain_error("non-finite coordinate") on NaN/inf input.
double eval_ackley(std::span<const double> x);
double eval_quadratic(std::span<const double> x);
double eval_rastrigin(std::span<const double> x);

// min(x^2, 0.5 (x - 5)^2 + 0.2): global minimum at 0, local minimum at 5.
double eval_trap_1d(double x);

// A d-dimensional cost with an optional known minimizer. Immutable once built,
// so a single instance can be evaluated from many threads.
class Objective {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  Objective(std::string name, int dim, Evaluator evaluator,
            std::optional<Vector> minimizer = std::nullopt,
            std::optional<double> min_value = std::nullopt);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const std::optional<Vector>& minimizer() const { return minimizer_; }
  const std::optional<double>& min_value() const { return min_value_; }

  // Throws std::invalid_argument if x.size() != dim().
  double operator()(std::span<const double> x) const;
  double operator()(const Vector& x) const { return (*this)(as_span(x)); }

 private:
  std::string name_;
  int dim_;
  Evaluator evaluator_;
  std::optional<Vector> minimizer_;
  std::optional<double> min_value_;
};

Objective make_ackley(int dim);
Objective make_quadratic(int dim);
Objective make_rastrigin(int dim);
Objective make_trap_1d();

// Registered names: ackley, quadratic, rastrigin, trap1d.
std::vector<std::string> objective_names();

// Throws std::invalid_argument listing the known names for an unknown one.
Objective make_objective(std::string_view name, int dim);

}  // namespace consensus_opt
