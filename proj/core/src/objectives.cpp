#include "consensus_opt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace consensus_opt {
namespace {

void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw std::domain_error("non-finite coordinate");
  }
}

void require_nonempty(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("objective dimension must be >= 1");
}

using Factory = Objective (*)(int);

const std::map<std::string, Factory, std::less<>>& registry() {
  static const std::map<std::string, Factory, std::less<>> table = {
      {"ackley", &make_ackley},
      {"quadratic", &make_quadratic},
      {"rastrigin", &make_rastrigin},
      {"trap1d",
       [](int dim) {
         if (dim != 1) throw std::invalid_argument("trap1d is one-dimensional (dim must be 1)");
         return make_trap_1d();
       }},
  };
  return table;
}

}  // namespace

double eval_ackley(std::span<const double> x) {
  require_nonempty(x);
  require_finite(x);
  const double d = static_cast<double>(x.size());
  double sq = 0.0;
  double cos_sum = 0.0;
  for (double v : x) {
    sq += v * v;
    cos_sum += std::cos(kAckleyC * v);
  }
  // expm1 form: exactly 0 at the origin instead of a rounding residue.
  return -kAckleyA * std::expm1(-(kAckleyB / std::sqrt(d)) * std::sqrt(sq)) -
         std::numbers::e * std::expm1(cos_sum / d - 1.0);
}

double eval_quadratic(std::span<const double> x) {
  require_nonempty(x);
  require_finite(x);
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return sq;
}

double eval_rastrigin(std::span<const double> x) {
  require_nonempty(x);
  require_finite(x);
  double total = 10.0 * static_cast<double>(x.size());
  for (double v : x) total += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return total;
}

double eval_trap_1d(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite coordinate");
  return std::min(x * x, 0.5 * (x - 5.0) * (x - 5.0) + 0.2);
}

Objective::Objective(std::string name, int dim, Evaluator evaluator,
                     std::optional<Vector> minimizer, std::optional<double> min_value)
    : name_(std::move(name)),
      dim_(dim),
      evaluator_(std::move(evaluator)),
      minimizer_(std::move(minimizer)),
      min_value_(min_value) {
  if (dim_ < 1) throw std::invalid_argument("objective dimension must be >= 1");
  if (minimizer_ && minimizer_->size() != dim_) {
    throw std::invalid_argument("minimizer dimension does not match objective dimension");
  }
}

double Objective::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("objective '" + name_ + "' expects dimension " +
                                std::to_string(dim_) + ", got " + std::to_string(x.size()));
  }
  return evaluator_(x);
}

Objective make_ackley(int dim) {
  return Objective("ackley", dim, &eval_ackley, Vector::Zero(dim), 0.0);
}

Objective make_quadratic(int dim) {
  return Objective("quadratic", dim, &eval_quadratic, Vector::Zero(dim), 0.0);
}

Objective make_rastrigin(int dim) {
  return Objective("rastrigin", dim, &eval_rastrigin, Vector::Zero(dim), 0.0);
}

Objective make_trap_1d() {
  return Objective(
      "trap1d", 1, [](std::span<const double> x) { return eval_trap_1d(x[0]); },
      Vector::Zero(1), 0.0);
}

std::vector<std::string> objective_names() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

Objective make_objective(std::string_view name, int dim) {
  const auto& table = registry();
  auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [n, f] : table) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown objective '" + std::string(name) +
                                "' (known: " + known + ")");
  }
  return it->second(dim);
}

}  // namespace consensus_opt
