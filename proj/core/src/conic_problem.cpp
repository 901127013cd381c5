// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "noma/conic.hpp"

namespace noma::conic {

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::kNonnegative: return "nonneg";
    case ConeKind::kSecondOrder: return "soc";
    case ConeKind::kExponential: return "exp";
  }
  return "unknown";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

AffineExpr& AffineExpr::add(int column, double coefficient) {
  if (coefficient != 0.0) terms_.push_back({column, coefficient});
  return *this;
}

AffineExpr& AffineExpr::add(const AffineExpr& other, double scale) {
  for (const auto& t : other.terms_) add(t.column, scale * t.coefficient);
  constant_ += scale * other.constant_;
  return *this;
}

AffineExpr& AffineExpr::scale(double factor) {
  for (auto& t : terms_) t.coefficient *= factor;
  constant_ *= factor;
  return *this;
}

double AffineExpr::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coefficient * x[static_cast<std::size_t>(t.column)];
  return v;
}

int VariableTable::add(std::string name) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate variable name: " + name);
  const int col = static_cast<int>(names_.size());
  index_.emplace(name, col);
  names_.push_back(std::move(name));
  return col;
}

int VariableTable::column(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("unknown variable: " + std::string(name));
  return it->second;
}

bool VariableTable::contains(std::string_view name) const { return index_.contains(std::string(name)); }

ConicProblem::ConicProblem() : names_(std::make_shared<VariableTable>()) {}

int ConicProblem::add_variable(std::string name) {
  const int col = names_->add(std::move(name));
  objective_.push_back(0.0);
  return col;
}

void ConicProblem::set_objective(int column, double coefficient) {
  if (column < 0 || column >= num_variables()) throw std::out_of_range("objective column out of range");
  objective_[static_cast<std::size_t>(column)] = coefficient;
}

void ConicProblem::check_expr(const AffineExpr& e) const {
  for (const auto& t : e.terms()) {
    if (t.column < 0 || t.column >= num_variables()) {
      throw std::out_of_range("affine expression references an unknown column");
    }
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite coefficient");
  }
  if (!std::isfinite(e.constant())) throw std::invalid_argument("non-finite constant");
}

void ConicProblem::add_equality(AffineExpr expr) {
  check_expr(expr);
  equalities_.push_back(std::move(expr));
}

void ConicProblem::add_nonnegative(AffineExpr expr) {
  check_expr(expr);
  cones_.push_back({ConeKind::kNonnegative, {std::move(expr)}});
}

void ConicProblem::add_nonnegative(std::vector<AffineExpr> rows) {
  if (rows.empty()) throw std::invalid_argument("empty nonnegative cone");
  for (const auto& r : rows) check_expr(r);
  cones_.push_back({ConeKind::kNonnegative, std::move(rows)});
}

void ConicProblem::add_second_order(AffineExpr t, std::vector<AffineExpr> v) {
  check_expr(t);
  for (const auto& r : v) check_expr(r);
  Cone cone{ConeKind::kSecondOrder, {}};
  cone.rows.reserve(v.size() + 1);
  cone.rows.push_back(std::move(t));
  for (auto& r : v) cone.rows.push_back(std::move(r));
  cones_.push_back(std::move(cone));
}

void ConicProblem::add_exponential(AffineExpr x, AffineExpr y, AffineExpr z) {
  check_expr(x);
  check_expr(y);
  check_expr(z);
  cones_.push_back({ConeKind::kExponential, {std::move(x), std::move(y), std::move(z)}});
}

double ConicProblem::objective_value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
  return v;
}

double cone_violation(ConeKind kind, std::span<const double> u) {
  switch (kind) {
    case ConeKind::kNonnegative: {
      double worst = 0.0;
      for (double v : u) worst = std::max(worst, -v);
      return worst;
    }
    case ConeKind::kSecondOrder: {
      double norm_sq = 0.0;
      for (std::size_t i = 1; i < u.size(); ++i) norm_sq += u[i] * u[i];
      return std::max(0.0, std::sqrt(norm_sq) - u[0]);
    }
    case ConeKind::kExponential: {
      const double x = u[0], y = u[1], z = u[2];
      if (y > 0.0) return std::max(0.0, y * std::exp(x / y) - z);
      return std::max({-y, std::max(0.0, x), std::max(0.0, -z)});
    }
  }
  return 0.0;
}

double ConicProblem::max_violation(std::span<const double> x) const {
  if (x.size() != objective_.size()) throw std::invalid_argument("max_violation: wrong point size");
  double worst = 0.0;
  for (const auto& e : equalities_) worst = std::max(worst, std::abs(e.evaluate(x)));
  std::vector<double> u;
  for (const auto& cone : cones_) {
    u.resize(cone.rows.size());
    for (std::size_t r = 0; r < cone.rows.size(); ++r) u[r] = cone.rows[r].evaluate(x);
    worst = std::max(worst, cone_violation(cone.kind, u));
  }
  return worst;
}

std::string ConicProblem::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "conic_problem vars " << num_variables() << " eq " << equalities_.size() << " cones " << cones_.size()
      << "\n";
  for (int j = 0; j < num_variables(); ++j) out << "var " << j << " " << names_->name(j) << "\n";
  out << "maximize";
  for (std::size_t j = 0; j < objective_.size(); ++j) {
    if (objective_[j] != 0.0) out << " (" << j << " " << objective_[j] << ")";
  }
  out << "\n";
  auto write_rows = [&out](const std::vector<AffineExpr>& rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& t : rows[r].terms()) out << " (" << r << " " << t.column << " " << t.coefficient << ")";
    }
    out << " |";
    for (const auto& row : rows) out << " " << row.constant();
    out << "\n";
  };
  for (const auto& e : equalities_) {
    out << "zero 1";
    write_rows({e});
  }
  for (const auto& cone : cones_) {
    out << to_string(cone.kind) << " " << cone.rows.size();
    write_rows(cone.rows);
  }
  return out.str();
}

double ConicSolution::value(std::string_view name) const {
  if (!names) throw std::logic_error("solution carries no variable table");
  return value(names->column(name));
}

void encode_power_of_two(ConicProblem& problem, int r_column, int z_column) {
  problem.add_exponential(AffineExpr::variable(r_column, std::numbers::ln2), AffineExpr(1.0),
                          AffineExpr::variable(z_column));
}

}  // namespace noma::conic
