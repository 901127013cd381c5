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

#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace noma::conic {

enum class ConeKind {
  kNonnegative,   // u >= 0 componentwise
  kSecondOrder,   // u_0 >= ||u_1..||
  kExponential,   // (x, y, z): y * exp(x / y) <= z, y > 0 (closure)
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure, kIterationLimit };

std::string_view to_string(ConeKind kind);
std::string_view to_string(SolveStatus status);

struct LinearTerm {
  int column = 0;
  double coefficient = 0.0;
};

/// Sparse affine function sum_j a_j x_j + c of the decision vector.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(double constant) : constant_(constant) {}

  static AffineExpr variable(int column, double coefficient = 1.0) {
    return AffineExpr().add(column, coefficient);
  }

  AffineExpr& add(int column, double coefficient);
  AffineExpr& add(const AffineExpr& other, double scale = 1.0);
  AffineExpr& add_constant(double value) {
    constant_ += value;
    return *this;
  }
  AffineExpr& scale(double factor);

  double evaluate(std::span<const double> x) const;
  const std::vector<LinearTerm>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::vector<LinearTerm> terms_;
  double constant_ = 0.0;
};

struct Cone {
  ConeKind kind = ConeKind::kNonnegative;
  std::vector<AffineExpr> rows;
};

/// Bidirectional map between semantic variable names and columns.
class VariableTable {
 public:
  int add(std::string name);
  int column(std::string_view name) const;  // throws std::out_of_range
  bool contains(std::string_view name) const;
  const std::string& name(int column) const { return names_.at(static_cast<std::size_t>(column)); }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

/// maximize c^T x  s.t.  equality rows == 0,  each cone's affine image in its cone.
class ConicProblem {
 public:
  ConicProblem();

  int add_variable(std::string name);
  int column(std::string_view name) const { return names_->column(name); }
  int num_variables() const { return names_->size(); }
  const VariableTable& variables() const { return *names_; }
  std::shared_ptr<const VariableTable> shared_variables() const { return names_; }

  void set_objective(int column, double coefficient);
  const std::vector<double>& objective() const { return objective_; }

  void add_equality(AffineExpr expr);
  void add_nonnegative(AffineExpr expr);
  void add_nonnegative(std::vector<AffineExpr> rows);
  /// t >= ||v||_2
  void add_second_order(AffineExpr t, std::vector<AffineExpr> v);
  /// y * exp(x / y) <= z
  void add_exponential(AffineExpr x, AffineExpr y, AffineExpr z);

  const std::vector<AffineExpr>& equalities() const { return equalities_; }
  const std::vector<Cone>& cones() const { return cones_; }

  double objective_value(std::span<const double> x) const;

  /// Largest violation of any equality (absolute residual) or cone membership
  /// at x; zero when x is feasible.
  double max_violation(std::span<const double> x) const;

  /// One line per constraint; affine maps as (row col coef) triplets followed
  /// by the constant column.
  std::string to_text() const;

 private:
  void check_expr(const AffineExpr& e) const;

  std::shared_ptr<VariableTable> names_;
  std::vector<double> objective_;
  std::vector<AffineExpr> equalities_;
  std::vector<Cone> cones_;
};

/// Violation of u in the given cone (0 when inside).
double cone_violation(ConeKind kind, std::span<const double> u);

struct SolverSettings {
  double tolerance = 1e-8;            // absolute duality-gap and feasibility target
  double barrier_growth = 20.0;       // t <- growth * t between centering passes
  int max_newton_steps = 600;
  double bound_radius = 1e8;          // ||x - x0|| <= radius keeps every centering problem bounded
  std::vector<double> initial_point;  // optional, one entry per variable
  bool verbose = false;               // per-centering progress on stderr
};

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> primal;
  double objective = 0.0;
  int newton_steps = 0;
  double max_violation = 0.0;

  double value(int column) const { return primal.at(static_cast<std::size_t>(column)); }
  double value(std::string_view name) const;
  bool optimal() const { return status == SolveStatus::kOptimal; }

  std::shared_ptr<const VariableTable> names;
};

/// Path-following barrier method with a phase-I search for a strictly
/// feasible start. Reentrant; no shared state between calls.
ConicSolution solve(const ConicProblem& problem, const SolverSettings& settings = {});

/// z >= 2^r as the exponential-cone membership (r ln 2, 1, z).
void encode_power_of_two(ConicProblem& problem, int r_column, int z_column);

}  // namespace noma::conic
