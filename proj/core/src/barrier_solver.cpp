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

// Path-following barrier method for problems over products of nonnegative,
// second-order and exponential cones.
//
// Equalities are eliminated once (x = x_p + Z y). Every cone image becomes a
// dense block over the handful of reduced columns it touches, so a Newton
// step costs sum_j dim_j * cols_j^2 plus one dense factorization. A large
// ball around the starting point keeps each centering problem bounded and
// doubles as the unboundedness detector.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "noma/conic.hpp"

namespace noma::conic {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Block {
  ConeKind kind = ConeKind::kNonnegative;
  std::vector<int> cols;
  MatrixXd g;  // dim x cols
  VectorXd h;  // dim
};

double barrier_parameter(ConeKind kind, Eigen::Index dim) {
  switch (kind) {
    case ConeKind::kNonnegative: return static_cast<double>(dim);
    case ConeKind::kSecondOrder: return 2.0;
    case ConeKind::kExponential: return 3.0;
  }
  return 0.0;
}

bool interior(ConeKind kind, const VectorXd& u) {
  switch (kind) {
    case ConeKind::kNonnegative: return (u.array() > 0.0).all();
    case ConeKind::kSecondOrder: return u(0) > 0.0 && u(0) * u(0) - u.tail(u.size() - 1).squaredNorm() > 0.0;
    case ConeKind::kExponential: {
      const double x = u(0), y = u(1), z = u(2);
      return y > 0.0 && z > 0.0 && y * std::log(z / y) - x > 0.0;
    }
  }
  return false;
}

// Barrier value at u; +inf outside the interior.
double barrier_value(ConeKind kind, const VectorXd& u) {
  if (!interior(kind, u)) return std::numeric_limits<double>::infinity();
  switch (kind) {
    case ConeKind::kNonnegative: return -u.array().log().sum();
    case ConeKind::kSecondOrder: return -std::log(u(0) * u(0) - u.tail(u.size() - 1).squaredNorm());
    case ConeKind::kExponential: {
      const double x = u(0), y = u(1), z = u(2);
      return -std::log(y * std::log(z / y) - x) - std::log(y) - std::log(z);
    }
  }
  return 0.0;
}

// Gradient and Hessian with respect to u; u must be interior.
void barrier_derivatives(ConeKind kind, const VectorXd& u, VectorXd& grad, MatrixXd& hess) {
  const auto dim = u.size();
  switch (kind) {
    case ConeKind::kNonnegative: {
      grad = -u.cwiseInverse();
      hess = u.array().square().inverse().matrix().asDiagonal();
      return;
    }
    case ConeKind::kSecondOrder: {
      const double f = u(0) * u(0) - u.tail(dim - 1).squaredNorm();
      VectorXd ju = -u;
      ju(0) = u(0);
      grad = (-2.0 / f) * ju;
      hess = (4.0 / (f * f)) * ju * ju.transpose();
      hess(0, 0) -= 2.0 / f;
      for (Eigen::Index i = 1; i < dim; ++i) hess(i, i) += 2.0 / f;
      return;
    }
    case ConeKind::kExponential: {
      const double x = u(0), y = u(1), z = u(2);
      const double logzy = std::log(z / y);
      const double psi = y * logzy - x;
      Eigen::Vector3d dpsi(-1.0, logzy - 1.0, y / z);
      Eigen::Matrix3d d2psi = Eigen::Matrix3d::Zero();
      d2psi(1, 1) = -1.0 / y;
      d2psi(1, 2) = d2psi(2, 1) = 1.0 / z;
      d2psi(2, 2) = -y / (z * z);
      grad = -dpsi / psi;
      grad(1) -= 1.0 / y;
      grad(2) -= 1.0 / z;
      Eigen::Matrix3d hm = dpsi * dpsi.transpose() / (psi * psi) - d2psi / psi;
      hm(1, 1) += 1.0 / (y * y);
      hm(2, 2) += 1.0 / (z * z);
      hess = hm;
      return;
    }
  }
}

// Interior direction used by the phase-I shift u + s * e.
VectorXd interior_direction(ConeKind kind, Eigen::Index dim) {
  switch (kind) {
    case ConeKind::kNonnegative: return VectorXd::Ones(dim);
    case ConeKind::kSecondOrder: {
      VectorXd e = VectorXd::Zero(dim);
      e(0) = 1.0;
      return e;
    }
    case ConeKind::kExponential: return Eigen::Vector3d(-1.0, 1.0, 1.0);
  }
  return VectorXd();
}

// Smallest shift (up to a doubling search) putting u + s e in the interior.
double required_shift(ConeKind kind, const VectorXd& u) {
  switch (kind) {
    case ConeKind::kNonnegative: return -u.minCoeff();
    case ConeKind::kSecondOrder: return u.tail(u.size() - 1).norm() - u(0);
    case ConeKind::kExponential: {
      if (interior(kind, u)) return 0.0;
      const VectorXd e = interior_direction(kind, 3);
      double s = std::max({1.0, -u(1), -u(2)});
      for (int i = 0; i < 200 && !interior(kind, u + s * e); ++i) s *= 2.0;
      return s;
    }
  }
  return 0.0;
}

class BarrierPath {
 public:
  BarrierPath(std::vector<Block> blocks, VectorXd cost, VectorXd center, double radius, Eigen::Index ball_dims)
      : blocks_(std::move(blocks)),
        cost_(std::move(cost)),
        center_(std::move(center)),
        radius_sq_(radius * radius),
        ball_dims_(ball_dims) {
    nu_ = 2.0;  // ball
    gjg_.resize(blocks_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& b = blocks_[j];
      nu_ += barrier_parameter(b.kind, b.h.size());
      if (b.kind == ConeKind::kSecondOrder) {
        // g^T J g with J = diag(1, -1, ..., -1), constant along the path.
        const auto tail = b.g.bottomRows(b.g.rows() - 1);
        gjg_[j] = b.g.row(0).transpose() * b.g.row(0) - tail.transpose() * tail;
      }
    }
  }

  double nu() const { return nu_; }
  Eigen::Index dims() const { return cost_.size(); }

  double value(const VectorXd& y, double t) const {
    const double d = radius_sq_ - (y.head(ball_dims_) - center_).squaredNorm();
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    double f = t * cost_.dot(y) - std::log(d);
    for (const auto& b : blocks_) {
      f += barrier_value(b.kind, image(b, y));
      if (!std::isfinite(f)) return f;
    }
    return f;
  }

  bool feasible(const VectorXd& y) const {
    if (!(radius_sq_ - (y.head(ball_dims_) - center_).squaredNorm() > 0.0)) return false;
    for (const auto& b : blocks_) {
      if (!interior(b.kind, image(b, y))) return false;
    }
    return true;
  }

  void derivatives(const VectorXd& y, double t, VectorXd& grad, MatrixXd& hess) const {
    const auto m = dims();
    grad = t * cost_;
    hess.setZero(m, m);
    const VectorXd off = y.head(ball_dims_) - center_;
    const double d = radius_sq_ - off.squaredNorm();
    grad.head(ball_dims_) += (2.0 / d) * off;
    hess.topLeftCorner(ball_dims_, ball_dims_) += (4.0 / (d * d)) * off * off.transpose();
    hess.topLeftCorner(ball_dims_, ball_dims_).diagonal().array() += 2.0 / d;

    VectorXd u, gy, gu;
    MatrixXd hy, hu;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto& b = blocks_[j];
      u = image(b, y);
      switch (b.kind) {
        case ConeKind::kNonnegative: {
          const VectorXd inv = u.cwiseInverse();
          gy.noalias() = -(b.g.transpose() * inv);
          const MatrixXd scaled = inv.asDiagonal() * b.g;
          hy.noalias() = scaled.transpose() * scaled;
          break;
        }
        case ConeKind::kSecondOrder: {
          const double f = u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
          u.tail(u.size() - 1) *= -1.0;  // J u
          const VectorXd gju = b.g.transpose() * u;
          gy = (-2.0 / f) * gju;
          hy = (4.0 / (f * f)) * gju * gju.transpose() - (2.0 / f) * gjg_[j];
          break;
        }
        case ConeKind::kExponential: {
          barrier_derivatives(b.kind, u, gu, hu);
          gy.noalias() = b.g.transpose() * gu;
          hy.noalias() = b.g.transpose() * (hu * b.g);
          break;
        }
      }
      const auto nc = b.cols.size();
      for (std::size_t c = 0; c < nc; ++c) {
        const auto cc = static_cast<Eigen::Index>(c);
        grad(b.cols[c]) += gy(cc);
        for (std::size_t a = 0; a < nc; ++a) hess(b.cols[a], b.cols[c]) += hy(static_cast<Eigen::Index>(a), cc);
      }
    }
  }

  // Barrier weight whose centering residual at y is smallest in the local norm.
  double initial_weight(const VectorXd& y, double floor) const {
    VectorXd grad;
    MatrixXd hess;
    derivatives(y, 0.0, grad, hess);
    const VectorXd hc = newton_direction(hess, cost_);
    const VectorXd hg = newton_direction(hess, grad);
    const double denom = cost_.dot(hc);
    if (!hc.allFinite() || !hg.allFinite() || !(denom < 0.0)) return floor;
    const double t = -cost_.dot(hg) / denom;
    return std::isfinite(t) ? std::clamp(t, floor, std::max(floor, 1e6)) : floor;
  }

  double ball_offset(const VectorXd& y) const { return (y.head(ball_dims_) - center_).norm(); }

  enum class Outcome { kCentered, kStopped, kBudget, kFailed };
  static constexpr double kCenteredDecrement = 1e-3;
  static constexpr double kLooseDecrement = 1e-2;
  static constexpr int kLocalSteps = 15;

  // Damped Newton centering of t * cost^T y + barrier(y).
  Outcome center(VectorXd& y, double t, int& steps, int max_steps,
                 const std::function<bool(VectorXd&, const VectorXd&)>& stop) const {
    VectorXd grad;
    MatrixXd hess;
    for (int local = 0;; ++local) {
      if (steps >= max_steps) return Outcome::kBudget;
      derivatives(y, t, grad, hess);
      if (!grad.allFinite() || !hess.allFinite()) return Outcome::kFailed;
      const VectorXd dy = newton_direction(hess, grad);
      if (!dy.allFinite()) return Outcome::kFailed;
      const double lambda_sq = -grad.dot(dy);
      if (!(lambda_sq >= -1e-12)) return Outcome::kFailed;
      const double lambda = std::sqrt(std::max(0.0, lambda_sq));
      // lambda^2 / 2 bounds the barrier-objective suboptimality; beyond
      // kLocalSteps only rounding keeps lambda from shrinking further.
      if (lambda < kCenteredDecrement || (local >= kLocalSteps && lambda < kLooseDecrement)) {
        return Outcome::kCentered;
      }
      ++steps;

      double step = 1.0;
      if (lambda > 0.25) {
        // Backtracking, never shorter than the self-concordant damped step.
        const double damped = 1.0 / (1.0 + lambda);
        const double f0 = value(y, t);
        while (step > damped) {
          const double f1 = value(y + step * dy, t);
          if (f1 <= f0 - 0.25 * step * lambda_sq) break;
          step *= 0.5;
        }
        step = std::max(step, damped);
      }
      VectorXd next = y + step * dy;
      for (int i = 0; i < 60 && !feasible(next); ++i) {
        step *= 0.5;
        next = y + step * dy;
      }
      if (!feasible(next)) return Outcome::kFailed;
      if (stop && stop(next, y)) {
        y = std::move(next);
        return Outcome::kStopped;
      }
      y = std::move(next);
      if (step < 1e-12) return Outcome::kFailed;
    }
  }

 private:
  static VectorXd image(const Block& b, const VectorXd& y) {
    VectorXd sub(static_cast<Eigen::Index>(b.cols.size()));
    for (std::size_t a = 0; a < b.cols.size(); ++a) sub(static_cast<Eigen::Index>(a)) = y(b.cols[a]);
    return b.g * sub + b.h;
  }

  static VectorXd newton_direction(MatrixXd& hess, const VectorXd& grad) {
    const double scale = std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
    for (double reg = 1e-14; reg < 1e-2; reg *= 100.0) {
      Eigen::LLT<MatrixXd> llt(hess);
      if (llt.info() == Eigen::Success) {
        VectorXd dy = -llt.solve(grad);
        if (dy.allFinite()) return dy;
      }
      hess.diagonal().array() += reg * scale;
    }
    return VectorXd::Constant(grad.size(), std::numeric_limits<double>::quiet_NaN());
  }

  std::vector<Block> blocks_;
  std::vector<MatrixXd> gjg_;
  VectorXd cost_;
  VectorXd center_;
  double radius_sq_;
  Eigen::Index ball_dims_;
  double nu_ = 0.0;
};

struct Reduced {
  bool identity = true;
  VectorXd particular;  // x_p
  MatrixXd basis;       // Z, n x m (unused when identity)
  Eigen::Index dims = 0;
  std::vector<Block> blocks;
  VectorXd cost;  // minimize cost^T y
};

// Floors on the starting barrier weights. Phase I only has to push s below
// zero, so it starts where the central-path gap is a fraction of the initial
// shift; phase II starts near a unit relative gap.
constexpr double kPhase1Weight = 8.0;
constexpr double kPhase2Weight = 0.1;
// Phase-I ball radius relative to the scale of the starting point.
constexpr double kPhase1Radius = 100.0;

VectorXd to_full(const Reduced& red, const VectorXd& y) {
  if (red.identity) return y;
  return red.particular + red.basis * y;
}

VectorXd to_reduced(const Reduced& red, const VectorXd& x) {
  if (red.identity) return x;
  return red.basis.transpose() * (x - red.particular);
}

// Returns false when the equality system is inconsistent.
bool reduce(const ConicProblem& problem, double tol, Reduced& red) {
  const auto n = static_cast<Eigen::Index>(problem.num_variables());
  const auto& eqs = problem.equalities();
  VectorXd c = Eigen::Map<const VectorXd>(problem.objective().data(), n);

  if (!eqs.empty()) {
    const auto p = static_cast<Eigen::Index>(eqs.size());
    MatrixXd a = MatrixXd::Zero(p, n);
    VectorXd b(p);
    for (Eigen::Index r = 0; r < p; ++r) {
      for (const auto& t : eqs[static_cast<std::size_t>(r)].terms()) a(r, t.column) += t.coefficient;
      b(r) = -eqs[static_cast<std::size_t>(r)].constant();
    }
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    const auto rank = svd.rank();
    red.particular = svd.solve(b);
    if ((a * red.particular - b).norm() > tol * (1.0 + b.norm()) * 10.0) return false;
    red.identity = false;
    red.basis = svd.matrixV().rightCols(n - rank);
    red.dims = n - rank;
    red.cost = -(red.basis.transpose() * c);
  } else {
    red.identity = true;
    red.dims = n;
    red.particular = VectorXd::Zero(n);
    red.cost = -c;
  }

  for (const auto& cone : problem.cones()) {
    Block blk;
    blk.kind = cone.kind;
    const auto dim = static_cast<Eigen::Index>(cone.rows.size());
    blk.h.resize(dim);
    if (red.identity) {
      std::vector<int> cols;
      for (const auto& row : cone.rows) {
        for (const auto& t : row.terms()) cols.push_back(t.column);
      }
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      blk.g = MatrixXd::Zero(dim, static_cast<Eigen::Index>(cols.size()));
      for (Eigen::Index r = 0; r < dim; ++r) {
        const auto& row = cone.rows[static_cast<std::size_t>(r)];
        for (const auto& t : row.terms()) {
          const auto pos = std::lower_bound(cols.begin(), cols.end(), t.column) - cols.begin();
          blk.g(r, pos) += t.coefficient;
        }
        blk.h(r) = row.constant();
      }
      blk.cols = std::move(cols);
    } else {
      MatrixXd full = MatrixXd::Zero(dim, n);
      for (Eigen::Index r = 0; r < dim; ++r) {
        const auto& row = cone.rows[static_cast<std::size_t>(r)];
        for (const auto& t : row.terms()) full(r, t.column) += t.coefficient;
        blk.h(r) = row.constant();
      }
      blk.h += full * red.particular;
      blk.g = full * red.basis;
      blk.cols.resize(static_cast<std::size_t>(red.dims));
      std::iota(blk.cols.begin(), blk.cols.end(), 0);
    }
    red.blocks.push_back(std::move(blk));
  }
  return true;
}

VectorXd block_image(const Block& b, const VectorXd& y) {
  VectorXd sub(static_cast<Eigen::Index>(b.cols.size()));
  for (std::size_t a = 0; a < b.cols.size(); ++a) sub(static_cast<Eigen::Index>(a)) = y(b.cols[a]);
  return b.g * sub + b.h;
}

ConicSolution finish(const ConicProblem& problem, const Reduced& red, const VectorXd& y, SolveStatus status,
                     int steps) {
  ConicSolution sol;
  sol.status = status;
  sol.names = problem.shared_variables();
  sol.newton_steps = steps;
  const VectorXd x = to_full(red, y);
  sol.primal.assign(x.data(), x.data() + x.size());
  sol.objective = problem.objective_value(sol.primal);
  sol.max_violation = problem.max_violation(sol.primal);
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProblem& problem, const SolverSettings& settings) {
  const auto n = problem.num_variables();
  Reduced red;
  if (!reduce(problem, settings.tolerance, red)) {
    ConicSolution sol;
    sol.status = SolveStatus::kInfeasible;
    sol.names = problem.shared_variables();
    sol.primal.assign(static_cast<std::size_t>(n), 0.0);
    return sol;
  }
  const auto m = red.dims;

  VectorXd x0 = VectorXd::Zero(n);
  if (static_cast<int>(settings.initial_point.size()) == n) {
    x0 = Eigen::Map<const VectorXd>(settings.initial_point.data(), n);
  }
  VectorXd y = to_reduced(red, x0);
  const double radius = settings.bound_radius * std::max(1.0, y.cwiseAbs().maxCoeff());
  const VectorXd center = y;
  int steps = 0;

  // Phase I: minimize s subject to every cone image shifted by s * e. Free
  // directions drift to the bounding ball on the way, so a small ball is tried
  // first and the full one only when the small ball ends up binding.
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& b : red.blocks) shift = std::max(shift, required_shift(b.kind, block_image(b, y)));
  if (!red.blocks.empty() && shift >= 0.0) {
    std::vector<Block> shifted = red.blocks;
    for (auto& b : shifted) {
      const VectorXd e = interior_direction(b.kind, b.h.size());
      b.g.conservativeResize(Eigen::NoChange, b.g.cols() + 1);
      b.g.col(b.g.cols() - 1) = e;
      b.cols.push_back(static_cast<int>(m));
    }
    VectorXd cost = VectorXd::Zero(m + 1);
    cost(m) = 1.0;
    // Once s turns negative, retreat along the last step to s = -s_prev / 2:
    // strictly feasible by convexity and no farther out than needed.
    auto found = [m](VectorXd& next, const VectorXd& prev) {
      if (!(next(m) < 0.0)) return false;
      if (!(prev(m) > 0.0)) return true;
      const double target = std::max(next(m), -0.5 * prev(m));
      const double theta = (prev(m) - target) / (prev(m) - next(m));
      next = prev + theta * (next - prev);
      return true;
    };

    const double small = std::min(radius, kPhase1Radius * (1.0 + y.cwiseAbs().maxCoeff() + shift));
    bool feasible = false;
    for (const double r1 : {small, radius}) {
      BarrierPath phase1(shifted, cost, center, r1, m);
      VectorXd ys(m + 1);
      ys.head(m) = y;
      ys(m) = shift + 1.0;
      SolveStatus verdict = SolveStatus::kOptimal;
      for (double t = phase1.initial_weight(ys, kPhase1Weight * phase1.nu() / ys(m));; t *= settings.barrier_growth) {
        const auto outcome = phase1.center(ys, t, steps, settings.max_newton_steps, found);
        if (settings.verbose) {
          std::cerr << "phase1 radius=" << r1 << " t=" << t << " s=" << ys(m) << " steps=" << steps
                    << " outcome=" << static_cast<int>(outcome) << "\n";
        }
        if (outcome == BarrierPath::Outcome::kStopped) break;
        if (outcome == BarrierPath::Outcome::kBudget) return finish(problem, red, y, SolveStatus::kIterationLimit, steps);
        if (outcome == BarrierPath::Outcome::kFailed) {
          return finish(problem, red, y, SolveStatus::kNumericalFailure, steps);
        }
        if (phase1.nu() / t < settings.tolerance) {
          verdict = ys(m) > settings.tolerance ? SolveStatus::kInfeasible : SolveStatus::kNumericalFailure;
          break;
        }
      }
      if (verdict == SolveStatus::kOptimal) {
        y = ys.head(m);
        feasible = true;
        break;
      }
      const bool ball_binding = (ys.head(m) - center).norm() > 0.5 * r1;
      if (r1 >= radius || !ball_binding) return finish(problem, red, ys.head(m), verdict, steps);
    }
    if (!feasible) return finish(problem, red, y, SolveStatus::kNumericalFailure, steps);
  }

  // Phase II.
  BarrierPath phase2(red.blocks, red.cost, center, radius, m);
  for (double t = phase2.initial_weight(y, kPhase2Weight * phase2.nu() / (1.0 + std::abs(red.cost.dot(center))));; t *= settings.barrier_growth) {
    const auto outcome = phase2.center(y, t, steps, settings.max_newton_steps, {});
    if (settings.verbose) {
      std::cerr << "phase2 t=" << t << " obj=" << -red.cost.dot(y) << " steps=" << steps
                << " outcome=" << static_cast<int>(outcome) << "\n";
    }
    if (outcome == BarrierPath::Outcome::kBudget) return finish(problem, red, y, SolveStatus::kIterationLimit, steps);
    if (outcome == BarrierPath::Outcome::kFailed) {
      return finish(problem, red, y, SolveStatus::kNumericalFailure, steps);
    }
    if (phase2.ball_offset(y) > 0.5 * radius) return finish(problem, red, y, SolveStatus::kUnbounded, steps);
    if (phase2.nu() / t < settings.tolerance) break;
  }

  auto sol = finish(problem, red, y, SolveStatus::kOptimal, steps);
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  if (!(sol.max_violation <= settings.tolerance * scale)) sol.status = SolveStatus::kNumericalFailure;
  return sol;
}

}  // namespace noma::conic
