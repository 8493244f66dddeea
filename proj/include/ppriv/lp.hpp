// Copyright 2026 The ppriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppriv {

// Feasibility is checked strictly tighter than the privacy verifier's margin
// (1e-6) so solver noise and genuine violations stay separable.
inline constexpr double kLpFeasibilityTol = 1e-9;
inline constexpr double kLpOptimalityTol = 1e-7;

enum class Relation { LessEq, Equal, GreaterEq };

struct LpConstraint {
  std::vector<double> coeffs;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

// Minimization problem: min objective . x subject to the constraints and
// per-variable bounds. Bounds may be +-infinity; coefficients, right-hand
// sides and objective entries must be finite.
struct LinearProgram {
  std::size_t n_vars = 0;
  std::vector<double> objective;
  std::vector<LpConstraint> constraints;
  std::vector<std::pair<double, double>> var_bounds;  // [lo, hi]
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;        // filled when optimal
  double objective_value = 0.0; // filled when optimal
};

// Numerical failure: pivot cap exceeded (degenerate cycling despite Bland's
// rule) or a solution that fails the post-solve feasibility audit.
class LpError : public std::runtime_error {
 public:
  explicit LpError(const std::string& what) : std::runtime_error(what) {}
};

// Largest violation of any constraint or bound at x. Zero means feasible;
// used both by tests and by the post-solve audit.
inline double max_violation(const LinearProgram& lp, std::span<const double> x) {
  if (x.size() != lp.n_vars) throw std::invalid_argument("max_violation: x size mismatch");
  double worst = 0.0;
  for (const LpConstraint& c : lp.constraints) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.n_vars; ++j) lhs += c.coeffs[j] * x[j];
    switch (c.rel) {
      case Relation::LessEq: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::GreaterEq: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  for (std::size_t j = 0; j < lp.n_vars; ++j) {
    worst = std::max(worst, lp.var_bounds[j].first - x[j]);
    worst = std::max(worst, x[j] - lp.var_bounds[j].second);
  }
  return worst;
}

namespace detail {

inline void check_lp(const LinearProgram& lp) {
  if (lp.n_vars == 0) throw std::invalid_argument("lp: no variables");
  if (lp.objective.size() != lp.n_vars)
    throw std::invalid_argument("lp: objective length mismatch");
  if (lp.var_bounds.size() != lp.n_vars)
    throw std::invalid_argument("lp: var_bounds length mismatch");
  for (double v : lp.objective)
    if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite objective");
  for (const LpConstraint& c : lp.constraints) {
    if (c.coeffs.size() != lp.n_vars)
      throw std::invalid_argument("lp: constraint coefficient length mismatch");
    for (double v : c.coeffs)
      if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite coefficient");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("lp: non-finite rhs");
  }
  for (auto [lo, hi] : lp.var_bounds) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi)
      throw std::invalid_argument("lp: invalid variable bounds");
    if (lo == std::numeric_limits<double>::infinity() ||
        hi == -std::numeric_limits<double>::infinity())
      throw std::invalid_argument("lp: invalid variable bounds");
  }
}

// Two-phase primal simplex on the full tableau, Bland's pivot rule throughout.
// Variables are shifted/split to nonnegative form; finite upper bounds become
// explicit rows. Built for small dense problems where determinism and
// exactness matter more than speed.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) { build(); }

  LpSolution run() {
    LpSolution sol;
    if (!phase_one()) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    if (!phase_two()) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    sol.status = LpStatus::Optimal;
    sol.x = extract();
    sol.objective_value = 0.0;
    for (std::size_t j = 0; j < lp_.n_vars; ++j)
      sol.objective_value += lp_.objective[j] * sol.x[j];
    const double viol = max_violation(lp_, sol.x);
    if (viol > kLpFeasibilityTol)
      throw LpError("lp: solution failed feasibility audit (violation " +
                    std::to_string(viol) + ")");
    return sol;
  }

 private:
  // Nonnegative-variable substitution for one original variable.
  struct VarMap {
    enum class Kind { Shift, Mirror, Split } kind = Kind::Shift;
    double base = 0.0;   // lo for Shift, hi for Mirror
    std::size_t col = 0; // first column; Split uses col and col+1
  };

  const LinearProgram& lp_;
  std::vector<VarMap> maps_;
  std::vector<std::vector<double>> rows_; // structural+slack coefficients
  std::vector<double> rhs_;
  std::vector<Relation> rels_;
  std::size_t n_struct_ = 0;
  std::size_t n_slack_ = 0;
  std::size_t n_art_ = 0;
  std::vector<std::vector<double>> t_;    // tableau: m x total_cols
  std::vector<double> b_;                 // tableau rhs
  std::vector<std::size_t> basis_;
  std::vector<double> red_;               // reduced-cost row
  std::size_t total_cols_ = 0;
  std::size_t art_begin_ = 0;
  long iterations_ = 0;
  long iteration_cap_ = 0;

  static constexpr double kPivotTol = 1e-9;
  static constexpr double kEnterTol = 1e-9;

  void build() {
    check_lp(lp_);
    const double inf = std::numeric_limits<double>::infinity();

    maps_.resize(lp_.n_vars);
    std::vector<std::pair<std::size_t, double>> upper_rows; // (column, bound)
    for (std::size_t j = 0; j < lp_.n_vars; ++j) {
      auto [lo, hi] = lp_.var_bounds[j];
      VarMap& m = maps_[j];
      if (lo != -inf) {
        m = {VarMap::Kind::Shift, lo, n_struct_++};
        if (hi != inf) upper_rows.emplace_back(m.col, hi - lo);
      } else if (hi != inf) {
        m = {VarMap::Kind::Mirror, hi, n_struct_++};
      } else {
        m = {VarMap::Kind::Split, 0.0, n_struct_};
        n_struct_ += 2;
      }
    }

    for (const LpConstraint& c : lp_.constraints) {
      std::vector<double> row(n_struct_, 0.0);
      double r = c.rhs;
      for (std::size_t j = 0; j < lp_.n_vars; ++j) {
        const double aj = c.coeffs[j];
        if (aj == 0.0) continue;
        const VarMap& m = maps_[j];
        switch (m.kind) {
          case VarMap::Kind::Shift:
            row[m.col] += aj;
            r -= aj * m.base;
            break;
          case VarMap::Kind::Mirror:
            row[m.col] -= aj;
            r -= aj * m.base;
            break;
          case VarMap::Kind::Split:
            row[m.col] += aj;
            row[m.col + 1] -= aj;
            break;
        }
      }
      rows_.push_back(std::move(row));
      rhs_.push_back(r);
      rels_.push_back(c.rel);
    }
    for (auto [col, bound] : upper_rows) {
      std::vector<double> row(n_struct_, 0.0);
      row[col] = 1.0;
      rows_.push_back(std::move(row));
      rhs_.push_back(bound);
      rels_.push_back(Relation::LessEq);
    }

    const std::size_t m = rows_.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (rhs_[i] < 0.0) {
        for (double& v : rows_[i]) v = -v;
        rhs_[i] = -rhs_[i];
        if (rels_[i] == Relation::LessEq) rels_[i] = Relation::GreaterEq;
        else if (rels_[i] == Relation::GreaterEq) rels_[i] = Relation::LessEq;
      }
      if (rels_[i] != Relation::Equal) ++n_slack_;
      if (rels_[i] != Relation::LessEq) ++n_art_;
    }

    art_begin_ = n_struct_ + n_slack_;
    total_cols_ = art_begin_ + n_art_;
    iteration_cap_ = 50L * static_cast<long>(total_cols_ + m);

    t_.assign(m, std::vector<double>(total_cols_, 0.0));
    b_ = rhs_;
    basis_.assign(m, 0);
    std::size_t slack = n_struct_;
    std::size_t art = art_begin_;
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(rows_[i].begin(), rows_[i].end(), t_[i].begin());
      if (rels_[i] == Relation::LessEq) {
        t_[i][slack] = 1.0;
        basis_[i] = slack++;
      } else if (rels_[i] == Relation::GreaterEq) {
        t_[i][slack] = -1.0;
        ++slack;
        t_[i][art] = 1.0;
        basis_[i] = art++;
      } else {
        t_[i][art] = 1.0;
        basis_[i] = art++;
      }
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const double piv = t_[pr][pc];
    for (double& v : t_[pr]) v /= piv;
    b_[pr] /= piv;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == pr) continue;
      const double f = t_[i][pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < total_cols_; ++j) t_[i][j] -= f * t_[pr][j];
      t_[i][pc] = 0.0;
      b_[i] -= f * b_[pr];
    }
    const double f = red_[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < total_cols_; ++j) red_[j] -= f * t_[pr][j];
      red_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Returns false on unbounded direction; true when the phase reached
  // optimality under Bland's rule (lowest eligible indices, so degenerate
  // ties cannot cycle).
  bool iterate(std::size_t allowed_cols) {
    for (;;) {
      std::size_t enter = total_cols_;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (red_[j] < -kEnterTol) {
          enter = j;
          break;
        }
      }
      if (enter == total_cols_) return true;

      std::size_t leave = t_.size();
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        if (t_[i][enter] <= kPivotTol) continue;
        const double ratio = b_[i] / t_[i][enter];
        if (leave == t_.size() || ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == t_.size()) return false;

      if (++iterations_ > iteration_cap_)
        throw LpError("lp: pivot iteration cap exceeded (" +
                      std::to_string(iteration_cap_) + ")");
      pivot(leave, enter);
    }
  }

  void rebuild_reduced_costs(const std::vector<double>& cost) {
    red_.assign(total_cols_, 0.0);
    for (std::size_t j = 0; j < total_cols_; ++j) {
      double z = 0.0;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        const double cb = cost[basis_[i]];
        if (cb != 0.0) z += cb * t_[i][j];
      }
      red_[j] = cost[j] - z;
    }
  }

  bool phase_one() {
    if (n_art_ == 0) {
      // All-slack basis is already feasible.
      return true;
    }
    std::vector<double> cost(total_cols_, 0.0);
    for (std::size_t j = art_begin_; j < total_cols_; ++j) cost[j] = 1.0;
    rebuild_reduced_costs(cost);
    if (!iterate(total_cols_))
      throw LpError("lp: phase-1 reported unbounded");

    double art_sum = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (basis_[i] >= art_begin_) art_sum += b_[i];
    if (art_sum > kLpFeasibilityTol) return false;

    // Drive leftover artificials out of the basis; a row with no usable
    // column is redundant and gets dropped.
    for (std::size_t i = t_.size(); i-- > 0;) {
      if (basis_[i] < art_begin_) continue;
      std::size_t pc = art_begin_;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(t_[i][j]) > kPivotTol) {
          pc = j;
          break;
        }
      }
      if (pc < art_begin_) {
        pivot(i, pc);
      } else {
        t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(i));
        b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    return true;
  }

  bool phase_two() {
    std::vector<double> cost(total_cols_, 0.0);
    for (std::size_t j = 0; j < lp_.n_vars; ++j) {
      const double cj = lp_.objective[j];
      if (cj == 0.0) continue;
      const VarMap& m = maps_[j];
      switch (m.kind) {
        case VarMap::Kind::Shift: cost[m.col] += cj; break;
        case VarMap::Kind::Mirror: cost[m.col] -= cj; break;
        case VarMap::Kind::Split:
          cost[m.col] += cj;
          cost[m.col + 1] -= cj;
          break;
      }
    }
    rebuild_reduced_costs(cost);
    return iterate(art_begin_);
  }

  std::vector<double> extract() const {
    std::vector<double> u(total_cols_, 0.0);
    for (std::size_t i = 0; i < t_.size(); ++i) u[basis_[i]] = b_[i];
    std::vector<double> x(lp_.n_vars, 0.0);
    for (std::size_t j = 0; j < lp_.n_vars; ++j) {
      const VarMap& m = maps_[j];
      switch (m.kind) {
        case VarMap::Kind::Shift: x[j] = m.base + u[m.col]; break;
        case VarMap::Kind::Mirror: x[j] = m.base - u[m.col]; break;
        case VarMap::Kind::Split: x[j] = u[m.col] - u[m.col + 1]; break;
      }
    }
    return x;
  }
};

}  // namespace detail

// Solves the LP to optimality. Deterministic: identical input yields an
// identical solution vector. Throws LpError on numerical failure.
inline LpSolution solve(const LinearProgram& lp) {
  detail::SimplexSolver solver(lp);
  return solver.run();
}

// Minimizes max over the listed variables (optionally weighted) subject to
// the constraint system of `lp` (its objective field is ignored). Standard
// epigraph reformulation: one extra variable t with weight_g * x_g <= t,
// minimize t. The returned x has the original n_vars entries and
// objective_value is the optimal t.
inline LpSolution solve_minimax(const LinearProgram& lp, std::span<const std::size_t> group,
                                std::span<const double> weights = {}) {
  if (!weights.empty() && weights.size() != group.size())
    throw std::invalid_argument("solve_minimax: weights/group size mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  LinearProgram aug;
  aug.n_vars = lp.n_vars + 1;
  const std::size_t t_col = lp.n_vars;
  aug.objective.assign(aug.n_vars, 0.0);
  aug.objective[t_col] = 1.0;
  aug.var_bounds = lp.var_bounds;
  aug.var_bounds.emplace_back(-inf, inf);
  aug.constraints.reserve(lp.constraints.size() + group.size());
  for (const LpConstraint& c : lp.constraints) {
    LpConstraint ac = c;
    ac.coeffs.push_back(0.0);
    aug.constraints.push_back(std::move(ac));
  }
  for (std::size_t g = 0; g < group.size(); ++g) {
    if (group[g] >= lp.n_vars) throw std::invalid_argument("solve_minimax: index out of range");
    LpConstraint c;
    c.coeffs.assign(aug.n_vars, 0.0);
    c.coeffs[group[g]] = weights.empty() ? 1.0 : weights[g];
    c.coeffs[t_col] = -1.0;
    c.rel = Relation::LessEq;
    c.rhs = 0.0;
    aug.constraints.push_back(std::move(c));
  }
  LpSolution sol = solve(aug);
  if (sol.status == LpStatus::Optimal) sol.x.resize(lp.n_vars);
  return sol;
}

}  // namespace ppriv
