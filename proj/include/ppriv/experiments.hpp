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

#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppriv/baselines.hpp"
#include "ppriv/mechanisms.hpp"
#include "ppriv/profile_graph.hpp"

namespace ppriv {

// 40 log-spaced privacy levels covering the simulation range.
inline std::vector<double> default_epsilon_grid() {
  const int n = 40;
  const double lo = std::log(0.05), hi = std::log(5.0);
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  return grid;
}

inline std::vector<double> default_p_grid() {
  std::vector<double> grid(21);
  for (int i = 0; i <= 20; ++i) grid[i] = static_cast<double>(i) / 20.0;
  return grid;
}

namespace detail {

inline void check_epsilon_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("epsilon grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("epsilon grid entries must be positive");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("epsilon grid must be ascending");
  }
}

}  // namespace detail

inline ProfileGraph make_couplet_graph(double p_i, double p_j, double epsilon) {
  ProfileGraph g;
  g.epsilon = epsilon;
  g.profiles = {bernoulli_profile("a", p_i), bernoulli_profile("b", p_j)};
  g.edges = {Edge{"a", "b"}};
  return g;
}

// k Bernoulli profiles with p uniformly spaced on [0,1], successive profiles
// joined by an edge.
inline ProfileGraph make_bernoulli_chain_graph(int k, double epsilon) {
  if (k < 2) throw std::invalid_argument("chain needs at least 2 profiles");
  ProfileGraph g;
  g.epsilon = epsilon;
  for (int t = 0; t < k; ++t) {
    const double p = static_cast<double>(t) / static_cast<double>(k - 1);
    g.profiles.push_back(bernoulli_profile("P" + std::to_string(t + 1), p));
  }
  for (int t = 0; t + 1 < k; ++t)
    g.edges.push_back(Edge{"P" + std::to_string(t + 1), "P" + std::to_string(t + 2)});
  return g;
}

// The fixed three-profile, four-category chain used by the categorical
// simulation.
inline ProfileGraph make_categorical_chain_graph(double epsilon) {
  ProfileGraph g;
  g.epsilon = epsilon;
  g.profiles = {Profile{"P1", {0.2, 0.3, 0.4, 0.1}},
                Profile{"P2", {0.3, 0.3, 0.3, 0.1}},
                Profile{"P3", {0.4, 0.4, 0.1, 0.1}}};
  g.edges = {Edge{"P1", "P2"}, Edge{"P2", "P3"}};
  return g;
}

struct CoupletRow {
  double epsilon;
  double p_i;
  double p_j;
  double alpha_ours;
  double alpha_ldp;
};

// Flip probabilities over every profile-parameter pair from the grid, ours
// (Smooth One Bit on the couplet) against the randomized-response constant.
inline std::vector<CoupletRow> run_bernoulli_couplet(double epsilon,
                                                     std::span<const double> p_grid) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (p_grid.empty()) throw std::invalid_argument("p grid must be nonempty");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p grid entries must lie in [0,1]");

  const double alpha_ldp = rr_flip_probability(epsilon);
  std::vector<CoupletRow> rows;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    for (std::size_t j = i; j < p_grid.size(); ++j) {
      const Mechanism mech = smooth_one_bit(make_couplet_graph(p_grid[i], p_grid[j], epsilon));
      const double alpha = std::max(one_bit_alpha(mech, 0), one_bit_alpha(mech, 1));
      rows.push_back(CoupletRow{epsilon, p_grid[i], p_grid[j], alpha, alpha_ldp});
    }
  }
  return rows;
}

struct ChainRow {
  double epsilon;
  std::string method;  // "ours" or "baseline"
  std::string profile;
  double p;
  double alpha;
  double pr_output_1;
};

// Per-profile probability that the released bit is 1, as a function of
// epsilon, for Smooth One Bit and the randomized-response baseline.
inline std::vector<ChainRow> run_bernoulli_chain(int k, std::span<const double> epsilon_grid) {
  if (k != 6 && k != 21) throw std::invalid_argument("bernoulli chain supports k=6 or k=21");
  detail::check_epsilon_grid(epsilon_grid);
  std::vector<ChainRow> rows;
  for (double eps : epsilon_grid) {
    const ProfileGraph g = make_bernoulli_chain_graph(k, eps);
    const Mechanism ours = smooth_one_bit(g);
    const double alpha_ldp = rr_flip_probability(eps);
    for (std::size_t i = 0; i < g.profiles.size(); ++i) {
      const double p = g.profiles[i].bernoulli_p();
      const double a = one_bit_alpha(ours, i);
      rows.push_back(ChainRow{eps, "ours", g.profiles[i].id, p, a, p * (1 - a) + (1 - p) * a});
    }
    for (std::size_t i = 0; i < g.profiles.size(); ++i) {
      const double p = g.profiles[i].bernoulli_p();
      rows.push_back(ChainRow{eps, "baseline", g.profiles[i].id, p, alpha_ldp,
                              p * (1 - alpha_ldp) + (1 - p) * alpha_ldp});
    }
  }
  return rows;
}

struct CostRow {
  double epsilon;
  std::string method;  // "ours" or "baseline"
  std::vector<double> costs;  // per output category
};

// Maximum absolute per-output error between each profile's distribution and
// its released distribution.
inline std::vector<double> per_output_costs(const ProfileGraph& g, const Mechanism& mech) {
  const std::size_t d = g.dimension();
  std::vector<double> costs(d, 0.0);
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    const std::vector<double> out = left_apply(g.profiles[i].dist, mech.matrices[i]);
    for (std::size_t j = 0; j < d; ++j)
      costs[j] = std::max(costs[j], std::abs(g.profiles[i].dist[j] - out[j]));
  }
  return costs;
}

inline std::vector<CostRow> run_categorical_chain(std::span<const double> epsilon_grid) {
  detail::check_epsilon_grid(epsilon_grid);
  std::vector<CostRow> rows;
  for (double eps : epsilon_grid) {
    const ProfileGraph g = make_categorical_chain_graph(eps);
    const Mechanism ours = smooth_categorical(g);
    const Mechanism base = as_profile_mechanism(randomized_response(g.dimension(), eps), g);
    rows.push_back(CostRow{eps, "ours", per_output_costs(g, ours)});
    rows.push_back(CostRow{eps, "baseline", per_output_costs(g, base)});
  }
  return rows;
}

// --- CSV output ----------------------------------------------------------------
//
// Plain RFC-4180 rows; every number printed with 17 significant digits so the
// files re-parse to the exact doubles.

inline std::string couplet_csv(std::span<const CoupletRow> rows) {
  std::ostringstream out;
  out << "epsilon,p_i,p_j,alpha_ours,alpha_ldp\n";
  for (const CoupletRow& r : rows)
    out << detail::format_double(r.epsilon) << ',' << detail::format_double(r.p_i) << ','
        << detail::format_double(r.p_j) << ',' << detail::format_double(r.alpha_ours) << ','
        << detail::format_double(r.alpha_ldp) << '\n';
  return out.str();
}

inline std::string chain_csv(std::span<const ChainRow> rows) {
  std::ostringstream out;
  out << "epsilon,method,profile,p,alpha,pr_output_1\n";
  for (const ChainRow& r : rows)
    out << detail::format_double(r.epsilon) << ',' << r.method << ',' << r.profile << ','
        << detail::format_double(r.p) << ',' << detail::format_double(r.alpha) << ','
        << detail::format_double(r.pr_output_1) << '\n';
  return out.str();
}

inline std::string cost_csv(std::span<const CostRow> rows) {
  std::ostringstream out;
  out << "epsilon,method";
  const std::size_t d = rows.empty() ? 0 : rows.front().costs.size();
  for (std::size_t j = 1; j <= d; ++j) out << ",cost_" << j;
  out << '\n';
  for (const CostRow& r : rows) {
    out << detail::format_double(r.epsilon) << ',' << r.method;
    for (double c : r.costs) out << ',' << detail::format_double(c);
    out << '\n';
  }
  return out.str();
}

}  // namespace ppriv
