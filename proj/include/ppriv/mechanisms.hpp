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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppriv/lp.hpp"
#include "ppriv/matrix.hpp"
#include "ppriv/profile_graph.hpp"

namespace ppriv {

// Certification margin on the worst-case log-output-ratio. Looser than the
// solver tolerances so solver noise never masquerades as a violation.
inline constexpr double kPrivacyMargin = 1e-6;

// Per-profile release mechanism: one d-by-d row-stochastic transition matrix
// per profile, in the source graph's profile order. One-bit mechanisms carry
// symmetric flip matrices [[1-a, a], [a, 1-a]] with a in [0, 0.5].
struct Mechanism {
  double epsilon = 0.0;
  std::string graph_hash;
  std::vector<std::string> profile_ids;  // graph order; used for addressing
  std::vector<Matrix> matrices;

  std::size_t dimension() const { return matrices.empty() ? 0 : matrices.front().rows(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < profile_ids.size(); ++i)
      if (profile_ids[i] == id) return i;
    return std::nullopt;
  }
};

struct Release {
  std::size_t value = 0;
  std::string profile_id;
};

inline Matrix one_bit_matrix(double alpha) {
  Matrix m(2, 2);
  m(0, 0) = 1.0 - alpha;
  m(0, 1) = alpha;
  m(1, 0) = alpha;
  m(1, 1) = 1.0 - alpha;
  return m;
}

inline double one_bit_alpha(const Mechanism& mech, std::size_t profile_index) {
  return mech.matrices.at(profile_index)(0, 1);
}

inline double max_off_diagonal(const Mechanism& mech) {
  double worst = 0.0;
  for (const Matrix& m : mech.matrices)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j)
        if (i != j) worst = std::max(worst, m(i, j));
  return worst;
}

namespace detail {

inline void check_bernoulli_domain(double p_i, double p_j, double epsilon) {
  if (!(p_i >= 0.0 && p_i <= 1.0) || !(p_j >= 0.0 && p_j <= 1.0))
    throw std::invalid_argument("two_profile_flip: parameters must lie in [0,1]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("two_profile_flip: epsilon must be positive");
}

inline void require_one_bit(const ProfileGraph& g) {
  if (g.dimension() != 2)
    throw std::invalid_argument("one-bit mechanism requires d=2 profiles");
}

// Post-synthesis audit of the exact edge ratio bound. Synthesized matrices
// are constructed to satisfy it; failure here means the solver went
// numerically wrong, so it surfaces as LpError.
inline void audit_privacy(const ProfileGraph& g, const std::vector<Matrix>& matrices) {
  const double bound = g.epsilon + kPrivacyMargin;
  std::vector<std::vector<double>> out;
  out.reserve(matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i)
    out.push_back(left_apply(g.profiles[i].dist, matrices[i]));
  for (const auto& [a, b] : edge_indices(g)) {
    for (std::size_t y = 0; y < out[a].size(); ++y) {
      const double pa = out[a][y], pb = out[b][y];
      if (pa == 0.0 && pb == 0.0) continue;
      if (pa == 0.0 || pb == 0.0 || std::abs(std::log(pa / pb)) > bound)
        throw LpError("synthesized mechanism failed the privacy audit");
    }
  }
}

}  // namespace detail

// Minimal symmetric flip probability making two Bernoulli profiles
// epsilon-indistinguishable. Closed form: each output's ratio constraint,
// when violated at alpha=0 by margin N > 0, pins alpha = N/(2N + e^eps - 1);
// the answer is the larger requirement (0 when neither output violates).
inline double two_profile_flip(double p_i, double p_j, double epsilon) {
  detail::check_bernoulli_domain(p_i, p_j, epsilon);
  const double lo = std::min(p_i, p_j);
  const double hi = std::max(p_i, p_j);
  const double e = std::exp(epsilon);
  const double n1 = hi - e * lo;                  // output-1 violation at alpha=0
  const double n2 = (1.0 - lo) - e * (1.0 - hi);  // output-0 violation at alpha=0
  const double a1 = n1 > 0.0 ? n1 / (2.0 * n1 + e - 1.0) : 0.0;
  const double a2 = n2 > 0.0 ? n2 / (2.0 * n2 + e - 1.0) : 0.0;
  return std::max(a1, a2);
}

// The same problem as a one-variable LP over alpha: both ratio constraints of
// the two-profile problem, linearized against each output's probabilities.
// Kept as an independent route for cross-checking the closed form.
inline LinearProgram make_two_profile_lp(double p_i, double p_j, double epsilon) {
  detail::check_bernoulli_domain(p_i, p_j, epsilon);
  const double e = std::exp(epsilon);
  const double ci = 1.0 - 2.0 * p_i;
  const double cj = 1.0 - 2.0 * p_j;
  LinearProgram lp;
  lp.n_vars = 1;
  lp.objective = {1.0};
  lp.var_bounds = {{0.0, 0.5}};
  // q_i <= e^eps q_j with q(alpha) = p + (1-2p) alpha, and the three mirrored
  // forms; r(alpha) = (1-p) - (1-2p) alpha is the output-0 probability.
  lp.constraints.push_back({{ci - e * cj}, Relation::LessEq, e * p_j - p_i});
  lp.constraints.push_back({{cj - e * ci}, Relation::LessEq, e * p_i - p_j});
  lp.constraints.push_back({{-ci + e * cj}, Relation::LessEq, e * (1.0 - p_j) - (1.0 - p_i)});
  lp.constraints.push_back({{-cj + e * ci}, Relation::LessEq, e * (1.0 - p_i) - (1.0 - p_j)});
  return lp;
}

// A minimax synthesis problem: constraint system plus the variable group whose
// (weighted) maximum is to be minimized via solve_minimax.
struct MinimaxLp {
  LinearProgram lp;
  std::vector<std::size_t> group;
  std::vector<double> weights;  // empty means all ones
};

namespace detail {

// Smooth one-bit constraint system over a subset of profiles (local variable
// order = `members` order). Four linear rows per edge: both outputs, both
// ratio directions.
inline MinimaxLp smooth_one_bit_subproblem(const ProfileGraph& g,
                                           std::span<const std::size_t> members,
                                           std::span<const std::pair<std::size_t, std::size_t>> edges) {
  const double e = std::exp(g.epsilon);
  std::vector<std::ptrdiff_t> local(g.profiles.size(), -1);
  for (std::size_t l = 0; l < members.size(); ++l) local[members[l]] = static_cast<std::ptrdiff_t>(l);

  MinimaxLp out;
  out.lp.n_vars = members.size();
  out.lp.objective.assign(members.size(), 0.0);
  out.lp.var_bounds.assign(members.size(), {0.0, 0.5});
  out.group.resize(members.size());
  for (std::size_t l = 0; l < members.size(); ++l) out.group[l] = l;

  auto add_ratio_rows = [&](std::size_t a, std::size_t b) {
    const double pa = g.profiles[a].bernoulli_p();
    const double pb = g.profiles[b].bernoulli_p();
    const double ca = 1.0 - 2.0 * pa;
    const double cb = 1.0 - 2.0 * pb;
    const std::size_t la = static_cast<std::size_t>(local[a]);
    const std::size_t lb = static_cast<std::size_t>(local[b]);
    auto row = [&](double coef_a, double coef_b, double rhs) {
      LpConstraint c;
      c.coeffs.assign(members.size(), 0.0);
      c.coeffs[la] += coef_a;
      c.coeffs[lb] += coef_b;
      c.rel = Relation::LessEq;
      c.rhs = rhs;
      out.lp.constraints.push_back(std::move(c));
    };
    row(ca, -e * cb, e * pb - pa);                              // q_a <= e q_b
    row(-e * ca, cb, e * pa - pb);                              // q_b <= e q_a
    row(-ca, e * cb, e * (1.0 - pb) - (1.0 - pa));              // r_a <= e r_b
    row(e * ca, -cb, e * (1.0 - pa) - (1.0 - pb));              // r_b <= e r_a
  };
  for (const auto& [a, b] : edges) add_ratio_rows(a, b);
  return out;
}

// Smooth categorical constraint system over a subset of profiles. Variable
// layout: member-local profile l, entry (x, y) -> l*d*d + x*d + y.
inline MinimaxLp smooth_categorical_subproblem(
    const ProfileGraph& g, std::span<const std::size_t> members,
    std::span<const std::pair<std::size_t, std::size_t>> edges,
    std::span<const double> profile_weights) {
  const std::size_t d = g.dimension();
  const double e = std::exp(g.epsilon);
  std::vector<std::ptrdiff_t> local(g.profiles.size(), -1);
  for (std::size_t l = 0; l < members.size(); ++l) local[members[l]] = static_cast<std::ptrdiff_t>(l);
  auto var = [d](std::size_t l, std::size_t x, std::size_t y) { return l * d * d + x * d + y; };

  MinimaxLp out;
  out.lp.n_vars = members.size() * d * d;
  out.lp.objective.assign(out.lp.n_vars, 0.0);
  out.lp.var_bounds.assign(out.lp.n_vars, {0.0, 1.0});

  for (std::size_t l = 0; l < members.size(); ++l) {
    for (std::size_t x = 0; x < d; ++x) {
      LpConstraint c;
      c.coeffs.assign(out.lp.n_vars, 0.0);
      for (std::size_t y = 0; y < d; ++y) c.coeffs[var(l, x, y)] = 1.0;
      c.rel = Relation::Equal;
      c.rhs = 1.0;
      out.lp.constraints.push_back(std::move(c));
    }
  }

  for (const auto& [a, b] : edges) {
    const std::size_t la = static_cast<std::size_t>(local[a]);
    const std::size_t lb = static_cast<std::size_t>(local[b]);
    for (std::size_t y = 0; y < d; ++y) {
      // (P_a A^a)_y <= e (P_b A^b)_y, element-wise, and the reverse direction.
      LpConstraint fwd, rev;
      fwd.coeffs.assign(out.lp.n_vars, 0.0);
      rev.coeffs.assign(out.lp.n_vars, 0.0);
      for (std::size_t x = 0; x < d; ++x) {
        fwd.coeffs[var(la, x, y)] += g.profiles[a].dist[x];
        fwd.coeffs[var(lb, x, y)] -= e * g.profiles[b].dist[x];
        rev.coeffs[var(lb, x, y)] += g.profiles[b].dist[x];
        rev.coeffs[var(la, x, y)] -= e * g.profiles[a].dist[x];
      }
      fwd.rel = rev.rel = Relation::LessEq;
      fwd.rhs = rev.rhs = 0.0;
      out.lp.constraints.push_back(std::move(fwd));
      out.lp.constraints.push_back(std::move(rev));
    }
  }

  for (std::size_t l = 0; l < members.size(); ++l) {
    const double w = profile_weights.empty() ? 1.0 : profile_weights[members[l]];
    for (std::size_t x = 0; x < d; ++x)
      for (std::size_t y = 0; y < d; ++y)
        if (x != y) {
          out.group.push_back(var(l, x, y));
          out.weights.push_back(w);
        }
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> members_by_component(const ProfileGraph& g) {
  const std::vector<int> label = component_labels(g);
  int count = 0;
  for (int l : label) count = std::max(count, l + 1);
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t i = 0; i < g.profiles.size(); ++i)
    members[label[i]].push_back(i);
  return members;
}

inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges_by_component(
    const ProfileGraph& g) {
  const std::vector<int> label = component_labels(g);
  int count = 0;
  for (int l : label) count = std::max(count, l + 1);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(count);
  for (const auto& [a, b] : edge_indices(g)) edges[label[a]].emplace_back(a, b);
  return edges;
}

}  // namespace detail

// Whole-graph constraint systems, exposed for cross-checks and property tests.
// Synthesis itself solves one subproblem per connected component.
inline MinimaxLp make_smooth_one_bit_lp(const ProfileGraph& g) {
  require_valid(g);
  detail::require_one_bit(g);
  std::vector<std::size_t> all(g.profiles.size());
  std::iota(all.begin(), all.end(), 0);
  return detail::smooth_one_bit_subproblem(g, all, edge_indices(g));
}

inline MinimaxLp make_smooth_categorical_lp(const ProfileGraph& g,
                                            std::span<const double> profile_weights = {}) {
  require_valid(g);
  if (!profile_weights.empty() && profile_weights.size() != g.profiles.size())
    throw std::invalid_argument("profile weights must match profile count");
  std::vector<std::size_t> all(g.profiles.size());
  std::iota(all.begin(), all.end(), 0);
  return detail::smooth_categorical_subproblem(g, all, edge_indices(g), profile_weights);
}

// One Bit Cluster: every profile in a connected component flips with the
// largest probability any edge of that component requires. Edgeless
// components release faithfully (alpha = 0).
inline Mechanism one_bit_cluster(const ProfileGraph& g) {
  require_valid(g);
  detail::require_one_bit(g);
  const std::vector<int> label = component_labels(g);
  int count = 0;
  for (int l : label) count = std::max(count, l + 1);
  std::vector<double> alpha(count, 0.0);
  for (const auto& [a, b] : edge_indices(g)) {
    const double req = two_profile_flip(g.profiles[a].bernoulli_p(),
                                        g.profiles[b].bernoulli_p(), g.epsilon);
    alpha[label[a]] = std::max(alpha[label[a]], req);
  }
  Mechanism mech;
  mech.epsilon = g.epsilon;
  mech.graph_hash = graph_hash(g);
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    mech.profile_ids.push_back(g.profiles[i].id);
    mech.matrices.push_back(one_bit_matrix(alpha[label[i]]));
  }
  detail::audit_privacy(g, mech.matrices);
  return mech;
}

// Smooth One Bit: jointly minimizes the largest per-profile flip probability
// subject to the ratio constraints of every edge, one LP per component.
inline Mechanism smooth_one_bit(const ProfileGraph& g) {
  require_valid(g);
  detail::require_one_bit(g);
  const auto members = detail::members_by_component(g);
  const auto edges = detail::edges_by_component(g);
  std::vector<double> alpha(g.profiles.size(), 0.0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (edges[c].empty()) continue;  // identity release
    MinimaxLp prob = detail::smooth_one_bit_subproblem(g, members[c], edges[c]);
    LpSolution sol = solve_minimax(prob.lp, prob.group);
    if (sol.status != LpStatus::Optimal)
      throw LpError("smooth_one_bit: synthesis LP not optimal (alpha=0.5 is always feasible)");
    for (std::size_t l = 0; l < members[c].size(); ++l)
      alpha[members[c][l]] = std::clamp(sol.x[l], 0.0, 0.5);
  }
  Mechanism mech;
  mech.epsilon = g.epsilon;
  mech.graph_hash = graph_hash(g);
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    mech.profile_ids.push_back(g.profiles[i].id);
    mech.matrices.push_back(one_bit_matrix(alpha[i]));
  }
  detail::audit_privacy(g, mech.matrices);
  return mech;
}

// Smooth Categorical: minimizes the largest (optionally profile-weighted)
// off-diagonal transition probability subject to row-stochasticity and the
// element-wise output ratio constraints, one LP per component. Edgeless
// components receive identity matrices.
inline Mechanism smooth_categorical(const ProfileGraph& g,
                                    std::span<const double> profile_weights = {}) {
  require_valid(g);
  if (!profile_weights.empty() && profile_weights.size() != g.profiles.size())
    throw std::invalid_argument("profile weights must match profile count");
  const std::size_t d = g.dimension();
  const auto members = detail::members_by_component(g);
  const auto edges = detail::edges_by_component(g);

  std::vector<Matrix> matrices(g.profiles.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (edges[c].empty()) {
      for (std::size_t m : members[c]) matrices[m] = Matrix::identity(d);
      continue;
    }
    MinimaxLp prob = detail::smooth_categorical_subproblem(g, members[c], edges[c], profile_weights);
    LpSolution sol = solve_minimax(prob.lp, prob.group, prob.weights);
    if (sol.status != LpStatus::Optimal)
      throw LpError("smooth_categorical: synthesis LP not optimal (uniform rows are always feasible)");
    for (std::size_t l = 0; l < members[c].size(); ++l) {
      Matrix m(d, d);
      for (std::size_t x = 0; x < d; ++x)
        for (std::size_t y = 0; y < d; ++y) m(x, y) = sol.x[l * d * d + x * d + y];
      if (clamp_and_renormalize_rows(m) > 1e-8)
        throw LpError("smooth_categorical: solution needed more than cosmetic cleanup");
      matrices[members[c][l]] = std::move(m);
    }
  }
  Mechanism mech;
  mech.epsilon = g.epsilon;
  mech.graph_hash = graph_hash(g);
  for (const Profile& p : g.profiles) mech.profile_ids.push_back(p.id);
  mech.matrices = std::move(matrices);
  detail::audit_privacy(g, mech.matrices);
  return mech;
}

// Draws an index from a discrete distribution using uniform deviates built
// directly from the generator's output, so results are identical across
// standard library implementations.
inline std::size_t sample_index(std::span<const double> probs, std::mt19937_64& gen) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  return last_positive;
}

// Releases a category for observation x under the given profile's transition
// matrix. Deterministic given (seed, inputs).
inline Release apply(const Mechanism& mech, std::string_view profile_id, std::size_t x,
                     std::uint64_t seed) {
  auto idx = mech.index_of(profile_id);
  if (!idx) throw std::out_of_range("apply: unknown profile id");
  const Matrix& m = mech.matrices[*idx];
  if (x >= m.rows()) throw std::out_of_range("apply: observation index out of range");
  std::mt19937_64 gen(seed);
  return Release{sample_index(m.row(x), gen), std::string(profile_id)};
}

// --- Mechanism file format ---------------------------------------------------
//
// JSON object with exactly the keys `epsilon` (number), `graph_hash` (hex
// string) and `matrices` (one flat row-major d*d array per profile, in graph
// profile order). Doubles round-trip losslessly.

inline nlohmann::ordered_json mechanism_to_json(const Mechanism& mech) {
  nlohmann::ordered_json j;
  j["epsilon"] = mech.epsilon;
  j["graph_hash"] = mech.graph_hash;
  j["matrices"] = nlohmann::ordered_json::array();
  for (const Matrix& m : mech.matrices) j["matrices"].push_back(m.data());
  return j;
}

inline Mechanism parse_mechanism(const nlohmann::json& j, const ProfileGraph& graph) {
  if (!j.is_object()) throw std::invalid_argument("mechanism: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "epsilon" && key != "graph_hash" && key != "matrices")
      throw std::invalid_argument("mechanism: unknown key '" + key + "'");
  }
  if (!j.contains("epsilon") || !j.contains("graph_hash") || !j.contains("matrices"))
    throw std::invalid_argument("mechanism: keys epsilon, graph_hash, matrices are required");
  if (!j["epsilon"].is_number() || !j["graph_hash"].is_string() || !j["matrices"].is_array())
    throw std::invalid_argument("mechanism: malformed field types");

  const std::size_t d = graph.dimension();
  Mechanism mech;
  mech.epsilon = j["epsilon"].get<double>();
  mech.graph_hash = j["graph_hash"].get<std::string>();
  if (j["matrices"].size() != graph.profiles.size())
    throw std::invalid_argument("mechanism: matrix count differs from graph profile count");
  for (const auto& mj : j["matrices"]) {
    if (!mj.is_array() || mj.size() != d * d)
      throw std::invalid_argument("mechanism: each matrix must be a flat row-major d*d array");
    Matrix m(d, d);
    for (std::size_t k = 0; k < d * d; ++k) {
      if (!mj[k].is_number()) throw std::invalid_argument("mechanism: entries must be numbers");
      m.data()[k] = mj[k].get<double>();
    }
    if (!is_row_stochastic(m, 1e-9))
      throw std::invalid_argument("mechanism: matrix is not row-stochastic");
    mech.matrices.push_back(std::move(m));
  }
  for (const Profile& p : graph.profiles) mech.profile_ids.push_back(p.id);
  return mech;
}

inline void save_mechanism(const Mechanism& mech, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write mechanism file: " + path.string());
  out << mechanism_to_json(mech).dump(2) << '\n';
}

inline Mechanism load_mechanism(const std::filesystem::path& path, const ProfileGraph& graph) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mechanism file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("mechanism: JSON parse error: " + std::string(e.what()));
  }
  return parse_mechanism(j, graph);
}

}  // namespace ppriv
