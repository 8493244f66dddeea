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
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppriv/matrix.hpp"
#include "ppriv/mechanisms.hpp"
#include "ppriv/profile_graph.hpp"

namespace ppriv {

// Worst-case log-output-ratio audit of a mechanism against a graph's edges.
// Infinite ratios (an output reachable under one profile, impossible under
// the other) are reported rather than thrown: auditing third-party
// mechanisms must not abort on failures.
struct EdgeCheck {
  std::string profile_a;
  std::string profile_b;
  std::size_t worst_output = 0;
  double max_abs_log_ratio = 0.0;  // +infinity when `infinite`
  bool infinite = false;
};

struct PrivacyReport {
  std::vector<EdgeCheck> per_edge;
  double overall = 0.0;
  double epsilon = 0.0;  // target the report was checked against
  bool pass = false;
};

namespace detail {

// Report construction from already-computed per-profile output
// distributions. The composition checks reuse this with joint distributions.
inline PrivacyReport report_from_outputs(const ProfileGraph& g,
                                         const std::vector<std::vector<double>>& out,
                                         double target_epsilon) {
  PrivacyReport report;
  report.epsilon = target_epsilon;
  report.overall = 0.0;
  for (const auto& [a, b] : edge_indices(g)) {
    EdgeCheck check;
    check.profile_a = g.profiles[a].id;
    check.profile_b = g.profiles[b].id;
    for (std::size_t y = 0; y < out[a].size(); ++y) {
      const double pa = out[a][y], pb = out[b][y];
      double ratio;
      if (pa == 0.0 && pb == 0.0) {
        ratio = 0.0;  // unreachable output on both sides: treated as ratio 1
      } else if (pa == 0.0 || pb == 0.0) {
        ratio = std::numeric_limits<double>::infinity();
      } else {
        ratio = std::abs(std::log(pa / pb));
      }
      if (ratio > check.max_abs_log_ratio) {
        check.max_abs_log_ratio = ratio;
        check.worst_output = y;
      }
    }
    check.infinite = std::isinf(check.max_abs_log_ratio);
    report.overall = std::max(report.overall, check.max_abs_log_ratio);
    report.per_edge.push_back(std::move(check));
  }
  report.pass = report.overall <= target_epsilon + kPrivacyMargin;
  return report;
}

inline void require_matching(const ProfileGraph& g, const Mechanism& mech) {
  if (mech.matrices.size() != g.profiles.size() || mech.dimension() != g.dimension())
    throw std::invalid_argument("verifier: mechanism dimensions do not match graph");
}

inline std::vector<std::vector<double>> exact_outputs(const ProfileGraph& g,
                                                      const Mechanism& mech) {
  std::vector<std::vector<double>> out;
  out.reserve(g.profiles.size());
  for (std::size_t i = 0; i < g.profiles.size(); ++i)
    out.push_back(left_apply(g.profiles[i].dist, mech.matrices[i]));
  return out;
}

}  // namespace detail

// Exact certification: computes each profile's output distribution P_i A^i
// and takes the worst |log ratio| over every edge and output symbol.
inline PrivacyReport verify_exact(const ProfileGraph& g, const Mechanism& mech) {
  require_valid(g);
  detail::require_matching(g, mech);
  return detail::report_from_outputs(g, detail::exact_outputs(g, mech), g.epsilon);
}

struct OutputEstimate {
  double estimate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

struct MonteCarloReport {
  PrivacyReport report;  // plug-in estimate of the exact report
  std::vector<std::vector<OutputEstimate>> per_profile;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline OutputEstimate wilson_interval(std::size_t hits, std::size_t n) {
  const double z = 1.959963984540054;  // 95% normal quantile
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double z2n = z * z / static_cast<double>(n);
  const double center = (p + z2n / 2.0) / (1.0 + z2n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + z2n / (4.0 * static_cast<double>(n))) /
      (1.0 + z2n);
  return OutputEstimate{p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace detail

// Empirical cross-check: samples n_samples releases per profile through the
// full observe-then-release pipeline and rebuilds the report from plug-in
// output frequencies, with per-output Wilson 95% intervals.
inline MonteCarloReport verify_monte_carlo(const ProfileGraph& g, const Mechanism& mech,
                                           std::size_t n_samples, std::uint64_t seed) {
  require_valid(g);
  detail::require_matching(g, mech);
  if (n_samples < 10000)
    throw std::invalid_argument("verify_monte_carlo: need at least 10^4 samples");

  const std::size_t d = g.dimension();
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> est(g.profiles.size());
  MonteCarloReport mc;
  mc.n_samples = n_samples;
  mc.seed = seed;
  mc.per_profile.resize(g.profiles.size());
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    std::vector<std::size_t> counts(d, 0);
    for (std::size_t s = 0; s < n_samples; ++s) {
      const std::size_t x = sample_index(g.profiles[i].dist, gen);
      const std::size_t y = sample_index(mech.matrices[i].row(x), gen);
      ++counts[y];
    }
    est[i].resize(d);
    mc.per_profile[i].resize(d);
    for (std::size_t y = 0; y < d; ++y) {
      est[i][y] = static_cast<double>(counts[y]) / static_cast<double>(n_samples);
      mc.per_profile[i][y] = detail::wilson_interval(counts[y], n_samples);
    }
  }
  mc.report = detail::report_from_outputs(g, est, g.epsilon);
  return mc;
}

// Data-processing check: verifies the edge ratio bound on the composed
// matrices A^i * F. Must pass whenever the base mechanism passes.
inline PrivacyReport check_post_processing(const ProfileGraph& g, const Mechanism& mech,
                                           const Matrix& post) {
  require_valid(g);
  detail::require_matching(g, mech);
  if (post.rows() != g.dimension())
    throw std::invalid_argument("check_post_processing: post matrix row count must equal d");
  if (!is_row_stochastic(post, 1e-9))
    throw std::invalid_argument("check_post_processing: post matrix must be row-stochastic");
  std::vector<std::vector<double>> out;
  out.reserve(g.profiles.size());
  for (std::size_t i = 0; i < g.profiles.size(); ++i)
    out.push_back(left_apply(g.profiles[i].dist, matmul(mech.matrices[i], post)));
  return detail::report_from_outputs(g, out, g.epsilon);
}

// Additive composition: two independent observations of the same profile,
// each released through its own mechanism. The joint release distribution is
// the product of the two marginals; the edge ratios are checked against
// eps_1 + eps_2 by exact enumeration of all d*d output pairs.
//
// No bound is produced for correlated observations (for example the same
// observation privatized twice); that setting carries no guarantee here.
inline PrivacyReport check_additive_composition(const ProfileGraph& g, const Mechanism& m1,
                                                const Mechanism& m2) {
  require_valid(g);
  detail::require_matching(g, m1);
  detail::require_matching(g, m2);
  const auto out1 = detail::exact_outputs(g, m1);
  const auto out2 = detail::exact_outputs(g, m2);
  const std::size_t d1 = g.dimension(), d2 = g.dimension();
  std::vector<std::vector<double>> joint(g.profiles.size());
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    joint[i].resize(d1 * d2);
    for (std::size_t y1 = 0; y1 < d1; ++y1)
      for (std::size_t y2 = 0; y2 < d2; ++y2)
        joint[i][y1 * d2 + y2] = out1[i][y1] * out2[i][y2];
  }
  return detail::report_from_outputs(g, joint, m1.epsilon + m2.epsilon);
}

// Parallel composition: two releases from independently selected profiles.
// Conditioning on either round's profile, the other round's factor is a
// fixed mixture that cancels in every ratio, so each edge is checked at
// max(eps_1, eps_2) by enumerating the joint outputs for both roles.
//
// No bound is produced for correlated profile selections.
inline PrivacyReport check_parallel_composition(const ProfileGraph& g, const Mechanism& m1,
                                                const Mechanism& m2) {
  require_valid(g);
  detail::require_matching(g, m1);
  detail::require_matching(g, m2);
  const auto out1 = detail::exact_outputs(g, m1);
  const auto out2 = detail::exact_outputs(g, m2);
  const std::size_t d = g.dimension();
  const std::size_t k = g.profiles.size();

  // Unconditioned marginal of the other round under a uniform profile
  // choice; any positive mixture gives the same ratios.
  std::vector<double> mix1(d, 0.0), mix2(d, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t y = 0; y < d; ++y) {
      mix1[y] += out1[i][y] / static_cast<double>(k);
      mix2[y] += out2[i][y] / static_cast<double>(k);
    }

  std::vector<std::vector<double>> joint_role1(k), joint_role2(k);
  for (std::size_t i = 0; i < k; ++i) {
    joint_role1[i].resize(d * d);
    joint_role2[i].resize(d * d);
    for (std::size_t y1 = 0; y1 < d; ++y1)
      for (std::size_t y2 = 0; y2 < d; ++y2) {
        joint_role1[i][y1 * d + y2] = out1[i][y1] * mix2[y2];
        joint_role2[i][y1 * d + y2] = mix1[y1] * out2[i][y2];
      }
  }
  const double target = std::max(m1.epsilon, m2.epsilon);
  PrivacyReport r1 = detail::report_from_outputs(g, joint_role1, target);
  PrivacyReport r2 = detail::report_from_outputs(g, joint_role2, target);
  PrivacyReport merged;
  merged.epsilon = target;
  merged.overall = 0.0;
  for (std::size_t e = 0; e < r1.per_edge.size(); ++e) {
    const EdgeCheck& worse =
        r1.per_edge[e].max_abs_log_ratio >= r2.per_edge[e].max_abs_log_ratio ? r1.per_edge[e]
                                                                             : r2.per_edge[e];
    merged.per_edge.push_back(worse);
    merged.overall = std::max(merged.overall, worse.max_abs_log_ratio);
  }
  merged.pass = merged.overall <= target + kPrivacyMargin;
  return merged;
}

// --- Report serialization ----------------------------------------------------

namespace detail {

inline nlohmann::ordered_json ratio_to_json(double v) {
  if (std::isinf(v)) return "infinite";
  return v;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const PrivacyReport& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["overall"] = detail::ratio_to_json(r.overall);
  j["pass"] = r.pass;
  j["per_edge"] = nlohmann::ordered_json::array();
  for (const EdgeCheck& e : r.per_edge) {
    j["per_edge"].push_back({{"profile_a", e.profile_a},
                             {"profile_b", e.profile_b},
                             {"worst_output", e.worst_output},
                             {"max_abs_log_ratio", detail::ratio_to_json(e.max_abs_log_ratio)},
                             {"infinite", e.infinite}});
  }
  return j;
}

// Flat per-edge rows; the summary fields live in the JSON form.
inline std::string report_to_csv(const PrivacyReport& r) {
  std::ostringstream out;
  out << "profile_a,profile_b,worst_output,max_abs_log_ratio,infinite\n";
  for (const EdgeCheck& e : r.per_edge) {
    out << e.profile_a << ',' << e.profile_b << ',' << e.worst_output << ',';
    if (e.infinite)
      out << "infinite";
    else
      out << detail::format_double(e.max_abs_log_ratio);
    out << ',' << (e.infinite ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace ppriv
