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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ppriv {

inline constexpr double kSimplexSumTol = 1e-12;

// A named discrete data-generating distribution over d categories.
// d == 2 encodes a Bernoulli profile with p = dist[1].
struct Profile {
  std::string id;
  std::vector<double> dist;

  double bernoulli_p() const { return dist.size() == 2 ? dist[1] : 0.0; }
};

inline Profile bernoulli_profile(std::string id, double p) {
  return Profile{std::move(id), {1.0 - p, p}};
}

// An unordered pair of profile ids marking a sensitive pair.
struct Edge {
  std::string a;
  std::string b;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// The sensitivity graph: profiles as nodes, edges as pairs whose identity a
// release must keep epsilon-indistinguishable.
struct ProfileGraph {
  std::vector<Profile> profiles;
  std::vector<Edge> edges;
  double epsilon = 0.0;

  std::size_t dimension() const { return profiles.empty() ? 0 : profiles.front().dist.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < profiles.size(); ++i)
      if (profiles[i].id == id) return i;
    return std::nullopt;
  }
};

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every graph invariant and reports all violations found. Violations
// are data, not failures: a malformed graph never throws here.
inline ValidationResult validate(const ProfileGraph& g) {
  ValidationResult r;
  auto complain = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

  if (!(g.epsilon > 0.0) || !std::isfinite(g.epsilon))
    complain("epsilon must be positive and finite");

  const std::size_t d = g.dimension();
  for (std::size_t i = 0; i < g.profiles.size(); ++i) {
    const Profile& p = g.profiles[i];
    if (p.id.empty()) complain("profile #" + std::to_string(i) + ": empty id");
    for (std::size_t j = 0; j < i; ++j)
      if (g.profiles[j].id == p.id) complain("duplicate profile id '" + p.id + "'");
    if (p.dist.size() < 2) {
      complain("profile '" + p.id + "': needs at least 2 categories");
      continue;
    }
    if (p.dist.size() != d)
      complain("profile '" + p.id + "': dimension differs from first profile");
    double sum = 0.0;
    bool in_range = true;
    for (double v : p.dist) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) in_range = false;
      sum += v;
    }
    if (!in_range) complain("profile '" + p.id + "': entries must lie in [0,1]");
    if (std::abs(sum - 1.0) > kSimplexSumTol)
      complain("profile '" + p.id + "': simplex sum differs from 1");
  }

  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    const bool a_ok = g.index_of(e.a).has_value();
    const bool b_ok = g.index_of(e.b).has_value();
    if (!a_ok) complain("edge (" + e.a + "," + e.b + "): unknown profile '" + e.a + "'");
    if (!b_ok) complain("edge (" + e.a + "," + e.b + "): unknown profile '" + e.b + "'");
    if (e.a == e.b) complain("edge (" + e.a + "," + e.b + "): self-loop");
    for (std::size_t j = 0; j < i; ++j) {
      const Edge& f = g.edges[j];
      if ((f.a == e.a && f.b == e.b) || (f.a == e.b && f.b == e.a))
        complain("edge (" + e.a + "," + e.b + "): duplicate");
    }
  }
  return r;
}

// Throws std::invalid_argument listing every violation unless the graph is
// valid. Used by operations whose precondition is a validated graph.
inline void require_valid(const ProfileGraph& g) {
  ValidationResult r = validate(g);
  if (r.ok()) return;
  std::string msg = "invalid profile graph:";
  for (const std::string& v : r.violations) msg += "\n  - " + v;
  throw std::invalid_argument(msg);
}

// Validates, then rescales each profile distribution to sum exactly to 1 so
// downstream LP coefficients stay consistent.
inline ProfileGraph validated(ProfileGraph g) {
  require_valid(g);
  for (Profile& p : g.profiles) {
    const double sum = std::accumulate(p.dist.begin(), p.dist.end(), 0.0);
    for (double& v : p.dist) v /= sum;
  }
  return g;
}

// Edges as index pairs into graph.profiles, in edge order.
inline std::vector<std::pair<std::size_t, std::size_t>> edge_indices(const ProfileGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    auto a = g.index_of(e.a);
    auto b = g.index_of(e.b);
    if (!a || !b) throw std::invalid_argument("edge references unknown profile");
    out.emplace_back(*a, *b);
  }
  return out;
}

// Component label per profile index. Labels are dense, assigned by first
// appearance in profile order, so the result is invariant under edge-list
// permutation.
inline std::vector<int> component_labels(const ProfileGraph& g) {
  const std::size_t n = g.profiles.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edge_indices(g)) {
    std::size_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = find(i);
    if (label[r] < 0) label[r] = next++;
    label[i] = label[r];
  }
  return label;
}

// Partition of profile ids into connected components, each component and the
// component list ordered by profile position.
inline std::vector<std::vector<std::string>> connected_components(const ProfileGraph& g) {
  const std::vector<int> label = component_labels(g);
  int count = 0;
  for (int l : label) count = std::max(count, l + 1);
  std::vector<std::vector<std::string>> parts(count);
  for (std::size_t i = 0; i < g.profiles.size(); ++i)
    parts[label[i]].push_back(g.profiles[i].id);
  return parts;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// Order-insensitive digest of a graph: profiles in order, edges canonicalized
// and sorted. Two files describing the same graph with permuted edge lists
// hash identically.
inline std::string graph_hash(const ProfileGraph& g) {
  std::ostringstream canon;
  canon << "eps=" << detail::format_double(g.epsilon) << ';';
  for (const Profile& p : g.profiles) {
    canon << "p:" << p.id << '=';
    for (double v : p.dist) canon << detail::format_double(v) << ',';
    canon << ';';
  }
  std::vector<std::string> edges;
  edges.reserve(g.edges.size());
  for (const Edge& e : g.edges)
    edges.push_back(e.a < e.b ? e.a + "|" + e.b : e.b + "|" + e.a);
  std::sort(edges.begin(), edges.end());
  for (const std::string& e : edges) canon << "e:" << e << ';';

  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(canon.str())));
  return buf;
}

// --- Graph file format -------------------------------------------------------
//
// JSON object with exactly the keys `epsilon` (number), `profiles` (array of
// {"id": string, "dist": [numbers]}) and `edges` (array of 2-element id
// arrays). Unknown keys are rejected.

inline ProfileGraph parse_graph(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("graph: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "epsilon" && key != "profiles" && key != "edges")
      throw std::invalid_argument("graph: unknown key '" + key + "'");
  }
  if (!j.contains("epsilon") || !j.contains("profiles") || !j.contains("edges"))
    throw std::invalid_argument("graph: keys epsilon, profiles, edges are required");
  if (!j["epsilon"].is_number()) throw std::invalid_argument("graph: epsilon must be a number");
  if (!j["profiles"].is_array()) throw std::invalid_argument("graph: profiles must be an array");
  if (!j["edges"].is_array()) throw std::invalid_argument("graph: edges must be an array");

  ProfileGraph g;
  g.epsilon = j["epsilon"].get<double>();
  for (const auto& pj : j["profiles"]) {
    if (!pj.is_object()) throw std::invalid_argument("graph: profile must be an object");
    for (const auto& [key, value] : pj.items()) {
      (void)value;
      if (key != "id" && key != "dist")
        throw std::invalid_argument("graph: unknown profile key '" + key + "'");
    }
    if (!pj.contains("id") || !pj.contains("dist"))
      throw std::invalid_argument("graph: profile needs id and dist");
    if (!pj["id"].is_string()) throw std::invalid_argument("graph: profile id must be a string");
    if (!pj["dist"].is_array()) throw std::invalid_argument("graph: profile dist must be an array");
    Profile p;
    p.id = pj["id"].get<std::string>();
    for (const auto& v : pj["dist"]) {
      if (!v.is_number()) throw std::invalid_argument("graph: dist entries must be numbers");
      p.dist.push_back(v.get<double>());
    }
    g.profiles.push_back(std::move(p));
  }
  for (const auto& ej : j["edges"]) {
    if (!ej.is_array() || ej.size() != 2 || !ej[0].is_string() || !ej[1].is_string())
      throw std::invalid_argument("graph: each edge must be a 2-element array of ids");
    g.edges.push_back(Edge{ej[0].get<std::string>(), ej[1].get<std::string>()});
  }
  return g;
}

inline nlohmann::ordered_json graph_to_json(const ProfileGraph& g) {
  nlohmann::ordered_json j;
  j["epsilon"] = g.epsilon;
  j["profiles"] = nlohmann::ordered_json::array();
  for (const Profile& p : g.profiles)
    j["profiles"].push_back({{"id", p.id}, {"dist", p.dist}});
  j["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges)
    j["edges"].push_back(nlohmann::ordered_json::array({e.a, e.b}));
  return j;
}

// Loads, validates and renormalizes a graph file. Throws std::invalid_argument
// on malformed input or invariant violations.
inline ProfileGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("graph: JSON parse error: " + std::string(e.what()));
  }
  return validated(parse_graph(j));
}

inline void save_graph(const ProfileGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write graph file: " + path.string());
  out << graph_to_json(g).dump(2) << '\n';
}

}  // namespace ppriv
