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
#include <stdexcept>

#include "ppriv/matrix.hpp"
#include "ppriv/mechanisms.hpp"
#include "ppriv/profile_graph.hpp"

namespace ppriv {

// Classical local-DP mechanism: one transition matrix shared by every
// profile, keeping the true category with probability e^eps/(e^eps + d - 1).
struct LdpMechanism {
  std::size_t d = 0;
  double epsilon = 0.0;
  Matrix matrix;
};

inline double rr_flip_probability(double epsilon) { return 1.0 / (1.0 + std::exp(epsilon)); }

// k-ary randomized response. For d=2 this is Warner's mechanism with flip
// probability 1/(1 + e^eps).
inline LdpMechanism randomized_response(std::size_t d, double epsilon) {
  if (d < 2) throw std::invalid_argument("randomized_response: d must be at least 2");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("randomized_response: epsilon must be positive");
  const double e = std::exp(epsilon);
  const double off = 1.0 / (e + static_cast<double>(d) - 1.0);
  Matrix m(d, d, off);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0 - static_cast<double>(d - 1) * off;
  return LdpMechanism{d, epsilon, std::move(m)};
}

// Lifts an LDP mechanism into the profile-based setting: the same matrix for
// every profile. Satisfies the profile ratio bound for any graph at the same
// epsilon, since the shared matrix never uses profile identity.
inline Mechanism as_profile_mechanism(const LdpMechanism& ldp, const ProfileGraph& graph) {
  require_valid(graph);
  if (graph.dimension() != ldp.d)
    throw std::invalid_argument("as_profile_mechanism: dimension mismatch");
  Mechanism mech;
  mech.epsilon = ldp.epsilon;
  mech.graph_hash = graph_hash(graph);
  for (const Profile& p : graph.profiles) {
    mech.profile_ids.push_back(p.id);
    mech.matrices.push_back(ldp.matrix);
  }
  return mech;
}

}  // namespace ppriv
