// Copyright 2026 The echoprop Authors
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

// Named oscillator configurations with reference parameters.

#pragma once

#include <string>
#include <vector>

#include "echoprop/oscillator.hpp"

namespace echoprop {

struct ZooMember {
  std::string name;
  ModelPair model;
  ParamVector theta;
};

/// Deterministic reference parameters: θ_i = 0.5 + 0.1·(i mod 5) for stiffness
/// and input entries, log-masses 0.1·(i mod 3) - 0.1.
inline ParamVector reference_theta(const OscillatorNetwork& net) {
  Vec v(net.param_dim());
  const int n_si = net.stiffness_params() + net.input_params();
  for (int i = 0; i < net.param_dim(); ++i) {
    v(i) = i < n_si ? 0.5 + 0.1 * (i % 5) : 0.1 * ((i - n_si) % 3) - 0.1;
  }
  return ParamVector(v);
}

/// Every configuration the test-suite quantifies over.
inline std::vector<ZooMember> model_zoo() {
  std::vector<ZooMember> zoo;
  auto add = [&](std::string name, int d, CouplingTopology topo) {
    ModelPair m = make_oscillator_model(d, topo);
    ParamVector th = reference_theta(*m.network);
    zoo.push_back({std::move(name), std::move(m), std::move(th)});
  };
  CouplingTopology scalar;
  scalar.kind = Topology::diagonal;
  scalar.stiffness = StiffnessParam::direct;
  add("scalar", 1, scalar);

  CouplingTopology chain;
  chain.input_dim = 1;
  add("chain2", 2, chain);

  CouplingTopology full;
  full.kind = Topology::full;
  full.input_dim = 2;
  add("full3", 3, full);

  CouplingTopology quartic = chain;
  quartic.quartic = 0.5;
  add("quartic2", 2, quartic);

  CouplingTopology mass = chain;
  mass.learn_mass = true;
  add("mass2", 2, mass);
  return zoo;
}

}  // namespace echoprop
