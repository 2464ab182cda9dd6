// Copyright 2026 The nonuniform-opt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NONUNIFORM_PRESETS_HPP
#define NONUNIFORM_PRESETS_HPP

#include "nonuniform/bandit.hpp"
#include "nonuniform/glm.hpp"
#include "nonuniform/mdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nonuniform::presets {

/// Figure ids accepted by the command line tool.
inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig3", "fig6", "fig7", "d1", "d2", "d3", "d4"};
  return ids;
}

// Power functions.
inline constexpr double kPower4GdEta = 0.01;
inline constexpr double kPower4GngdEta = 0.01;
inline constexpr double kPower15GdEta = 0.005;
inline constexpr double kPower15GngdEta = 0.01;
inline constexpr double kPowerStart = 1.0;

// Bandit.
inline BanditInstance bandit_instance() { return BanditInstance(make_vec({1.0, 0.8, 0.1})); }
inline constexpr double kBanditGnpgEta = 1.0 / 6.0;
inline constexpr double kBanditPgEta = 0.4;

// GLM.
inline constexpr Index kGlmSamples = 10;
inline constexpr Index kGlmDim = 2;
inline constexpr std::uint64_t kGlmSeed = 7;
inline constexpr double kGlmEta = 0.09;

inline GlmDataset glm_dataset(std::uint64_t seed = kGlmSeed) {
  return GlmDataset::generate(kGlmSamples, kGlmDim, seed, true);
}

// Tree MDPs.
struct TreePreset {
  int height;
  int branching;
  double eta;
};

inline constexpr double kTreeGamma = 0.99;
inline constexpr std::uint64_t kTreeSeed = 2026;
inline constexpr long kTreeIters = 10000;

inline const std::vector<TreePreset>& tree_presets() {
  static const std::vector<TreePreset> trees = {{4, 4, 0.02}, {5, 4, 0.05}};
  return trees;
}

inline TabularMdp tree(const TreePreset& p, std::uint64_t seed = kTreeSeed, TreeMdpInfo* info = nullptr) {
  return tree_mdp(p.height, p.branching, kTreeGamma, TreeRewards::uniform, seed, info);
}

}  // namespace nonuniform::presets

#endif  // NONUNIFORM_PRESETS_HPP
