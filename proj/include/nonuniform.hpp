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

#ifndef NONUNIFORM_NONUNIFORM_HPP
#define NONUNIFORM_NONUNIFORM_HPP

#include "nonuniform/analysis.hpp"
#include "nonuniform/bandit.hpp"
#include "nonuniform/core.hpp"
#include "nonuniform/glm.hpp"
#include "nonuniform/mdp.hpp"
#include "nonuniform/objectives.hpp"
#include "nonuniform/optimizers.hpp"
#include "nonuniform/presets.hpp"
#include "nonuniform/verify.hpp"

#endif  // NONUNIFORM_NONUNIFORM_HPP
