// Copyright 2026 The DeceptForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef DECEPTFORGE_DECEPTFORGE_HPP_
#define DECEPTFORGE_DECEPTFORGE_HPP_

#include "deceptforge/case_spec.hpp"
#include "deceptforge/detect.hpp"
#include "deceptforge/errors.hpp"
#include "deceptforge/eval.hpp"
#include "deceptforge/evolve.hpp"
#include "deceptforge/fitness.hpp"
#include "deceptforge/genome.hpp"
#include "deceptforge/lexicon.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/oracle.hpp"
#include "deceptforge/report.hpp"
#include "deceptforge/rng.hpp"
#include "deceptforge/scored.hpp"
#include "deceptforge/target.hpp"
#include "deceptforge/text.hpp"
#include "deceptforge/wire.hpp"

#endif  // DECEPTFORGE_DECEPTFORGE_HPP_
