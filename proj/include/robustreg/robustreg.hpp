// Copyright 2026 The robustreg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "robustreg/discrepancy.hpp"
#include "robustreg/exponent.hpp"
#include "robustreg/lp.hpp"
#include "robustreg/lqs.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/matrix_reg.hpp"
#include "robustreg/norms.hpp"
#include "robustreg/regression.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/robustify.hpp"
#include "robustreg/rootfind.hpp"
#include "robustreg/svd.hpp"

namespace robustreg {
inline constexpr const char* kVersion = "0.1.0";
}
