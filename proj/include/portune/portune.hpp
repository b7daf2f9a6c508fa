// Copyright 2026 The Authors.
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

#include "portune/core/error.hpp"
#include "portune/core/random.hpp"
#include "portune/core/types.hpp"
#include "portune/dataset/canonical.hpp"
#include "portune/dataset/clblast.hpp"
#include "portune/dataset/csv.hpp"
#include "portune/dataset/dataset.hpp"
#include "portune/dataset/slowdown_matrix.hpp"
#include "portune/dataset/synthetic.hpp"
#include "portune/evaluation/experiments.hpp"
#include "portune/evaluation/report.hpp"
#include "portune/evaluation/serialize.hpp"
#include "portune/objectives/objectives.hpp"
#include "portune/selectors/select.hpp"
#include "portune/selectors/serialize.hpp"
