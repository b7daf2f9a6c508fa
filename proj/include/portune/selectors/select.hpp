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

#include "portune/selectors/exhaustive.hpp"
#include "portune/selectors/job.hpp"
#include "portune/selectors/kmeans.hpp"
#include "portune/selectors/stochastic.hpp"
#include "portune/selectors/tree.hpp"

namespace portune {

template <SlowdownTable Table>
SelectionResult select(const Table& table, const SelectionJob& job, const FeatureMatrix& features = {}) {
  switch (job.method) {
    case Method::kExhaustive: return select_exhaustive(table, job);
    case Method::kStochastic: return select_stochastic(table, job);
    case Method::kKMeans: return select_kmeans(table, job);
    case Method::kDecisionTree: return select_tree(table, job, features);
  }
  throw PreconditionError("unknown selection method");
}

}  // namespace portune
