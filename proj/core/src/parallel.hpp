// Copyright 2026 The MTE Pricing Authors.
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

#ifndef MTE_SRC_PARALLEL_HPP_
#define MTE_SRC_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace mte::internal {

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
// processed exactly once; callers write results into per-index slots so
// the outcome does not depend on scheduling. The exception thrown for the
// lowest failing index is rethrown after all threads join.
void ParallelFor(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace mte::internal

#endif  // MTE_SRC_PARALLEL_HPP_
