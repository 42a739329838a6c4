// Copyright 2026 The PIFM Authors.
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

#ifndef PIFM_PARALLEL_H_
#define PIFM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace pifm {

// Worker count: PIFM_THREADS when set (>= 1), otherwise the hardware
// concurrency.
std::size_t ThreadCount();

// Runs fn(i) for i in [0, n). Work items must be independent; callers reduce
// results in index order afterwards so the outcome does not depend on the
// number of threads.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pifm

#endif  // PIFM_PARALLEL_H_
