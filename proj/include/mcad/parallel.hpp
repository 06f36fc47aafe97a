// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MCAD_PARALLEL_HPP
#define MCAD_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace mcad {

// Runs body(0) ... body(count - 1) on up to `threads` workers. Each index is
// executed exactly once; callers write results into per-index slots so the
// outcome does not depend on scheduling. The first exception thrown by any
// body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// 0 means "use hardware concurrency".
unsigned resolve_thread_count(unsigned requested);

} // namespace mcad

#endif
