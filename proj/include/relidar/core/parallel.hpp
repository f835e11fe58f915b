/*
 * Copyright 2026 The Relidar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>

namespace relidar {

/// Process-wide worker count for parallel_for; 0 restores hardware default.
void set_worker_count(int workers);
int worker_count();

/// Runs fn(begin, end) over disjoint chunks of [0, n) on worker threads and
/// joins. Deterministic as long as chunks write disjoint state; exceptions
/// from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Same with an explicit chunk index, for per-worker scratch buffers.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t chunk, std::size_t begin,
                                              std::size_t end)>& fn);

/// Number of chunks parallel_chunks will use for n items.
std::size_t chunk_count(std::size_t n);

}  // namespace relidar
