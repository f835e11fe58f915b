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

#include "relidar/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace relidar {

namespace {
std::atomic<int> g_workers{0};

int effective_workers() {
  const int configured = g_workers.load(std::memory_order_relaxed);
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_worker_count(int workers) {
  g_workers.store(workers < 0 ? 0 : workers, std::memory_order_relaxed);
}

int worker_count() { return effective_workers(); }

std::size_t chunk_count(std::size_t n) {
  const std::size_t workers = static_cast<std::size_t>(effective_workers());
  return std::max<std::size_t>(1, std::min(workers, n));
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t chunks = chunk_count(n);
  if (chunks == 1) {
    fn(0, 0, n);
    return;
  }
  const std::size_t per = (n + chunks - 1) / chunks;
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * per;
    const std::size_t end = std::min(n, begin + per);
    if (begin >= end) break;
    threads.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  parallel_chunks(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    fn(begin, end);
  });
}

}  // namespace relidar
