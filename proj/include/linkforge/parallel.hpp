#pragma once
// Static-partition parallel loops. Work is split into contiguous chunks whose
// results are merged in chunk order, so output never depends on scheduling.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace linkforge {

// 0 means "use LINKFORGE_THREADS, then hardware concurrency".
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LINKFORGE_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls body(chunk_index, begin, end) for each chunk of [0, n).
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, std::size_t n_chunks, Body&& body) {
  if (n == 0) return;
  n_chunks = std::clamp<std::size_t>(n_chunks, 1, n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_chunks)));
  auto bounds = [&](std::size_t c) { return std::pair{c * n / n_chunks, (c + 1) * n / n_chunks}; };

  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      auto [b, e] = bounds(c);
      body(c, b, e);
    }
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t c = t; c < n_chunks; c += threads) {
        try {
          auto [b, e] = bounds(c);
          body(c, b, e);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  parallel_chunks(n, threads, std::size_t(threads) * 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

// Maps each index to a vector of results and concatenates them in index order.
template <typename T, typename Body>
std::vector<T> parallel_collect(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t n_chunks = std::max<std::size_t>(1, std::size_t(threads) * 4);
  std::vector<std::vector<T>> parts(std::min(n_chunks, std::max<std::size_t>(n, 1)));
  parallel_chunks(n, threads, parts.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i, parts[c]);
  });
  std::vector<T> out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return out;
}

}  // namespace linkforge
