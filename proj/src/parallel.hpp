#pragma once

// Deterministic parallel reduction: the index range is cut into a fixed
// number of chunks, each summed in order on its own thread, and the partial
// results are folded in chunk order. Thread timing never changes the bits.

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace mtplab::detail {

inline constexpr std::size_t kReduceChunks = 8;

// fn(begin, end) -> partial result; fold(acc, partial) combines in order.
template <typename Partial, typename Fn, typename Fold>
Partial chunked_reduce(std::size_t n, Fn&& fn, Fold&& fold, Partial init) {
  const std::size_t chunks = std::min(kReduceChunks, std::max<std::size_t>(n, 1));
  if (chunks <= 1 || n < 64) {
    fold(init, fn(std::size_t{0}, n));
    return init;
  }
  std::vector<std::future<Partial>> parts;
  parts.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
    parts.push_back(std::async(std::launch::async, [&fn, lo, hi] { return fn(lo, hi); }));
  }
  for (auto& p : parts) fold(init, p.get());
  return init;
}

}  // namespace mtplab::detail
