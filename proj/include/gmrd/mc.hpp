#ifndef GMRD_MC_HPP
#define GMRD_MC_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "gmrd/stats.hpp"

namespace gmrd {

// Chunked Monte Carlo driver. Trials split into fixed-size chunks; chunk c
// draws from rng.substream(c) and partial results merge in chunk order, so
// the outcome is bit-identical for any worker count.
//
//   Partial body(RngStream&, std::int64_t count)
//   void    merge(Partial& into, const Partial& part)
template <class Partial, class Body, class Merge>
Partial run_chunked(const RngStream& rng, std::int64_t trials, std::int64_t chunk_size, Body body,
                    Merge merge, unsigned workers = 0) {
  if (chunk_size <= 0) chunk_size = 1;
  const std::int64_t num_chunks = (trials + chunk_size - 1) / chunk_size;
  std::vector<Partial> parts(static_cast<std::size_t>(num_chunks));
  if (workers == 0) {
    workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
  }
  if (workers > 1 && num_chunks > 1) {
    std::vector<std::thread> pool;
    std::atomic<std::int64_t> next{0};
    const unsigned count = std::min<unsigned>(workers, static_cast<unsigned>(num_chunks));
    for (unsigned w = 0; w < count; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t c; (c = next.fetch_add(1)) < num_chunks;) {
          RngStream sub = rng.substream(static_cast<std::uint64_t>(c));
          const std::int64_t lo = c * chunk_size;
          parts[static_cast<std::size_t>(c)] = body(sub, std::min(chunk_size, trials - lo));
        }
      });
    }
    for (auto& t : pool) t.join();
  } else {
    for (std::int64_t c = 0; c < num_chunks; ++c) {
      RngStream sub = rng.substream(static_cast<std::uint64_t>(c));
      const std::int64_t lo = c * chunk_size;
      parts[static_cast<std::size_t>(c)] = body(sub, std::min(chunk_size, trials - lo));
    }
  }
  Partial total = parts[0];
  for (std::size_t c = 1; c < parts.size(); ++c) merge(total, parts[c]);
  return total;
}

}  // namespace gmrd

#endif  // GMRD_MC_HPP
