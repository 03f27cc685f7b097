// Seeded random streams and a small ordered parallel-for.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace airfeel {

using Rng = std::mt19937_64;

/// Labels identifying one independent substream of a run.
struct StreamLabels {
  std::uint64_t experiment = 0;
  std::uint64_t trial = 0;
  std::uint64_t round = 0;
  std::uint64_t subchannel = 0;
};

/// Deterministic substream for (master_seed, labels).
///
/// The generator state is expanded by std::seed_seq from the ten 32-bit words
/// of the master seed and the four labels, so every distinct label tuple
/// selects a distinct engine state and the mapping does not depend on the
/// order in which streams are requested.
Rng derive_stream(std::uint64_t master_seed, const StreamLabels& labels);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled by exactly one worker; callers write results into per-index slots
/// and reduce them afterwards in index order.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Worker count for `requested` (0 means hardware concurrency, at least 1).
unsigned resolve_threads(unsigned requested);

}  // namespace airfeel
