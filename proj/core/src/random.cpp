#include "airfeel/random.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace airfeel {

Rng derive_stream(std::uint64_t master_seed, const StreamLabels& labels) {
  const std::array<std::uint64_t, 5> words{master_seed, labels.experiment, labels.trial,
                                           labels.round, labels.subchannel};
  std::array<std::uint32_t, 10> halves{};
  for (std::size_t i = 0; i < words.size(); ++i) {
    halves[2 * i] = static_cast<std::uint32_t>(words[i] & 0xffffffffu);
    halves[2 * i + 1] = static_cast<std::uint32_t>(words[i] >> 32);
  }
  std::seed_seq seq(halves.begin(), halves.end());
  return Rng(seq);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace airfeel
