#include "adm/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace adm {

int thread_cap() {
  static const int cap = [] {
    if (const char* env = std::getenv("ADM_TOOLKIT_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return cap;
}

namespace {
constexpr std::size_t kChunk = 4096;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  const int nthreads = std::min<std::size_t>(thread_cap(), std::max<std::size_t>(count / kChunk, 1));
  if (nthreads <= 1 || count < 2 * kChunk) {
    body(0, count);
    return;
  }
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        const std::size_t lo = c * kChunk;
        body(lo, std::min(lo + kChunk, count));
      }
    });
  }
  for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t count, const std::function<double(std::size_t)>& f) {
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    // [lo, hi) may span several chunks when running serially; accumulate
    // per chunk so the combination order is fixed.
    std::size_t i = lo;
    while (i < hi) {
      const std::size_t c = i / kChunk;
      const std::size_t stop = std::min(hi, (c + 1) * kChunk);
      double s = 0.0;
      for (; i < stop; ++i) s += f(i);
      partial[c] += s;
    }
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace adm
