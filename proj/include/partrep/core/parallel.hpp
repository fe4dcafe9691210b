#pragma once

#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace partrep {

/// Fixed-size pool running static index partitions. Chunks are contiguous
/// and outputs must be disjoint per index, so results do not depend on the
/// worker count and reruns are bit-reproducible.
class ThreadPool {
public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  int size() const { return nthreads_; }

  /// fn(begin, end) over [0, n) split into at most size() chunks.
  void run_chunks(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    int workers = nthreads_;
    if (workers <= 1 || n == 1) {
      fn(0, n);
      return;
    }
    int chunks = static_cast<int>(std::min<int64_t>(workers, n));
    int64_t base = n / chunks, rem = n % chunks;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(chunks) - 1);
    int64_t begin = 0;
    for (int c = 0; c < chunks; ++c) {
      int64_t len = base + (c < rem ? 1 : 0);
      int64_t end = begin + len;
      if (c + 1 == chunks) {
        fn(begin, end);
      } else {
        threads.emplace_back(fn, begin, end);
      }
      begin = end;
    }
    for (auto& t : threads) t.join();
  }

private:
  ThreadPool() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PARTREP_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) n = v;
    }
    nthreads_ = n > 0 ? n : 1;
  }
  int nthreads_ = 1;
};

inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  ThreadPool::instance().run_chunks(n, fn);
}

}  // namespace partrep
