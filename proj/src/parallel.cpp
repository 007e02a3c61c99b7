#include "fddw/parallel.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace fddw {
namespace {

thread_local bool inside_pool_task = false;

// Lazily started pool of hardware_concurrency-1 workers. parallel_for hands
// worker j the fixed chunk j+1 and the calling thread always executes chunk
// 0, so the partition does not depend on scheduling. Concurrent or nested
// parallel_for calls fall back to serial execution in the caller.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  int workers() const { return static_cast<int>(threads_.size()); }

  bool try_run(int chunks, int64_t n,
               const std::function<void(int64_t, int64_t)>& fn) {
    if (inside_pool_task) return false;
    std::unique_lock run_lock(run_mutex_, std::try_to_lock);
    if (!run_lock.owns_lock()) return false;

    const int64_t per = (n + chunks - 1) / chunks;
    {
      std::unique_lock lock(m_);
      task_ = &fn;
      task_n_ = n;
      task_per_ = per;
      task_chunks_ = chunks;
      pending_ = workers();
      ++generation_;
    }
    cv_.notify_all();
    fn(0, std::min<int64_t>(per, n));
    std::unique_lock lock(m_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    task_ = nullptr;
    return true;
  }

 private:
  Pool() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = std::clamp<int>(static_cast<int>(hw), 1, 8) - 1;
    for (int i = 0; i < n; ++i) {
      threads_.emplace_back([this, i] { worker(i); });
    }
  }

  ~Pool() {
    {
      std::unique_lock lock(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void worker(int index) {
    uint64_t seen = 0;
    while (true) {
      const std::function<void(int64_t, int64_t)>* fn = nullptr;
      int64_t n = 0, per = 0;
      int chunks = 0;
      {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        fn = task_;
        n = task_n_;
        per = task_per_;
        chunks = task_chunks_;
      }
      const int chunk = index + 1;
      if (fn && chunk < chunks) {
        const int64_t lo = chunk * per;
        const int64_t hi = std::min(lo + per, n);
        if (lo < hi) {
          inside_pool_task = true;
          (*fn)(lo, hi);
          inside_pool_task = false;
        }
      }
      std::unique_lock lock(m_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex run_mutex_;
  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int64_t, int64_t)>* task_ = nullptr;
  int64_t task_n_ = 0, task_per_ = 0;
  int task_chunks_ = 0, pending_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace

int max_threads() {
  if (const char* env = std::getenv("FDDW_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 64));
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::clamp<int>(static_cast<int>(hw), 1, 8);
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  int chunks = static_cast<int>(std::min<int64_t>(max_threads(), n));
  chunks = std::min(chunks, Pool::instance().workers() + 1);
  if (chunks <= 1 || !Pool::instance().try_run(chunks, n, fn)) {
    fn(0, n);
  }
}

}  // namespace fddw
