#include "voxrf/parallel.hpp"

#include <atomic>

namespace voxrf {
namespace {

int read_thread_count() {
  if (const char* env = std::getenv("VOXRF_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Persistent pool; spawning threads per call would dominate small batches.
class Pool {
 public:
  explicit Pool(int workers) {
    for (int i = 0; i < workers; ++i)
      threads_.emplace_back([this] { worker_loop(); });
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(std::size_t n, std::size_t chunks, const std::function<void(std::size_t, std::size_t)>& fn) {
    std::unique_lock<std::mutex> lk(mu_);
    fn_ = &fn;
    n_ = n;
    chunks_ = chunks;
    next_chunk_ = 0;
    pending_ = chunks;
    ++generation_;
    cv_.notify_all();
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  void worker_loop() {
    uint64_t seen = 0;
    for (;;) {
      std::unique_lock<std::mutex> lk(mu_);
      cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      while (next_chunk_ < chunks_) {
        std::size_t c = next_chunk_++;
        lk.unlock();
        std::size_t per = (n_ + chunks_ - 1) / chunks_;
        std::size_t b = c * per;
        std::size_t e = std::min(n_, b + per);
        if (b < e) (*fn_)(b, e);
        lk.lock();
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(std::size_t, std::size_t)>* fn_ = nullptr;
  std::size_t n_ = 0, chunks_ = 0, next_chunk_ = 0, pending_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace

int thread_count() {
  static const int count = read_thread_count();
  return count;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  int workers = thread_count();
  if (workers <= 1 || n == 1) {
    fn(0, n);
    return;
  }
  static Pool pool(thread_count());
  std::size_t chunks = std::min<std::size_t>(n, static_cast<std::size_t>(workers) * 4);
  pool.run(n, chunks, fn);
}

}  // namespace voxrf
