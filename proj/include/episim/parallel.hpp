#pragma once

// Minimal persistent worker pool. Work is submitted as "run f(task, worker)
// for task in [0, count)"; the calling thread participates as worker 0 and
// run() returns only after every task has finished, which gives the engine
// its phase barriers. Tasks are claimed from a shared atomic cursor, so the
// pool balances uneven task costs on its own.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace episim {

class WorkerPool {
 public:
  explicit WorkerPool(int threads) : thread_count_(threads < 1 ? 1 : threads) {
    for (int t = 1; t < thread_count_; ++t)
      threads_.emplace_back([this, t] { worker_loop(t); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (std::thread& thread : threads_) thread.join();
  }

  int size() const { return thread_count_; }

  void run(int task_count, const std::function<void(int, int)>& task) {
    if (task_count <= 0) return;
    if (thread_count_ == 1) {
      for (int t = 0; t < task_count; ++t) task(t, 0);
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      job_ = &task;
      job_count_ = task_count;
      next_task_.store(0, std::memory_order_relaxed);
      helpers_running_ = thread_count_ - 1;
      ++generation_;
    }
    wake_.notify_all();
    drain(0);
    std::unique_lock<std::mutex> lock(mutex_);
    done_.wait(lock, [this] { return helpers_running_ == 0; });
    job_ = nullptr;
  }

 private:
  void drain(int worker) {
    const std::function<void(int, int)>* job = job_;
    const int count = job_count_;
    for (;;) {
      const int t = next_task_.fetch_add(1, std::memory_order_relaxed);
      if (t >= count) break;
      (*job)(t, worker);
    }
  }

  void worker_loop(int worker) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      drain(worker);
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (--helpers_running_ == 0) done_.notify_one();
      }
    }
  }

  const int thread_count_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(int, int)>* job_ = nullptr;
  int job_count_ = 0;
  std::atomic<int> next_task_{0};
  int helpers_running_ = 0;
  bool stop_ = false;
  std::uint64_t generation_ = 0;
};

}  // namespace episim
