#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gridshed::detail {

/// Fixed set of threads with two queues; urgent tasks run before queued normal ones.
/// The destructor drops tasks that have not started and joins the running ones.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers) {
    if (workers == 0) workers = 1;
    for (unsigned i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      urgent_.clear();
      normal_.clear();
    }
    ready_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(std::function<void()> task, bool urgent) {
    {
      std::lock_guard lock(mutex_);
      (urgent ? urgent_ : normal_).push_back(std::move(task));
    }
    ready_.notify_one();
  }

 private:
  void run() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [this] { return stopping_ || !urgent_.empty() || !normal_.empty(); });
        if (stopping_) return;
        auto& queue = urgent_.empty() ? normal_ : urgent_;
        task = std::move(queue.front());
        queue.pop_front();
      }
      task();
    }
  }

  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::function<void()>> urgent_, normal_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace gridshed::detail
