#include "pipla/worker_pool.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace pipla {

WorkerPool::WorkerPool(int workers) {
  const int extra = std::max(0, workers - 1);
  threads_.reserve(extra);
  for (int i = 0; i < extra; ++i) threads_.emplace_back([this, i] { loop(i + 1); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

namespace {
inline void chunk(std::int64_t n, int parts, int id, std::int64_t& b, std::int64_t& e) {
  b = n * id / parts;
  e = n * (id + 1) / parts;
}
}  // namespace

void WorkerPool::loop(int id) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(std::int64_t, std::int64_t)>* job;
    std::int64_t n;
    {
      std::unique_lock<std::mutex> lk(mu_);
      cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
      n = n_;
    }
    std::int64_t b, e;
    chunk(n, size(), id, b, e);
    std::exception_ptr err;
    try {
      if (b < e) (*job)(b, e);
    } catch (...) {
      err = std::current_exception();
    }
    std::lock_guard<std::mutex> lk(mu_);
    if (err && !error_) error_ = err;
    if (--pending_ == 0) done_cv_.notify_one();
  }
}

void WorkerPool::parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  if (threads_.empty() || n == 1) {
    fn(0, n);
    return;
  }
  {
    std::lock_guard<std::mutex> lk(mu_);
    job_ = &fn;
    n_ = n;
    pending_ = int(threads_.size());
    error_ = nullptr;
    ++generation_;
  }
  cv_.notify_all();
  std::int64_t b, e;
  chunk(n, size(), 0, b, e);
  std::exception_ptr err;
  try {
    if (b < e) fn(b, e);
  } catch (...) {
    err = std::current_exception();
  }
  std::unique_lock<std::mutex> lk(mu_);
  done_cv_.wait(lk, [&] { return pending_ == 0; });
  job_ = nullptr;
  if (!err) err = error_;
  if (err) std::rethrow_exception(err);
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("PIPLA_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
    }
  }
  return std::max(1, requested);
}

}  // namespace pipla
