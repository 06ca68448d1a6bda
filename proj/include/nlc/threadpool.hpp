#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace nlc {

// Minimal fixed-size worker pool. Work items are indexed chunks so callers
// can keep reductions in a fixed order regardless of how many workers run.
class ThreadPool {
public:
    explicit ThreadPool(unsigned workers = 0) {
        if (workers == 0) {
            workers = std::max(1u, std::thread::hardware_concurrency());
        }
        for (unsigned i = 0; i + 1 < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::unique_lock lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) {
            t.join();
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    size_t size() const { return threads_.size() + 1; }

    // Runs fn(i) for i in [0, count); the calling thread participates.
    // Blocks until every chunk has finished; the first exception thrown by a
    // chunk is rethrown here after the batch drains.
    void run_chunks(size_t count, std::function<void(size_t)> fn) {
        if (count == 0) {
            return;
        }
        if (threads_.empty() || count == 1) {
            for (size_t i = 0; i < count; ++i) {
                fn(i);
            }
            return;
        }
        auto state = std::make_shared<BatchState>();
        state->count = count;
        state->fn = std::move(fn);
        auto task = [state] { drain(*state); };
        {
            std::unique_lock lock(mutex_);
            for (size_t i = 0; i < threads_.size() && i + 1 < count; ++i) {
                queue_.push(task);
            }
        }
        cv_.notify_all();
        drain(*state);
        {
            std::unique_lock lock(state->wait_mutex);
            state->wait_cv.wait(lock, [&] { return state->done.load() >= state->count; });
        }
        if (state->error) {
            std::rethrow_exception(state->error);
        }
    }

private:
    struct BatchState {
        std::atomic<size_t> next{0};
        std::atomic<size_t> done{0};
        size_t count = 0;
        std::function<void(size_t)> fn;
        std::mutex wait_mutex;
        std::condition_variable wait_cv;
        std::exception_ptr error;
        std::mutex error_mutex;
    };

    static void drain(BatchState& state) {
        for (;;) {
            const size_t i = state.next.fetch_add(1);
            if (i >= state.count) {
                return;
            }
            try {
                state.fn(i);
            } catch (...) {
                std::scoped_lock lock(state.error_mutex);
                if (!state.error) {
                    state.error = std::current_exception();
                }
            }
            if (state.done.fetch_add(1) + 1 == state.count) {
                std::scoped_lock lock(state.wait_mutex);
                state.wait_cv.notify_all();
            }
        }
    }

    void worker_loop() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (stopping_ && queue_.empty()) {
                    return;
                }
                job = std::move(queue_.front());
                queue_.pop();
            }
            job();
        }
    }

    std::vector<std::thread> threads_;
    std::queue<std::function<void()>> queue_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopping_ = false;
};

}  // namespace nlc
