#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace htp {

// Token-bucket rate limiter shared by concurrent API callers. acquire()
// blocks until a token is available. Thread-safe.
class TokenBucket {
public:
    TokenBucket(double tokens_per_second, double burst)
        : rate_(tokens_per_second), capacity_(burst), tokens_(burst),
          last_refill_(clock::now()) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        refill();
        while (tokens_ < 1.0) {
            const double deficit = 1.0 - tokens_;
            const auto wait = std::chrono::duration<double>(deficit / rate_);
            cv_.wait_for(lock, wait);
            refill();
        }
        tokens_ -= 1.0;
    }

private:
    using clock = std::chrono::steady_clock;

    void refill() {
        const auto now = clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        last_refill_ = now;
    }

    std::mutex mutex_;
    std::condition_variable cv_;
    double rate_;
    double capacity_;
    double tokens_;
    clock::time_point last_refill_;
};

} // namespace htp
