#pragma once

#include "treactor/tag.hpp"

#include <atomic>
#include <chrono>

namespace treactor {

/// Physical time source. Simulated clocks advance only when told to and are
/// monotone non-decreasing; real-time clocks read the steady clock relative
/// to construction. The offset models bounded per-platform skew.
class Clock {
public:
    enum class Mode { RealTime, Simulated };

    explicit Clock(Mode mode, int64_t offset_ns = 0)
        : mode_(mode), offset_ns_(offset_ns), epoch_(std::chrono::steady_clock::now()) {}

    Mode mode() const { return mode_; }

    int64_t now() const {
        if (mode_ == Mode::Simulated) return sim_now_.load(std::memory_order_acquire) + offset_ns_;
        auto d = std::chrono::steady_clock::now() - epoch_;
        return std::chrono::duration_cast<std::chrono::nanoseconds>(d).count() + offset_ns_;
    }

    /// Simulated mode only; ignores attempts to move backwards.
    void advance_to(int64_t t_ns) {
        int64_t cur = sim_now_.load(std::memory_order_relaxed);
        while (t_ns > cur &&
               !sim_now_.compare_exchange_weak(cur, t_ns, std::memory_order_release)) {
        }
    }

private:
    Mode mode_;
    int64_t offset_ns_;
    std::chrono::steady_clock::time_point epoch_;
    std::atomic<int64_t> sim_now_{0};
};

} // namespace treactor
