#pragma once

#include <chrono>
#include <cstdint>

namespace tacnet {

/// Wall-clock source. The gateway owns time in this system (devices have
/// no clock), so everything downstream takes a Clock to stay testable on a
/// virtual timeline.
class Clock {
public:
    virtual ~Clock() = default;
    virtual int64_t now_ns() = 0;
};

class SystemClock : public Clock {
public:
    int64_t now_ns() override {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

/// Deterministic clock advanced explicitly by the orchestrator.
class VirtualClock : public Clock {
public:
    explicit VirtualClock(int64_t epoch_ns = 1'750'000'000'000'000'000LL) : t_ns_(epoch_ns) {}
    int64_t now_ns() override { return t_ns_; }
    void advance_s(int64_t seconds) { t_ns_ += seconds * 1'000'000'000LL; }
    void advance_ns(int64_t ns) { t_ns_ += ns; }

private:
    int64_t t_ns_;
};

} // namespace tacnet
