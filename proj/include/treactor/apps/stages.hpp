#pragma once

#include "treactor/graph.hpp"
#include "treactor/trace.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace treactor::apps {

/// Synthetic frame: the payload is a deterministic expansion of the sequence
/// number, so every stage can verify which frame it holds.
struct Frame {
    uint64_t seq = 0;
    Payload payload;

    static Frame make(uint64_t seq);
    Payload encode() const;
    static Frame decode(const Payload& bytes);
};

/// 32 bytes derived from seq by FNV chaining.
Payload digest_expand(uint64_t seq);

struct LaneInfo {
    uint64_t source_seq = 0;
    std::array<int32_t, 4> box{}; // x, y, w, h

    Payload encode() const;
    static LaneInfo decode(const Payload& bytes);
};

struct VehicleList {
    uint64_t source_seq = 0;
    std::vector<double> distances_m;

    Payload encode() const;
    static VehicleList decode(const Payload& bytes);
};

struct BrakeDecision {
    uint64_t source_seq = 0;
    bool brake = false;

    Payload encode() const;
    static BrakeDecision decode(const Payload& bytes);
};

/// Stage logic: pure, deterministic stand-ins for the real image pipeline.
LaneInfo preprocess(const Frame& frame);

/// Detects vehicles in the lane; reports (returns) whether frame and lane
/// provenance disagree. Distances derive from the frame payload.
struct CvResult {
    VehicleList vehicles;
    bool misaligned = false;
};
CvResult computer_vision(const Frame& frame, const LaneInfo& lane);

constexpr double kDefaultBrakeThresholdM = 10.0;
BrakeDecision eba(const VehicleList& vehicles, double threshold_m = kDefaultBrakeThresholdM);

/// Single-value input cell; writing a full slot replaces the value and
/// counts the overwrite (a dropped input).
template <typename T>
class OneSlotBuffer {
public:
    void write(T value) {
        if (slot_) ++overwrite_count_;
        slot_ = std::move(value);
    }
    std::optional<T> take() {
        std::optional<T> out = std::move(slot_);
        slot_.reset();
        return out;
    }
    bool full() const { return slot_.has_value(); }
    uint64_t overwrite_count() const { return overwrite_count_; }

private:
    std::optional<T> slot_;
    uint64_t overwrite_count_ = 0;
};

/// Per-stage error counters for one pipeline trial.
struct ErrorStats {
    uint64_t dropped_at_preprocessing = 0;
    uint64_t dropped_frames_at_cv = 0;
    uint64_t dropped_lanes_at_cv = 0;
    uint64_t misaligned_at_cv = 0;
    uint64_t dropped_at_eba = 0;
    uint64_t total_frames = 0;

    uint64_t total_errors() const {
        return dropped_at_preprocessing + dropped_frames_at_cv + dropped_lanes_at_cv +
               misaligned_at_cv + dropped_at_eba;
    }
    double error_rate() const {
        return total_frames ? static_cast<double>(total_errors()) / total_frames : 0.0;
    }
    friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

} // namespace treactor::apps
