#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace treactor {

/// Non-negative span of logical or physical time, in nanoseconds.
struct Duration {
    int64_t ns = 0;

    friend constexpr Duration operator+(Duration a, Duration b) { return {a.ns + b.ns}; }
    friend constexpr auto operator<=>(Duration, Duration) = default;
};

constexpr Duration nanoseconds(int64_t n) { return {n}; }
constexpr Duration microseconds(int64_t n) { return {n * 1000}; }
constexpr Duration milliseconds(int64_t n) { return {n * 1000 * 1000}; }
constexpr Duration seconds(int64_t n) { return {n * 1000 * 1000 * 1000}; }

/// Parses "5ms", "250us", "1s", "100ns" (bare numbers are nanoseconds).
Duration parse_duration(const std::string& text);

/// Superdense logical timestamp: (time, microstep), totally ordered
/// lexicographically. Microsteps order events that are logically
/// simultaneous but causally related.
struct Tag {
    int64_t time_ns = 0;
    uint32_t microstep = 0;

    friend constexpr auto operator<=>(Tag, Tag) = default;

    /// Tag arithmetic: a positive delay advances time and resets the
    /// microstep; a zero delay advances only the microstep.
    [[nodiscard]] constexpr Tag delay(Duration d) const {
        if (d.ns > 0) return {time_ns + d.ns, 0};
        return {time_ns, microstep + 1};
    }

    std::string str() const {
        return "(" + std::to_string(time_ns) + "," + std::to_string(microstep) + ")";
    }
};

} // namespace treactor
