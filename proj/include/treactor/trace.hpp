#pragma once

#include "treactor/tag.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace treactor {

/// FNV-1a, 64 bit. Used for payload digests and trace digests.
constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a(std::span<const uint8_t> bytes, uint64_t h = kFnvOffset) {
    for (uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a_u64(uint64_t v, uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

struct PortWrite {
    uint32_t port = 0;
    uint64_t payload_digest = 0;

    friend bool operator==(const PortWrite&, const PortWrite&) = default;
};

/// One executed reaction: its tag, identity, and the ports it wrote.
struct TraceRecord {
    Tag tag;
    uint32_t reaction = 0;
    std::vector<PortWrite> writes;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

/// Digest of the empty trace is the FNV-1a offset basis.
inline uint64_t trace_digest(const Trace& trace) {
    uint64_t h = kFnvOffset;
    for (const auto& rec : trace) {
        h = fnv1a_u64(static_cast<uint64_t>(rec.tag.time_ns), h);
        h = fnv1a_u64(rec.tag.microstep, h);
        h = fnv1a_u64(rec.reaction, h);
        for (const auto& w : rec.writes) {
            h = fnv1a_u64(w.port, h);
            h = fnv1a_u64(w.payload_digest, h);
        }
    }
    return h;
}

/// Line format: tag.time_ns,tag.microstep,reaction_id,port:digest;port:digest;...
inline void write_trace(std::ostream& os, const Trace& trace) {
    for (const auto& rec : trace) {
        os << rec.tag.time_ns << ',' << rec.tag.microstep << ',' << rec.reaction << ',';
        for (size_t i = 0; i < rec.writes.size(); ++i) {
            if (i) os << ';';
            os << rec.writes[i].port << ':' << rec.writes[i].payload_digest;
        }
        os << '\n';
    }
}

} // namespace treactor
