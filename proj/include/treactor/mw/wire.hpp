#pragma once

#include "treactor/errors.hpp"
#include "treactor/tag.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace treactor::mw {

enum class MsgKind : uint8_t { Request = 0, Response = 1, Notification = 2 };

struct TagTrailer {
    int64_t time_ns = 0;
    uint32_t microstep = 0;

    Tag tag() const { return {time_ns, microstep}; }
    friend bool operator==(const TagTrailer&, const TagTrailer&) = default;
};

/// Wire layout, all integers big-endian:
///   [service_id:2][id:2][call_id:4][kind:1][flags:1][payload_len:4]
///   [payload][trailer if flags bit0: time_ns:8, microstep:4]
struct WireMessage {
    uint16_t service_id = 0;
    uint16_t method_or_event_id = 0;
    uint32_t call_id = 0;
    MsgKind kind = MsgKind::Request;
    std::vector<uint8_t> payload;
    std::optional<TagTrailer> tag_trailer;

    friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

constexpr size_t kHeaderSize = 14;
constexpr size_t kTrailerSize = 12;

std::vector<uint8_t> encode(const WireMessage& msg);

/// Throws MalformedMessage on truncation, trailing garbage, or unknown kind.
WireMessage decode(const std::vector<uint8_t>& bytes);

/// Service interface description: methods, events, and fields. A field
/// expands to up to two methods (get/set) and one event (notify).
struct FieldDesc {
    std::string name;
    bool has_get = false;
    bool has_set = false;
    bool has_notify = false;
};

struct ServiceDescriptor {
    uint16_t service_id = 0;
    std::vector<std::pair<uint16_t, std::string>> methods;
    std::vector<std::pair<uint16_t, std::string>> events;
    std::vector<FieldDesc> fields;
};

} // namespace treactor::mw
