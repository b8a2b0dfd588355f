#pragma once

#include "treactor/errors.hpp"
#include "treactor/mw/registry.hpp"
#include "treactor/tag.hpp"

#include <map>
#include <mutex>
#include <optional>

namespace treactor::mw {

/// Side channel pairing a tag with a middleware message that cannot natively
/// carry metadata. One slot per (endpoint, call_id); take empties the slot.
class TimestampBypass {
public:
    void put(EndpointId endpoint, uint32_t call_id, Tag tag) {
        std::lock_guard lk(mutex_);
        slots_[{endpoint, call_id}] = tag;
    }

    Tag take(EndpointId endpoint, uint32_t call_id) {
        auto t = try_take(endpoint, call_id);
        if (!t)
            throw BypassEmpty("endpoint " + std::to_string(endpoint) + " call " +
                              std::to_string(call_id));
        return *t;
    }

    std::optional<Tag> try_take(EndpointId endpoint, uint32_t call_id) {
        std::lock_guard lk(mutex_);
        auto it = slots_.find({endpoint, call_id});
        if (it == slots_.end()) return std::nullopt;
        Tag t = it->second;
        slots_.erase(it);
        return t;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<EndpointId, uint32_t>, Tag> slots_;
};

} // namespace treactor::mw
