#pragma once

#include "treactor/errors.hpp"
#include "treactor/mw/wire.hpp"

#include <cstdint>
#include <map>
#include <mutex>

namespace treactor::mw {

using EndpointId = uint32_t;

/// Process-local service discovery. Last registration for an id wins.
class Registry {
public:
    void register_service(const ServiceDescriptor& desc, EndpointId endpoint) {
        std::lock_guard lk(mutex_);
        endpoints_[desc.service_id] = endpoint;
    }

    EndpointId discover(uint16_t service_id) const {
        std::lock_guard lk(mutex_);
        auto it = endpoints_.find(service_id);
        if (it == endpoints_.end()) throw ServiceNotFound(service_id);
        return it->second;
    }

private:
    mutable std::mutex mutex_;
    std::map<uint16_t, EndpointId> endpoints_;
};

} // namespace treactor::mw
