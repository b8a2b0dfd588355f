#pragma once

#include <stdexcept>
#include <string>

namespace treactor {

struct CyclicDependency : std::runtime_error {
    explicit CyclicDependency(const std::string& cycle)
        : std::runtime_error("cyclic dependency: " + cycle) {}
};

struct UndeclaredEffect : std::logic_error {
    explicit UndeclaredEffect(const std::string& port)
        : std::logic_error("write to undeclared effect port: " + port) {}
};

struct SchedulerStopped : std::runtime_error {
    SchedulerStopped() : std::runtime_error("scheduler has terminated") {}
};

struct ExecutionFault : std::runtime_error {
    explicit ExecutionFault(const std::string& what) : std::runtime_error(what) {}
};

namespace mw {

struct ServiceNotFound : std::runtime_error {
    explicit ServiceNotFound(uint16_t id)
        : std::runtime_error("no endpoint registered for service " + std::to_string(id)) {}
};

struct MalformedMessage : std::runtime_error {
    explicit MalformedMessage(const std::string& what)
        : std::runtime_error("malformed message: " + what) {}
};

struct BypassEmpty : std::runtime_error {
    explicit BypassEmpty(const std::string& key)
        : std::runtime_error("timestamp bypass empty for " + key) {}
};

} // namespace mw

namespace txn {

struct CausalityBreach : std::logic_error {
    explicit CausalityBreach(const std::string& what) : std::logic_error(what) {}
};

} // namespace txn

} // namespace treactor
