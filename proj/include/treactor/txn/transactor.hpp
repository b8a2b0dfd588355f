#pragma once

#include "treactor/graph.hpp"
#include "treactor/mw/binding.hpp"
#include "treactor/scheduler.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace treactor::txn {

/// Safe-to-process tag for a received message with trailer t: the receiver
/// may schedule it no earlier than t + D + L + E.
inline Tag safe_tag(Tag t, Duration d, Duration l, Duration e) { return t.delay(d + l + e); }

enum class UntaggedPolicy : uint8_t { Fail, PhysicalTime };

struct TransactorConfig {
    Duration deadline;    // D: bound on how far logical time may lag physical
    Duration max_latency; // L: assumed network latency bound
    Duration max_skew;    // E: assumed clock synchronization error bound
    UntaggedPolicy untagged_policy = UntaggedPolicy::Fail;
};

enum class TxnError : uint8_t { DeadlineViolation, StaleTag, UntaggedMessage };

struct ErrorRecord {
    TxnError kind;
    Tag tag;
    std::string where;
};

/// Observable-error sink shared by the transactors of one deployment.
class ErrorLog {
public:
    void report(TxnError kind, Tag tag, std::string where) {
        std::lock_guard lk(mutex_);
        records_.push_back({kind, tag, std::move(where)});
    }
    uint64_t count(TxnError kind) const {
        std::lock_guard lk(mutex_);
        uint64_t n = 0;
        for (const auto& r : records_)
            if (r.kind == kind) ++n;
        return n;
    }
    uint64_t total() const {
        std::lock_guard lk(mutex_);
        return records_.size();
    }
    std::vector<ErrorRecord> records() const {
        std::lock_guard lk(mutex_);
        return records_;
    }
    void clear() {
        std::lock_guard lk(mutex_);
        records_.clear();
    }

private:
    mutable std::mutex mutex_;
    std::vector<ErrorRecord> records_;
};

/// Shared wiring context for one deployment: the reactor graph under
/// construction plus the middleware instances transactors bind to. The
/// scheduler pointer is filled in after the graph is finalized.
struct Fabric {
    ReactorGraph& graph;
    mw::Transport& transport;
    mw::Registry& registry;
    mw::TimestampBypass& bypass;
    ErrorLog& errors;
    Scheduler* scheduler = nullptr;
    mw::EndpointId next_endpoint = 1;

    mw::EndpointId alloc_endpoint() { return next_endpoint++; }
};

/// call_id piggybacked on a payload so server logic can address its reply.
Payload pack_call(uint32_t call_id, const Payload& data);
std::pair<uint32_t, Payload> unpack_call(const Payload& packed);

/// Server-side endpoint hosting one service: a binding plus a skeleton that
/// the server method/event transactors attach to.
class ServiceHost {
public:
    ServiceHost(Fabric& fabric, mw::ServiceDescriptor desc)
        : endpoint_(fabric.alloc_endpoint()), service_id_(desc.service_id),
          binding_(endpoint_, fabric.transport, fabric.bypass),
          skeleton_(binding_, desc, fabric.registry) {}

    mw::EndpointId endpoint() const { return endpoint_; }
    uint16_t service_id() const { return service_id_; }
    mw::Skeleton& skeleton() { return skeleton_; }
    mw::Binding& binding() { return binding_; }

private:
    mw::EndpointId endpoint_;
    uint16_t service_id_;
    mw::Binding binding_;
    mw::Skeleton skeleton_;
};

/// Client-side bridge for one service method: forwards request-port events
/// as tagged middleware Requests, and re-inserts tagged Responses into the
/// reactor network at their safe-to-process tag.
class ClientMethodTransactor {
public:
    ClientMethodTransactor(Fabric& fabric, const std::string& name, uint16_t service_id,
                           uint16_t method_id, TransactorConfig cfg, mw::LinkModel link);

    PortId request_port() const { return request_in_; }
    PortId response_port() const { return response_out_; }

private:
    void on_message(int64_t arrival, const mw::WireMessage& msg);

    Fabric& fabric_;
    std::string name_;
    uint16_t method_id_;
    TransactorConfig cfg_;
    mw::Binding binding_;
    std::unique_ptr<mw::Proxy> proxy_;
    PortId request_in_, response_out_;
    ActionId response_arrival_;
};

/// Server-side bridge for one service method: re-inserts tagged Requests at
/// their safe-to-process tag and sends tagged Responses for the server
/// logic's replies.
class ServerMethodTransactor {
public:
    ServerMethodTransactor(Fabric& fabric, const std::string& name, ServiceHost& host,
                           uint16_t method_id, TransactorConfig cfg);

    PortId request_port() const { return request_out_; }  // packed (call_id, args)
    PortId response_port() const { return response_in_; } // packed (call_id, result)

private:
    void on_request(uint32_t call_id, const Payload& args, int64_t arrival,
                    mw::Skeleton::Responder respond);

    struct PendingCall {
        mw::Skeleton::Responder respond;
        Tag delivered_tag;
    };

    Fabric& fabric_;
    std::string name_;
    ServiceHost& host_;
    TransactorConfig cfg_;
    PortId request_out_, response_in_;
    ActionId request_arrival_;
    std::map<uint32_t, PendingCall> pending_;
};

/// Publisher-side event bridge: deadline-checked Notifications with trailer
/// tag + D.
class ServerEventTransactor {
public:
    ServerEventTransactor(Fabric& fabric, const std::string& name, ServiceHost& host,
                          uint16_t event_id, TransactorConfig cfg);

    PortId publish_port() const { return publish_in_; }

private:
    Fabric& fabric_;
    std::string name_;
    ServiceHost& host_;
    uint16_t event_id_;
    TransactorConfig cfg_;
    PortId publish_in_;
};

/// Subscriber-side event bridge: delivers Notifications at trailer + L + E.
class ClientEventTransactor {
public:
    ClientEventTransactor(Fabric& fabric, const std::string& name, ServiceHost& host,
                          uint16_t event_id, TransactorConfig cfg, mw::LinkModel link);

    PortId event_port() const { return event_out_; }

private:
    void on_message(int64_t arrival, const mw::WireMessage& msg);

    Fabric& fabric_;
    std::string name_;
    uint16_t event_id_;
    TransactorConfig cfg_;
    mw::Binding binding_;
    PortId event_out_;
    ActionId arrival_;
};

/// Composite for one service field: up to two method transactors (get/set)
/// and one event transactor (notify); absent accessors are omitted.
struct FieldTransactors {
    std::unique_ptr<ClientMethodTransactor> get;
    std::unique_ptr<ClientMethodTransactor> set;
    std::unique_ptr<ClientEventTransactor> notify;

    size_t count() const { return (get ? 1 : 0) + (set ? 1 : 0) + (notify ? 1 : 0); }
};

struct FieldIds {
    uint16_t get_method = 0;
    uint16_t set_method = 0;
    uint16_t notify_event = 0;
};

FieldTransactors field_binding(Fabric& fabric, ServiceHost& host, const mw::FieldDesc& field,
                               FieldIds ids, TransactorConfig cfg, mw::LinkModel link);

} // namespace treactor::txn
