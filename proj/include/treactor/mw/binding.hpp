#pragma once

#include "treactor/mw/bypass.hpp"
#include "treactor/mw/registry.hpp"
#include "treactor/mw/transport.hpp"

#include <functional>
#include <future>
#include <map>
#include <mutex>

namespace treactor::mw {

/// Message-layer binding for one endpoint. On transmit, picks a pending tag
/// from the timestamp bypass (keyed by call_id) and attaches it as the wire
/// trailer; on receive, moves an attached trailer into the local bypass
/// before handing the message to the application layer.
class Binding {
public:
    Binding(EndpointId self, Transport& transport, TimestampBypass& bypass)
        : self_(self), transport_(transport), bypass_(bypass) {
        transport_.register_endpoint(
            self_, [this](int64_t arrival, EndpointId src, const WireMessage& msg) {
                on_receive(arrival, src, msg);
            });
    }

    EndpointId endpoint() const { return self_; }
    TimestampBypass& bypass() { return bypass_; }

    int64_t send(EndpointId peer, WireMessage msg, int64_t send_time_ns) {
        if (auto tag = bypass_.try_take(self_, msg.call_id))
            msg.tag_trailer = TagTrailer{tag->time_ns, tag->microstep};
        return transport_.send(self_, peer, msg, send_time_ns);
    }

    using Receiver = std::function<void(int64_t arrival_ns, EndpointId src, const WireMessage&)>;
    void set_receiver(Receiver r) { receiver_ = std::move(r); }

private:
    void on_receive(int64_t arrival, EndpointId src, const WireMessage& msg) {
        if (msg.tag_trailer) bypass_.put(self_, msg.call_id, msg.tag_trailer->tag());
        if (receiver_) receiver_(arrival, src, msg);
    }

    EndpointId self_;
    Transport& transport_;
    TimestampBypass& bypass_;
    Receiver receiver_;
};

/// Client-side handle to a discovered service. Each call gets a fresh
/// call_id; the returned future resolves with the matching response payload.
class Proxy {
public:
    using MessageHook = std::function<void(int64_t arrival_ns, const WireMessage&)>;

    Proxy(Binding& binding, Registry& registry, uint16_t service_id)
        : binding_(binding), service_id_(service_id), peer_(registry.discover(service_id)) {
        binding_.set_receiver([this](int64_t arrival, EndpointId, const WireMessage& msg) {
            on_message(arrival, msg);
        });
    }

    uint16_t service_id() const { return service_id_; }
    EndpointId peer() const { return peer_; }
    Binding& binding() { return binding_; }

    /// call_id the next call() will use; lets a caller stage a bypass tag
    /// before the send happens.
    uint32_t next_call_id() const { return next_call_id_; }

    /// Sends a Request and returns its call_id.
    uint32_t call(uint16_t method_id, std::vector<uint8_t> args, int64_t send_time_ns) {
        uint32_t id;
        {
            std::lock_guard lk(mutex_);
            id = next_call_id_++;
        }
        WireMessage msg{service_id_, method_id, id, MsgKind::Request, std::move(args), {}};
        binding_.send(peer_, std::move(msg), send_time_ns);
        return id;
    }

    std::future<std::vector<uint8_t>> call_future(uint16_t method_id, std::vector<uint8_t> args,
                                                  int64_t send_time_ns) {
        std::promise<std::vector<uint8_t>> promise;
        auto fut = promise.get_future();
        uint32_t id;
        {
            std::lock_guard lk(mutex_);
            id = next_call_id_++;
            pending_.emplace(id, std::move(promise));
        }
        WireMessage msg{service_id_, method_id, id, MsgKind::Request, std::move(args), {}};
        binding_.send(peer_, std::move(msg), send_time_ns);
        return fut;
    }

    /// Transactor hook; runs for every incoming message after futures are
    /// resolved.
    void set_message_hook(MessageHook hook) { hook_ = std::move(hook); }

private:
    void on_message(int64_t arrival, const WireMessage& msg) {
        if (msg.kind == MsgKind::Response) {
            std::unique_lock lk(mutex_);
            auto it = pending_.find(msg.call_id);
            if (it != pending_.end()) {
                auto promise = std::move(it->second);
                pending_.erase(it);
                lk.unlock();
                promise.set_value(msg.payload);
            }
        }
        if (hook_) hook_(arrival, msg);
    }

    Binding& binding_;
    uint16_t service_id_;
    EndpointId peer_;
    std::mutex mutex_;
    uint32_t next_call_id_ = 1;
    std::map<uint32_t, std::promise<std::vector<uint8_t>>> pending_;
    MessageHook hook_;
};

/// Server-side binding of a service implementation. Handlers respond through
/// the provided responder, which may be invoked later (promise style);
/// replies route back to the requesting endpoint.
class Skeleton {
public:
    using Responder = std::function<void(std::vector<uint8_t> result, int64_t send_time_ns)>;
    using MethodHandler = std::function<void(uint32_t call_id, const std::vector<uint8_t>& args,
                                             int64_t arrival_ns, Responder respond)>;

    Skeleton(Binding& binding, const ServiceDescriptor& desc, Registry& registry)
        : binding_(binding), desc_(desc) {
        registry.register_service(desc, binding.endpoint());
        binding_.set_receiver([this](int64_t arrival, EndpointId src, const WireMessage& msg) {
            dispatch(arrival, src, msg);
        });
    }

    void bind_method(uint16_t method_id, MethodHandler handler) {
        handlers_[method_id] = std::move(handler);
    }

    void add_subscriber(uint16_t event_id, EndpointId subscriber) {
        subscribers_[event_id].push_back(subscriber);
    }

    /// Sends a Notification per subscriber; occurrences share one call_id
    /// sequence so the bypass can pair tags with them.
    uint32_t publish(uint16_t event_id, const std::vector<uint8_t>& payload,
                     int64_t send_time_ns) {
        uint32_t id = next_notify_id_++;
        // take the staged tag once so every fan-out copy carries it
        auto tag = binding_.bypass().try_take(binding_.endpoint(), id);
        for (EndpointId sub : subscribers_[event_id]) {
            WireMessage msg{desc_.service_id, event_id, id, MsgKind::Notification, payload, {}};
            if (tag) msg.tag_trailer = TagTrailer{tag->time_ns, tag->microstep};
            binding_.send(sub, std::move(msg), send_time_ns);
        }
        return id;
    }

    /// Tag for the next publish occurrence, staged before publish() so the
    /// binding picks it up on transmit.
    void stage_publish_tag(Tag tag) {
        binding_.bypass().put(binding_.endpoint(), next_notify_id_, tag);
    }

    /// Atomic stage-and-publish; safe when publishers of different events on
    /// one service run concurrently.
    uint32_t publish_tagged(uint16_t event_id, const std::vector<uint8_t>& payload, Tag tag,
                            int64_t send_time_ns) {
        std::lock_guard lk(publish_mutex_);
        stage_publish_tag(tag);
        return publish(event_id, payload, send_time_ns);
    }

    Binding& binding() { return binding_; }

private:
    void dispatch(int64_t arrival, EndpointId src, const WireMessage& msg) {
        auto it = handlers_.find(msg.method_or_event_id);
        if (it == handlers_.end())
            throw MalformedMessage("no handler for method " +
                                   std::to_string(msg.method_or_event_id));
        uint32_t call_id = msg.call_id;
        auto respond = [this, call_id, src](std::vector<uint8_t> result, int64_t t) {
            WireMessage resp{desc_.service_id, 0, call_id, MsgKind::Response, std::move(result),
                             {}};
            binding_.send(src, std::move(resp), t);
        };
        it->second(call_id, msg.payload, arrival, respond);
    }

    Binding& binding_;
    ServiceDescriptor desc_;
    std::map<uint16_t, MethodHandler> handlers_;
    std::map<uint16_t, std::vector<EndpointId>> subscribers_;
    uint32_t next_notify_id_ = 1;
    std::mutex publish_mutex_;
};

} // namespace treactor::mw
