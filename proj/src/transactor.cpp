#include "treactor/txn/transactor.hpp"

#include "treactor/errors.hpp"

namespace treactor::txn {

namespace {

mw::LinkModel reseed(mw::LinkModel m, uint64_t salt) {
    m.seed ^= salt * 0x9e3779b97f4a7c15ull;
    return m;
}

} // namespace

Payload pack_call(uint32_t call_id, const Payload& data) {
    Payload out;
    out.reserve(4 + data.size());
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(call_id >> s));
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

std::pair<uint32_t, Payload> unpack_call(const Payload& packed) {
    if (packed.size() < 4) throw std::logic_error("packed call too short");
    uint32_t id = 0;
    for (int i = 0; i < 4; ++i) id = id << 8 | packed[i];
    return {id, Payload(packed.begin() + 4, packed.end())};
}

// ---------------------------------------------------------------------------
// ClientMethodTransactor

ClientMethodTransactor::ClientMethodTransactor(Fabric& fabric, const std::string& name,
                                               uint16_t service_id, uint16_t method_id,
                                               TransactorConfig cfg, mw::LinkModel link)
    : fabric_(fabric), name_(name), method_id_(method_id), cfg_(cfg),
      binding_(fabric.alloc_endpoint(), fabric.transport, fabric.bypass) {
    mw::EndpointId server = fabric_.registry.discover(service_id);
    fabric_.transport.add_link(binding_.endpoint(), server, link);
    fabric_.transport.add_link(server, binding_.endpoint(), reseed(link, 1));
    proxy_ = std::make_unique<mw::Proxy>(binding_, fabric_.registry, service_id);
    proxy_->set_message_hook(
        [this](int64_t arrival, const mw::WireMessage& msg) { on_message(arrival, msg); });

    ReactorId r = fabric_.graph.add_reactor(name);
    request_in_ = fabric_.graph.add_input(r, name + ".request");
    response_out_ = fabric_.graph.add_output(r, name + ".response");
    response_arrival_ = fabric_.graph.add_action(r, name + ".response_arrival");

    ReactionDecl send;
    send.name = name + "/send_request";
    send.port_triggers = {request_in_};
    send.body = [this](ReactionContext& ctx) {
        const Payload* args = ctx.get(request_in_);
        Tag trailer = ctx.tag().delay(cfg_.deadline);
        fabric_.bypass.put(binding_.endpoint(), proxy_->next_call_id(), trailer);
        proxy_->call(method_id_, *args, ctx.physical_time_ns());
    };
    send.deadline = DeadlineSpec{cfg_.deadline, [this](ReactionContext& ctx) {
                                     fabric_.errors.report(TxnError::DeadlineViolation,
                                                           ctx.tag(), name_ + "/send_request");
                                 }};
    fabric_.graph.add_reaction(r, std::move(send));

    ReactionDecl deliver;
    deliver.name = name + "/deliver_response";
    deliver.action_triggers = {response_arrival_};
    deliver.effects = {response_out_};
    deliver.body = [this](ReactionContext& ctx) {
        ctx.set(response_out_, *ctx.get_action(response_arrival_));
    };
    fabric_.graph.add_reaction(r, std::move(deliver));
}

void ClientMethodTransactor::on_message(int64_t arrival, const mw::WireMessage& msg) {
    if (msg.kind != mw::MsgKind::Response) return;
    auto trailer = fabric_.bypass.try_take(binding_.endpoint(), msg.call_id);
    Tag tag;
    if (trailer) {
        tag = safe_tag(*trailer, {}, cfg_.max_latency, cfg_.max_skew);
        // A message whose safe tag lies before its own arrival time violated
        // the assumed latency/skew bounds; surface it, never reorder.
        if (arrival > tag.time_ns) {
            fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/response");
            return;
        }
    } else if (cfg_.untagged_policy == UntaggedPolicy::Fail) {
        fabric_.errors.report(TxnError::UntaggedMessage, Tag{arrival, 0},
                              name_ + "/response");
        return;
    } else {
        tag = Tag{arrival, 0};
    }
    if (fabric_.scheduler->inject_at(response_arrival_, tag, msg.payload) ==
        InjectStatus::Stale)
        fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/response");
}

// ---------------------------------------------------------------------------
// ServerMethodTransactor

ServerMethodTransactor::ServerMethodTransactor(Fabric& fabric, const std::string& name,
                                               ServiceHost& host, uint16_t method_id,
                                               TransactorConfig cfg)
    : fabric_(fabric), name_(name), host_(host), cfg_(cfg) {
    host_.skeleton().bind_method(
        method_id, [this](uint32_t call_id, const Payload& args, int64_t arrival,
                          mw::Skeleton::Responder respond) {
            on_request(call_id, args, arrival, std::move(respond));
        });

    ReactorId r = fabric_.graph.add_reactor(name);
    request_out_ = fabric_.graph.add_output(r, name + ".request");
    response_in_ = fabric_.graph.add_input(r, name + ".response");
    request_arrival_ = fabric_.graph.add_action(r, name + ".request_arrival");

    ReactionDecl deliver;
    deliver.name = name + "/deliver_request";
    deliver.action_triggers = {request_arrival_};
    deliver.effects = {request_out_};
    deliver.body = [this](ReactionContext& ctx) {
        ctx.set(request_out_, *ctx.get_action(request_arrival_));
    };
    fabric_.graph.add_reaction(r, std::move(deliver));

    ReactionDecl respond;
    respond.name = name + "/send_response";
    respond.port_triggers = {response_in_};
    respond.body = [this](ReactionContext& ctx) {
        auto [call_id, result] = unpack_call(*ctx.get(response_in_));
        auto it = pending_.find(call_id);
        if (it == pending_.end())
            throw std::logic_error(name_ + ": response for unknown call " +
                                   std::to_string(call_id));
        if (ctx.tag() < it->second.delivered_tag)
            throw CausalityBreach(name_ + ": response tag " + ctx.tag().str() +
                                  " precedes delivered request tag " +
                                  it->second.delivered_tag.str());
        fabric_.bypass.put(host_.endpoint(), call_id, ctx.tag().delay(cfg_.deadline));
        it->second.respond(result, ctx.physical_time_ns());
        pending_.erase(it);
    };
    respond.deadline = DeadlineSpec{cfg_.deadline, [this](ReactionContext& ctx) {
                                        fabric_.errors.report(TxnError::DeadlineViolation,
                                                              ctx.tag(),
                                                              name_ + "/send_response");
                                    }};
    fabric_.graph.add_reaction(r, std::move(respond));
}

void ServerMethodTransactor::on_request(uint32_t call_id, const Payload& args, int64_t arrival,
                                        mw::Skeleton::Responder respond) {
    auto trailer = fabric_.bypass.try_take(host_.endpoint(), call_id);
    Tag tag;
    if (trailer) {
        tag = safe_tag(*trailer, {}, cfg_.max_latency, cfg_.max_skew);
        if (arrival > tag.time_ns) {
            fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/request");
            return;
        }
    } else if (cfg_.untagged_policy == UntaggedPolicy::Fail) {
        fabric_.errors.report(TxnError::UntaggedMessage, Tag{arrival, 0}, name_ + "/request");
        return;
    } else {
        tag = Tag{arrival, 0};
    }
    pending_[call_id] = {std::move(respond), tag};
    if (fabric_.scheduler->inject_at(request_arrival_, tag, pack_call(call_id, args)) ==
        InjectStatus::Stale) {
        fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/request");
        pending_.erase(call_id);
    }
}

// ---------------------------------------------------------------------------
// ServerEventTransactor

ServerEventTransactor::ServerEventTransactor(Fabric& fabric, const std::string& name,
                                             ServiceHost& host, uint16_t event_id,
                                             TransactorConfig cfg)
    : fabric_(fabric), name_(name), host_(host), event_id_(event_id), cfg_(cfg) {
    ReactorId r = fabric_.graph.add_reactor(name);
    publish_in_ = fabric_.graph.add_input(r, name + ".publish");

    ReactionDecl pub;
    pub.name = name + "/publish";
    pub.port_triggers = {publish_in_};
    pub.body = [this](ReactionContext& ctx) {
        host_.skeleton().publish_tagged(event_id_, *ctx.get(publish_in_), ctx.tag().delay(cfg_.deadline),
                                        ctx.physical_time_ns());
    };
    pub.deadline = DeadlineSpec{cfg_.deadline, [this](ReactionContext& ctx) {
                                    fabric_.errors.report(TxnError::DeadlineViolation,
                                                          ctx.tag(), name_ + "/publish");
                                }};
    fabric_.graph.add_reaction(r, std::move(pub));
}

// ---------------------------------------------------------------------------
// ClientEventTransactor

ClientEventTransactor::ClientEventTransactor(Fabric& fabric, const std::string& name,
                                             ServiceHost& host, uint16_t event_id,
                                             TransactorConfig cfg, mw::LinkModel link)
    : fabric_(fabric), name_(name), event_id_(event_id), cfg_(cfg),
      binding_(fabric.alloc_endpoint(), fabric.transport, fabric.bypass) {
    fabric_.transport.add_link(host.endpoint(), binding_.endpoint(), link);
    host.skeleton().add_subscriber(event_id, binding_.endpoint());
    binding_.set_receiver([this](int64_t arrival, mw::EndpointId, const mw::WireMessage& msg) {
        on_message(arrival, msg);
    });

    ReactorId r = fabric_.graph.add_reactor(name);
    event_out_ = fabric_.graph.add_output(r, name + ".event");
    arrival_ = fabric_.graph.add_action(r, name + ".arrival");

    ReactionDecl deliver;
    deliver.name = name + "/deliver_event";
    deliver.action_triggers = {arrival_};
    deliver.effects = {event_out_};
    deliver.body = [this](ReactionContext& ctx) {
        ctx.set(event_out_, *ctx.get_action(arrival_));
    };
    fabric_.graph.add_reaction(r, std::move(deliver));
}

void ClientEventTransactor::on_message(int64_t arrival, const mw::WireMessage& msg) {
    if (msg.kind != mw::MsgKind::Notification || msg.method_or_event_id != event_id_) return;
    auto trailer = fabric_.bypass.try_take(binding_.endpoint(), msg.call_id);
    Tag tag;
    if (trailer) {
        tag = safe_tag(*trailer, {}, cfg_.max_latency, cfg_.max_skew);
        if (arrival > tag.time_ns) {
            fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/event");
            return;
        }
    } else if (cfg_.untagged_policy == UntaggedPolicy::Fail) {
        fabric_.errors.report(TxnError::UntaggedMessage, Tag{arrival, 0}, name_ + "/event");
        return;
    } else {
        tag = Tag{arrival, 0};
    }
    if (fabric_.scheduler->inject_at(arrival_, tag, msg.payload) == InjectStatus::Stale)
        fabric_.errors.report(TxnError::StaleTag, tag, name_ + "/event");
}

// ---------------------------------------------------------------------------
// Fields

FieldTransactors field_binding(Fabric& fabric, ServiceHost& host, const mw::FieldDesc& field,
                               FieldIds ids, TransactorConfig cfg, mw::LinkModel link) {
    FieldTransactors out;
    if (field.has_get)
        out.get = std::make_unique<ClientMethodTransactor>(fabric, field.name + ".get",
                                                           host.service_id(), ids.get_method,
                                                           cfg, reseed(link, 11));
    if (field.has_set)
        out.set = std::make_unique<ClientMethodTransactor>(fabric, field.name + ".set",
                                                           host.service_id(), ids.set_method,
                                                           cfg, reseed(link, 12));
    if (field.has_notify)
        out.notify = std::make_unique<ClientEventTransactor>(fabric, field.name + ".notify",
                                                             host, ids.notify_event, cfg,
                                                             reseed(link, 13));
    return out;
}

} // namespace treactor::txn
