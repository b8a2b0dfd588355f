#include "treactor/apps/counter.hpp"

#include "treactor/txn/transactor.hpp"

#include <algorithm>
#include <random>

namespace treactor::apps {

namespace {

Payload enc_i64(int64_t v) {
    Payload out(8);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(static_cast<uint64_t>(v) >> (56 - 8 * i));
    return out;
}

int64_t dec_i64(const Payload& bytes) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | bytes[i];
    return static_cast<int64_t>(v);
}

mw::LinkModel counter_link(uint64_t seed, uint64_t salt) {
    return mw::LinkModel::uniform({}, milliseconds(5), seed ^ salt * 0x9e3779b97f4a7c15ull);
}

} // namespace

int64_t counter_apply(const std::array<CounterOp, 3>& order) {
    int64_t value = 0;
    int64_t seen = 0;
    for (CounterOp op : order) {
        switch (op) {
        case CounterOp::Set: value = 1; break;
        case CounterOp::Add: value += 2; break;
        case CounterOp::Get: seen = value; break;
        }
    }
    return seen;
}

std::array<CounterOp, 3> counter_order_from_seed(uint64_t seed) {
    std::array<CounterOp, 3> order{CounterOp::Set, CounterOp::Add, CounterOp::Get};
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

int64_t run_counter_naive(uint64_t seed) { return counter_apply(counter_order_from_seed(seed)); }

std::set<int64_t> counter_naive_support() {
    std::array<CounterOp, 3> order{CounterOp::Set, CounterOp::Add, CounterOp::Get};
    std::sort(order.begin(), order.end());
    std::set<int64_t> support;
    do {
        support.insert(counter_apply(order));
    } while (std::next_permutation(order.begin(), order.end()));
    return support;
}

int64_t run_counter_reactor(uint64_t seed, int workers) {
    using namespace treactor::txn;

    ReactorGraph graph;
    mw::Transport transport;
    mw::Registry registry;
    mw::TimestampBypass bypass;
    ErrorLog errors;
    Fabric fabric{graph, transport, registry, bypass, errors};

    constexpr uint16_t kService = 7, kSet = 1, kAdd = 2, kGet = 3;
    mw::ServiceDescriptor desc;
    desc.service_id = kService;
    desc.methods = {{kSet, "set"}, {kAdd, "add"}, {kGet, "get"}};
    ServiceHost host(fabric, desc);

    TransactorConfig cfg{milliseconds(5), milliseconds(5), {}, UntaggedPolicy::Fail};
    ServerMethodTransactor srv_set(fabric, "counter.srv.set", host, kSet, cfg);
    ServerMethodTransactor srv_add(fabric, "counter.srv.add", host, kAdd, cfg);
    ServerMethodTransactor srv_get(fabric, "counter.srv.get", host, kGet, cfg);
    ClientMethodTransactor cli_set(fabric, "counter.cli.set", kService, kSet, cfg,
                                   counter_link(seed, 1));
    ClientMethodTransactor cli_add(fabric, "counter.cli.add", kService, kAdd, cfg,
                                   counter_link(seed, 2));
    ClientMethodTransactor cli_get(fabric, "counter.cli.get", kService, kGet, cfg,
                                   counter_link(seed, 3));

    // Service logic: one integer cell behind the three methods.
    int64_t value = 0;
    ReactorId logic = graph.add_reactor("counter.logic");
    PortId in_set = graph.add_input(logic, "counter.logic.set");
    PortId in_add = graph.add_input(logic, "counter.logic.add");
    PortId in_get = graph.add_input(logic, "counter.logic.get");
    PortId out_set = graph.add_output(logic, "counter.logic.set_r");
    PortId out_add = graph.add_output(logic, "counter.logic.add_r");
    PortId out_get = graph.add_output(logic, "counter.logic.get_r");

    auto method = [&](const char* name, PortId in, PortId out,
                      std::function<Payload(const Payload&)> fn) {
        ReactionDecl r;
        r.name = name;
        r.port_triggers = {in};
        r.effects = {out};
        r.body = [&, in, out, fn](ReactionContext& ctx) {
            auto [call_id, args] = unpack_call(*ctx.get(in));
            ctx.set(out, pack_call(call_id, fn(args)));
        };
        graph.add_reaction(logic, std::move(r));
    };
    method("counter.logic/set", in_set, out_set, [&value](const Payload& args) {
        value = dec_i64(args);
        return Payload{};
    });
    method("counter.logic/add", in_add, out_add, [&value](const Payload& args) {
        value += dec_i64(args);
        return Payload{};
    });
    method("counter.logic/get", in_get, out_get,
           [&value](const Payload&) { return enc_i64(value); });

    graph.connect(srv_set.request_port(), in_set);
    graph.connect(srv_add.request_port(), in_add);
    graph.connect(srv_get.request_port(), in_get);
    graph.connect(out_set, srv_set.response_port());
    graph.connect(out_add, srv_add.response_port());
    graph.connect(out_get, srv_get.response_port());

    // Client: three requests at tags 0, 1 ms, 2 ms.
    int64_t seen = -1;
    ReactorId client = graph.add_reactor("counter.client");
    ActionId step = graph.add_action(client, "counter.client.step");
    PortId req_set = graph.add_output(client, "counter.client.set");
    PortId req_add = graph.add_output(client, "counter.client.add");
    PortId req_get = graph.add_output(client, "counter.client.get");
    PortId result_in = graph.add_input(client, "counter.client.result");

    ReactionDecl kick;
    kick.name = "counter.client/issue";
    kick.action_triggers = {step};
    kick.effects = {req_set, req_add, req_get};
    kick.body = [&, step, req_set, req_add, req_get](ReactionContext& ctx) {
        uint8_t k = ctx.get_action(step)->at(0);
        if (k == 0) ctx.set(req_set, enc_i64(1));
        if (k == 1) ctx.set(req_add, enc_i64(2));
        if (k == 2) ctx.set(req_get, {});
        if (k < 2) ctx.schedule(step, milliseconds(1), {static_cast<uint8_t>(k + 1)});
    };
    graph.add_reaction(client, std::move(kick));

    ReactionDecl recv;
    recv.name = "counter.client/result";
    recv.port_triggers = {result_in};
    recv.body = [&seen, result_in](ReactionContext& ctx) { seen = dec_i64(*ctx.get(result_in)); };
    graph.add_reaction(client, std::move(recv));

    graph.connect(req_set, cli_set.request_port());
    graph.connect(req_add, cli_add.request_port());
    graph.connect(req_get, cli_get.request_port());
    graph.connect(cli_get.response_port(), result_in);

    Apg apg = build_apg(graph);
    Clock clock(Clock::Mode::Simulated);
    SchedulerOptions opts;
    opts.workers = workers;
    Scheduler sched(graph, apg, clock, opts);
    fabric.scheduler = &sched;
    sched.set_timed_source(&transport);
    sched.inject_at(step, Tag{0, 0}, {0});
    sched.run();

    if (errors.total() != 0)
        throw std::runtime_error("counter demo reported " + std::to_string(errors.total()) +
                                 " transactor errors");
    return seen;
}

} // namespace treactor::apps
