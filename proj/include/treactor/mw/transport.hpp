#pragma once

#include "treactor/mw/registry.hpp"
#include "treactor/mw/wire.hpp"
#include "treactor/scheduler.hpp"
#include "treactor/tag.hpp"

#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace treactor::mw {

/// One-way link behavior: a seeded latency distribution with a declared
/// upper bound (the L receivers assume), which samples may exceed.
struct LinkModel {
    enum class Dist { Fixed, Uniform, TwoPoint };

    Dist dist = Dist::Fixed;
    Duration fixed{};
    Duration lo{}, hi{};          // Uniform, inclusive
    Duration common{}, rare{};    // TwoPoint
    uint32_t rare_every = 0;      // TwoPoint: every n-th sample is `rare`; 0 = never
    uint64_t seed = 0;
    bool in_order = true;
    Duration declared_bound{};    // the L used by receivers

    static LinkModel fixed_latency(Duration d) {
        LinkModel m;
        m.dist = Dist::Fixed;
        m.fixed = d;
        m.declared_bound = d;
        return m;
    }
    static LinkModel uniform(Duration lo, Duration hi, uint64_t seed) {
        LinkModel m;
        m.dist = Dist::Uniform;
        m.lo = lo;
        m.hi = hi;
        m.seed = seed;
        m.declared_bound = hi;
        return m;
    }
    static LinkModel two_point(Duration common, Duration rare, uint32_t rare_every,
                               uint64_t seed) {
        LinkModel m;
        m.dist = Dist::TwoPoint;
        m.common = common;
        m.rare = rare;
        m.rare_every = rare_every;
        m.seed = seed;
        m.declared_bound = common;
        return m;
    }

    /// Parses "fixed:5ms", "uniform:0ms:5ms", "twopoint:1ms:7ms:100".
    static LinkModel parse(const std::string& spec, uint64_t seed);
};

/// In-process message transport with injected latency. Implements
/// TimedSource so a simulated scheduler can co-simulate deliveries.
class Transport : public TimedSource {
public:
    using Receiver = std::function<void(int64_t arrival_ns, EndpointId src, const WireMessage&)>;

    void register_endpoint(EndpointId id, Receiver receiver);
    void add_link(EndpointId src, EndpointId dst, LinkModel model);

    /// Encodes and enqueues for delivery at send_time + sampled latency.
    /// In-order links never reorder: arrivals are clamped to be monotone.
    int64_t send(EndpointId src, EndpointId dst, const WireMessage& msg, int64_t send_time_ns);

    // TimedSource
    std::optional<int64_t> next_time() override;
    void deliver_until(int64_t t_ns) override;

    /// Delivers everything pending (standalone use, without a scheduler).
    void deliver_all();

private:
    struct LinkState {
        LinkModel model;
        std::mt19937_64 rng;
        uint64_t samples = 0;
        int64_t last_arrival = 0;
    };
    struct Delivery {
        int64_t arrival;
        uint64_t seq;
        EndpointId src;
        EndpointId dst;
        std::vector<uint8_t> bytes;
        bool operator>(const Delivery& o) const {
            return std::tie(arrival, seq) > std::tie(o.arrival, o.seq);
        }
    };

    Duration sample(LinkState& link);

    std::mutex mutex_;
    std::map<EndpointId, Receiver> receivers_;
    std::map<std::pair<EndpointId, EndpointId>, LinkState> links_;
    std::priority_queue<Delivery, std::vector<Delivery>, std::greater<>> pending_;
    uint64_t seq_ = 0;
};

} // namespace treactor::mw
