#include "treactor/mw/transport.hpp"

#include <algorithm>
#include <sstream>

namespace treactor {

Duration parse_duration(const std::string& s) {
    size_t pos = 0;
    long long value = std::stoll(s, &pos);
    std::string unit = s.substr(pos);
    if (unit == "ns" || unit.empty()) return nanoseconds(value);
    if (unit == "us") return microseconds(value);
    if (unit == "ms") return milliseconds(value);
    if (unit == "s") return seconds(value);
    throw std::invalid_argument("unknown duration unit: " + s);
}

} // namespace treactor

namespace treactor::mw {

LinkModel LinkModel::parse(const std::string& spec, uint64_t seed) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("empty latency model");
    if (parts[0] == "fixed" && parts.size() == 2) return fixed_latency(parse_duration(parts[1]));
    if (parts[0] == "uniform" && parts.size() == 3)
        return uniform(parse_duration(parts[1]), parse_duration(parts[2]), seed);
    if (parts[0] == "twopoint" && parts.size() == 4)
        return two_point(parse_duration(parts[1]), parse_duration(parts[2]),
                         static_cast<uint32_t>(std::stoul(parts[3])), seed);
    throw std::invalid_argument("bad latency model spec: " + spec);
}

void Transport::register_endpoint(EndpointId id, Receiver receiver) {
    std::lock_guard lk(mutex_);
    receivers_[id] = std::move(receiver);
}

void Transport::add_link(EndpointId src, EndpointId dst, LinkModel model) {
    std::lock_guard lk(mutex_);
    LinkState st{model, std::mt19937_64(model.seed), 0, 0};
    links_.insert_or_assign({src, dst}, std::move(st));
}

Duration Transport::sample(LinkState& link) {
    ++link.samples;
    switch (link.model.dist) {
    case LinkModel::Dist::Fixed:
        return link.model.fixed;
    case LinkModel::Dist::Uniform: {
        std::uniform_int_distribution<int64_t> d(link.model.lo.ns, link.model.hi.ns);
        return {d(link.rng)};
    }
    case LinkModel::Dist::TwoPoint:
        if (link.model.rare_every && link.samples % link.model.rare_every == 0)
            return link.model.rare;
        return link.model.common;
    }
    return {};
}

int64_t Transport::send(EndpointId src, EndpointId dst, const WireMessage& msg,
                        int64_t send_time_ns) {
    std::lock_guard lk(mutex_);
    auto it = links_.find({src, dst});
    if (it == links_.end())
        throw std::logic_error("no link " + std::to_string(src) + " -> " + std::to_string(dst));
    LinkState& link = it->second;
    int64_t arrival = send_time_ns + sample(link).ns;
    if (link.model.in_order) arrival = std::max(arrival, link.last_arrival);
    link.last_arrival = arrival;
    pending_.push({arrival, seq_++, src, dst, encode(msg)});
    return arrival;
}

std::optional<int64_t> Transport::next_time() {
    std::lock_guard lk(mutex_);
    if (pending_.empty()) return std::nullopt;
    return pending_.top().arrival;
}

void Transport::deliver_until(int64_t t_ns) {
    for (;;) {
        Delivery d;
        Receiver recv;
        {
            std::lock_guard lk(mutex_);
            if (pending_.empty() || pending_.top().arrival > t_ns) return;
            d = pending_.top();
            pending_.pop();
            auto it = receivers_.find(d.dst);
            if (it == receivers_.end())
                throw std::logic_error("no receiver for endpoint " + std::to_string(d.dst));
            recv = it->second;
        }
        recv(d.arrival, d.src, decode(d.bytes));
    }
}

void Transport::deliver_all() {
    while (auto t = next_time()) deliver_until(*t);
}

} // namespace treactor::mw
