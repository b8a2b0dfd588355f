#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treactor/mw/binding.hpp"

#include <algorithm>
#include <random>

using namespace treactor;
using namespace treactor::mw;

TEST_CASE("encode: hand-checked header layout, big-endian") {
    WireMessage msg{0x0102, 0x0304, 0x05060708, MsgKind::Request, {0xAA, 0xBB}, {}};
    std::vector<uint8_t> expected = {
        0x01, 0x02,             // service_id
        0x03, 0x04,             // method id
        0x05, 0x06, 0x07, 0x08, // call_id
        0x00,                   // kind = Request
        0x00,                   // flags: no trailer
        0x00, 0x00, 0x00, 0x02, // payload_len
        0xAA, 0xBB,
    };
    CHECK(encode(msg) == expected);
    CHECK(expected.size() == kHeaderSize + 2);
}

TEST_CASE("encode: tag trailer occupies the last twelve bytes") {
    WireMessage msg{1, 2, 3, MsgKind::Notification, {}, TagTrailer{1, 0}};
    auto bytes = encode(msg);
    REQUIRE(bytes.size() == kHeaderSize + kTrailerSize);
    CHECK((bytes[9] & 0x01) == 1); // flags bit 0
    std::vector<uint8_t> trailer(bytes.end() - kTrailerSize, bytes.end());
    CHECK(trailer == std::vector<uint8_t>{0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0});
}

TEST_CASE("encode: attaching a trailer changes only the flags bit and the tail") {
    WireMessage plain{7, 8, 9, MsgKind::Response, {1, 2, 3}, {}};
    WireMessage tagged = plain;
    tagged.tag_trailer = TagTrailer{123456789, 2};
    auto a = encode(plain), b = encode(tagged);
    REQUIRE(b.size() == a.size() + kTrailerSize);
    for (size_t i = 0; i < a.size(); ++i) {
        if (i == 9)
            CHECK(b[i] == (a[i] | 0x01));
        else
            CHECK(b[i] == a[i]);
    }
}

TEST_CASE("decode: ten thousand randomized round-trips") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 10'000; ++i) {
        WireMessage msg;
        msg.service_id = static_cast<uint16_t>(rng());
        msg.method_or_event_id = static_cast<uint16_t>(rng());
        msg.call_id = static_cast<uint32_t>(rng());
        msg.kind = static_cast<MsgKind>(rng() % 3);
        msg.payload.resize(rng() % 64);
        for (auto& b : msg.payload) b = static_cast<uint8_t>(rng());
        if (rng() % 2)
            msg.tag_trailer = TagTrailer{static_cast<int64_t>(rng() >> 1),
                                         static_cast<uint32_t>(rng())};
        CHECK(decode(encode(msg)) == msg);
    }
}

TEST_CASE("decode: every one-byte truncation is rejected") {
    WireMessage msg{10, 20, 30, MsgKind::Request, {1, 2, 3, 4, 5}, TagTrailer{42, 1}};
    auto bytes = encode(msg);
    for (size_t len = 0; len < bytes.size(); ++len) {
        std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + len);
        CHECK_THROWS_AS(decode(cut), MalformedMessage);
    }
}

TEST_CASE("decode: trailing garbage and unknown kind are rejected") {
    WireMessage msg{10, 20, 30, MsgKind::Request, {1, 2, 3}, {}};
    auto bytes = encode(msg);
    bytes.push_back(0x00);
    CHECK_THROWS_AS(decode(bytes), MalformedMessage);
    bytes.pop_back();
    bytes[8] = 3; // kind out of range
    CHECK_THROWS_AS(decode(bytes), MalformedMessage);
    bytes[8] = 0;
    bytes[9] = 0x02; // unknown flag bit
    CHECK_THROWS_AS(decode(bytes), MalformedMessage);
}

TEST_CASE("registry: discover, missing service, re-registration wins") {
    Registry reg;
    ServiceDescriptor desc;
    desc.service_id = 5;
    CHECK_THROWS_AS(reg.discover(5), ServiceNotFound);
    reg.register_service(desc, 100);
    CHECK(reg.discover(5) == 100);
    reg.register_service(desc, 200);
    CHECK(reg.discover(5) == 200);
}

TEST_CASE("bypass: one slot per (endpoint, call_id), take empties it") {
    TimestampBypass bp;
    bp.put(1, 7, Tag{milliseconds(3).ns, 2});
    bp.put(1, 8, Tag{milliseconds(4).ns, 0});
    bp.put(2, 7, Tag{milliseconds(5).ns, 0}); // other endpoint, same call_id
    CHECK(bp.take(1, 7) == Tag{milliseconds(3).ns, 2});
    CHECK_THROWS_AS(bp.take(1, 7), BypassEmpty); // consumed
    CHECK(bp.take(1, 8) == Tag{milliseconds(4).ns, 0});
    CHECK(bp.take(2, 7) == Tag{milliseconds(5).ns, 0});
    CHECK_FALSE(bp.try_take(3, 3).has_value());
}

TEST_CASE("transport: fixed latency sets the arrival time exactly") {
    Transport tp;
    std::vector<int64_t> arrivals;
    tp.register_endpoint(2, [&](int64_t t, EndpointId, const WireMessage&) {
        arrivals.push_back(t);
    });
    tp.add_link(1, 2, LinkModel::fixed_latency(milliseconds(5)));
    WireMessage msg{1, 1, 1, MsgKind::Notification, {}, {}};
    CHECK(tp.send(1, 2, msg, milliseconds(10).ns) == milliseconds(15).ns);
    CHECK(tp.send(1, 2, msg, milliseconds(20).ns) == milliseconds(25).ns);
    tp.deliver_all();
    CHECK(arrivals == std::vector<int64_t>{milliseconds(15).ns, milliseconds(25).ns});

    Transport zero;
    zero.register_endpoint(2, [](int64_t, EndpointId, const WireMessage&) {});
    zero.add_link(1, 2, LinkModel::fixed_latency({}));
    CHECK(zero.send(1, 2, msg, milliseconds(3).ns) == milliseconds(3).ns);
}

TEST_CASE("transport: seeded links reproduce the same arrival sequence") {
    auto arrivals_for = [](uint64_t seed) {
        Transport tp;
        std::vector<int64_t> arrivals;
        tp.register_endpoint(2, [&](int64_t t, EndpointId, const WireMessage&) {
            arrivals.push_back(t);
        });
        tp.add_link(1, 2, LinkModel::uniform({}, milliseconds(5), seed));
        WireMessage msg{1, 1, 1, MsgKind::Notification, {}, {}};
        for (int i = 0; i < 200; ++i) tp.send(1, 2, msg, i * milliseconds(1).ns);
        tp.deliver_all();
        return arrivals;
    };
    auto a = arrivals_for(42), b = arrivals_for(42), c = arrivals_for(43);
    CHECK(a == b);
    CHECK(a != c);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] >= static_cast<int64_t>(i) * milliseconds(1).ns);
        CHECK(a[i] <= static_cast<int64_t>(i) * milliseconds(1).ns + milliseconds(5).ns);
    }
}

TEST_CASE("transport: in-order links never reorder; unordered links may") {
    auto run = [](bool in_order) {
        Transport tp;
        std::vector<uint32_t> received;
        tp.register_endpoint(2, [&](int64_t, EndpointId, const WireMessage& m) {
            received.push_back(m.call_id);
        });
        LinkModel model = LinkModel::uniform({}, milliseconds(5), 7);
        model.in_order = in_order;
        tp.add_link(1, 2, model);
        for (uint32_t i = 0; i < 300; ++i) {
            WireMessage msg{1, 1, i, MsgKind::Notification, {}, {}};
            tp.send(1, 2, msg, 0); // all sent simultaneously
        }
        tp.deliver_all();
        return received;
    };
    auto ordered = run(true);
    CHECK(std::is_sorted(ordered.begin(), ordered.end()));
    auto unordered = run(false);
    CHECK(unordered.size() == 300);
    CHECK_FALSE(std::is_sorted(unordered.begin(), unordered.end()));
}

TEST_CASE("transport: co-simulation interface releases deliveries up to a time") {
    Transport tp;
    std::vector<int64_t> arrivals;
    tp.register_endpoint(2, [&](int64_t t, EndpointId, const WireMessage&) {
        arrivals.push_back(t);
    });
    tp.add_link(1, 2, LinkModel::fixed_latency(milliseconds(5)));
    WireMessage msg{1, 1, 1, MsgKind::Notification, {}, {}};
    tp.send(1, 2, msg, 0);
    tp.send(1, 2, msg, milliseconds(10).ns);
    CHECK(tp.next_time() == milliseconds(5).ns);
    tp.deliver_until(milliseconds(5).ns);
    CHECK(arrivals.size() == 1);
    CHECK(tp.next_time() == milliseconds(15).ns);
    tp.deliver_until(milliseconds(14).ns);
    CHECK(arrivals.size() == 1);
    tp.deliver_until(milliseconds(15).ns);
    CHECK(arrivals.size() == 2);
    CHECK_FALSE(tp.next_time().has_value());
}

TEST_CASE("binding: staged bypass tags travel as trailers and land in the peer bypass") {
    Transport tp;
    TimestampBypass bp_a, bp_b;
    Binding a(1, tp, bp_a), b(2, tp, bp_b);
    tp.add_link(1, 2, LinkModel::fixed_latency(milliseconds(1)));
    std::optional<TagTrailer> seen;
    b.set_receiver([&](int64_t, EndpointId, const WireMessage& m) { seen = m.tag_trailer; });

    Tag tag{milliseconds(9).ns, 3};
    bp_a.put(1, 7, tag);
    a.send(2, WireMessage{1, 1, 7, MsgKind::Notification, {}, {}}, 0);
    tp.deliver_all();
    REQUIRE(seen.has_value());
    CHECK(seen->tag() == tag);
    CHECK(bp_b.take(2, 7) == tag);       // deposited on receive
    CHECK_FALSE(bp_a.try_take(1, 7));    // consumed on send

    // without a staged tag the message travels untagged
    seen.reset();
    a.send(2, WireMessage{1, 1, 8, MsgKind::Notification, {}, {}}, 0);
    tp.deliver_all();
    CHECK_FALSE(seen.has_value());
    CHECK_FALSE(bp_b.try_take(2, 8).has_value());
}

TEST_CASE("proxy/skeleton: echo calls resolve futures by call_id") {
    Transport tp;
    Registry reg;
    TimestampBypass bp_c, bp_s;
    Binding cb(1, tp, bp_c), sb(2, tp, bp_s);
    tp.add_link(1, 2, LinkModel::fixed_latency(milliseconds(1)));
    tp.add_link(2, 1, LinkModel::fixed_latency(milliseconds(1)));

    ServiceDescriptor desc;
    desc.service_id = 9;
    desc.methods = {{1, "echo"}};
    Skeleton skel(sb, desc, reg);
    std::vector<uint32_t> served;
    skel.bind_method(1, [&](uint32_t call_id, const std::vector<uint8_t>& args, int64_t arrival,
                            Skeleton::Responder respond) {
        served.push_back(call_id);
        auto out = args;
        out.push_back(0xFF);
        respond(out, arrival);
    });

    Proxy proxy(cb, reg, 9);
    CHECK(proxy.peer() == 2);
    auto f1 = proxy.call_future(1, {1}, 0);
    auto f2 = proxy.call_future(1, {2}, 0);
    tp.deliver_all(); // requests in, responses queued
    tp.deliver_all(); // responses back
    CHECK(f1.get() == std::vector<uint8_t>{1, 0xFF});
    CHECK(f2.get() == std::vector<uint8_t>{2, 0xFF});
    REQUIRE(served.size() == 2);
    CHECK(served[0] != served[1]); // outstanding calls keep distinct ids
}

TEST_CASE("skeleton: publish fans out one notification per subscriber") {
    Transport tp;
    Registry reg;
    TimestampBypass bp_s, bp_1, bp_2;
    Binding sb(10, tp, bp_s), s1(11, tp, bp_1), s2(12, tp, bp_2);
    tp.add_link(10, 11, LinkModel::fixed_latency(milliseconds(1)));
    tp.add_link(10, 12, LinkModel::fixed_latency(milliseconds(2)));

    ServiceDescriptor desc;
    desc.service_id = 3;
    desc.events = {{4, "tick"}};
    Skeleton skel(sb, desc, reg);
    skel.add_subscriber(4, 11);
    skel.add_subscriber(4, 12);

    std::vector<std::pair<EndpointId, WireMessage>> got;
    auto sink = [&](EndpointId self) {
        return [&, self](int64_t, EndpointId, const WireMessage& m) { got.push_back({self, m}); };
    };
    s1.set_receiver(sink(11));
    s2.set_receiver(sink(12));

    skel.publish_tagged(4, {9}, Tag{milliseconds(50).ns, 0}, 0);
    tp.deliver_all();
    REQUIRE(got.size() == 2);
    for (const auto& [self, m] : got) {
        CHECK(m.kind == MsgKind::Notification);
        CHECK(m.method_or_event_id == 4);
        CHECK(m.payload == std::vector<uint8_t>{9});
        REQUIRE(m.tag_trailer.has_value());
        CHECK(m.tag_trailer->tag() == Tag{milliseconds(50).ns, 0});
    }
    CHECK(got[0].second.call_id == got[1].second.call_id); // one occurrence
}

TEST_CASE("link model: parse specs") {
    LinkModel f = LinkModel::parse("fixed:5ms", 1);
    CHECK(f.dist == LinkModel::Dist::Fixed);
    CHECK(f.fixed.ns == milliseconds(5).ns);
    LinkModel u = LinkModel::parse("uniform:0ms:5ms", 2);
    CHECK(u.dist == LinkModel::Dist::Uniform);
    CHECK(u.hi.ns == milliseconds(5).ns);
    CHECK(u.declared_bound.ns == milliseconds(5).ns);
    LinkModel t = LinkModel::parse("twopoint:1ms:7ms:100", 3);
    CHECK(t.dist == LinkModel::Dist::TwoPoint);
    CHECK(t.rare.ns == milliseconds(7).ns);
    CHECK(t.rare_every == 100);
    CHECK_THROWS_AS(LinkModel::parse("gaussian:1ms", 4), std::invalid_argument);
}
