#include "treactor/apps/stages.hpp"

#include <cstring>
#include <stdexcept>

namespace treactor::apps {

namespace {

void put_u64(Payload& out, uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

uint64_t get_u64(const Payload& b, size_t& pos) {
    if (pos + 8 > b.size()) throw std::invalid_argument("short payload");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | b[pos + i];
    pos += 8;
    return v;
}

} // namespace

Payload digest_expand(uint64_t seq) {
    Payload out;
    out.reserve(32);
    uint64_t h = fnv1a_u64(seq, kFnvOffset);
    for (int block = 0; block < 4; ++block) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(h >> (8 * i)));
        h = fnv1a_u64(h, h);
    }
    return out;
}

Frame Frame::make(uint64_t seq) { return {seq, digest_expand(seq)}; }

Payload Frame::encode() const {
    Payload out;
    put_u64(out, seq);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Frame Frame::decode(const Payload& bytes) {
    size_t pos = 0;
    Frame f;
    f.seq = get_u64(bytes, pos);
    f.payload.assign(bytes.begin() + pos, bytes.end());
    return f;
}

Payload LaneInfo::encode() const {
    Payload out;
    put_u64(out, source_seq);
    for (int32_t v : box) put_u64(out, static_cast<uint64_t>(static_cast<int64_t>(v)));
    return out;
}

LaneInfo LaneInfo::decode(const Payload& bytes) {
    size_t pos = 0;
    LaneInfo l;
    l.source_seq = get_u64(bytes, pos);
    for (auto& v : l.box) v = static_cast<int32_t>(static_cast<int64_t>(get_u64(bytes, pos)));
    return l;
}

Payload VehicleList::encode() const {
    Payload out;
    put_u64(out, source_seq);
    put_u64(out, distances_m.size());
    for (double d : distances_m) {
        uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put_u64(out, bits);
    }
    return out;
}

VehicleList VehicleList::decode(const Payload& bytes) {
    size_t pos = 0;
    VehicleList v;
    v.source_seq = get_u64(bytes, pos);
    uint64_t n = get_u64(bytes, pos);
    v.distances_m.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t bits = get_u64(bytes, pos);
        double d;
        std::memcpy(&d, &bits, 8);
        v.distances_m.push_back(d);
    }
    return v;
}

Payload BrakeDecision::encode() const {
    Payload out;
    put_u64(out, source_seq);
    out.push_back(brake ? 1 : 0);
    return out;
}

BrakeDecision BrakeDecision::decode(const Payload& bytes) {
    size_t pos = 0;
    BrakeDecision d;
    d.source_seq = get_u64(bytes, pos);
    d.brake = pos < bytes.size() && bytes[pos] != 0;
    return d;
}

LaneInfo preprocess(const Frame& frame) {
    LaneInfo lane;
    lane.source_seq = frame.seq;
    const auto& p = frame.payload;
    lane.box = {static_cast<int32_t>(p.size() > 0 ? p[0] : 0),
                static_cast<int32_t>(p.size() > 1 ? p[1] : 0),
                static_cast<int32_t>(16 + (p.size() > 2 ? p[2] % 64 : 0)),
                static_cast<int32_t>(16 + (p.size() > 3 ? p[3] % 64 : 0))};
    return lane;
}

CvResult computer_vision(const Frame& frame, const LaneInfo& lane) {
    CvResult res;
    res.misaligned = frame.seq != lane.source_seq;
    res.vehicles.source_seq = frame.seq;
    const auto& p = frame.payload;
    size_t count = p.empty() ? 0 : p[4] % 3;
    for (size_t i = 0; i < count; ++i)
        res.vehicles.distances_m.push_back(4.0 + p[(5 + i) % p.size()] % 40);
    return res;
}

BrakeDecision eba(const VehicleList& vehicles, double threshold_m) {
    BrakeDecision d;
    d.source_seq = vehicles.source_seq;
    for (double dist : vehicles.distances_m)
        if (dist < threshold_m) d.brake = true;
    return d;
}

} // namespace treactor::apps
