#include "treactor/mw/wire.hpp"

namespace treactor::mw {

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

struct Reader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > b.size()) throw MalformedMessage("truncated at offset " + std::to_string(pos));
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(b[pos] << 8 | b[pos + 1]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | b[pos + i];
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | b[pos + i];
        pos += 8;
        return v;
    }
};

} // namespace

std::vector<uint8_t> encode(const WireMessage& msg) {
    std::vector<uint8_t> out;
    out.reserve(kHeaderSize + msg.payload.size() + (msg.tag_trailer ? kTrailerSize : 0));
    put_u16(out, msg.service_id);
    put_u16(out, msg.method_or_event_id);
    put_u32(out, msg.call_id);
    out.push_back(static_cast<uint8_t>(msg.kind));
    out.push_back(msg.tag_trailer ? 0x01 : 0x00);
    put_u32(out, static_cast<uint32_t>(msg.payload.size()));
    out.insert(out.end(), msg.payload.begin(), msg.payload.end());
    if (msg.tag_trailer) {
        put_u64(out, static_cast<uint64_t>(msg.tag_trailer->time_ns));
        put_u32(out, msg.tag_trailer->microstep);
    }
    return out;
}

WireMessage decode(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    WireMessage msg;
    msg.service_id = r.u16();
    msg.method_or_event_id = r.u16();
    msg.call_id = r.u32();
    uint8_t kind = (r.need(1), bytes[r.pos++]);
    if (kind > static_cast<uint8_t>(MsgKind::Notification))
        throw MalformedMessage("unknown kind " + std::to_string(kind));
    msg.kind = static_cast<MsgKind>(kind);
    uint8_t flags = (r.need(1), bytes[r.pos++]);
    if (flags & ~0x01) throw MalformedMessage("unknown flags " + std::to_string(flags));
    uint32_t len = r.u32();
    r.need(len);
    msg.payload.assign(bytes.begin() + r.pos, bytes.begin() + r.pos + len);
    r.pos += len;
    if (flags & 0x01) {
        TagTrailer t;
        t.time_ns = static_cast<int64_t>(r.u64());
        t.microstep = r.u32();
        msg.tag_trailer = t;
    }
    if (r.pos != bytes.size()) throw MalformedMessage("trailing bytes");
    return msg;
}

} // namespace treactor::mw
