#include "treactor/apps/pipeline.hpp"

#include "treactor/mw/wire.hpp"

#include <random>

namespace treactor::apps {

namespace {

constexpr mw::EndpointId kSrc = 1, kVa = 2, kPre = 3, kCv = 4, kEba = 5;
constexpr uint16_t kEvFrame = 1, kEvLane = 2, kEvVehicles = 3;

uint64_t mix(uint64_t seed, uint64_t salt) { return seed ^ salt * 0x9e3779b97f4a7c15ull; }

mw::LinkModel reseed(mw::LinkModel m, uint64_t salt) {
    m.seed = mix(m.seed, salt);
    return m;
}

} // namespace

NaivePipelineResult run_naive_pipeline(const NaivePipelineConfig& cfg) {
    NaivePipelineResult result;
    ErrorStats& stats = result.stats;
    stats.total_frames = cfg.frames;

    mw::Transport transport;
    transport.add_link(kSrc, kVa, reseed(cfg.latency, 1));
    transport.add_link(kVa, kPre, reseed(cfg.latency, 2));
    transport.add_link(kPre, kCv, reseed(cfg.latency, 3));
    transport.add_link(kCv, kEba, reseed(cfg.latency, 4));

    OneSlotBuffer<Payload> va_frame, pre_frame, cv_frame, cv_lane, eba_vehicles;
    transport.register_endpoint(kVa, [&](int64_t, mw::EndpointId, const mw::WireMessage& m) {
        va_frame.write(m.payload);
    });
    transport.register_endpoint(kPre, [&](int64_t, mw::EndpointId, const mw::WireMessage& m) {
        pre_frame.write(m.payload);
    });
    transport.register_endpoint(kCv, [&](int64_t, mw::EndpointId, const mw::WireMessage& m) {
        (m.method_or_event_id == kEvFrame ? cv_frame : cv_lane).write(m.payload);
    });
    transport.register_endpoint(kEba, [&](int64_t, mw::EndpointId, const mw::WireMessage& m) {
        eba_vehicles.write(m.payload);
    });

    auto notify = [&](mw::EndpointId src, mw::EndpointId dst, uint16_t event, uint32_t id,
                      Payload payload, int64_t now) {
        mw::WireMessage msg{0, event, id, mw::MsgKind::Notification, std::move(payload), {}};
        transport.send(src, dst, msg, now);
    };

    std::mt19937_64 phase_rng(mix(cfg.seed, 101));
    std::array<int64_t, 4> phase{};
    if (cfg.phase_offsets) {
        for (size_t i = 0; i < 4; ++i) phase[i] = (*cfg.phase_offsets)[i].ns;
    } else {
        std::uniform_int_distribution<int64_t> d(0, cfg.period.ns - 1);
        for (auto& p : phase) p = d(phase_rng);
    }

    std::array<std::mt19937_64, 5> jitter_rng{
        std::mt19937_64(mix(cfg.seed, 201)), std::mt19937_64(mix(cfg.seed, 202)),
        std::mt19937_64(mix(cfg.seed, 203)), std::mt19937_64(mix(cfg.seed, 204)),
        std::mt19937_64(mix(cfg.seed, 205))};
    std::mt19937_64 tie_rng(mix(cfg.seed, 301));
    auto jitter = [&](size_t who) -> int64_t {
        if (cfg.tick_jitter.ns == 0) return 0;
        std::uniform_int_distribution<int64_t> d(-cfg.tick_jitter.ns, cfg.tick_jitter.ns);
        return d(jitter_rng[who]);
    };

    // Event index 0 is the frame source; 1..4 are the stage callbacks.
    std::array<int64_t, 5> next{0, phase[0], phase[1], phase[2], phase[3]};
    uint64_t emitted = 0;
    int64_t last_emit = 0;

    // Drains transport deliveries due strictly before t; at exactly t, reads
    // go first when configured, otherwise a coin decides the interleaving.
    auto deliver_before = [&](int64_t t) {
        while (auto at = transport.next_time()) {
            if (*at < t) {
                transport.deliver_until(*at);
            } else if (*at == t && !cfg.reads_first_on_tie && (tie_rng() & 1)) {
                transport.deliver_until(t);
            } else {
                return;
            }
        }
    };

    for (;;) {
        int64_t stop = emitted == cfg.frames ? last_emit + 5 * cfg.period.ns
                                             : std::numeric_limits<int64_t>::max();
        size_t who = 5;
        int64_t t = stop;
        for (size_t i = 0; i < 5; ++i) {
            if (i == 0 && emitted == cfg.frames) continue;
            if (next[i] <= t && (who == 5 || next[i] < t)) {
                who = i;
                t = next[i];
            }
        }
        if (who == 5) break;
        deliver_before(t);

        switch (who) {
        case 0: { // frame source
            notify(kSrc, kVa, kEvFrame, static_cast<uint32_t>(emitted),
                   Frame::make(emitted).encode(), t);
            ++emitted;
            last_emit = t;
            break;
        }
        case 1: { // frame adapter
            if (auto f = va_frame.take())
                notify(kVa, kPre, kEvFrame, 0, std::move(*f), t);
            break;
        }
        case 2: { // preprocessing
            if (auto f = pre_frame.take()) {
                LaneInfo lane = preprocess(Frame::decode(*f));
                notify(kPre, kCv, kEvFrame, 0, std::move(*f), t);
                notify(kPre, kCv, kEvLane, 0, lane.encode(), t);
            }
            break;
        }
        case 3: { // detection
            auto f = cv_frame.take();
            auto l = cv_lane.take();
            if (f && l) {
                CvResult r = computer_vision(Frame::decode(*f), LaneInfo::decode(*l));
                if (r.misaligned) ++stats.misaligned_at_cv;
                notify(kCv, kEba, kEvVehicles, 0, r.vehicles.encode(), t);
            } else if (f) {
                ++stats.dropped_lanes_at_cv;
            } else if (l) {
                ++stats.dropped_frames_at_cv;
            }
            break;
        }
        case 4: { // brake logic
            if (auto v = eba_vehicles.take())
                result.decisions.push_back(
                    eba(VehicleList::decode(*v), cfg.brake_threshold_m));
            break;
        }
        }
        next[who] += cfg.period.ns + jitter(who);
    }

    stats.dropped_at_preprocessing = va_frame.overwrite_count() + pre_frame.overwrite_count();
    stats.dropped_frames_at_cv += cv_frame.overwrite_count();
    stats.dropped_lanes_at_cv += cv_lane.overwrite_count();
    stats.dropped_at_eba = eba_vehicles.overwrite_count();
    return result;
}

} // namespace treactor::apps
