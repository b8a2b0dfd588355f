#include "treactor/apps/pipeline.hpp"

#include "treactor/txn/transactor.hpp"

#include <limits>
#include <string>

namespace treactor::apps {

namespace {

mw::LinkModel reseed(mw::LinkModel m, uint64_t salt) {
    m.seed ^= salt * 0x9e3779b97f4a7c15ull;
    return m;
}

} // namespace

ReactorPipelineResult run_reactor_pipeline(const ReactorPipelineConfig& cfg) {
    using namespace treactor::txn;

    ReactorPipelineResult result;
    result.stats.total_frames = cfg.frames;

    ReactorGraph graph;
    mw::Transport transport;
    mw::Registry registry;
    mw::TimestampBypass bypass;
    ErrorLog errors;
    Fabric fabric{graph, transport, registry, bypass, errors};

    constexpr uint16_t kEvFrame = 1, kEvLane = 2, kEvVehicles = 1, kEvBrake = 1;
    mw::ServiceDescriptor va_desc{1, {}, {{kEvFrame, "frame"}}, {}};
    mw::ServiceDescriptor pre_desc{2, {}, {{kEvFrame, "frame"}, {kEvLane, "lane"}}, {}};
    mw::ServiceDescriptor cv_desc{3, {}, {{kEvVehicles, "vehicles"}}, {}};
    mw::ServiceDescriptor eba_desc{4, {}, {{kEvBrake, "brake"}}, {}};
    ServiceHost va_host(fabric, va_desc), pre_host(fabric, pre_desc), cv_host(fabric, cv_desc),
        eba_host(fabric, eba_desc);

    auto stage_cfg = [&](StageIndex s) {
        return TransactorConfig{cfg.deadlines[s], cfg.max_latency, cfg.max_skew,
                                UntaggedPolicy::Fail};
    };

    // Frame adapter: frames enter as events at fixed tags.
    ReactorId va = graph.add_reactor("va");
    ActionId frame_in = graph.add_action(va, "va.frame_in");
    PortId va_out = graph.add_output(va, "va.out");
    ReactionDecl va_rx;
    va_rx.name = "va/adapt";
    va_rx.action_triggers = {frame_in};
    va_rx.effects = {va_out};
    va_rx.cost = cfg.compute[kStageVa];
    va_rx.body = [&, frame_in, va_out](ReactionContext& ctx) {
        ctx.set(va_out, *ctx.get_action(frame_in));
    };
    result.insert_reaction = graph.add_reaction(va, std::move(va_rx));

    ServerEventTransactor pub_va(fabric, "pub_va", va_host, kEvFrame, stage_cfg(kStageVa));
    graph.connect(va_out, pub_va.publish_port());
    ClientEventTransactor sub_pre(fabric, "sub_pre", va_host, kEvFrame, stage_cfg(kStageVa),
                                  reseed(cfg.latency, 1));

    // Preprocessing: forwards the frame and derives the lane estimate.
    ReactorId pre = graph.add_reactor("pre");
    PortId pre_in = graph.add_input(pre, "pre.in");
    PortId pre_frame_out = graph.add_output(pre, "pre.frame_out");
    PortId pre_lane_out = graph.add_output(pre, "pre.lane_out");
    ReactionDecl pre_rx;
    pre_rx.name = "pre/process";
    pre_rx.port_triggers = {pre_in};
    pre_rx.effects = {pre_frame_out, pre_lane_out};
    pre_rx.cost = cfg.compute[kStagePre];
    pre_rx.body = [&, pre_in, pre_frame_out, pre_lane_out](ReactionContext& ctx) {
        const Payload& bytes = *ctx.get(pre_in);
        LaneInfo lane = preprocess(Frame::decode(bytes));
        ctx.set(pre_frame_out, bytes);
        ctx.set(pre_lane_out, lane.encode());
    };
    graph.add_reaction(pre, std::move(pre_rx));
    graph.connect(sub_pre.event_port(), pre_in);

    ServerEventTransactor pub_pre_frame(fabric, "pub_pre_frame", pre_host, kEvFrame,
                                        stage_cfg(kStagePre));
    ServerEventTransactor pub_pre_lane(fabric, "pub_pre_lane", pre_host, kEvLane,
                                       stage_cfg(kStagePre));
    graph.connect(pre_frame_out, pub_pre_frame.publish_port());
    graph.connect(pre_lane_out, pub_pre_lane.publish_port());
    ClientEventTransactor sub_cv_frame(fabric, "sub_cv_frame", pre_host, kEvFrame,
                                       stage_cfg(kStagePre),
                                       cfg.pre_cv_frame_latency ? *cfg.pre_cv_frame_latency
                                                                : reseed(cfg.latency, 2));
    ClientEventTransactor sub_cv_lane(fabric, "sub_cv_lane", pre_host, kEvLane,
                                      stage_cfg(kStagePre), reseed(cfg.latency, 3));

    // Detection: requires frame and lane with one common tag.
    ReactorId cv = graph.add_reactor("cv");
    PortId cv_frame_in = graph.add_input(cv, "cv.frame_in");
    PortId cv_lane_in = graph.add_input(cv, "cv.lane_in");
    PortId cv_out = graph.add_output(cv, "cv.out");
    ReactionDecl cv_rx;
    cv_rx.name = "cv/detect";
    cv_rx.port_triggers = {cv_frame_in, cv_lane_in};
    cv_rx.effects = {cv_out};
    cv_rx.cost = cfg.compute[kStageCv];
    cv_rx.body = [&, cv_frame_in, cv_lane_in, cv_out](ReactionContext& ctx) {
        const Payload* f = ctx.get(cv_frame_in);
        const Payload* l = ctx.get(cv_lane_in);
        // A missing partner here means the other event was dropped upstream,
        // which its transactor already reported; only misalignment is new.
        if (f && l) {
            CvResult r = computer_vision(Frame::decode(*f), LaneInfo::decode(*l));
            if (r.misaligned) ++result.stats.misaligned_at_cv;
            ctx.set(cv_out, r.vehicles.encode());
        }
    };
    graph.add_reaction(cv, std::move(cv_rx));
    graph.connect(sub_cv_frame.event_port(), cv_frame_in);
    graph.connect(sub_cv_lane.event_port(), cv_lane_in);

    ServerEventTransactor pub_cv(fabric, "pub_cv", cv_host, kEvVehicles, stage_cfg(kStageCv));
    graph.connect(cv_out, pub_cv.publish_port());
    ClientEventTransactor sub_eba(fabric, "sub_eba", cv_host, kEvVehicles, stage_cfg(kStageCv),
                                  reseed(cfg.latency, 4));

    // Brake logic.
    ReactorId eba_r = graph.add_reactor("eba");
    PortId eba_in = graph.add_input(eba_r, "eba.in");
    PortId eba_out = graph.add_output(eba_r, "eba.out");
    ReactionDecl eba_rx;
    eba_rx.name = "eba/decide";
    eba_rx.port_triggers = {eba_in};
    eba_rx.effects = {eba_out};
    eba_rx.cost = cfg.compute[kStageEba];
    eba_rx.body = [&, eba_in, eba_out](ReactionContext& ctx) {
        BrakeDecision d = eba(VehicleList::decode(*ctx.get(eba_in)), cfg.brake_threshold_m);
        ctx.set(eba_out, d.encode());
    };
    graph.add_reaction(eba_r, std::move(eba_rx));
    graph.connect(sub_eba.event_port(), eba_in);

    result.publish_reaction = static_cast<ReactionId>(graph.num_reactions());
    result.publish_deadline = cfg.deadlines[kStageEba];
    ServerEventTransactor pub_eba(fabric, "pub_eba", eba_host, kEvBrake, stage_cfg(kStageEba));
    graph.connect(eba_out, pub_eba.publish_port());
    ClientEventTransactor sub_sink(fabric, "sub_sink", eba_host, kEvBrake, stage_cfg(kStageEba),
                                   reseed(cfg.latency, 5));

    ReactorId sink = graph.add_reactor("sink");
    PortId sink_in = graph.add_input(sink, "sink.in");
    ReactionDecl sink_rx;
    sink_rx.name = "sink/record";
    sink_rx.port_triggers = {sink_in};
    sink_rx.body = [&, sink_in](ReactionContext& ctx) {
        result.decisions.push_back(BrakeDecision::decode(*ctx.get(sink_in)));
    };
    graph.add_reaction(sink, std::move(sink_rx));
    graph.connect(sub_sink.event_port(), sink_in);

    Apg apg = build_apg(graph);
    Clock clock(cfg.realtime ? Clock::Mode::RealTime : Clock::Mode::Simulated);
    SchedulerOptions opts;
    opts.workers = cfg.workers;
    Scheduler sched(graph, apg, clock, opts);
    fabric.scheduler = &sched;
    sched.set_timed_source(&transport);
    for (uint64_t k = 0; k < cfg.frames; ++k)
        sched.inject_at(frame_in, Tag{static_cast<int64_t>(k) * cfg.period.ns, 0},
                        Frame::make(k).encode());
    result.trace = sched.run();
    result.trace_digest = trace_digest(result.trace);

    // Bound violations reported by the transactors, attributed to the stage
    // whose input they starve.
    for (const auto& rec : errors.records()) {
        std::string who = rec.where.substr(0, rec.where.find('/'));
        if (who == "pub_va" || who == "sub_pre") ++result.stats.dropped_at_preprocessing;
        else if (who == "pub_pre_frame" || who == "sub_cv_frame") ++result.stats.dropped_frames_at_cv;
        else if (who == "pub_pre_lane" || who == "sub_cv_lane") ++result.stats.dropped_lanes_at_cv;
        else ++result.stats.dropped_at_eba;
    }

    result.latency = end_to_end_latency(result.trace, result.insert_reaction,
                                        result.publish_reaction, result.publish_deadline);
    return result;
}

LatencyReport end_to_end_latency(const Trace& trace, ReactionId insert_reaction,
                                 ReactionId publish_reaction, Duration publish_deadline) {
    std::vector<Tag> inserted, published;
    for (const auto& rec : trace) {
        if (rec.reaction == insert_reaction) inserted.push_back(rec.tag);
        if (rec.reaction == publish_reaction) published.push_back(rec.tag);
    }
    LatencyReport report;
    report.samples = std::min(inserted.size(), published.size());
    if (report.samples == 0) return report;
    report.min = Duration{std::numeric_limits<int64_t>::max()};
    double sum = 0.0;
    for (uint64_t i = 0; i < report.samples; ++i) {
        Tag trailer = published[i].delay(publish_deadline);
        int64_t lat = trailer.time_ns - inserted[i].time_ns;
        report.min = Duration{std::min(report.min.ns, lat)};
        report.max = Duration{std::max(report.max.ns, lat)};
        sum += static_cast<double>(lat);
    }
    report.mean_ns = sum / static_cast<double>(report.samples);
    return report;
}

} // namespace treactor::apps
