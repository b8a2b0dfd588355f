#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "treactor/apps/counter.hpp"
#include "treactor/apps/pipeline.hpp"

#include <random>

using namespace treactor;
using namespace treactor::apps;

TEST_CASE("codecs: frame, lane, vehicle list, brake decision round-trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Frame f = Frame::make(rng());
        CHECK(Frame::decode(f.encode()).seq == f.seq);
        CHECK(Frame::decode(f.encode()).payload == f.payload);

        LaneInfo lane{rng(), {int32_t(rng()), int32_t(rng()), int32_t(rng()), int32_t(rng())}};
        LaneInfo lane2 = LaneInfo::decode(lane.encode());
        CHECK(lane2.source_seq == lane.source_seq);
        CHECK(lane2.box == lane.box);

        VehicleList v{rng(), {}};
        for (size_t k = rng() % 4; k--;) v.distances_m.push_back(double(rng() % 1000) / 10.0);
        VehicleList v2 = VehicleList::decode(v.encode());
        CHECK(v2.source_seq == v.source_seq);
        CHECK(v2.distances_m == v.distances_m);

        BrakeDecision d{rng(), bool(rng() % 2)};
        BrakeDecision d2 = BrakeDecision::decode(d.encode());
        CHECK(d2.source_seq == d.source_seq);
        CHECK(d2.brake == d.brake);
    }
    CHECK(digest_expand(7).size() == 32);
    CHECK(digest_expand(7) == digest_expand(7));
    CHECK(digest_expand(7) != digest_expand(8));
}

TEST_CASE("stage logic: provenance, misalignment flag, brake threshold") {
    Frame f = Frame::make(12);
    LaneInfo lane = preprocess(f);
    CHECK(lane.source_seq == 12);
    CHECK(lane.box[2] >= 16); // box dimensions stay positive
    CHECK(lane.box[3] >= 16);

    CHECK_FALSE(computer_vision(f, lane).misaligned);
    LaneInfo other = preprocess(Frame::make(13));
    CHECK(computer_vision(f, other).misaligned); // provenance mismatch detected
    CHECK(computer_vision(f, lane).vehicles.source_seq == 12);

    CHECK_FALSE(eba({1, {}}, 10.0).brake);           // nothing detected
    CHECK(eba({1, {9.9}}, 10.0).brake);              // below threshold
    CHECK_FALSE(eba({1, {10.0}}, 10.0).brake);       // at threshold: no brake
    CHECK(eba({1, {30.0, 5.0}}, 10.0).brake);        // any close vehicle suffices
    CHECK(eba({1, {11.0}}, 12.0).brake);             // threshold is configurable
}

TEST_CASE("one-slot buffer counts overwrites as drops") {
    OneSlotBuffer<int> buf;
    CHECK_FALSE(buf.full());
    CHECK_FALSE(buf.take().has_value());
    buf.write(1);
    CHECK(buf.full());
    CHECK(buf.overwrite_count() == 0);
    buf.write(2); // first value lost
    CHECK(buf.overwrite_count() == 1);
    CHECK(buf.take() == 2);
    CHECK_FALSE(buf.full());
    buf.write(3);
    CHECK(buf.take() == 3);
    CHECK(buf.overwrite_count() == 1);
}

TEST_CASE("counter: enumerating all dispatch orders yields exactly {0,1,2,3}") {
    // independent oracle: apply the semantics of set(1)/add(2)/get() by hand
    // over all six permutations
    CHECK(counter_naive_support() == std::set<int64_t>{0, 1, 2, 3});
    CHECK(counter_apply({CounterOp::Set, CounterOp::Add, CounterOp::Get}) == 3);
    CHECK(counter_apply({CounterOp::Add, CounterOp::Set, CounterOp::Get}) == 1);
    CHECK(counter_apply({CounterOp::Get, CounterOp::Set, CounterOp::Add}) == 0);
    CHECK(counter_apply({CounterOp::Set, CounterOp::Get, CounterOp::Add}) == 1);
    CHECK(counter_apply({CounterOp::Add, CounterOp::Get, CounterOp::Set}) == 2);
    CHECK(counter_apply({CounterOp::Get, CounterOp::Add, CounterOp::Set}) == 0);
}

TEST_CASE("counter: naive runs stay in the support and actually vary") {
    std::set<int64_t> seen;
    for (uint64_t seed = 0; seed < 500; ++seed) {
        int64_t v = run_counter_naive(seed);
        CHECK(counter_naive_support().count(v) == 1);
        seen.insert(v);
        CHECK(run_counter_naive(seed) == v); // seeded: reproducible
    }
    CHECK(seen.size() >= 2); // outcome depends on dispatch order
}

TEST_CASE("counter: the tagged deployment always answers 3") {
    for (uint64_t seed : {0ull, 1ull, 7ull, 99ull, 12345ull}) {
        CHECK(run_counter_reactor(seed, 1) == 3);
        CHECK(run_counter_reactor(seed, 4) == 3);
    }
}

TEST_CASE("naive pipeline: a perfectly aligned, jitter-free run has no errors") {
    NaivePipelineConfig cfg;
    cfg.frames = 2000;
    cfg.phase_offsets = {{{}, {}, {}, {}}};
    cfg.tick_jitter = {};
    cfg.latency = mw::LinkModel::fixed_latency({});
    cfg.reads_first_on_tie = true;
    cfg.seed = 1;
    auto res = run_naive_pipeline(cfg);
    CHECK(res.stats.total_errors() == 0);
    CHECK(res.stats.total_frames == 2000);
    CHECK(res.decisions.size() == 2000);
    for (size_t i = 0; i < res.decisions.size(); ++i) CHECK(res.decisions[i].source_seq == i);
}

TEST_CASE("naive pipeline: unaligned timers drop and misalign under defaults") {
    NaivePipelineConfig cfg;
    cfg.frames = 5000;
    cfg.seed = 1000;
    auto res = run_naive_pipeline(cfg);
    CHECK(res.stats.total_frames == 5000);
    CHECK(res.stats.total_errors() > 0);
    auto again = run_naive_pipeline(cfg);
    CHECK(again.stats == res.stats); // seeded end to end

    // different seeds draw different phases, so outcomes spread
    cfg.seed = 1001;
    CHECK(run_naive_pipeline(cfg).stats != res.stats);
}

TEST_CASE("reactor pipeline: default bounds hold, so no frame is ever lost") {
    ReactorPipelineConfig cfg;
    cfg.frames = 300;
    cfg.seed = 42;
    auto res = run_reactor_pipeline(cfg);
    CHECK(res.stats.total_errors() == 0);
    CHECK(res.stats.total_frames == 300);
    REQUIRE(res.decisions.size() == 300);
    for (size_t i = 0; i < res.decisions.size(); ++i) CHECK(res.decisions[i].source_seq == i);
    CHECK(res.trace_digest == trace_digest(res.trace));
}

TEST_CASE("reactor pipeline: worker count does not change the trace") {
    ReactorPipelineConfig cfg;
    cfg.frames = 200;
    cfg.seed = 7;
    auto serial = run_reactor_pipeline(cfg);
    for (int workers : {2, 4}) {
        cfg.workers = workers;
        auto parallel = run_reactor_pipeline(cfg);
        CHECK(parallel.trace == serial.trace);
        CHECK(parallel.trace_digest == serial.trace_digest);
        CHECK(parallel.stats == serial.stats);
    }
}

TEST_CASE("reactor pipeline: end-to-end latency is exactly the sum of bounds") {
    // insertion to brake publication: (D_va + L) + (D_pre + L) + (D_cv + L)
    // + D_eba = (5+5) + (25+5) + (25+5) + 5 ms = 75 ms, for every frame
    ReactorPipelineConfig cfg;
    cfg.frames = 100;
    cfg.seed = 3;
    auto res = run_reactor_pipeline(cfg);
    CHECK(res.latency.samples == 100);
    CHECK(res.latency.min.ns == milliseconds(75).ns);
    CHECK(res.latency.max.ns == milliseconds(75).ns);
    CHECK(res.latency.mean_ns == doctest::Approx(milliseconds(75).ns));
    // the report is recomputable from the trace alone
    LatencyReport redo = end_to_end_latency(res.trace, res.insert_reaction,
                                            res.publish_reaction, res.publish_deadline);
    CHECK(redo.samples == res.latency.samples);
    CHECK(redo.min.ns == res.latency.min.ns);
    CHECK(redo.max.ns == res.latency.max.ns);

    // clock skew adds E at both hops the adapter and detector publish across
    cfg.max_skew = milliseconds(2);
    auto skewed = run_reactor_pipeline(cfg);
    CHECK(skewed.latency.min.ns == milliseconds(81).ns);
    CHECK(skewed.latency.max.ns == milliseconds(81).ns);
}

TEST_CASE("reactor pipeline: zero bounds collapse latency to zero") {
    ReactorPipelineConfig cfg;
    cfg.frames = 50;
    cfg.deadlines = {{{}, {}, {}, {}}};
    cfg.compute = {{{}, {}, {}, {}}};
    cfg.max_latency = {};
    cfg.latency = mw::LinkModel::fixed_latency({});
    auto res = run_reactor_pipeline(cfg);
    CHECK(res.stats.total_errors() == 0);
    CHECK(res.latency.samples == 50);
    CHECK(res.latency.min.ns == 0);
    CHECK(res.latency.max.ns == 0);
}

TEST_CASE("reactor pipeline: latency beyond the bound surfaces as dropped frames") {
    ReactorPipelineConfig cfg;
    cfg.frames = 500;
    cfg.seed = 11;
    // every 100th preprocessing->detection frame takes 7 ms although the
    // deployment assumes at most 5 ms
    cfg.pre_cv_frame_latency =
        mw::LinkModel::two_point(milliseconds(1), milliseconds(7), 100, 11);
    auto res = run_reactor_pipeline(cfg);
    CHECK(res.stats.dropped_frames_at_cv == 5); // 500 / 100
    CHECK(res.stats.misaligned_at_cv == 0);     // never silently reordered
    CHECK(res.stats.dropped_at_preprocessing == 0);
    CHECK(res.stats.dropped_at_eba == 0);
    CHECK(res.decisions.size() == 495);
}
