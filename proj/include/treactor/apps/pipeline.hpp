#pragma once

#include "treactor/apps/stages.hpp"
#include "treactor/mw/transport.hpp"
#include "treactor/tag.hpp"
#include "treactor/trace.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace treactor::apps {

/// Stage order: frame adapter, preprocessing, detection, brake logic.
enum StageIndex : size_t { kStageVa = 0, kStagePre = 1, kStageCv = 2, kStageEba = 3 };

/// Brake-assistant pipeline, conventional deployment: every component runs a
/// free-running periodic callback, reads one-slot input buffers, and
/// publishes untagged notifications under a latency model. Outcomes depend
/// on callback phase offsets, per-tick timer jitter, and message latency.
struct NaivePipelineConfig {
    uint64_t frames = 5000;
    Duration period = milliseconds(50);
    /// Callback phase of [adapter, preprocessing, detection, brake logic];
    /// when unset, drawn uniformly in [0, period) from the seed.
    std::optional<std::array<Duration, 4>> phase_offsets;
    Duration tick_jitter = microseconds(200); // per-tick, uniform in [-j, +j]
    mw::LinkModel latency = mw::LinkModel::fixed_latency(milliseconds(1));
    uint64_t seed = 0;
    /// Deterministic tie order (buffer reads before same-instant writes)
    /// instead of seeded interleaving of coincident events.
    bool reads_first_on_tie = false;
    double brake_threshold_m = kDefaultBrakeThresholdM;
};

struct NaivePipelineResult {
    ErrorStats stats;
    std::vector<BrakeDecision> decisions;
};

NaivePipelineResult run_naive_pipeline(const NaivePipelineConfig& cfg);

/// Same pipeline on the deterministic runtime: frames enter as events at
/// fixed tags, stages are reactors joined by event transactors, and every
/// stage consumes a declared simulated compute budget against its deadline.
struct ReactorPipelineConfig {
    uint64_t frames = 1000;
    Duration period = milliseconds(50);
    std::array<Duration, 4> deadlines = {milliseconds(5), milliseconds(25), milliseconds(25),
                                         milliseconds(5)};
    std::array<Duration, 4> compute = {milliseconds(4), milliseconds(24), milliseconds(24),
                                       milliseconds(4)};
    Duration max_latency = milliseconds(5);
    Duration max_skew{};
    mw::LinkModel latency = mw::LinkModel::uniform({}, milliseconds(5), 0);
    /// Override for the preprocessing->detection frame link, e.g. a two-point
    /// model whose rare sample exceeds max_latency.
    std::optional<mw::LinkModel> pre_cv_frame_latency;
    uint64_t seed = 0;
    int workers = 1;
    double brake_threshold_m = kDefaultBrakeThresholdM;
    /// Pace execution against the wall clock instead of the simulated clock
    /// (demo use only; frames then land at real receive times).
    bool realtime = false;
};

struct LatencyReport {
    uint64_t samples = 0;
    Duration min{}, max{};
    double mean_ns = 0.0;
};

struct ReactorPipelineResult {
    ErrorStats stats;
    std::vector<BrakeDecision> decisions;
    Trace trace;
    uint64_t trace_digest = 0;
    LatencyReport latency; // frame-insertion tag to brake-publication trailer
    // for recomputing the latency report from the trace
    ReactionId insert_reaction = 0;
    ReactionId publish_reaction = 0;
    Duration publish_deadline{};
};

ReactorPipelineResult run_reactor_pipeline(const ReactorPipelineConfig& cfg);

/// Per-frame logical latency from each frame-insertion record to the
/// matching brake-publication record's trailer tag (record tag + the
/// publisher's deadline).
LatencyReport end_to_end_latency(const Trace& trace, ReactionId insert_reaction,
                                 ReactionId publish_reaction, Duration publish_deadline);

} // namespace treactor::apps
