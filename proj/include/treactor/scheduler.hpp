#pragma once

#include "treactor/clock.hpp"
#include "treactor/graph.hpp"
#include "treactor/trace.hpp"

#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>

namespace treactor {

/// External event feed co-simulated with the scheduler (e.g. a message
/// transport). Before processing a tag, the scheduler releases every
/// pending delivery with a timestamp at or below that tag's time.
class TimedSource {
public:
    virtual ~TimedSource() = default;
    virtual std::optional<int64_t> next_time() = 0;
    virtual void deliver_until(int64_t t_ns) = 0;
};

enum class InjectStatus : uint8_t {
    Ok,
    Stale, // tag at or before the last processed tag; event was not enqueued
    Stopped,
};

struct SchedulerOptions {
    std::optional<Tag> stop_tag;            // process tags <= stop_tag
    std::optional<uint64_t> max_tag_batches;
    int workers = 1;                        // >1 selects the parallel executor
};

/// Discrete-event executor for a reactor graph. Processes events strictly in
/// tag order; within one tag, dispatches triggered reactions consistently
/// with the APG. The parallel executor runs each APG level as an OpenMP
/// loop; its trace is identical to the serial reference by construction.
class Scheduler {
public:
    Scheduler(const ReactorGraph& graph, const Apg& apg, Clock& clock, SchedulerOptions opts = {});

    /// Thread-safe; tags the event with observed physical time + min_delay.
    /// Simultaneous insertions on one action are tie-broken by enqueue order
    /// via microstep increments.
    Tag schedule_physical(ActionId action, Duration min_delay, Payload payload);

    /// Thread-safe insertion at an explicit tag (used by transactors that
    /// compute safe-to-process tags from message trailers, and by tests).
    InjectStatus inject_at(ActionId action, Tag tag, Payload payload);

    void set_timed_source(TimedSource* src) { source_ = src; }

    /// Runs to completion (queue and source exhausted, or stop condition).
    Trace run();

    Tag last_processed() const { return last_processed_; }

private:
    friend class ReactionContext;

    struct PendingEvent {
        bool is_action;
        uint32_t target;
        Payload payload;
    };

    struct ReactionOutput {
        std::vector<std::pair<PortId, Payload>> port_writes;        // in write order
        std::vector<std::pair<ActionId, std::pair<Tag, Payload>>> scheduled;
    };

    void process_tag(Tag tag, std::vector<PendingEvent>& batch);
    void drain_source(int64_t until_ns);
    void wait_for_physical(int64_t t_ns);
    bool stop_reached(Tag next) const;

    const ReactorGraph& graph_;
    const Apg& apg_;
    Clock& clock_;
    SchedulerOptions opts_;
    TimedSource* source_ = nullptr;

    mutable std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::map<Tag, std::vector<PendingEvent>> queue_;
    std::vector<Tag> last_physical_tag_; // per action, for tie-breaking
    bool stopped_ = false;
    bool running_ = false;

    Tag last_processed_{-1, 0};
    uint64_t batches_done_ = 0;
    Trace trace_;
    std::vector<int64_t> reactor_busy_until_; // simulated per-reactor horizon

    // per-tag dispatch state
    std::vector<std::optional<Payload>> port_values_;
    std::vector<std::optional<Payload>> action_values_;
    std::vector<uint32_t> dirty_ports_, dirty_actions_;
};

/// Per-invocation view handed to a reaction body. Writes and schedules are
/// buffered and merged by the scheduler in canonical order after the
/// enclosing APG level completes.
class ReactionContext {
public:
    Tag tag() const { return tag_; }
    int64_t physical_time_ns() const { return physical_ns_; }
    bool deadline_violated() const { return deadline_violated_; }

    const Payload* get(PortId port) const;
    const Payload* get_action(ActionId action) const;

    /// Declared-effect write; last write at a tag wins.
    void set(PortId port, Payload payload);

    /// Enqueues an event at tag() + delay and returns that tag.
    Tag schedule(ActionId action, Duration delay, Payload payload);

private:
    friend class Scheduler;
    ReactionContext(const Scheduler& sched, ReactionId reaction, Tag tag, int64_t phys,
                    bool violated)
        : sched_(sched), reaction_(reaction), tag_(tag), physical_ns_(phys),
          deadline_violated_(violated) {}

    const Scheduler& sched_;
    ReactionId reaction_;
    Tag tag_;
    int64_t physical_ns_;
    bool deadline_violated_;
    Scheduler::ReactionOutput out_;
};

/// Pure deadline predicate: violated iff physical_now strictly exceeds
/// tag.time + bound.
constexpr bool check_deadline(Tag event_tag, Duration bound, int64_t physical_now_ns) {
    return physical_now_ns > event_tag.time_ns + bound.ns;
}

} // namespace treactor
