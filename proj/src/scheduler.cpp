#include "treactor/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace treactor {

Scheduler::Scheduler(const ReactorGraph& graph, const Apg& apg, Clock& clock,
                     SchedulerOptions opts)
    : graph_(graph), apg_(apg), clock_(clock), opts_(opts) {
    last_physical_tag_.assign(graph.num_actions(), Tag{-1, 0});
    reactor_busy_until_.assign(graph.num_reactors(), 0);
    port_values_.resize(graph.num_ports());
    action_values_.resize(graph.num_actions());
}

Tag Scheduler::schedule_physical(ActionId action, Duration min_delay, Payload payload) {
    std::lock_guard lk(queue_mutex_);
    if (stopped_) throw SchedulerStopped();
    Tag tag{clock_.now() + min_delay.ns, 0};
    Tag& last = last_physical_tag_[action];
    if (tag <= last) tag = Tag{last.time_ns, last.microstep + 1};
    if (tag <= last_processed_) tag = Tag{last_processed_.time_ns, last_processed_.microstep + 1};
    last = tag;
    queue_[tag].push_back({true, action, std::move(payload)});
    queue_cv_.notify_all();
    return tag;
}

InjectStatus Scheduler::inject_at(ActionId action, Tag tag, Payload payload) {
    std::lock_guard lk(queue_mutex_);
    if (stopped_) return InjectStatus::Stopped;
    if (tag <= last_processed_) return InjectStatus::Stale;
    queue_[tag].push_back({true, action, std::move(payload)});
    queue_cv_.notify_all();
    return InjectStatus::Ok;
}

bool Scheduler::stop_reached(Tag next) const {
    return opts_.stop_tag && next > *opts_.stop_tag;
}

Trace Scheduler::run() {
    std::unique_lock lk(queue_mutex_);
    running_ = true;
    for (;;) {
        if (source_) {
            // Co-simulation: release external deliveries up to (and including)
            // the next tag's time before committing to process that tag.
            for (;;) {
                std::optional<int64_t> head;
                if (!queue_.empty()) head = queue_.begin()->first.time_ns;
                lk.unlock();
                auto src_next = source_->next_time();
                bool deliver = src_next && (!head || *src_next <= *head);
                if (deliver) source_->deliver_until(*src_next);
                lk.lock();
                if (!deliver) break;
            }
        }
        if (queue_.empty()) break;
        Tag tag = queue_.begin()->first;
        if (stop_reached(tag)) break;
        if (opts_.max_tag_batches && batches_done_ >= *opts_.max_tag_batches) break;
        if (clock_.mode() == Clock::Mode::RealTime) {
            if (clock_.now() < tag.time_ns) {
                // An earlier event may arrive while we wait; re-examine the head.
                queue_cv_.wait_for(lk, std::chrono::microseconds(200));
                continue;
            }
        } else {
            clock_.advance_to(tag.time_ns);
        }
        auto batch = std::move(queue_.begin()->second);
        queue_.erase(queue_.begin());
        lk.unlock();
        process_tag(tag, batch);
        lk.lock();
        last_processed_ = tag;
        ++batches_done_;
    }
    stopped_ = true;
    running_ = false;
    return std::move(trace_);
}

namespace {

std::vector<PortWrite> collapse_writes(const std::vector<std::pair<PortId, Payload>>& writes) {
    // Last write per port wins; report in ascending port order.
    std::map<PortId, uint64_t> final_digest;
    for (const auto& [port, payload] : writes) final_digest[port] = fnv1a(payload);
    std::vector<PortWrite> out;
    out.reserve(final_digest.size());
    for (auto [port, digest] : final_digest) out.push_back({port, digest});
    return out;
}

} // namespace

void Scheduler::process_tag(Tag tag, std::vector<PendingEvent>& batch) {
    const size_t n = graph_.num_reactions();
    for (PortId p : dirty_ports_) port_values_[p].reset();
    for (ActionId a : dirty_actions_) action_values_[a].reset();
    dirty_ports_.clear();
    dirty_actions_.clear();

    std::vector<char> triggered(n, 0);
    auto apply_port = [&](PortId p, const Payload& payload) {
        if (!port_values_[p]) dirty_ports_.push_back(p);
        port_values_[p] = payload;
        for (ReactionId r : graph_.port(p).triggers) triggered[r] = 1;
        for (PortId q : graph_.port(p).downstream) {
            if (!port_values_[q]) dirty_ports_.push_back(q);
            port_values_[q] = payload;
            for (ReactionId r : graph_.port(q).triggers) triggered[r] = 1;
        }
    };

    for (auto& ev : batch) {
        if (ev.is_action) {
            if (!action_values_[ev.target]) dirty_actions_.push_back(ev.target);
            action_values_[ev.target] = std::move(ev.payload);
            for (ReactionId r : graph_.action(ev.target).triggers) triggered[r] = 1;
        } else {
            apply_port(ev.target, ev.payload);
        }
    }

    uint32_t max_level = 0;
    for (ReactionId r = 0; r < n; ++r) max_level = std::max(max_level, apg_.level[r]);

    // Simulated physical dispatch times: reactors model independently
    // executing components, so each has its own busy-until horizon, while a
    // reaction never starts before its same-tag APG predecessors finish.
    // All quantities derive from tag times and declared costs, so deadline
    // outcomes do not depend on the worker count.
    const int64_t base_phys = clock_.now();
    const bool simulated = clock_.mode() == Clock::Mode::Simulated;
    std::vector<int64_t> finish_at_tag(n, -1);

    struct Done {
        ReactionId reaction;
        ReactionOutput out;
    };
    std::vector<Done> done;

    for (uint32_t level = 0; level <= max_level; ++level) {
        std::vector<ReactionId> execs;
        for (ReactionId r = 0; r < n; ++r)
            if (triggered[r] && apg_.level[r] == level) execs.push_back(r);
        if (execs.empty()) continue;

        std::vector<ReactionContext> ctxs;
        ctxs.reserve(execs.size());
        for (ReactionId r : execs) {
            const auto& decl = graph_.reaction(r);
            int64_t phys;
            if (simulated) {
                phys = std::max(base_phys, reactor_busy_until_[graph_.owner(r)]);
                for (ReactionId p : apg_.pred[r])
                    if (finish_at_tag[p] >= 0) phys = std::max(phys, finish_at_tag[p]);
            } else {
                phys = clock_.now();
            }
            bool violated = decl.deadline && check_deadline(tag, decl.deadline->bound, phys);
            int64_t finish = phys + (violated ? 0 : decl.cost.ns);
            finish_at_tag[r] = finish;
            reactor_busy_until_[graph_.owner(r)] = finish;
            ctxs.push_back(ReactionContext(*this, r, tag, phys, violated));
        }

        std::vector<std::exception_ptr> errors(execs.size());
        auto run_one = [&](size_t i) {
            const auto& decl = graph_.reaction(execs[i]);
            try {
                if (ctxs[i].deadline_violated())
                    decl.deadline->handler(ctxs[i]);
                else
                    decl.body(ctxs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        };
        if (opts_.workers > 1) {
#pragma omp parallel for num_threads(opts_.workers) schedule(dynamic)
            for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(execs.size()); ++i)
                run_one(static_cast<size_t>(i));
        } else {
            for (size_t i = 0; i < execs.size(); ++i) run_one(i);
        }
        for (size_t i = 0; i < execs.size(); ++i) {
            if (!errors[i]) continue;
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::logic_error&) {
                throw; // contract violations keep their type
            } catch (const std::exception& ex) {
                throw ExecutionFault("reaction '" + graph_.reaction(execs[i]).name +
                                     "' failed at tag " + tag.str() + ": " + ex.what());
            }
        }

        // Commit in id order: apply writes (triggering later levels) and
        // collect outputs for the canonical trace.
        for (size_t i = 0; i < execs.size(); ++i) {
            for (const auto& [port, payload] : ctxs[i].out_.port_writes) apply_port(port, payload);
            done.push_back({execs[i], std::move(ctxs[i].out_)});
        }
    }

    // One trace record per dispatched reaction, in the canonical topological
    // order; scheduled events are enqueued in the same order.
    std::sort(done.begin(), done.end(), [&](const Done& a, const Done& b) {
        return apg_.topo_index[a.reaction] < apg_.topo_index[b.reaction];
    });
    std::lock_guard lk(queue_mutex_);
    for (auto& d : done) {
        trace_.push_back({tag, d.reaction, collapse_writes(d.out.port_writes)});
        for (auto& [action, ev] : d.out.scheduled)
            queue_[ev.first].push_back({true, action, std::move(ev.second)});
    }
    queue_cv_.notify_all();
}

const Payload* ReactionContext::get(PortId port) const {
    const auto& v = sched_.port_values_[port];
    return v ? &*v : nullptr;
}

const Payload* ReactionContext::get_action(ActionId action) const {
    const auto& v = sched_.action_values_[action];
    return v ? &*v : nullptr;
}

void ReactionContext::set(PortId port, Payload payload) {
    const auto& effects = sched_.graph_.reaction(reaction_).effects;
    if (std::find(effects.begin(), effects.end(), port) == effects.end())
        throw UndeclaredEffect(sched_.graph_.port(port).name);
    out_.port_writes.emplace_back(port, std::move(payload));
}

Tag ReactionContext::schedule(ActionId action, Duration delay, Payload payload) {
    Tag t = tag_.delay(delay);
    out_.scheduled.push_back({action, {t, std::move(payload)}});
    return t;
}

} // namespace treactor
