#include "treactor/scheduler.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>

// Compares the serial reference executor (workers=1) against the OpenMP
// level-parallel executor on a wide graph of independent compute reactions,
// and checks that both produce the identical trace.

using namespace treactor;

namespace {

struct BenchResult {
    double seconds = 0.0;
    uint64_t digest = 0;
};

BenchResult run_once(uint32_t reactors, uint64_t tags, uint64_t iters, int workers) {
    ReactorGraph graph;
    ReactorId src = graph.add_reactor("source");
    ActionId tick = graph.add_action(src, "source.tick");
    PortId fan = graph.add_output(src, "source.out");

    ReactionDecl emit;
    emit.name = "source/emit";
    emit.action_triggers = {tick};
    emit.effects = {fan};
    emit.body = [&, tick, fan, tags](ReactionContext& ctx) {
        const Payload& p = *ctx.get_action(tick);
        uint64_t k = p[0] | uint64_t(p[1]) << 8 | uint64_t(p[2]) << 16 | uint64_t(p[3]) << 24;
        ctx.set(fan, p);
        if (k + 1 < tags)
            ctx.schedule(tick, milliseconds(1),
                         {static_cast<uint8_t>(k + 1), static_cast<uint8_t>((k + 1) >> 8),
                          static_cast<uint8_t>((k + 1) >> 16), static_cast<uint8_t>((k + 1) >> 24)});
    };
    graph.add_reaction(src, std::move(emit));

    for (uint32_t i = 0; i < reactors; ++i) {
        ReactorId r = graph.add_reactor("worker" + std::to_string(i));
        PortId in = graph.add_input(r, "in" + std::to_string(i));
        PortId out = graph.add_output(r, "out" + std::to_string(i));
        graph.connect(fan, in);
        ReactionDecl work;
        work.name = "worker" + std::to_string(i) + "/hash";
        work.port_triggers = {in};
        work.effects = {out};
        work.body = [in, out, iters, i](ReactionContext& ctx) {
            uint64_t h = kFnvOffset ^ i;
            const Payload& p = *ctx.get(in);
            for (uint64_t n = 0; n < iters; ++n) h = fnv1a(p, h);
            Payload digest(8);
            for (int b = 0; b < 8; ++b) digest[b] = static_cast<uint8_t>(h >> (8 * b));
            ctx.set(out, digest);
        };
        graph.add_reaction(r, std::move(work));
    }

    Apg apg = build_apg(graph);
    Clock clock(Clock::Mode::Simulated);
    SchedulerOptions opts;
    opts.workers = workers;
    Scheduler sched(graph, apg, clock, opts);
    sched.inject_at(tick, Tag{0, 0}, {0, 0, 0, 0});

    auto t0 = std::chrono::steady_clock::now();
    Trace trace = sched.run();
    auto t1 = std::chrono::steady_clock::now();
    return {std::chrono::duration<double>(t1 - t0).count(), trace_digest(trace)};
}

} // namespace

int main(int argc, char** argv) {
    uint32_t reactors = 64;
    uint64_t tags = 200, iters = 2000;
    int parallel_workers = omp_get_max_threads();

    CLI::App app{"Serial vs parallel executor benchmark"};
    app.add_option("--reactors", reactors, "Independent compute reactors");
    app.add_option("--tags", tags, "Number of logical timestamps");
    app.add_option("--iters", iters, "Hash iterations per reaction");
    app.add_option("--workers", parallel_workers, "Threads for the parallel run");
    CLI11_PARSE(app, argc, argv);

    BenchResult serial = run_once(reactors, tags, iters, 1);
    BenchResult parallel = run_once(reactors, tags, iters, parallel_workers);

    std::printf("serial   : %8.3f ms  digest=%016llx\n", serial.seconds * 1e3,
                static_cast<unsigned long long>(serial.digest));
    std::printf("parallel : %8.3f ms  digest=%016llx  (%d workers)\n", parallel.seconds * 1e3,
                static_cast<unsigned long long>(parallel.digest), parallel_workers);
    std::printf("speedup  : %8.2fx\n", serial.seconds / parallel.seconds);
    if (serial.digest != parallel.digest) {
        std::printf("TRACE MISMATCH\n");
        return 1;
    }
    std::printf("traces identical\n");
    return 0;
}
