#include "treactor/apps/counter.hpp"
#include "treactor/apps/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace treactor;
using namespace treactor::apps;

struct Options {
    std::string demo = "brake";
    std::string mode = "reactor";
    uint64_t frames = 1000;
    uint64_t trials = 1;
    uint64_t seed = 1000;
    std::string period = "50ms";
    std::vector<std::string> deadlines = {"5ms", "25ms", "25ms", "5ms"};
    std::string max_latency = "5ms";
    std::string max_skew = "0ms";
    std::string latency_model; // defaulted per mode when empty
    std::string clock = "simulated";
    std::string out;
    int workers = 1;
};

void add_run_flags(CLI::App& cmd, Options& opt) {
    cmd.add_option("--demo", opt.demo, "Demo: counter or brake")
        ->check(CLI::IsMember({"counter", "brake"}));
    cmd.add_option("--mode", opt.mode, "Execution mode: naive or reactor")
        ->check(CLI::IsMember({"naive", "reactor"}));
    cmd.add_option("--frames", opt.frames, "Frames per trial")->check(CLI::PositiveNumber);
    cmd.add_option("--trials", opt.trials, "Number of seeded trials")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", opt.seed, "Base seed; trial i uses seed+i");
    cmd.add_option("--period", opt.period, "Frame period, e.g. 50ms");
    cmd.add_option("--deadlines", opt.deadlines,
                   "Per-stage deadlines: adapter,preprocessing,detection,brake")
        ->delimiter(',')
        ->expected(4);
    cmd.add_option("--max-latency", opt.max_latency, "Assumed latency bound L");
    cmd.add_option("--max-skew", opt.max_skew, "Assumed clock skew bound E");
    cmd.add_option("--latency-model", opt.latency_model,
                   "fixed:5ms | uniform:0ms:5ms | twopoint:1ms:7ms:100");
    cmd.add_option("--clock", opt.clock, "simulated or realtime")
        ->check(CLI::IsMember({"simulated", "realtime"}));
    cmd.add_option("--out", opt.out, "Output path (default: stdout)");
    cmd.add_option("--workers", opt.workers, "Executor threads for reactor mode")
        ->check(CLI::PositiveNumber);
}

std::ostream& open_out(const Options& opt, std::ofstream& file) {
    if (opt.out.empty()) return std::cout;
    file.open(opt.out);
    if (!file) throw CLI::RuntimeError("cannot open output file: " + opt.out, 2);
    return file;
}

mw::LinkModel latency_model(const Options& opt, uint64_t seed) {
    if (!opt.latency_model.empty()) return mw::LinkModel::parse(opt.latency_model, seed);
    if (opt.mode == "naive") return mw::LinkModel::fixed_latency(milliseconds(1));
    mw::LinkModel m = mw::LinkModel::uniform({}, parse_duration(opt.max_latency), seed);
    return m;
}

int run_counter(const Options& opt, std::ostream& os) {
    os << "trial,seed,value\n";
    bool ok = true;
    for (uint64_t t = 0; t < opt.trials; ++t) {
        uint64_t seed = opt.seed + t;
        int64_t value = opt.mode == "naive" ? run_counter_naive(seed)
                                            : run_counter_reactor(seed, opt.workers);
        ok &= value == 3;
        os << t << ',' << seed << ',' << value << '\n';
    }
    return opt.mode == "naive" ? 0 : (ok ? 0 : 1);
}

ErrorStats run_brake_trial(const Options& opt, uint64_t seed) {
    if (opt.mode == "naive") {
        NaivePipelineConfig cfg;
        cfg.frames = opt.frames;
        cfg.period = parse_duration(opt.period);
        cfg.latency = latency_model(opt, seed);
        cfg.seed = seed;
        return run_naive_pipeline(cfg).stats;
    }
    ReactorPipelineConfig cfg;
    cfg.frames = opt.frames;
    cfg.period = parse_duration(opt.period);
    for (size_t i = 0; i < 4; ++i) cfg.deadlines[i] = parse_duration(opt.deadlines[i]);
    cfg.max_latency = parse_duration(opt.max_latency);
    cfg.max_skew = parse_duration(opt.max_skew);
    cfg.latency = latency_model(opt, seed);
    cfg.seed = seed;
    cfg.workers = opt.workers;
    cfg.realtime = opt.clock == "realtime";
    return run_reactor_pipeline(cfg).stats;
}

int run_brake(const Options& opt, std::ostream& os) {
    os << "trial,seed,frames,dropped_pre,dropped_frames_cv,dropped_lanes_cv,misaligned_cv,"
          "dropped_eba,error_rate\n";
    double min = 0, max = 0, sum = 0;
    uint64_t total_errors = 0;
    char buf[64];
    for (uint64_t t = 0; t < opt.trials; ++t) {
        uint64_t seed = opt.seed + t;
        ErrorStats s = run_brake_trial(opt, seed);
        double rate = s.error_rate();
        std::snprintf(buf, sizeof buf, "%.6f", rate);
        os << t << ',' << seed << ',' << s.total_frames << ',' << s.dropped_at_preprocessing
           << ',' << s.dropped_frames_at_cv << ',' << s.dropped_lanes_at_cv << ','
           << s.misaligned_at_cv << ',' << s.dropped_at_eba << ',' << buf << '\n';
        min = t == 0 ? rate : std::min(min, rate);
        max = std::max(max, rate);
        sum += rate;
        total_errors += s.total_errors();
    }
    std::snprintf(buf, sizeof buf, "# error_rate min=%.6f mean=%.6f max=%.6f", min,
                  sum / static_cast<double>(opt.trials), max);
    os << buf << '\n';
    return opt.mode == "naive" ? 0 : (total_errors == 0 ? 0 : 1);
}

int run_trace(const Options& opt, std::ostream& os) {
    ReactorPipelineConfig cfg;
    cfg.frames = opt.frames;
    cfg.period = parse_duration(opt.period);
    for (size_t i = 0; i < 4; ++i) cfg.deadlines[i] = parse_duration(opt.deadlines[i]);
    cfg.max_latency = parse_duration(opt.max_latency);
    cfg.max_skew = parse_duration(opt.max_skew);
    cfg.latency = latency_model(opt, opt.seed);
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    ReactorPipelineResult r = run_reactor_pipeline(cfg);
    write_trace(os, r.trace);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic reactor runtime demos and experiment runner"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "INI config file; keys live in a [run] or [trace] section and "
                   "command-line flags take precedence");
    Options run_opt, trace_opt;

    CLI::App* run = app.add_subcommand("run", "Run seeded experiment trials, emit CSV");
    add_run_flags(*run, run_opt);
    CLI::App* trace = app.add_subcommand(
        "trace", "Run the brake pipeline once (reactor mode) and emit its event trace");
    add_run_flags(*trace, trace_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::ofstream file;
            std::ostream& os = open_out(run_opt, file);
            return run_opt.demo == "counter" ? run_counter(run_opt, os) : run_brake(run_opt, os);
        }
        std::ofstream file;
        std::ostream& os = open_out(trace_opt, file);
        return run_trace(trace_opt, os);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
