// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>

#include "ncsim/experiments.hpp"

using namespace ncsim;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scenario = "NC_VS_TCP";
    std::vector<double> per;
};

ScenarioConfig base_config(const Options& o) {
    ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : load_scenario(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
}

void emit(const Options& o, const CsvTable& table) {
    const auto text = to_csv(table);
    if (o.out.empty()) {
        std::cout << text;
    } else {
        write_text(o.out, text);
    }
}

int sweep(const Options& o) {
    const auto base = base_config(o);
    const auto pers = o.per.empty() ? default_per_grid() : o.per;
    emit(o, sweep_table(run_throughput_sweep(base, pers)));
    return 0;
}

int fairness(const Options& o) {
    auto base = base_config(o);
    if (o.per.size() > 1) throw Error(ErrorCode::ConfigError, "fairness takes a single --per value");
    if (!o.per.empty()) {
        base.per = o.per[0];
    } else if (o.config.empty()) {
        base.per = default_fairness_per;
    }
    const auto kind = parse_fairness(o.scenario);
    const auto r = run_fairness(base, kind);
    emit(o, fairness_table(r.metrics));
    std::cerr << fmt::format("{} per={} seed={} flow1_mean={} flow2_mean={}\n", fairness_name(kind), base.per, base.seed,
                             r.flow1_mean, r.flow2_mean);
    return 0;
}

int run(const Options& o) {
    auto c = base_config(o);
    if (o.per.size() > 1) throw Error(ErrorCode::ConfigError, "run takes a single --per value");
    if (!o.per.empty()) c.per = o.per[0];
    validate(c);
    const auto m = run_scenario(c);
    emit(o, series_table(m));
    std::cerr << fmt::format("digest={} seed={} events={}\n", m.config_digest, m.seed, m.events);
    for (std::size_t i = 0; i < m.flows.size(); ++i) {
        const auto& f = m.flows[i];
        std::cerr << fmt::format(
            "flow{} steady={:.3f} segs/s delivered={} goodput={:.1f} B/s tcp_retx={} tcp_timeouts={} "
            "nc_codewords={} nc_retx={} mismatches={}\n",
            i + 1, f.steady_segs_per_s, f.delivered_segments, f.goodput_bytes_per_s, f.tcp_retransmissions,
            f.tcp_timeouts, f.nc_codewords, f.nc_retransmitted_codewords, f.payload_mismatches);
    }
    for (const auto& l : m.links) {
        std::cerr << fmt::format("link {} injected={} delivered={} erased={} dropped={}\n", l.name, l.stats.injected,
                                 l.stats.delivered, l.stats.erased, l.stats.dropped);
    }
    return 0;
}

int verify(const Options& o) {
    bool ok = true;
    for (const auto& r : verify_codec(o.seed.value_or(1))) {
        std::cout << fmt::format("{} {} ({})\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network-coded TCP simulator"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "scenario file (key = value lines)");
        sub->add_option("--seed", o.seed, "random seed, overrides the scenario file");
        sub->add_option("--out", o.out, "CSV output path (default: stdout)");
    };
    auto* s = app.add_subcommand("sweep", "throughput of NC and plain TCP over a PER grid");
    add_common(s);
    s->add_option("--per", o.per, "PER values (default grid when omitted)")->delimiter(',');
    auto* f = app.add_subcommand("fairness", "two flows sharing the bottleneck");
    add_common(f);
    f->add_option("--scenario", o.scenario, "NC_VS_TCP, NC_VS_NC or TCP_VS_TCP");
    f->add_option("--per", o.per, "PER on the bottleneck")->delimiter(',');
    auto* r = app.add_subcommand("run", "single scenario, per-second series of every flow");
    add_common(r);
    r->add_option("--per", o.per, "PER on the bottleneck")->delimiter(',');
    auto* v = app.add_subcommand("verify", "codec property suite");
    v->add_option("--seed", o.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (s->parsed()) return sweep(o);
        if (f->parsed()) return fairness(o);
        if (r->parsed()) return run(o);
        return verify(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::IoError) return 3;
        if (e.code() == ErrorCode::ConfigError) return 2;
        return 1;
    }
}
