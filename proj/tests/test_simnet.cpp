// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <deque>
#include <map>

#include "ncsim/simnet.hpp"

using namespace ncsim;

namespace {

Packet data_packet(std::size_t payload, double now) {
    TcpSegment s;
    s.payload.assign(payload, 0xAB);
    Packet p;
    p.segment = s;
    p.sent_at = now;
    return p;
}

struct LinkRun {
    LinkStats stats;
    std::uint64_t arrived = 0;
};

// Offers `count` packets to one link, one every `gap` seconds.
LinkRun drive_link(LinkParams params, std::uint64_t count, double gap, std::uint64_t seed = 7) {
    Simulator sim;
    LinkRun run;
    Link link("X->Y", params, seed, sim, [&](const Link&, Packet p) {
        ++run.arrived;
        const double min_arrival = p.sent_at + p.wire_bytes() * 8.0 / params.rate_bps + params.delay_s;
        CHECK(sim.now() >= min_arrival - 1e-12);
    });
    for (std::uint64_t i = 0; i < count; ++i) {
        sim.schedule(static_cast<double>(i) * gap, EventKind::AppSend, 0,
                     [&] { link.transmit(data_packet(100, sim.now())); });
    }
    sim.run_until(1e9);
    run.stats = link.stats();
    return run;
}

ScenarioConfig short_run(bool nc, double per, double t_end = 60.0) {
    ScenarioConfig c;
    c.per = per;
    c.flows = {FlowSpec{"A1", "S1", 0.0, nc}};
    c.t_end = t_end;
    c.warmup = t_end / 2;
    return c;
}

} // namespace

TEST_CASE("events at equal times run in scheduling order") {
    Simulator sim;
    std::vector<int> order;
    for (int i = 0; i < 5; ++i) sim.schedule(1.0, EventKind::TimerExpiry, i, [&order, i] { order.push_back(i); });
    sim.schedule(0.5, EventKind::AppSend, 9, [&order] { order.push_back(9); });
    CHECK(sim.run_until(2.0) == 6);
    CHECK(order == std::vector<int>{9, 0, 1, 2, 3, 4});
    CHECK(sim.now() == 2.0);
}

TEST_CASE("scheduling in the past is rejected") {
    Simulator sim;
    sim.schedule(1.0, EventKind::AppSend, 0, [] {});
    sim.run_until(1.0);
    try {
        sim.schedule(0.5, EventKind::AppSend, 0, [] {});
        FAIL("expected PastEvent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PastEvent);
    }
    CHECK_NOTHROW(sim.schedule(1.0, EventKind::AppSend, 0, [] {}));
}

TEST_CASE("an empty queue finishes at once") {
    Simulator sim;
    CHECK(sim.run_until(100.0) == 0);
    CHECK(sim.pending() == 0);
}

TEST_CASE("events scheduled from inside an event run in order") {
    Simulator sim;
    std::vector<double> times;
    std::function<void()> tick = [&] {
        times.push_back(sim.now());
        if (times.size() < 4) sim.schedule(sim.now() + 0.25, EventKind::TimerExpiry, 0, tick);
    };
    sim.schedule(0.0, EventKind::TimerExpiry, 0, tick);
    sim.run_until(10.0);
    CHECK(times == std::vector<double>{0.0, 0.25, 0.5, 0.75});
}

TEST_CASE("lossless and fully erasing links") {
    const LinkParams clean{1e6, 0.01, 1000, 0.0};
    const auto a = drive_link(clean, 500, 0.01);
    CHECK(a.arrived == 500);
    CHECK(a.stats.delivered == 500);
    CHECK(a.stats.erased == 0);

    const LinkParams dead{1e6, 0.01, 1000, 1.0};
    const auto b = drive_link(dead, 500, 0.01);
    CHECK(b.arrived == 0);
    CHECK(b.stats.erased == 500);
}

TEST_CASE("erasure fraction matches the configured rate") {
    // Binomial(1e5, 0.3) has standard deviation 0.00145; 1% is about 7 sigma.
    const LinkParams lossy{1e9, 0.001, 1000, 0.3};
    const auto r = drive_link(lossy, 100000, 1e-5, 20240601);
    CHECK(r.stats.dropped == 0);
    const double fraction = static_cast<double>(r.stats.erased) / 1e5;
    CHECK(std::abs(fraction - 0.3) <= 0.01);
}

TEST_CASE("drop-tail queue bounds the backlog") {
    // 140-byte packets take 1.12 ms at 1 Mb/s; a burst of 100 overflows a 10-packet queue.
    const LinkParams small{1e6, 0.0, 10, 0.0};
    const auto r = drive_link(small, 100, 0.0);
    CHECK(r.stats.delivered == 11);
    CHECK(r.stats.dropped == 89);
}

TEST_CASE("links draw from independent named streams") {
    auto draws = [](std::uint64_t seed, std::string_view name) {
        auto rng = stream_rng(seed, name);
        return std::vector<std::uint64_t>{rng(), rng(), rng()};
    };
    CHECK(draws(1, "N3->N4") == draws(1, "N3->N4"));
    CHECK(draws(1, "N3->N4") != draws(1, "N4->N3"));
    CHECK(draws(1, "N3->N4") != draws(2, "N3->N4"));
}

TEST_CASE("no sources means zero counters") {
    ScenarioConfig c = short_run(true, 0.2);
    c.flows = {FlowSpec{"A1", "S1", 1000.0, true}};
    const auto m = run_scenario(c);
    REQUIRE(m.flows.size() == 1);
    CHECK(m.flows[0].delivered_segments == 0);
    CHECK(m.flows[0].steady_segs_per_s == 0.0);
    CHECK(m.flows[0].series.size() == 60);
    for (const auto& l : m.links) CHECK(l.stats == LinkStats{});
    CHECK(m.events == 0);
}

TEST_CASE("identical seeds give identical metrics") {
    for (const bool nc : {true, false}) {
        const auto c = short_run(nc, 0.1);
        const auto a = run_scenario(c);
        const auto b = run_scenario(c);
        CHECK(a == b);
        auto other = c;
        other.seed = 2;
        CHECK_FALSE(run_scenario(other) == a);
    }
}

TEST_CASE("every link conserves packets") {
    auto c = short_run(true, 0.3);
    c.ack_per = -1.0;
    c.flows.push_back(FlowSpec{"A2", "S2", 3.0, false});
    const auto m = run_scenario(c);
    std::uint64_t erased = 0;
    for (const auto& l : m.links) {
        const auto& s = l.stats;
        CHECK(s.delivered + s.erased + s.dropped + s.in_flight() == s.injected);
        CHECK(s.in_flight() <= 2 * c.queue_packets);
        if (l.name != "N3->N4" && l.name != "N4->N3") CHECK(s.erased == 0);
        erased += s.erased;
    }
    CHECK(erased > 0);
}

TEST_CASE("no packet arrives before its serialization and propagation delay") {
    auto c = short_run(true, 0.0, 30.0);
    c.queue_packets = 100000;
    c.flows.push_back(FlowSpec{"A2", "S2", 1.0, false});
    std::map<std::string, std::deque<double>> sent;
    std::uint64_t checked = 0;
    PacketTrace trace;
    trace.on_send = [&](const Link& l, const Packet&, double t) { sent[l.name()].push_back(t); };
    trace.on_arrive = [&](const Link& l, const Packet& p, double t) {
        auto& q = sent[l.name()];
        REQUIRE_FALSE(q.empty());
        const double min_arrival = q.front() + p.wire_bytes() * 8.0 / l.params().rate_bps + l.params().delay_s;
        CHECK(t >= min_arrival - 1e-12);
        CHECK(t >= p.sent_at);
        q.pop_front();
        ++checked;
    };
    const auto m = run_scenario(c, trace);
    CHECK(checked > 10000);
    for (const auto& l : m.links) {
        CHECK(l.stats.dropped == 0);
        CHECK(sent[l.name].size() == l.stats.in_flight());
    }
}

TEST_CASE("doubling the run length doubles delivery in steady state") {
    for (const bool nc : {true, false}) {
        const auto a = run_scenario(short_run(nc, nc ? 0.2 : 0.0, 100.0));
        const auto b = run_scenario(short_run(nc, nc ? 0.2 : 0.0, 200.0));
        const double ratio =
            static_cast<double>(b.flows[0].delivered_segments) / static_cast<double>(a.flows[0].delivered_segments);
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("the full stack delivers the source byte stream unchanged") {
    for (const bool nc : {true, false}) {
        auto c = short_run(nc, 0.2, 80.0);
        const auto m = run_scenario(c);
        const auto& f = m.flows[0];
        CHECK(f.delivered_segments > 500);
        CHECK(f.payload_mismatches == 0);
        if (nc) CHECK(f.sink_duplicates == 0);
    }
}

TEST_CASE("per-second series covers the whole run") {
    const auto m = run_scenario(short_run(false, 0.0, 40.5));
    const auto& f = m.flows[0];
    CHECK(f.series.size() == 40);
    double total = 0.0;
    for (const double v : f.series) total += v;
    CHECK(total <= static_cast<double>(f.delivered_segments));
    CHECK(f.steady_segs_per_s > 50.0);
    CHECK(m.duration == 40.5);
    CHECK(m.config_digest == config_digest(short_run(false, 0.0, 40.5)));
}
