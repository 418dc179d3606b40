// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ncsim/scenario.hpp"

using namespace ncsim;

namespace {

ErrorCode code_of(std::string_view text) {
    try {
        parse_scenario(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::BadParams;
}

} // namespace

TEST_CASE("empty text gives the defaults") {
    const auto c = parse_scenario("");
    CHECK(c == ScenarioConfig{});
    CHECK(c.bottleneck_rate_bps == 1e6);
    CHECK(c.nc.code.n == 16);
    CHECK(c.nc.code.k == 8);
    REQUIRE(c.flows.size() == 1);
    CHECK(c.flows[0].nc);
}

TEST_CASE("keys, comments and flows") {
    const auto c = parse_scenario(R"(
# two flows sharing the bottleneck
per = 0.25       # data direction
ack_per = -1
code_n = 12
code_k = 4
spec_threshold = 5
queue_packets=20
flow = A1, S1, 0, false
flow = A2,S2,12.5,true
t_end = 60
warmup = 30
seed = 18446744073709551615
fast_retransmit = false
)");
    CHECK(c.per == 0.25);
    CHECK(c.reverse_per() == 0.25);
    CHECK(c.nc.code.n == 12);
    CHECK(c.nc.code.k == 4);
    CHECK(c.nc.spec_threshold == 5);
    CHECK(c.queue_packets == 20);
    CHECK_FALSE(c.nc.fast_retransmit);
    REQUIRE(c.flows.size() == 2);
    CHECK(c.flows[0] == FlowSpec{"A1", "S1", 0.0, false});
    CHECK(c.flows[1] == FlowSpec{"A2", "S2", 12.5, true});
    CHECK(c.seed == 18446744073709551615ULL);
}

TEST_CASE("canonical text round trips") {
    ScenarioConfig c;
    c.per = 0.1 + 0.2;
    c.ack_per = 1.0 / 3.0;
    c.flows = {FlowSpec{"A2", "S1", 0.125, false}, FlowSpec{"A1", "S2", 7, true}};
    c.nc.flush_delay = 0.003;
    c.seed = 99;
    const auto back = parse_scenario(to_text(c));
    CHECK(back == c);
    CHECK(to_text(back) == to_text(c));
    CHECK(config_digest(back) == config_digest(c));
}

TEST_CASE("digest identifies the configuration") {
    ScenarioConfig a;
    ScenarioConfig b;
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a).size() == 16);
    b.seed = 2;
    CHECK(config_digest(a) != config_digest(b));
    b = a;
    b.per = 0.05;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("bad input is a configuration error") {
    CHECK(code_of("per 0.1") == ErrorCode::ConfigError);
    CHECK(code_of("bogus = 1") == ErrorCode::ConfigError);
    CHECK(code_of("per = abc") == ErrorCode::ConfigError);
    CHECK(code_of("per = 1.5") == ErrorCode::ConfigError);
    CHECK(code_of("code_k = -1") == ErrorCode::ConfigError);
    CHECK(code_of("code_n = 4\ncode_k = 8") == ErrorCode::ConfigError);
    CHECK(code_of("code_n = 300\ncode_k = 43") == ErrorCode::ConfigError);
    CHECK(code_of("spec_threshold = 17") == ErrorCode::ConfigError);
    CHECK(code_of("flow = A1,S1,0") == ErrorCode::ConfigError);
    CHECK(code_of("flow = A1,N3,0,true") == ErrorCode::ConfigError);
    CHECK(code_of("flow = A1,S1,0,maybe") == ErrorCode::ConfigError);
    CHECK(code_of("warmup = 300") == ErrorCode::ConfigError);
    CHECK(code_of("mss_offer = 70000") == ErrorCode::ConfigError);
    CHECK(code_of("bottleneck_rate_bps = 0") == ErrorCode::ConfigError);
}

TEST_CASE("loading from a file") {
    const std::string path = "test_scenario_tmp.cfg";
    {
        std::ofstream out(path);
        out << "per = 0.3\nseed = 5\n";
    }
    const auto c = load_scenario(path);
    CHECK(c.per == 0.3);
    CHECK(c.seed == 5);
    std::remove(path.c_str());

    try {
        load_scenario("/nonexistent/dir/x.cfg");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}
