// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ncsim/nc_protocol.hpp"

namespace ncsim {

struct FlowSpec {
    std::string source = "A1";
    std::string sink = "S1";
    double start = 0.0;
    bool nc = true;
    friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

/// Everything a simulation run depends on. Together with `seed` it fully
/// determines the result.
struct ScenarioConfig {
    double access_rate_bps = 10e6;
    double access_delay_s = 0.010;
    double bottleneck_rate_bps = 1e6;
    double bottleneck_delay_s = 0.020;
    std::size_t queue_packets = 50;
    /// Erasure probability on the bottleneck in the data direction.
    double per = 0.0;
    /// Erasure probability on the bottleneck in the acknowledgment direction;
    /// negative means "same as per".
    double ack_per = 0.0;
    NcConfig nc;
    std::uint16_t mss_offer = 1460;
    std::vector<FlowSpec> flows{FlowSpec{}};
    double t_end = 200.0;
    double warmup = 100.0;
    std::uint64_t seed = 1;

    double reverse_per() const { return ack_per < 0.0 ? per : ack_per; }
    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses `key = value` lines; `#` starts a comment. Flows are given as
/// `flow = source,sink,start,nc` lines (nc is true/false); the first flow
/// line replaces the default flow list. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(to_text(c)) == c.
std::string to_text(const ScenarioConfig& config);

/// 16 hex digits identifying the canonical text form.
std::string config_digest(const ScenarioConfig& config);

/// Throws ConfigError for values no simulation can run with.
void validate(const ScenarioConfig& config);

} // namespace ncsim
