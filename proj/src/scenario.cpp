// SPDX-License-Identifier: Apache-2.0

#include "ncsim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace ncsim {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(std::size_t line, std::string_view key, std::string_view why) {
    throw Error(ErrorCode::ConfigError, fmt::format("line {}: {}: {}", line, key, why));
}

double to_double(std::string_view v, std::size_t line, std::string_view key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad(line, key, "expected a number");
    return out;
}

std::uint64_t to_u64(std::string_view v, std::size_t line, std::string_view key) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad(line, key, "expected a non-negative integer");
    return out;
}

bool to_bool(std::string_view v, std::size_t line, std::string_view key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad(line, key, "expected true or false");
}

FlowSpec to_flow(std::string_view v, std::size_t line) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto comma = v.find(',');
        parts.push_back(trim(v.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    if (parts.size() != 4) bad(line, "flow", "expected source,sink,start,nc");
    return FlowSpec{std::string(parts[0]), std::string(parts[1]), to_double(parts[2], line, "flow"),
                    to_bool(parts[3], line, "flow")};
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, std::size_t)>;

const std::map<std::string_view, Setter>& setters() {
    auto real = [](double ScenarioConfig::*field) {
        return Setter([field](ScenarioConfig& c, std::string_view v, std::size_t l) { c.*field = to_double(v, l, "value"); });
    };
    auto nc_real = [](double NcConfig::*field) {
        return Setter([field](ScenarioConfig& c, std::string_view v, std::size_t l) { c.nc.*field = to_double(v, l, "value"); });
    };
    auto nc_size = [](std::size_t NcConfig::*field) {
        return Setter([field](ScenarioConfig& c, std::string_view v, std::size_t l) { c.nc.*field = to_u64(v, l, "value"); });
    };
    auto code_size = [](std::size_t CodeParams::*field) {
        return Setter([field](ScenarioConfig& c, std::string_view v, std::size_t l) { c.nc.code.*field = to_u64(v, l, "value"); });
    };
    static const std::map<std::string_view, Setter> table{
        {"access_rate_bps", real(&ScenarioConfig::access_rate_bps)},
        {"access_delay_s", real(&ScenarioConfig::access_delay_s)},
        {"bottleneck_rate_bps", real(&ScenarioConfig::bottleneck_rate_bps)},
        {"bottleneck_delay_s", real(&ScenarioConfig::bottleneck_delay_s)},
        {"queue_packets",
         [](ScenarioConfig& c, std::string_view v, std::size_t l) { c.queue_packets = to_u64(v, l, "queue_packets"); }},
        {"per", real(&ScenarioConfig::per)},
        {"ack_per", real(&ScenarioConfig::ack_per)},
        {"code_n", code_size(&CodeParams::n)},
        {"code_k", code_size(&CodeParams::k)},
        {"segment_size", code_size(&CodeParams::segment_size)},
        {"spec_threshold", nc_size(&NcConfig::spec_threshold)},
        {"max_outstanding", nc_size(&NcConfig::max_outstanding)},
        {"reorder_pool", nc_size(&NcConfig::reorder_pool)},
        {"flush_delay", nc_real(&NcConfig::flush_delay)},
        {"default_rtt", nc_real(&NcConfig::default_rtt)},
        {"rto_cap_factor", nc_real(&NcConfig::rto_cap_factor)},
        {"min_rto", nc_real(&NcConfig::min_rto)},
        {"fast_retransmit",
         [](ScenarioConfig& c, std::string_view v, std::size_t l) { c.nc.fast_retransmit = to_bool(v, l, "fast_retransmit"); }},
        {"mss_offer",
         [](ScenarioConfig& c, std::string_view v, std::size_t l) {
             const auto mss = to_u64(v, l, "mss_offer");
             if (mss > 0xFFFF) bad(l, "mss_offer", "exceeds 65535");
             c.mss_offer = static_cast<std::uint16_t>(mss);
         }},
        {"t_end", real(&ScenarioConfig::t_end)},
        {"warmup", real(&ScenarioConfig::warmup)},
        {"seed", [](ScenarioConfig& c, std::string_view v, std::size_t l) { c.seed = to_u64(v, l, "seed"); }},
    };
    return table;
}

} // namespace

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig config;
    bool flows_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) bad(line_no, line, "expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "flow") {
            if (!flows_seen) config.flows.clear();
            flows_seen = true;
            config.flows.push_back(to_flow(value, line_no));
            continue;
        }
        const auto it = setters().find(key);
        if (it == setters().end()) bad(line_no, key, "unknown key");
        it->second(config, value, line_no);
    }
    validate(config);
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string to_text(const ScenarioConfig& c) {
    std::string out;
    auto put = [&out](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
    put("access_rate_bps", c.access_rate_bps);
    put("access_delay_s", c.access_delay_s);
    put("bottleneck_rate_bps", c.bottleneck_rate_bps);
    put("bottleneck_delay_s", c.bottleneck_delay_s);
    put("queue_packets", c.queue_packets);
    put("per", c.per);
    put("ack_per", c.ack_per);
    put("code_n", c.nc.code.n);
    put("code_k", c.nc.code.k);
    put("segment_size", c.nc.code.segment_size);
    put("spec_threshold", c.nc.spec_threshold);
    put("max_outstanding", c.nc.max_outstanding);
    put("reorder_pool", c.nc.reorder_pool);
    put("flush_delay", c.nc.flush_delay);
    put("default_rtt", c.nc.default_rtt);
    put("rto_cap_factor", c.nc.rto_cap_factor);
    put("min_rto", c.nc.min_rto);
    put("fast_retransmit", c.nc.fast_retransmit);
    put("mss_offer", c.mss_offer);
    for (const auto& f : c.flows) put("flow", fmt::format("{},{},{},{}", f.source, f.sink, f.start, f.nc));
    put("t_end", c.t_end);
    put("warmup", c.warmup);
    put("seed", c.seed);
    return out;
}

std::string config_digest(const ScenarioConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : to_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::ConfigError, why); };
    if (!(c.access_rate_bps > 0) || !(c.bottleneck_rate_bps > 0)) fail("link rates must be positive");
    if (!(c.access_delay_s >= 0) || !(c.bottleneck_delay_s >= 0)) fail("link delays must be non-negative");
    if (c.queue_packets < 1) fail("queue_packets must be at least 1");
    if (!(c.per >= 0 && c.per <= 1)) fail("per must lie in [0, 1]");
    if (!(c.ack_per <= 1)) fail("ack_per must be at most 1");
    if (c.mss_offer < 1) fail("mss_offer must be positive");
    if (!(c.t_end > 0)) fail("t_end must be positive");
    if (!(c.warmup >= 0 && c.warmup < c.t_end)) fail("warmup must lie in [0, t_end)");
    if (c.flows.empty()) fail("at least one flow is required");
    for (const auto& f : c.flows) {
        if (f.source != "A1" && f.source != "A2") fail("flow source must be A1 or A2");
        if (f.sink != "S1" && f.sink != "S2") fail("flow sink must be S1 or S2");
        if (!(f.start >= 0)) fail("flow start must be non-negative");
    }
    try {
        validate(c.nc);
    } catch (const Error& e) {
        fail(std::string("NC parameters: ") + e.what());
    }
}

} // namespace ncsim
