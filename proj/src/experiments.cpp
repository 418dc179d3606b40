// SPDX-License-Identifier: Apache-2.0

#include "ncsim/experiments.hpp"

#include <charconv>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "ncsim/mds_codec.hpp"

namespace ncsim {

std::string to_csv(const CsvTable& table) {
    std::string out = fmt::format("{}\n", fmt::join(table.header, ","));
    for (const auto& row : table.rows) out += fmt::format("{}\n", fmt::join(row, ","));
    return out;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool header = true;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        while (true) {
            const auto comma = line.find(',');
            cells.push_back(line.substr(0, comma));
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (header) {
            for (const auto c : cells) table.header.emplace_back(c);
            header = false;
            continue;
        }
        if (cells.size() != table.header.size())
            throw Error(ErrorCode::ConfigError, fmt::format("csv line {}: expected {} cells", line_no, table.header.size()));
        std::vector<double> row;
        for (const auto c : cells) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size())
                throw Error(ErrorCode::ConfigError, fmt::format("csv line {}: not a number: {}", line_no, c));
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_text(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<double> default_per_grid() { return {0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4}; }

namespace {

ScenarioConfig single_flow(const ScenarioConfig& base, double per, bool nc) {
    ScenarioConfig c = base;
    c.per = per;
    c.flows = {FlowSpec{"A1", "S1", 0.0, nc}};
    return c;
}

} // namespace

std::vector<SweepPoint> run_throughput_sweep(const ScenarioConfig& base, const std::vector<double>& pers) {
    for (const double p : pers) {
        if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::ConfigError, fmt::format("PER {} outside [0, 1)", p));
        validate(single_flow(base, p, true));
    }
    std::vector<std::future<double>> nc;
    std::vector<std::future<double>> tcp;
    auto steady = [](ScenarioConfig c) { return run_scenario(c).flows.at(0).steady_segs_per_s; };
    for (const double p : pers) {
        nc.push_back(std::async(std::launch::async, steady, single_flow(base, p, true)));
        tcp.push_back(std::async(std::launch::async, steady, single_flow(base, p, false)));
    }
    std::vector<SweepPoint> points;
    for (std::size_t i = 0; i < pers.size(); ++i) points.push_back(SweepPoint{pers[i], nc[i].get(), tcp[i].get()});
    return points;
}

CsvTable sweep_table(const std::vector<SweepPoint>& points) {
    CsvTable t{{"per", "nc_throughput_segs_per_s", "tcp_throughput_segs_per_s"}, {}};
    for (const auto& p : points) t.rows.push_back({p.per, p.nc_segs_per_s, p.tcp_segs_per_s});
    return t;
}

Fairness parse_fairness(std::string_view name) {
    if (name == "NC_VS_TCP") return Fairness::NcVsTcp;
    if (name == "NC_VS_NC") return Fairness::NcVsNc;
    if (name == "TCP_VS_TCP") return Fairness::TcpVsTcp;
    throw Error(ErrorCode::ConfigError, fmt::format("unknown fairness scenario {}", name));
}

std::string_view fairness_name(Fairness f) {
    switch (f) {
    case Fairness::NcVsTcp: return "NC_VS_TCP";
    case Fairness::NcVsNc: return "NC_VS_NC";
    case Fairness::TcpVsTcp: return "TCP_VS_TCP";
    }
    return "";
}

ScenarioConfig fairness_config(const ScenarioConfig& base, Fairness f) {
    ScenarioConfig c = base;
    const bool first_nc = f == Fairness::NcVsNc;
    const bool second_nc = f != Fairness::TcpVsTcp;
    c.flows = {FlowSpec{"A1", "S1", 0.0, first_nc}, FlowSpec{"A2", "S2", fairness_stagger_s, second_nc}};
    return c;
}

FairnessResult run_fairness(const ScenarioConfig& base, Fairness f) {
    FairnessResult r;
    r.metrics = run_scenario(fairness_config(base, f));
    r.flow1_mean = r.metrics.flows.at(0).steady_segs_per_s;
    r.flow2_mean = r.metrics.flows.at(1).steady_segs_per_s;
    return r;
}

CsvTable fairness_table(const Metrics& m) {
    CsvTable t{{"t_bin_s", "flow1_segs_per_s", "flow2_segs_per_s"}, {}};
    if (m.flows.size() != 2) throw Error(ErrorCode::ConfigError, "fairness output needs exactly two flows");
    for (std::size_t b = 0; b < m.flows[0].series.size(); ++b)
        t.rows.push_back({static_cast<double>(b), m.flows[0].series[b], m.flows[1].series[b]});
    return t;
}

CsvTable series_table(const Metrics& m) {
    CsvTable t{{"t_bin_s"}, {}};
    for (std::size_t i = 0; i < m.flows.size(); ++i) t.header.push_back(fmt::format("flow{}_segs_per_s", i + 1));
    const std::size_t bins = m.flows.empty() ? 0 : m.flows[0].series.size();
    for (std::size_t b = 0; b < bins; ++b) {
        std::vector<double> row{static_cast<double>(b)};
        for (const auto& f : m.flows) row.push_back(f.series[b]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

double bottleneck_capacity_segs_per_s(const ScenarioConfig& c) {
    // MSS payload + 20-byte TCP header + 20-byte IP header.
    const double bytes = static_cast<double>(c.mss_offer) + 40.0;
    return c.bottleneck_rate_bps / (8.0 * bytes);
}

std::vector<CheckResult> verify_codec(std::uint64_t seed) {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);

    {
        std::size_t bad = 0;
        for (std::uint32_t a = 1; a < 256; ++a) {
            for (std::uint32_t b = 1; b < 256; ++b) {
                if (gf_mul(GF256(a), GF256(b)).value() != poly_mul_mod(a, b, 8, default_primitive_polynomial(8))) ++bad;
            }
            if (gf_mul(GF256(a), gf_inv(GF256(a))) != GF256::one()) ++bad;
        }
        out.push_back({"field tables agree with polynomial arithmetic", bad == 0, fmt::format("{} mismatches", bad)});
    }

    for (const auto& [n, k] : {std::pair<std::size_t, std::size_t>{6, 3}, {8, 4}, {10, 5}, {12, 8}}) {
        const CodeParams p{n, k, 16};
        const ByteCodec codec(p);
        std::size_t failures = 0;
        std::size_t patterns = 0;
        for (int trial = 0; trial < 100; ++trial) {
            SegmentBlock<8> info{p, std::vector<Segment<8>>(k, Segment<8>(p.segment_size))};
            for (auto& s : info.segments)
                for (auto& b : s) b = static_cast<std::uint8_t>(rng());
            const auto cw = codec.encode(info);
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
                ReceivedSet<8> rx{p, {}};
                for (std::size_t i = 0; i < n; ++i)
                    if (mask & (1u << i)) rx.entries.emplace_back(i, cw.segments[i]);
                ++patterns;
                if (!(codec.decode(rx) == info)) ++failures;
            }
        }
        out.push_back({fmt::format("any {} of {} segments reconstruct", k, n), failures == 0,
                       fmt::format("{} failures in {} patterns", failures, patterns)});
    }

    for (const auto& [m, n, k] : {std::tuple<unsigned, std::size_t, std::size_t>{3, 7, 1}, {3, 7, 2}, {4, 9, 2}, {8, 5, 2}}) {
        const auto d = verify_mds(CodeParams{n, k, 1}, m);
        out.push_back({fmt::format("minimum distance of ({},{}) over GF(2^{}) is n-k+1", n, k, m), d == n - k + 1,
                       fmt::format("measured {}", d)});
    }
    return out;
}

} // namespace ncsim
