// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "ncsim/scenario.hpp"
#include "ncsim/segment.hpp"

namespace ncsim {

enum class EventKind { PacketArrival, TimerExpiry, AppSend };

/// Discrete-event scheduler. Events run in (time, scheduling order).
class Simulator {
public:
    using Action = std::function<void()>;

    double now() const { return now_; }
    /// Throws PastEvent if `time` lies before now().
    void schedule(double time, EventKind kind, int target, Action action);
    /// Runs every event with time <= t_end, then advances the clock to t_end.
    /// Returns the number of events processed.
    std::uint64_t run_until(double t_end);
    std::size_t pending() const { return queue_.size(); }

private:
    struct Event {
        double time;
        std::uint64_t seq;
        EventKind kind;
        int target;
        Action action;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);
/// Independent stream for `name` under `seed`; a link's draws do not
/// depend on which other links exist.
std::mt19937_64 stream_rng(std::uint64_t seed, std::string_view name);
/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class Node { A1, A2, N3, N4, S1, S2 };
std::string_view node_name(Node n);
Node parse_node(std::string_view name);

struct Packet {
    int flow = 0;
    Node src = Node::A1;
    Node dst = Node::S1;
    std::variant<TcpSegment, NcSegment> segment;
    double sent_at = 0.0;

    /// Bytes on the wire including a 20-byte IP header.
    std::size_t wire_bytes() const;
};

struct LinkParams {
    double rate_bps = 1e6;
    double delay_s = 0.0;
    std::size_t queue_packets = 50;
    double per = 0.0;
};

struct LinkStats {
    std::uint64_t injected = 0;
    std::uint64_t delivered = 0;
    std::uint64_t erased = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight() const { return injected - delivered - erased - dropped; }
    friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

/// Unidirectional link: FIFO drop-tail queue, serialisation at `rate_bps`,
/// propagation `delay_s`, then one erasure draw per packet.
class Link {
public:
    using Deliver = std::function<void(const Link&, Packet)>;

    Link(std::string name, LinkParams params, std::uint64_t seed, Simulator& sim, Deliver deliver);

    void transmit(Packet packet);

    const std::string& name() const { return name_; }
    const LinkParams& params() const { return params_; }
    const LinkStats& stats() const { return stats_; }
    /// Packets waiting or being serialised right now.
    std::size_t backlog();

private:
    std::string name_;
    LinkParams params_;
    std::mt19937_64 rng_;
    Simulator& sim_;
    Deliver deliver_;
    std::queue<double> departures_;
    double busy_until_ = 0.0;
    LinkStats stats_;
};

struct FlowMetrics {
    /// Segments delivered in order to the sink application per 1 s bin.
    std::vector<double> series;
    std::uint64_t delivered_segments = 0;
    std::uint64_t delivered_bytes = 0;
    double goodput_bytes_per_s = 0.0;
    /// Mean of `series` over the bins at or after the warmup.
    double steady_segs_per_s = 0.0;
    std::uint64_t tcp_segments_sent = 0;
    std::uint64_t tcp_retransmissions = 0;
    std::uint64_t tcp_timeouts = 0;
    std::uint64_t nc_codewords = 0;
    std::uint64_t nc_retransmitted_codewords = 0;
    std::uint64_t handshake_failures = 0;
    /// Delivered bytes that differ from what the source application wrote.
    std::uint64_t payload_mismatches = 0;
    std::uint64_t sink_duplicates = 0;
    friend bool operator==(const FlowMetrics&, const FlowMetrics&) = default;
};

struct LinkMetrics {
    std::string name;
    LinkStats stats;
    friend bool operator==(const LinkMetrics&, const LinkMetrics&) = default;
};

struct Metrics {
    std::vector<FlowMetrics> flows;
    std::vector<LinkMetrics> links;
    double duration = 0.0;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::uint64_t events = 0;
    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Builds the dumbbell A1,A2 -> N3 -> N4 -> S1,S2 (and the mirrored reverse
/// path), runs one FTP bulk flow per FlowSpec until t_end and reports.
Metrics run_scenario(const ScenarioConfig& config);

/// Observer hook for tests: called for every packet handed to a link and
/// every packet that arrives at the far end.
struct PacketTrace {
    std::function<void(const Link&, const Packet&, double)> on_send;
    std::function<void(const Link&, const Packet&, double)> on_arrive;
};
Metrics run_scenario(const ScenarioConfig& config, const PacketTrace& trace);

} // namespace ncsim
