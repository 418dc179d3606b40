// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ncsim/segment.hpp"

namespace ncsim {

struct TcpConfig {
    std::uint16_t local_port = 4000;
    std::uint16_t remote_port = 80;
    std::uint32_t isn = 0;
    std::uint16_t mss_offer = 1460;
    /// Advertised receive window in bytes; converted to segments with the MSS.
    std::uint32_t rwnd_bytes = 65535;
    double initial_ssthresh = 1e9;
    double rto_initial = 1.0;
    double rto_min = 0.2;
    double rto_max = 64.0;
    int syn_attempts = 5;
};

enum class TcpPhase { SlowStart, CongestionAvoidance };

struct TcpSenderStats {
    std::uint64_t segments_sent = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t fast_retransmits = 0;
    /// Largest next_seq - send_base observed right after sending new data,
    /// minus floor(cwnd) at that moment. Never positive.
    double worst_window_excess = -1e300;
};

/// Bulk-transfer TCP source. Sequence numbers count segments: the SYN takes
/// isn and data segment i (from 0) takes isn + 1 + i.
class TcpSender {
public:
    explicit TcpSender(TcpConfig config);

    /// Starts the handshake and returns the SYN.
    TcpSegment connect(double now);
    /// Queues application bytes and returns whatever the window admits.
    std::vector<TcpSegment> on_app_data(std::span<const std::uint8_t> bytes, double now);
    /// SYN-ACK, ACK, FIN or RST from the peer.
    std::vector<TcpSegment> on_segment(const TcpSegment& seg, double now);
    /// Throws HandshakeTimeout once the SYN has been sent syn_attempts times.
    std::vector<TcpSegment> on_timeout(double now);
    /// Emits a FIN for the next sequence number and closes.
    TcpSegment close();

    std::optional<double> next_deadline() const { return deadline_; }

    bool established() const { return state_ == State::Established; }
    bool closed() const { return state_ == State::Closed; }
    double cwnd() const { return cwnd_; }
    double ssthresh() const { return ssthresh_; }
    double rto() const { return rto_; }
    std::optional<double> srtt() const { return srtt_; }
    TcpPhase phase() const { return cwnd_ < ssthresh_ ? TcpPhase::SlowStart : TcpPhase::CongestionAvoidance; }
    std::uint32_t send_base() const { return send_base_; }
    std::uint32_t next_seq() const { return next_seq_; }
    std::uint32_t in_flight() const { return next_seq_ - send_base_; }
    std::uint16_t mss() const { return mss_; }
    int dup_acks() const { return dup_acks_; }
    bool in_recovery() const { return recover_.has_value(); }
    /// Bytes queued by the application and not yet sent for the first time.
    std::size_t unsent_bytes() const;
    std::size_t window_segments() const;
    const TcpSenderStats& stats() const { return stats_; }
    const TcpConfig& config() const { return config_; }

private:
    enum class State { Closed, SynSent, Established };

    TcpSegment make_segment(std::uint32_t seq, double now);
    std::vector<TcpSegment> send_new(double now);
    void arm(double now) { deadline_ = now + rto_; }
    void rtt_sample(double sample);

    TcpConfig config_;
    State state_ = State::Closed;
    std::uint16_t mss_ = 536;
    std::uint32_t peer_ack_ = 0; ///< peer sequence number we acknowledge
    double cwnd_ = 1.0;
    double ssthresh_;
    double rto_;
    std::optional<double> srtt_;
    double rttvar_ = 0.0;
    std::uint32_t send_base_ = 0;
    std::uint32_t next_seq_ = 0;
    std::uint32_t high_seq_ = 0; ///< one past the highest sequence number ever sent
    int dup_acks_ = 0;
    std::optional<std::uint32_t> recover_;
    std::optional<std::pair<std::uint32_t, double>> timed_;
    std::optional<double> deadline_;
    int syn_sent_count_ = 0;

    std::deque<std::uint8_t> buffer_; ///< bytes from send_base onward
    TcpSenderStats stats_;
};

struct TcpReceiverStats {
    std::uint64_t delivered_segments = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t duplicate_segments = 0;
    std::uint64_t out_of_order_segments = 0;
    std::uint64_t acks_sent = 0;
};

/// TCP sink. Acknowledges every segment (no delayed ACKs) and reassembles
/// out-of-order data.
class TcpReceiver {
public:
    explicit TcpReceiver(TcpConfig config);

    std::vector<TcpSegment> on_segment(const TcpSegment& seg, double now);

    /// Hands over the in-order bytes delivered since the last call.
    Bytes take_delivered();
    bool established() const { return connected_; }
    std::uint32_t rcv_next() const { return rcv_next_; }
    const TcpReceiverStats& stats() const { return stats_; }

private:
    TcpSegment make_ack(std::uint8_t flags) const;

    TcpConfig config_;
    bool connected_ = false;
    std::uint16_t peer_port_ = 0;
    std::uint32_t rcv_next_ = 0;
    std::map<std::uint32_t, Bytes> out_of_order_;
    Bytes delivered_;
    TcpReceiverStats stats_;
};

enum class Direction { Forward, Reverse };

/// Carries one segment through whatever sits between the endpoints.
/// Returns nothing if the segment is lost.
using HandshakePath = std::function<std::optional<TcpSegment>(const TcpSegment&, Direction)>;

/// Runs SYN / SYN-ACK / ACK over `path`, retrying on the sender's timer.
/// Returns the negotiated MSS. Throws HandshakeTimeout.
std::uint16_t tcp_handshake(TcpSender& initiator, TcpReceiver& responder, const HandshakePath& path, double now = 0.0);

} // namespace ncsim
