// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "ncsim/mds_codec.hpp"
#include "ncsim/segment.hpp"

namespace ncsim {

/// Parameters shared by both ends of an NC connection.
struct NcConfig {
    CodeParams code{16, 8, 1462};
    /// NC acknowledgments that trigger the speculative ACK; 0 means k.
    std::size_t spec_threshold = 0;
    /// Codewords the transmitter may have awaiting their s acknowledgments.
    std::size_t max_outstanding = 2;
    /// Codewords the receiver buffers from the oldest undelivered one on. The
    /// transmitter never has more than this many codewords unacknowledged
    /// towards TCP.
    std::size_t reorder_pool = 8;
    /// Idle time after which a partial block is padded and sent.
    double flush_delay = 0.01;
    /// RTT assumed before the handshake has been observed.
    double default_rtt = 0.25;
    /// Re-send a codeword as soon as a codeword sent after it clears.
    bool fast_retransmit = true;
    /// Retransmit timer floor in seconds.
    double min_rto = 1.0;
    /// Retransmit timer ceiling in multiples of the handshake RTT.
    double rto_cap_factor = 64.0;

    friend bool operator==(const NcConfig&, const NcConfig&) = default;

    std::size_t threshold() const { return spec_threshold == 0 ? code.k : spec_threshold; }
};

/// Redundancy segments actually sent per codeword. The symbol indicator
/// numbers them 1..255, so with n - k = 256 the last one is never emitted.
inline std::size_t emitted_redundancy(const CodeParams& code) {
    return std::min<std::size_t>(code.redundancy(), 255);
}

/// Throws BadParams if the code violates its bounds (including n - k <= 256),
/// the threshold is outside [k, n], or the transmitter window exceeds the
/// receiver's reorder pool.
void validate(const NcConfig& config);

/// Result of feeding an event into either state machine.
struct NcOutput {
    std::vector<NcSegment> to_ip;
    std::vector<TcpSegment> to_tcp;
};

enum class AckOutcome { Counted, Duplicate, Stale, SpeculativeAck };

struct TxStats {
    std::uint64_t codewords = 0;
    std::uint64_t retransmitted_codewords = 0;
    std::uint64_t fast_retransmits = 0;
    std::uint64_t flushes = 0;
    std::uint64_t fillers = 0;
    std::uint64_t stale_acks = 0;
    std::uint64_t duplicate_acks = 0;
    std::uint64_t dropped_tcp_retransmissions = 0;
    std::uint64_t dropped_tcp_acks = 0;
};

/// NC layer at the transmitting host. Buffers TCP segments into blocks of k,
/// emits n coded segments per block, counts NC acknowledgments per codeword
/// and acknowledges a block to TCP once s of them have arrived.
///
/// NC sequence numbers are the TCP sequence numbers shifted by the number of
/// filler segments sent so far, so every codeword covers k consecutive
/// values and the receiver can frame codewords arithmetically.
class Transmitter {
public:
    explicit Transmitter(NcConfig config);

    /// Segment handed down by TCP.
    NcOutput on_tcp_segment(const TcpSegment& seg, double now);
    /// Segment handed up by IP: NC acknowledgments and connection management.
    NcOutput on_ip_segment(const NcSegment& seg, double now);
    /// NC acknowledgment from the receiver. `outcome` reports how it was counted.
    NcOutput on_nc_ack(const NcSegment& ack, double now, AckOutcome* outcome = nullptr);
    /// Retransmits every codeword whose timer expired and flushes a stale
    /// partial block.
    NcOutput on_timeout(double now);

    /// Earliest time on_timeout has work to do.
    std::optional<double> next_deadline() const;

    const NcConfig& config() const { return config_; }
    const TxStats& stats() const { return stats_; }
    /// TCP segments accepted but not yet encoded.
    std::size_t buffered() const { return pending_.size(); }
    std::size_t outstanding() const { return outstanding_.size(); }
    /// Distinct acknowledgments of the oldest outstanding codeword.
    std::size_t ack_count() const { return outstanding_.empty() ? 0 : outstanding_.front().ack_count; }
    double current_rto() const;
    double initial_rto() const { return 2.0 * rtt_; }
    bool in_initial_state() const;

private:
    struct Outstanding {
        std::uint32_t first_mu = 0;
        std::uint32_t tcp_first = 0; ///< TCP sequence number of the first real segment
        std::uint32_t tcp_next = 0;  ///< TCP sequence number after the last real segment
        std::vector<NcSegment> segments;
        std::vector<bool> acked;
        std::size_t ack_count = 0;
        bool cleared = false;
        bool retransmitted = false;
        double emitted_at = 0.0;
        double last_sent = 0.0;
        double deadline = 0.0;
    };

    void reset();
    bool can_emit() const;
    std::size_t uncleared() const;
    NcOutput pump(double now);
    std::vector<NcSegment> emit_block(std::size_t real, double now);
    Outstanding* find(std::uint32_t mu, std::uint8_t nu, std::size_t* index);

    NcConfig config_;
    SegmentCodec codec_;

    std::deque<TcpSegment> pending_;
    std::deque<Outstanding> outstanding_;
    std::optional<std::uint32_t> next_tcp_seq_;
    std::uint32_t seq_shift_ = 0;
    double last_tcp_arrival_ = 0.0;
    std::optional<double> syn_sent_at_;
    double rtt_;
    std::optional<double> srtt_;
    double rttvar_ = 0.0;
    int backoff_ = 0;
    TxStats stats_;
};

struct RxStats {
    std::uint64_t data_segments = 0;
    std::uint64_t acks_sent = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t stale = 0;
    std::uint64_t beyond_pool = 0;
    std::uint64_t decoded_codewords = 0;
    std::uint64_t reconstructed_segments = 0;
    std::uint64_t dropped_tcp_acks = 0;
};

/// NC layer at the receiving host. Acknowledges every data segment, collects
/// k segments of the current codeword, decodes and hands the information
/// segments to TCP in order.
class Receiver {
public:
    explicit Receiver(NcConfig config);

    /// Segment handed up by IP.
    NcOutput on_nc_segment(const NcSegment& seg);
    /// Segment handed down by the receiving TCP. Pure acknowledgments are
    /// discarded; connection management passes. Throws UnexpectedData for
    /// payload under the half-duplex assumption.
    NcOutput on_tcp_segment(const TcpSegment& seg);

    const NcConfig& config() const { return config_; }
    const RxStats& stats() const { return stats_; }
    /// Index of the next codeword to deliver.
    std::uint64_t delivered_up_to() const { return next_codeword_; }
    /// Segments held for the current codeword.
    std::size_t buffered() const;
    bool in_initial_state() const;

private:
    struct Pending {
        std::vector<std::optional<Bytes>> symbols;
        std::size_t count = 0;
    };

    void reset();
    void deliver_ready(NcOutput& out);

    NcConfig config_;
    SegmentCodec codec_;

    bool connected_ = false;
    std::uint16_t local_port_ = 0;
    std::uint16_t remote_port_ = 0;
    std::uint32_t base_mu_ = 0;
    std::uint64_t next_codeword_ = 0;
    std::uint32_t seq_shift_ = 0;
    std::map<std::uint64_t, Pending> pool_;
    RxStats stats_;
};

/// Drops a pure acknowledgment from the receiving TCP; returns false if the
/// segment is connection management that has to be forwarded. Throws
/// UnexpectedData if it carries payload.
bool rx_discard_tcp_ack(const TcpSegment& seg);

} // namespace ncsim
