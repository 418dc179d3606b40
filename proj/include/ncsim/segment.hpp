// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ncsim/mds_codec.hpp"

namespace ncsim {

/// Control flags carried by both TCP and NC segments. The bit values are the
/// NC wire encoding; TCP uses its own layout on the wire.
struct Flags {
    static constexpr std::uint8_t ack = 0x01;
    static constexpr std::uint8_t syn = 0x02;
    static constexpr std::uint8_t fin = 0x04;
    static constexpr std::uint8_t rst = 0x08;
    static constexpr std::uint8_t all = ack | syn | fin | rst;

    std::uint8_t bits = 0;

    constexpr bool has(std::uint8_t f) const { return (bits & f) != 0; }
    constexpr Flags with(std::uint8_t f) const { return Flags{static_cast<std::uint8_t>(bits | f)}; }
    constexpr Flags without(std::uint8_t f) const { return Flags{static_cast<std::uint8_t>(bits & ~f)}; }
    friend constexpr bool operator==(Flags, Flags) = default;
};

/// A TCP segment. Sequence numbers count segments, not bytes. The data
/// offset is not stored: it follows from the options, which must be padded
/// to 32-bit words (at most 40 bytes).
struct TcpSegment {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    Flags flags;
    std::uint8_t reserved = 0; ///< 6 reserved header bits
    std::uint16_t window = 0;
    std::uint16_t checksum = 0;
    std::uint16_t urgent_ptr = 0;
    Bytes options;
    Bytes payload;

    std::uint8_t data_offset() const { return static_cast<std::uint8_t>(5 + options.size() / 4); }
    bool is_pure_ack() const {
        return flags.has(Flags::ack) && !flags.has(Flags::syn | Flags::fin | Flags::rst) && payload.empty();
    }
    friend bool operator==(const TcpSegment&, const TcpSegment&) = default;
};

/// NC header: the TCP fields reused verbatim plus the symbol indicator and
/// NC options.
struct NcHeader {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;  ///< mu
    std::uint8_t symbol = 0; ///< nu
    Flags flags;
    Bytes nc_options;
    friend bool operator==(const NcHeader&, const NcHeader&) = default;
};

struct NcSegment {
    NcHeader header;
    Bytes body;
    friend bool operator==(const NcSegment&, const NcSegment&) = default;
};

/// Bit 0 of nc_options[0] marks a filler information segment.
inline constexpr std::uint8_t nc_option_filler = 0x01;

inline bool is_filler(const NcHeader& h) { return !h.nc_options.empty() && (h.nc_options[0] & nc_option_filler) != 0; }

/// Position of a segment in the connection's codeword stream: 2^8 mu + nu.
constexpr std::uint64_t position(std::uint32_t mu, std::uint8_t nu) {
    return (static_cast<std::uint64_t>(mu) << 8) + nu;
}

/// Bytes of TCP header left after stripping ports, sequence number and
/// flags: ack(32) offset/reserved/ack-bit(16) window(16) checksum(16) urgent(16).
inline constexpr std::size_t residual_header_size = 12;
/// Fixed part of the NC header on the wire.
inline constexpr std::size_t nc_header_size = 11;
/// TCP header without options.
inline constexpr std::size_t tcp_header_size = 20;
/// Each codec symbol starts with the big-endian length of the residual it holds.
inline constexpr std::size_t block_length_prefix = 2;

/// Splits a TCP segment into the reused NC header fields and the residual
/// bytes that get encoded. The TCP ACK flag stays in the residual; the NC
/// layer owns the ACK flag of its own header.
std::pair<NcHeader, Bytes> strip_header(const TcpSegment& seg);

/// Inverse of strip_header. Throws MalformedBody.
TcpSegment restore_header(const NcHeader& hdr, std::span<const std::uint8_t> body);

/// NC wire format:
/// src(16) dst(16) seq(32) symbol(8) flags(8) opt_len(8) options body.
Bytes encode_nc(const NcSegment& seg);
/// Throws MalformedFrame.
NcSegment decode_nc(std::span<const std::uint8_t> frame);

/// RFC 793 header layout (flags FIN 0x01 SYN 0x02 RST 0x04 ACK 0x10) followed
/// by the payload.
Bytes encode_tcp(const TcpSegment& seg);
/// Throws MalformedFrame.
TcpSegment decode_tcp(std::span<const std::uint8_t> frame);

/// MSS option value, if present.
std::optional<std::uint16_t> find_mss(const TcpSegment& seg);
/// 4-byte MSS option (kind 2).
Bytes mss_option(std::uint16_t mss);

/// Largest TCP payload whose encoded block symbol fits segment_size.
std::size_t max_payload(const CodeParams& code);

/// Lowers the MSS option of a SYN to what the codec geometry admits.
/// Throws NoMssOption for non-SYN segments or SYNs without MSS.
TcpSegment tx_rewrite_mss(const TcpSegment& syn, const CodeParams& code);

} // namespace ncsim
