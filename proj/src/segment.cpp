// SPDX-License-Identifier: Apache-2.0

#include "ncsim/segment.hpp"

#include <algorithm>
#include <string>

namespace ncsim {

namespace {

void put16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32(Bytes& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v >> 16));
    put16(out, static_cast<std::uint16_t>(v));
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> data, ErrorCode code) : data_(data), code_(code) {}

    std::size_t remaining() const { return data_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        const std::uint32_t hi = u16();
        return hi << 16 | u16();
    }
    Bytes take(std::size_t n) {
        need(n);
        Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_), data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }
    Bytes rest() { return take(remaining()); }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw Error(code_, "truncated: need " + std::to_string(n) + " more bytes");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    ErrorCode code_;
};

void check_options(const TcpSegment& seg) {
    if (seg.options.size() % 4 != 0 || seg.options.size() > 40)
        throw Error(ErrorCode::BadParams, "TCP options must be 32-bit padded and at most 40 bytes");
    if (seg.reserved > 0x3F) throw Error(ErrorCode::BadParams, "reserved field is 6 bits");
}

// TCP bytes 12..13: data offset(4) reserved(6) URG ACK PSH RST SYN FIN.
std::uint16_t offset_word(const TcpSegment& seg, std::uint8_t flag_bits) {
    return static_cast<std::uint16_t>(seg.data_offset() << 12 | seg.reserved << 6 | flag_bits);
}

std::uint8_t tcp_wire_flags(Flags f) {
    std::uint8_t b = 0;
    if (f.has(Flags::fin)) b |= 0x01;
    if (f.has(Flags::syn)) b |= 0x02;
    if (f.has(Flags::rst)) b |= 0x04;
    if (f.has(Flags::ack)) b |= 0x10;
    return b;
}

Flags from_tcp_wire_flags(std::uint8_t b) {
    Flags f;
    if (b & 0x01) f = f.with(Flags::fin);
    if (b & 0x02) f = f.with(Flags::syn);
    if (b & 0x04) f = f.with(Flags::rst);
    if (b & 0x10) f = f.with(Flags::ack);
    return f;
}

void put_residual(Bytes& out, const TcpSegment& seg, std::uint8_t flag_bits) {
    put32(out, seg.ack);
    put16(out, offset_word(seg, flag_bits));
    put16(out, seg.window);
    put16(out, seg.checksum);
    put16(out, seg.urgent_ptr);
    out.insert(out.end(), seg.options.begin(), seg.options.end());
    out.insert(out.end(), seg.payload.begin(), seg.payload.end());
}

// Reads ack..payload back; returns the raw flag bits of the offset word.
std::uint8_t read_residual(Reader& r, TcpSegment& seg) {
    seg.ack = r.u32();
    const std::uint16_t word = r.u16();
    seg.window = r.u16();
    seg.checksum = r.u16();
    seg.urgent_ptr = r.u16();
    const std::size_t offset = word >> 12;
    if (offset < 5) throw Error(ErrorCode::MalformedBody, "data offset below 5");
    seg.reserved = static_cast<std::uint8_t>(word >> 6 & 0x3F);
    seg.options = r.take((offset - 5) * 4);
    seg.payload = r.rest();
    return static_cast<std::uint8_t>(word & 0x3F);
}

} // namespace

std::pair<NcHeader, Bytes> strip_header(const TcpSegment& seg) {
    check_options(seg);
    NcHeader hdr;
    hdr.src_port = seg.src_port;
    hdr.dst_port = seg.dst_port;
    hdr.seq = seg.seq;
    hdr.flags = seg.flags.without(Flags::ack);
    Bytes body;
    body.reserve(residual_header_size + seg.options.size() + seg.payload.size());
    put_residual(body, seg, seg.flags.has(Flags::ack) ? 0x10 : 0x00);
    return {hdr, body};
}

TcpSegment restore_header(const NcHeader& hdr, std::span<const std::uint8_t> body) {
    if (body.size() < residual_header_size)
        throw Error(ErrorCode::MalformedBody, "body of " + std::to_string(body.size()) + " bytes is shorter than the residual header");
    TcpSegment seg;
    seg.src_port = hdr.src_port;
    seg.dst_port = hdr.dst_port;
    seg.seq = hdr.seq;
    Reader r(body, ErrorCode::MalformedBody);
    const std::uint8_t bits = read_residual(r, seg);
    if ((bits & ~0x10) != 0) throw Error(ErrorCode::MalformedBody, "reused flag bits set in the residual header");
    seg.flags = hdr.flags.without(Flags::ack);
    if (bits & 0x10) seg.flags = seg.flags.with(Flags::ack);
    return seg;
}

Bytes encode_nc(const NcSegment& seg) {
    if (seg.header.nc_options.size() > 255) throw Error(ErrorCode::BadParams, "NC options exceed 255 bytes");
    if ((seg.header.flags.bits & ~Flags::all) != 0) throw Error(ErrorCode::BadParams, "undefined NC flag bits");
    Bytes out;
    out.reserve(nc_header_size + seg.header.nc_options.size() + seg.body.size());
    put16(out, seg.header.src_port);
    put16(out, seg.header.dst_port);
    put32(out, seg.header.seq);
    out.push_back(seg.header.symbol);
    out.push_back(seg.header.flags.bits);
    out.push_back(static_cast<std::uint8_t>(seg.header.nc_options.size()));
    out.insert(out.end(), seg.header.nc_options.begin(), seg.header.nc_options.end());
    out.insert(out.end(), seg.body.begin(), seg.body.end());
    return out;
}

NcSegment decode_nc(std::span<const std::uint8_t> frame) {
    Reader r(frame, ErrorCode::MalformedFrame);
    NcSegment seg;
    seg.header.src_port = r.u16();
    seg.header.dst_port = r.u16();
    seg.header.seq = r.u32();
    seg.header.symbol = r.u8();
    seg.header.flags.bits = r.u8();
    if ((seg.header.flags.bits & ~Flags::all) != 0) throw Error(ErrorCode::MalformedFrame, "undefined NC flag bits");
    seg.header.nc_options = r.take(r.u8());
    seg.body = r.rest();
    return seg;
}

Bytes encode_tcp(const TcpSegment& seg) {
    check_options(seg);
    Bytes out;
    out.reserve(tcp_header_size + seg.options.size() + seg.payload.size());
    put16(out, seg.src_port);
    put16(out, seg.dst_port);
    put32(out, seg.seq);
    put_residual(out, seg, tcp_wire_flags(seg.flags));
    return out;
}

TcpSegment decode_tcp(std::span<const std::uint8_t> frame) {
    Reader r(frame, ErrorCode::MalformedFrame);
    TcpSegment seg;
    seg.src_port = r.u16();
    seg.dst_port = r.u16();
    seg.seq = r.u32();
    try {
        seg.flags = from_tcp_wire_flags(read_residual(r, seg));
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedFrame, e.what());
    }
    return seg;
}

std::optional<std::uint16_t> find_mss(const TcpSegment& seg) {
    const auto& o = seg.options;
    for (std::size_t i = 0; i < o.size();) {
        const std::uint8_t kind = o[i];
        if (kind == 0) break;
        if (kind == 1) {
            ++i;
            continue;
        }
        if (i + 1 >= o.size() || o[i + 1] < 2 || i + o[i + 1] > o.size()) break;
        if (kind == 2 && o[i + 1] == 4) return static_cast<std::uint16_t>(o[i + 2] << 8 | o[i + 3]);
        i += o[i + 1];
    }
    return std::nullopt;
}

Bytes mss_option(std::uint16_t mss) {
    return {2, 4, static_cast<std::uint8_t>(mss >> 8), static_cast<std::uint8_t>(mss)};
}

std::size_t max_payload(const CodeParams& code) {
    const std::size_t overhead = block_length_prefix + residual_header_size;
    return code.segment_size > overhead ? code.segment_size - overhead : 0;
}

TcpSegment tx_rewrite_mss(const TcpSegment& syn, const CodeParams& code) {
    if (!syn.flags.has(Flags::syn)) throw Error(ErrorCode::NoMssOption, "MSS is only negotiated on SYN segments");
    const auto offered = find_mss(syn);
    if (!offered) throw Error(ErrorCode::NoMssOption, "SYN carries no MSS option");
    const auto limit = static_cast<std::uint16_t>(std::min<std::size_t>(max_payload(code), 0xFFFF));
    if (*offered <= limit) return syn;

    TcpSegment out = syn;
    auto& o = out.options;
    for (std::size_t i = 0; i < o.size();) {
        if (o[i] == 0) break;
        if (o[i] == 1) {
            ++i;
            continue;
        }
        if (o[i] == 2 && o[i + 1] == 4) {
            o[i + 2] = static_cast<std::uint8_t>(limit >> 8);
            o[i + 3] = static_cast<std::uint8_t>(limit);
            break;
        }
        i += o[i + 1];
    }
    return out;
}

} // namespace ncsim
