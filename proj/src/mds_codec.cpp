// SPDX-License-Identifier: Apache-2.0

#include "ncsim/mds_codec.hpp"

#include <limits>

namespace ncsim {

namespace {

template <unsigned M>
std::size_t min_weight(const CodeParams& params) {
    const MdsCodec<M> codec(params);
    const std::uint64_t q = std::uint64_t{1} << M;

    SegmentBlock<M> info{params, std::vector<Segment<M>>(params.k, Segment<M>(1, 0))};
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < params.k; ++i) total *= q;

    // Mixed-radix counter over the information symbols, skipping zero.
    for (std::uint64_t word = 1; word < total; ++word) {
        std::uint64_t rest = word;
        for (std::size_t i = 0; i < params.k; ++i) {
            info.segments[i][0] = static_cast<symbol_t<M>>(rest % q);
            rest /= q;
        }
        const auto cw = codec.encode(info);
        std::size_t weight = 0;
        for (const auto& s : cw.segments) weight += s[0] != 0 ? 1 : 0;
        best = std::min(best, weight);
    }
    return best;
}

template <unsigned... Ms>
std::size_t dispatch(const CodeParams& params, unsigned m, std::integer_sequence<unsigned, Ms...>) {
    std::size_t result = 0;
    bool found = ((m == Ms + 2 ? (result = min_weight<Ms + 2>(params), true) : false) || ...);
    if (!found) throw Error(ErrorCode::BadParams, "field_m must lie in [2, 16]");
    return result;
}

} // namespace

std::size_t verify_mds(const CodeParams& params, unsigned field_m) {
    if (field_m < 2 || field_m > 16) throw Error(ErrorCode::BadParams, "field_m must lie in [2, 16]");
    if (params.segment_size != 1) throw Error(ErrorCode::BadParams, "verify_mds needs one-symbol segments");
    validate(params, field_m);
    // q^k <= 2^20  <=>  m * k <= 20
    if (static_cast<std::uint64_t>(field_m) * params.k > 20)
        throw Error(ErrorCode::TooLarge, "q^k exceeds the enumeration bound 2^20");
    return dispatch(params, field_m, std::make_integer_sequence<unsigned, 15>{});
}

SegmentBlock<8> block_from_bytes(const CodeParams& params, std::span<const std::uint8_t> data) {
    validate(params, 8);
    if (data.size() > params.k * params.segment_size)
        throw Error(ErrorCode::LengthMismatch, "data longer than k * segment_size");
    SegmentBlock<8> block{params, std::vector<Segment<8>>(params.k, Segment<8>(params.segment_size, 0))};
    for (std::size_t i = 0; i < data.size(); ++i) {
        block.segments[i / params.segment_size][i % params.segment_size] = data[i];
    }
    return block;
}

namespace {

MdsCodec<16> wide_codec(const CodeParams& params) {
    if (params.segment_size % 2 != 0)
        throw Error(ErrorCode::BadParams, "codes longer than 256 segments need an even segment_size");
    return MdsCodec<16>(CodeParams{params.n, params.k, params.segment_size / 2});
}

Segment<16> to_pairs(const Bytes& b) {
    Segment<16> out(b.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint16_t>(b[2 * i] << 8 | b[2 * i + 1]);
    }
    return out;
}

Bytes from_pairs(const Segment<16>& s) {
    Bytes out(2 * s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[2 * i] = static_cast<std::uint8_t>(s[i] >> 8);
        out[2 * i + 1] = static_cast<std::uint8_t>(s[i] & 0xFF);
    }
    return out;
}

} // namespace

SegmentCodec::SegmentCodec(CodeParams params)
    : params_(params),
      codec_(params.n <= 256 ? std::variant<MdsCodec<8>, MdsCodec<16>>(MdsCodec<8>(params))
                             : std::variant<MdsCodec<8>, MdsCodec<16>>(wide_codec(params))) {}

std::vector<Bytes> SegmentCodec::encode(const std::vector<Bytes>& info) const {
    if (const auto* narrow = std::get_if<MdsCodec<8>>(&codec_)) {
        return narrow->encode(SegmentBlock<8>{params_, info}).segments;
    }
    const auto& wide = std::get<MdsCodec<16>>(codec_);
    SegmentBlock<16> block{wide.params(), {}};
    for (const auto& seg : info) {
        if (seg.size() != params_.segment_size) throw Error(ErrorCode::LengthMismatch, "segment size differs");
        block.segments.push_back(to_pairs(seg));
    }
    std::vector<Bytes> out;
    for (const auto& seg : wide.encode(block).segments) out.push_back(from_pairs(seg));
    return out;
}

std::vector<Bytes> SegmentCodec::decode(const std::vector<std::pair<std::size_t, Bytes>>& received) const {
    if (const auto* narrow = std::get_if<MdsCodec<8>>(&codec_)) {
        return narrow->decode(ReceivedSet<8>{params_, received}).segments;
    }
    const auto& wide = std::get<MdsCodec<16>>(codec_);
    ReceivedSet<16> set{wide.params(), {}};
    for (const auto& [pos, seg] : received) {
        if (seg.size() != params_.segment_size) throw Error(ErrorCode::LengthMismatch, "segment size differs");
        set.entries.emplace_back(pos, to_pairs(seg));
    }
    std::vector<Bytes> out;
    for (const auto& seg : wide.decode(set).segments) out.push_back(from_pairs(seg));
    return out;
}

} // namespace ncsim
