// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <random>

#include "ncsim/mds_codec.hpp"

using namespace ncsim;

namespace {

// ---- Independent oracle: bitwise GF(2^8) arithmetic, Vandermonde solve by
// Gaussian elimination, Horner evaluation. Shares nothing with the codec.

unsigned omul(unsigned a, unsigned b) {
    unsigned r = 0;
    while (b) {
        if (b & 1) r ^= a;
        b >>= 1;
        a <<= 1;
        if (a & 0x100) a ^= 0x11D;
    }
    return r;
}

unsigned oinv(unsigned a) {
    for (unsigned x = 1; x < 256; ++x) {
        if (omul(a, x) == 1) return x;
    }
    return 0;
}

unsigned opow(unsigned a, unsigned e) {
    unsigned r = 1;
    while (e--) r = omul(r, a);
    return r;
}

// Codeword symbol column for one byte position.
std::vector<unsigned> oracle_encode(const std::vector<unsigned>& info, std::size_t n) {
    const std::size_t k = info.size();
    std::vector<unsigned> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = opow(2, static_cast<unsigned>(i));
    std::vector<std::vector<unsigned>> a(k, std::vector<unsigned>(k + 1));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) a[r][c] = opow(pts[r], static_cast<unsigned>(c));
        a[r][k] = info[r];
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t p = c;
        while (a[p][c] == 0) ++p;
        std::swap(a[p], a[c]);
        const unsigned iv = oinv(a[c][c]);
        for (auto& v : a[c]) v = omul(v, iv);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c || a[r][c] == 0) continue;
            const unsigned f = a[r][c];
            for (std::size_t j = 0; j <= k; ++j) a[r][j] ^= omul(f, a[c][j]);
        }
    }
    std::vector<unsigned> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned acc = 0;
        for (std::size_t c = k; c-- > 0;) acc = omul(acc, pts[i]) ^ a[c][k];
        out[i] = acc;
    }
    return out;
}

SegmentBlock<8> one_byte_block(const CodeParams& p, const std::vector<unsigned>& bytes) {
    SegmentBlock<8> b{p, {}};
    for (unsigned v : bytes) b.segments.push_back({static_cast<std::uint8_t>(v)});
    return b;
}

SegmentBlock<8> random_block(const CodeParams& p, std::mt19937_64& rng) {
    SegmentBlock<8> b{p, std::vector<Segment<8>>(p.k, Segment<8>(p.segment_size))};
    for (auto& s : b.segments) {
        for (auto& v : s) v = static_cast<std::uint8_t>(rng());
    }
    return b;
}

// Calls f(subset) for every size-r subset of {0..n-1}.
template <typename F>
void for_each_subset(std::size_t n, std::size_t r, F&& f) {
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(r), true);
    do {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask[i]) idx.push_back(i);
        }
        f(idx);
    } while (std::prev_permutation(mask.begin(), mask.end()));
}

ReceivedSet<8> pick(const Codeword<8>& cw, const std::vector<std::size_t>& positions) {
    ReceivedSet<8> rs{cw.params, {}};
    for (auto pos : positions) rs.entries.emplace_back(pos, cw.segments[pos]);
    return rs;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ncsim::Error");
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("encode: rate one is the identity") {
    const CodeParams p{4, 4, 3};
    std::mt19937_64 rng(1);
    const auto info = random_block(p, rng);
    CHECK(MdsCodec<8>(p).encode(info).segments == info.segments);
}

TEST_CASE("encode: zero in, zero out") {
    const CodeParams p{9, 4, 5};
    SegmentBlock<8> zero{p, std::vector<Segment<8>>(4, Segment<8>(5, 0))};
    for (const auto& s : MdsCodec<8>(p).encode(zero).segments) CHECK(std::all_of(s.begin(), s.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("encode: frozen values from the interpolation oracle") {
    {
        const CodeParams p{3, 2, 1};
        const auto cw = MdsCodec<8>(p).encode(one_byte_block(p, {0x01, 0x02}));
        CHECK(cw.segments[2][0] == 0x04);
    }
    {
        const CodeParams p{3, 2, 1};
        const auto cw = MdsCodec<8>(p).encode(one_byte_block(p, {0x53, 0xCA}));
        CHECK(cw.segments[2][0] == 0xE5);
    }
    {
        const CodeParams p{6, 3, 1};
        const auto cw = MdsCodec<8>(p).encode(one_byte_block(p, {0x10, 0x20, 0x30}));
        CHECK(cw.segments[3][0] == 0xCD);
        CHECK(cw.segments[4][0] == 0x79);
        CHECK(cw.segments[5][0] == 0x5D);
    }
    {
        const CodeParams p{8, 4, 1};
        const auto cw = MdsCodec<8>(p).encode(one_byte_block(p, {0xDE, 0xAD, 0xBE, 0xEF}));
        CHECK(cw.segments[4][0] == 0xD8);
        CHECK(cw.segments[5][0] == 0x42);
        CHECK(cw.segments[6][0] == 0x38);
        CHECK(cw.segments[7][0] == 0xD4);
    }
}

TEST_CASE("encode agrees with the oracle on random blocks") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        const std::size_t k = 1 + rng() % n;
        const CodeParams p{n, k, 4};
        const auto info = random_block(p, rng);
        const auto cw = MdsCodec<8>(p).encode(info);
        for (std::size_t col = 0; col < p.segment_size; ++col) {
            std::vector<unsigned> column;
            for (const auto& s : info.segments) column.push_back(s[col]);
            const auto expected = oracle_encode(column, n);
            for (std::size_t i = 0; i < n; ++i) CHECK(cw.segments[i][col] == expected[i]);
        }
    }
}

TEST_CASE("encode rejects bad input") {
    CHECK(code_of([] { MdsCodec<8>(CodeParams{300, 10, 4}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { MdsCodec<8>(CodeParams{3, 4, 4}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { MdsCodec<8>(CodeParams{3, 0, 4}); }) == ErrorCode::BadParams);
    const CodeParams p{5, 2, 4};
    SegmentBlock<8> ragged{p, {Segment<8>(4), Segment<8>(3)}};
    CHECK(code_of([&] { MdsCodec<8>(p).encode(ragged); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("decode: systematic fast path is a copy") {
    const CodeParams p{7, 3, 8};
    std::mt19937_64 rng(3);
    const auto info = random_block(p, rng);
    const MdsCodec<8> codec(p);
    const auto cw = codec.encode(info);
    CHECK(codec.decode(pick(cw, {0, 1, 2})) == info);
}

TEST_CASE("decode: all 20 position subsets of (6,3)") {
    const CodeParams p{6, 3, 16};
    std::mt19937_64 rng(11);
    const auto info = random_block(p, rng);
    const MdsCodec<8> codec(p);
    const auto cw = codec.encode(info);
    int subsets = 0;
    for_each_subset(6, 3, [&](const std::vector<std::size_t>& idx) {
        ++subsets;
        CHECK(codec.decode(pick(cw, idx)) == info);
    });
    CHECK(subsets == 20);
}

TEST_CASE("decode: too few segments") {
    const CodeParams p{6, 3, 4};
    std::mt19937_64 rng(5);
    const MdsCodec<8> codec(p);
    const auto cw = codec.encode(random_block(p, rng));
    CHECK(code_of([&] { codec.decode(pick(cw, {1, 4})); }) == ErrorCode::InsufficientSegments);
    ReceivedSet<8> dup = pick(cw, {1, 4});
    dup.entries.emplace_back(1, cw.segments[1]);
    CHECK(code_of([&] { codec.decode(dup); }) == ErrorCode::BadParams);
    ReceivedSet<8> shortseg = pick(cw, {1, 4, 5});
    shortseg.entries[0].second.pop_back();
    CHECK(code_of([&] { codec.decode(shortseg); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("hamming_distance examples") {
    const std::vector<std::uint8_t> v{9, 8, 7};
    CHECK(hamming_distance(v, v) == 0);
    CHECK(hamming_distance(std::vector<std::uint8_t>(5, 0), std::vector<std::uint8_t>(5, 1)) == 5);
    CHECK(hamming_distance(std::vector<std::uint8_t>{1, 2, 3, 4}, std::vector<std::uint8_t>{1, 0, 3, 0}) == 2);
    CHECK(code_of([] { hamming_distance(std::vector<std::uint8_t>{1}, std::vector<std::uint8_t>{1, 2}); }) ==
          ErrorCode::LengthMismatch);
}

TEST_CASE("verify_mds examples") {
    CHECK(verify_mds(CodeParams{7, 2, 1}, 3) == 6);
    CHECK(verify_mds(CodeParams{7, 1, 1}, 3) == 7);
    CHECK(verify_mds(CodeParams{5, 2, 1}, 8) == 4);
    CHECK(code_of([] { verify_mds(CodeParams{10, 3, 1}, 8); }) == ErrorCode::TooLarge);
}

TEST_CASE("verify_mds agrees with pairwise enumeration over GF(8)") {
    // All 64 codewords of the (7,2) code over GF(8), 2016 pairs.
    const CodeParams p{7, 2, 1};
    const MdsCodec<3> codec(p);
    std::vector<Segment<3>> words;
    for (unsigned a = 0; a < 8; ++a) {
        for (unsigned b = 0; b < 8; ++b) {
            const auto cw = codec.encode(SegmentBlock<3>{p, {{static_cast<std::uint8_t>(a)}, {static_cast<std::uint8_t>(b)}}});
            Segment<3> flat;
            for (const auto& s : cw.segments) flat.push_back(s[0]);
            words.push_back(flat);
        }
    }
    std::size_t best = 99, pairs = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = i + 1; j < words.size(); ++j) {
            ++pairs;
            best = std::min(best, hamming_distance<std::uint8_t>(words[i], words[j]));
        }
    }
    CHECK(pairs == 2016);
    CHECK(best == 6);
    CHECK(verify_mds(p, 3) == best);
}

TEST_CASE("Singleton equality for feasible small codes") {
    for (unsigned m : {2u, 3u, 4u}) {
        const std::size_t q = std::size_t{1} << m;
        for (std::size_t n = 1; n <= q; ++n) {
            for (std::size_t k = 1; k <= n && m * k <= 12; ++k) {
                CAPTURE(m);
                CAPTURE(n);
                CAPTURE(k);
                CHECK(verify_mds(CodeParams{n, k, 1}, m) == n - k + 1);
            }
        }
    }
}

TEST_CASE("property: every k-subset reconstructs for random (n, k)") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t n = 4 + rng() % 9; // 4..12
        const std::size_t k = 1 + rng() % n;
        const CodeParams p{n, k, 6};
        const MdsCodec<8> codec(p);
        CAPTURE(n);
        CAPTURE(k);
        std::size_t failures = 0;
        for (int block = 0; block < 100; ++block) {
            const auto info = random_block(p, rng);
            const auto cw = codec.encode(info);
            for_each_subset(n, k, [&](const std::vector<std::size_t>& idx) {
                if (!(codec.decode(pick(cw, idx)) == info)) ++failures;
            });
        }
        CHECK(failures == 0);
    }
}

TEST_CASE("property: systematic and linear") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 30;
        const std::size_t k = 1 + rng() % n;
        const CodeParams p{n, k, 8};
        const MdsCodec<8> codec(p);
        const auto a = random_block(p, rng);
        const auto b = random_block(p, rng);
        auto sum = a;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < p.segment_size; ++j) sum.segments[i][j] ^= b.segments[i][j];
        }
        const auto ca = codec.encode(a), cb = codec.encode(b), cs = codec.encode(sum);
        for (std::size_t i = 0; i < k; ++i) CHECK(ca.segments[i] == a.segments[i]);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p.segment_size; ++j) CHECK(cs.segments[i][j] == (ca.segments[i][j] ^ cb.segments[i][j]));
        }
    }
}

TEST_CASE("property: up to n-k erasures decode, n-k+1 do not") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        const std::size_t k = 1 + rng() % n;
        const CodeParams p{n, k, 3};
        const MdsCodec<8> codec(p);
        const auto info = random_block(p, rng);
        const auto cw = codec.encode(info);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t erasures = rng() % (n - k + 1);
        std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(erasures), order.end());
        CHECK(codec.decode(pick(cw, kept)) == info);
        std::vector<std::size_t> too_few(order.begin() + static_cast<std::ptrdiff_t>(n - k + 1), order.end());
        CHECK(code_of([&] { codec.decode(pick(cw, too_few)); }) == ErrorCode::InsufficientSegments);
    }
}

TEST_CASE("SegmentCodec: narrow and wide fields") {
    std::mt19937_64 rng(17);
    {
        const SegmentCodec codec(CodeParams{16, 8, 10});
        CHECK(codec.field_bits() == 8);
    }
    // n - k = 256 needs n > 256 evaluation points
    const CodeParams p{257, 1, 6};
    const SegmentCodec codec(p);
    CHECK(codec.field_bits() == 16);
    Bytes info(6);
    for (auto& v : info) v = static_cast<std::uint8_t>(rng());
    const auto cw = codec.encode({info});
    CHECK(cw.size() == 257);
    CHECK(cw[0] == info);
    CHECK(codec.decode({{200, cw[200]}}) == std::vector<Bytes>{info});

    const CodeParams p2{300, 50, 4};
    const SegmentCodec c2(p2);
    std::vector<Bytes> block(50, Bytes(4));
    for (auto& s : block) {
        for (auto& v : s) v = static_cast<std::uint8_t>(rng());
    }
    const auto cw2 = c2.encode(block);
    std::vector<std::pair<std::size_t, Bytes>> rec;
    for (std::size_t i = 250; i < 300; ++i) rec.emplace_back(i, cw2[i]);
    CHECK(c2.decode(rec) == block);
    CHECK(code_of([] { SegmentCodec(CodeParams{258, 1, 6}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { SegmentCodec(CodeParams{257, 1, 5}); }) == ErrorCode::BadParams);
}

TEST_CASE("block_from_bytes pads with zeros") {
    const CodeParams p{4, 2, 3};
    const Bytes data{1, 2, 3, 4};
    const auto b = block_from_bytes(p, data);
    CHECK(b.segments[0] == Segment<8>{1, 2, 3});
    CHECK(b.segments[1] == Segment<8>{4, 0, 0});
}
