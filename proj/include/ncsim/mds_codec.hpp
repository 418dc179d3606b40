// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ncsim/error.hpp"
#include "ncsim/galois_field.hpp"

namespace ncsim {

/// Geometry of an (n, k) code whose symbols are whole segments.
struct CodeParams {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t segment_size = 0; ///< symbols (bytes for m = 8) per segment

    std::size_t redundancy() const { return n - k; }
    double rate() const { return static_cast<double>(k) / static_cast<double>(n); }
    std::size_t min_distance() const { return n - k + 1; }

    friend bool operator==(const CodeParams&, const CodeParams&) = default;
};

/// At most 256 redundancy segments fit the 8-bit symbol indicator,
/// which bounds the rate at k/(k+256) >= 1/257.
inline constexpr std::size_t max_redundancy = 256;

/// Throws BadParams unless 1 <= k <= n <= 2^m, n - k <= 256 and
/// segment_size >= 1.
inline void validate(const CodeParams& p, unsigned m) {
    const std::size_t q = std::size_t{1} << m;
    if (p.k < 1 || p.k > p.n)
        throw Error(ErrorCode::BadParams, "need 1 <= k <= n, got n=" + std::to_string(p.n) + " k=" + std::to_string(p.k));
    if (p.n > q)
        throw Error(ErrorCode::BadParams, "n=" + std::to_string(p.n) + " exceeds field size " + std::to_string(q));
    if (p.n - p.k > max_redundancy)
        throw Error(ErrorCode::BadParams, "n-k=" + std::to_string(p.n - p.k) + " exceeds 256 redundancy segments");
    if (p.segment_size < 1) throw Error(ErrorCode::BadParams, "segment_size must be positive");
}

template <unsigned M>
using Segment = std::vector<symbol_t<M>>;

/// k information segments.
template <unsigned M>
struct SegmentBlock {
    CodeParams params;
    std::vector<Segment<M>> segments;
    friend bool operator==(const SegmentBlock&, const SegmentBlock&) = default;
};

/// n coded segments; the first k are the information segments.
template <unsigned M>
struct Codeword {
    CodeParams params;
    std::vector<Segment<M>> segments;
    friend bool operator==(const Codeword&, const Codeword&) = default;
};

/// Segments that survived the channel, tagged with their codeword position.
template <unsigned M>
struct ReceivedSet {
    CodeParams params;
    std::vector<std::pair<std::size_t, Segment<M>>> entries;
};

/// Systematic Reed-Solomon erasure code over GF(2^M), applied independently
/// to every symbol column of the segments.
///
/// Position i of the codeword is the evaluation of the unique polynomial of
/// degree < k through the k information symbols at the point x_i, where
/// x_i = alpha^i for i < 2^M - 1 and x_{2^M - 1} = 0. The first k points
/// carry the information symbols themselves.
template <unsigned M>
class MdsCodec {
public:
    using Element = FieldElement<M>;
    using Symbol = symbol_t<M>;

    explicit MdsCodec(CodeParams params) : params_(params) {
        validate(params_, M);
        points_.reserve(params_.n);
        for (std::size_t i = 0; i < params_.n; ++i) {
            points_.push_back(i < Element::order - 1 ? gf_pow(Element::alpha(), static_cast<long long>(i))
                                                     : Element::zero());
        }
        // parity_[r][i] = L_i(x_{k+r}) with L_i the Lagrange basis over x_0..x_{k-1}
        std::vector<std::size_t> info(params_.k);
        for (std::size_t i = 0; i < params_.k; ++i) info[i] = i;
        parity_ = lagrange_rows(info, std::vector<Element>(points_.begin() + static_cast<std::ptrdiff_t>(params_.k),
                                                          points_.end()));
    }

    const CodeParams& params() const { return params_; }
    Element point(std::size_t i) const { return points_.at(i); }

    Codeword<M> encode(const SegmentBlock<M>& info) const {
        if (!(info.params == params_)) throw Error(ErrorCode::BadParams, "block parameters differ from codec");
        if (info.segments.size() != params_.k)
            throw Error(ErrorCode::BadParams, "block must hold exactly k segments");
        for (const auto& s : info.segments) check_segment(s);

        Codeword<M> cw{params_, info.segments};
        cw.segments.resize(params_.n, Segment<M>(params_.segment_size, 0));
        for (std::size_t r = 0; r < params_.redundancy(); ++r) {
            auto& out = cw.segments[params_.k + r];
            for (std::size_t i = 0; i < params_.k; ++i) {
                gf_axpy<M>(parity_[r][i], info.segments[i].data(), out.data(), params_.segment_size);
            }
        }
        return cw;
    }

    SegmentBlock<M> decode(const ReceivedSet<M>& received) const {
        if (!(received.params == params_)) throw Error(ErrorCode::BadParams, "received set parameters differ from codec");

        // Slot per position; information positions are preferred.
        std::vector<const Segment<M>*> at(params_.n, nullptr);
        for (const auto& [pos, seg] : received.entries) {
            if (pos >= params_.n) throw Error(ErrorCode::BadParams, "position " + std::to_string(pos) + " out of range");
            if (at[pos] != nullptr) throw Error(ErrorCode::BadParams, "duplicate position " + std::to_string(pos));
            check_segment(seg);
            at[pos] = &seg;
        }
        std::vector<std::size_t> chosen;
        for (std::size_t pos = 0; pos < params_.n && chosen.size() < params_.k; ++pos) {
            if (at[pos] != nullptr) chosen.push_back(pos);
        }
        if (chosen.size() < params_.k) {
            throw Error(ErrorCode::InsufficientSegments,
                        std::to_string(chosen.size()) + " segments received, " + std::to_string(params_.k) + " needed");
        }

        SegmentBlock<M> out{params_, std::vector<Segment<M>>(params_.k)};
        std::vector<std::size_t> missing;
        std::vector<Element> missing_points;
        for (std::size_t i = 0; i < params_.k; ++i) {
            if (at[i] != nullptr) {
                out.segments[i] = *at[i];
            } else {
                missing.push_back(i);
                missing_points.push_back(points_[i]);
            }
        }
        if (missing.empty()) return out;

        const auto rows = lagrange_rows(chosen, missing_points);
        for (std::size_t r = 0; r < missing.size(); ++r) {
            auto& seg = out.segments[missing[r]];
            seg.assign(params_.segment_size, 0);
            for (std::size_t j = 0; j < chosen.size(); ++j) {
                gf_axpy<M>(rows[r][j], at[chosen[j]]->data(), seg.data(), params_.segment_size);
            }
        }
        return out;
    }

private:
    void check_segment(const Segment<M>& s) const {
        if (s.size() != params_.segment_size)
            throw Error(ErrorCode::LengthMismatch, "segment of " + std::to_string(s.size()) + " symbols, expected " +
                                                       std::to_string(params_.segment_size));
        if constexpr (M < 8) {
            for (Symbol v : s) {
                if (v >= Element::order) throw Error(ErrorCode::BadParams, "symbol outside the field");
            }
        }
    }

    /// Rows of Lagrange basis values over points_[positions], one row per
    /// evaluation point in xs. Barycentric form:
    /// L_a(x) = w_a / (x - x_a) * prod_b (x - x_b), w_a = 1 / prod_{b != a} (x_a - x_b).
    std::vector<std::vector<Element>> lagrange_rows(const std::vector<std::size_t>& positions,
                                                    const std::vector<Element>& xs) const {
        const std::size_t count = positions.size();
        std::vector<Element> weights(count, Element::one());
        for (std::size_t a = 0; a < count; ++a) {
            const Element xa = points_[positions[a]];
            Element den = Element::one();
            for (std::size_t b = 0; b < count; ++b) {
                if (a != b) den *= xa - points_[positions[b]];
            }
            weights[a] = gf_inv(den);
        }

        std::vector<std::vector<Element>> rows;
        rows.reserve(xs.size());
        for (const Element x : xs) {
            std::vector<Element> row(count, Element::zero());
            std::size_t hit = count;
            Element full = Element::one();
            for (std::size_t b = 0; b < count; ++b) {
                const Element diff = x - points_[positions[b]];
                if (diff.is_zero()) hit = b;
                full *= diff;
            }
            if (hit != count) {
                row[hit] = Element::one();
            } else {
                for (std::size_t a = 0; a < count; ++a) row[a] = full * weights[a] / (x - points_[positions[a]]);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

    CodeParams params_;
    std::vector<Element> points_;
    std::vector<std::vector<Element>> parity_;
};

/// The byte-oriented codec used by the protocol layer.
using ByteCodec = MdsCodec<8>;

/// Number of coordinates in which a and b differ.
template <typename T>
std::size_t hamming_distance(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "vectors of different length");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
    return d;
}

inline std::size_t hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    return hamming_distance<std::uint8_t>(std::span<const std::uint8_t>(a), std::span<const std::uint8_t>(b));
}

/// Exhaustive enumeration bound for verify_mds.
inline constexpr std::uint64_t verify_mds_limit = std::uint64_t{1} << 20;

/// Measures the minimum distance of the code (n, k) over GF(2^field_m) by
/// enumerating all q^k codewords with one-symbol segments. Uses linearity:
/// the minimum distance equals the minimum weight of a nonzero codeword.
/// Throws TooLarge when q^k exceeds 2^20.
std::size_t verify_mds(const CodeParams& params, unsigned field_m);

using Bytes = std::vector<std::uint8_t>;

/// Erasure codec over byte segments. Codes every byte column over GF(2^8)
/// when n <= 256; longer codewords need more evaluation points, so they code
/// big-endian byte pairs over GF(2^16) and require an even segment_size.
class SegmentCodec {
public:
    explicit SegmentCodec(CodeParams params);

    const CodeParams& params() const { return params_; }
    unsigned field_bits() const { return std::holds_alternative<MdsCodec<8>>(codec_) ? 8 : 16; }

    /// k segments of segment_size bytes in, n out.
    std::vector<Bytes> encode(const std::vector<Bytes>& info) const;
    /// At least k (position, segment) pairs in, the k information segments out.
    std::vector<Bytes> decode(const std::vector<std::pair<std::size_t, Bytes>>& received) const;

private:
    CodeParams params_;
    std::variant<MdsCodec<8>, MdsCodec<16>> codec_;
};

/// Splits `data` into a k-segment block, zero-padding the tail.
SegmentBlock<8> block_from_bytes(const CodeParams& params, std::span<const std::uint8_t> data);

} // namespace ncsim
