// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "ncsim/error.hpp"

namespace ncsim {

/// Default primitive polynomials for GF(2^m), 2 <= m <= 16, bit m set.
constexpr std::uint32_t default_primitive_polynomial(unsigned m) {
    constexpr std::array<std::uint32_t, 17> polys = {
        0, 0,
        0x7,     // x^2+x+1
        0xB,     // x^3+x+1
        0x13,    // x^4+x+1
        0x25,    // x^5+x^2+1
        0x43,    // x^6+x+1
        0x89,    // x^7+x^3+1
        0x11D,   // x^8+x^4+x^3+x^2+1
        0x211,   // x^9+x^4+1
        0x409,   // x^10+x^3+1
        0x805,   // x^11+x^2+1
        0x1053,  // x^12+x^6+x^4+x+1
        0x201B,  // x^13+x^4+x^3+x+1
        0x4443,  // x^14+x^10+x^6+x+1
        0x8003,  // x^15+x+1
        0x1100B, // x^16+x^12+x^3+x+1
    };
    return m < polys.size() ? polys[m] : 0;
}

/// Carry-less multiply of two field representatives followed by reduction
/// modulo `poly`. Slow; used to build the tables.
constexpr std::uint32_t poly_mul_mod(std::uint32_t a, std::uint32_t b, unsigned m, std::uint32_t poly) {
    std::uint32_t acc = 0;
    while (b != 0) {
        if (b & 1u) acc ^= a;
        b >>= 1;
        a <<= 1;
        if (a & (1u << m)) a ^= poly;
    }
    return acc;
}

template <unsigned M>
using symbol_t = std::conditional_t<(M <= 8), std::uint8_t, std::uint16_t>;

/// exp/log tables of GF(2^M). exp is stored twice over so that
/// exp[log a + log b] needs no reduction.
template <unsigned M>
struct FieldTables {
    static_assert(M >= 2 && M <= 16, "GF(2^m) supported for 2 <= m <= 16");

    static constexpr std::uint32_t order = 1u << M;       // q
    static constexpr std::uint32_t group_order = order - 1; // q - 1
    static constexpr std::uint32_t polynomial = default_primitive_polynomial(M);

    std::vector<symbol_t<M>> exp;   // 2 * (q - 1) entries
    std::vector<std::uint32_t> log; // q entries, log[0] unused

    FieldTables() : exp(2 * group_order), log(order, 0) {
        std::uint32_t x = 1;
        for (std::uint32_t i = 0; i < group_order; ++i) {
            exp[i] = static_cast<symbol_t<M>>(x);
            exp[i + group_order] = static_cast<symbol_t<M>>(x);
            log[x] = i;
            x = poly_mul_mod(x, 2, M, polynomial);
        }
    }

    static const FieldTables& instance() {
        static const FieldTables tables;
        return tables;
    }
};

/// Element of GF(2^M), a polynomial over GF(2) reduced by the field's
/// primitive polynomial.
template <unsigned M>
class FieldElement {
public:
    using value_type = symbol_t<M>;
    static constexpr unsigned bits = M;
    static constexpr std::uint32_t order = 1u << M;

    constexpr FieldElement() = default;
    constexpr explicit FieldElement(std::uint32_t v) : value_(static_cast<value_type>(v)) {
        if (v >= order) throw Error(ErrorCode::BadParams, "field element out of range");
    }

    constexpr value_type value() const { return value_; }
    constexpr bool is_zero() const { return value_ == 0; }

    static constexpr FieldElement zero() { return FieldElement(0); }
    static constexpr FieldElement one() { return FieldElement(1); }
    /// The primitive element alpha (the polynomial x).
    static constexpr FieldElement alpha() { return FieldElement(2); }

    friend constexpr bool operator==(FieldElement, FieldElement) = default;

private:
    value_type value_ = 0;
};

using GF256 = FieldElement<8>;

template <unsigned M>
constexpr FieldElement<M> gf_add(FieldElement<M> a, FieldElement<M> b) {
    return FieldElement<M>(static_cast<std::uint32_t>(a.value() ^ b.value()));
}

template <unsigned M>
FieldElement<M> gf_mul(FieldElement<M> a, FieldElement<M> b) {
    if (a.is_zero() || b.is_zero()) return FieldElement<M>::zero();
    const auto& t = FieldTables<M>::instance();
    return FieldElement<M>(t.exp[t.log[a.value()] + t.log[b.value()]]);
}

template <unsigned M>
FieldElement<M> gf_inv(FieldElement<M> a) {
    if (a.is_zero()) throw Error(ErrorCode::ZeroInverse, "inverse of zero requested");
    const auto& t = FieldTables<M>::instance();
    return FieldElement<M>(t.exp[(FieldTables<M>::group_order - t.log[a.value()]) % FieldTables<M>::group_order]);
}

template <unsigned M>
FieldElement<M> gf_div(FieldElement<M> a, FieldElement<M> b) {
    return gf_mul(a, gf_inv(b));
}

template <unsigned M>
FieldElement<M> gf_pow(FieldElement<M> a, long long e) {
    if (e == 0) return FieldElement<M>::one();
    if (a.is_zero()) {
        if (e < 0) throw Error(ErrorCode::ZeroInverse, "zero raised to a negative power");
        return FieldElement<M>::zero();
    }
    const auto& t = FieldTables<M>::instance();
    constexpr long long n = FieldTables<M>::group_order;
    long long idx = (static_cast<long long>(t.log[a.value()]) * (e % n)) % n;
    if (idx < 0) idx += n;
    return FieldElement<M>(t.exp[static_cast<std::size_t>(idx)]);
}

template <unsigned M>
constexpr FieldElement<M> operator+(FieldElement<M> a, FieldElement<M> b) { return gf_add(a, b); }
template <unsigned M>
constexpr FieldElement<M> operator-(FieldElement<M> a, FieldElement<M> b) { return gf_add(a, b); }
template <unsigned M>
FieldElement<M> operator*(FieldElement<M> a, FieldElement<M> b) { return gf_mul(a, b); }
template <unsigned M>
FieldElement<M> operator/(FieldElement<M> a, FieldElement<M> b) { return gf_div(a, b); }
template <unsigned M>
FieldElement<M>& operator+=(FieldElement<M>& a, FieldElement<M> b) { return a = a + b; }
template <unsigned M>
FieldElement<M>& operator*=(FieldElement<M>& a, FieldElement<M> b) { return a = a * b; }

/// Multiply-accumulate of a whole row: dst[i] ^= c * src[i].
/// Inner loop of the codec.
template <unsigned M>
void gf_axpy(FieldElement<M> c, const symbol_t<M>* src, symbol_t<M>* dst, std::size_t len) {
    if (c.is_zero()) return;
    if (c == FieldElement<M>::one()) {
        for (std::size_t i = 0; i < len; ++i) dst[i] ^= src[i];
        return;
    }
    const auto& t = FieldTables<M>::instance();
    const std::uint32_t lc = t.log[c.value()];
    for (std::size_t i = 0; i < len; ++i) {
        if (src[i] != 0) dst[i] ^= t.exp[lc + t.log[src[i]]];
    }
}

} // namespace ncsim
