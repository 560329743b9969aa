#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qv/field.hpp"

namespace qv {

/// qq-integer for a half-integer exponent k2/2: (qq^(k2/2) - 1)/(qq - 1).
inline FieldElem qq_int_half(long k2) {
    return (FieldElem::vpow(2 * k2) - FieldElem(1)) /
           (FieldElem::qqpow(1) - FieldElem(1));
}

/// Truncated formal Laurent series with half-integer exponents. Exponents
/// are stored doubled (z^(k2/2) under key k2). Every series carries the
/// closed window [lo2, hi2] on which its coefficients are exact; entries
/// outside the window are meaningless and never stored.
template <class T>
struct CoeffSeries {
    std::map<long, T> c;
    long lo2 = 0, hi2 = -1;  // empty window by default

    CoeffSeries() = default;
    CoeffSeries(long lo, long hi) : lo2(lo), hi2(hi) {}

    bool window_empty() const { return lo2 > hi2; }

    void add_term(long k2, const T& v) {
        if (v.is_zero()) return;
        if (k2 < lo2 || k2 > hi2) return;  // outside the exact window
        auto it = c.find(k2);
        if (it == c.end()) {
            c.emplace(k2, v);
        } else {
            it->second += v;
            if (it->second.is_zero()) c.erase(it);
        }
    }

    const T* coeff(long k2) const {
        auto it = c.find(k2);
        return it == c.end() ? nullptr : &it->second;
    }

    T coeff_or_zero(long k2) const {
        auto it = c.find(k2);
        return it == c.end() ? T() : it->second;
    }

    bool is_zero_on_window() const { return c.empty(); }
};

using ScalarSeries = CoeffSeries<FieldElem>;

ScalarSeries monomial_series(const FieldElem& a, long k2, long lo2, long hi2);

ScalarSeries add(const ScalarSeries& a, const ScalarSeries& b);
ScalarSeries scale(const ScalarSeries& a, const FieldElem& f);
/// Substitution z -> z * v^uv: multiplies the coefficient at z^(k2/2) by
/// v^(uv*k2/2); requires uv*k2 even for every stored exponent.
ScalarSeries subst_scale(const ScalarSeries& a, long uv);
ScalarSeries mul(const ScalarSeries& a, const ScalarSeries& b);

/// The q-derivation (a(z*qq) - a(z))/(z*(qq-1)): coefficient at z^k maps to
/// [k]_qq times itself at z^(k-1); the window shifts down by one.
ScalarSeries qderive(const ScalarSeries& a);
ScalarSeries qderive_n(const ScalarSeries& a, int n);

/// q-Taylor coefficients: entry l is qderive_n(a, l)/[l]_qq!, the
/// coefficient of z0^l in a(z + z0) under the noncommutative constraint.
std::vector<ScalarSeries> qtaylor(const ScalarSeries& a, int order);

bool equal_on_common_window(const ScalarSeries& a, const ScalarSeries& b);

// ---- noncommutative monomials in z, z0, z2 -------------------------------

enum class NCVar { Z, Z0, Z2 };

/// Monomial scalar * z^a * z0^b * z2^c in the fixed normal order
/// z before z0 before z2; reordering picks up one factor qq per
/// transposition (z2 z0 = qq z0 z2, z2 z = qq z z2, z0 z = qq z z0).
struct NCWord {
    FieldElem scalar;
    int a = 0, b = 0, c = 0;

    bool same_monomial(const NCWord& o) const { return a == o.a && b == o.b && c == o.c; }
    std::string to_string() const;
};

/// Normal-orders a word of variables, accumulating qq per transposition.
NCWord nc_normal_order(const std::vector<NCVar>& word);

/// Collects a list of words into normal form, merging equal monomials.
std::vector<NCWord> nc_collect(std::vector<NCWord> words);

/// Product of two normal-ordered words (moves the z/z0 block of the right
/// factor left past the z0/z2 block of the left factor).
NCWord nc_mul(const NCWord& x, const NCWord& y);

/// (z + z0)^m expanded in nonnegative powers of z0; for m < 0 the infinite
/// expansion is truncated at z0^order.
std::vector<NCWord> nc_binomial(long m, int order);

}  // namespace qv
