#pragma once

#include <string>

#include "qv/poly.hpp"

namespace qv {

/// Element of the coefficient field F = Q(v), v = q^(1/2), kept as a reduced
/// fraction of integer polynomials. Normal form: gcd(num, den) = 1 and the
/// leading coefficient of den is positive, so equality is structural.
class FieldElem {
public:
    FieldElem() : num_(), den_(1) {}
    FieldElem(long n) : num_(n), den_(1) {}
    FieldElem(long n, long d);
    FieldElem(const mpz_class& n, const mpz_class& d);
    explicit FieldElem(const Poly& n) : num_(n), den_(1) {}
    FieldElem(const Poly& n, const Poly& d);

    /// v^k for any integer k (negative powers go to the denominator).
    static FieldElem vpow(long k);
    /// q^k = v^(2k).
    static FieldElem qpow(long k) { return vpow(2 * k); }
    /// qq^k = q^(2k) = v^(4k), the underlined deformation parameter.
    static FieldElem qqpow(long k) { return vpow(4 * k); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    FieldElem operator-() const;
    FieldElem operator+(const FieldElem& o) const;
    FieldElem operator-(const FieldElem& o) const;
    FieldElem operator*(const FieldElem& o) const;
    FieldElem operator/(const FieldElem& o) const;
    FieldElem& operator+=(const FieldElem& o) { *this = *this + o; return *this; }
    FieldElem& operator-=(const FieldElem& o) { *this = *this - o; return *this; }
    FieldElem& operator*=(const FieldElem& o) { *this = *this * o; return *this; }
    FieldElem& operator/=(const FieldElem& o) { *this = *this / o; return *this; }

    FieldElem inverse() const;
    FieldElem pow(long e) const;

    bool operator==(const FieldElem& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const FieldElem& o) const { return !(*this == o); }
    bool operator<(const FieldElem& o) const;

    /// Value at v = 1 as an exact rational; throws if the denominator
    /// vanishes there.
    mpq_class eval_one() const;

    std::string to_string() const;
    /// Parses the grammar produced by to_string (integers, v, + - * / ^,
    /// parentheses). Throws std::invalid_argument on malformed input.
    static FieldElem parse(const std::string& s);

private:
    Poly num_, den_;
    void normalize();
};

inline FieldElem operator*(long a, const FieldElem& b) { return FieldElem(a) * b; }

// ---- q-number utilities -------------------------------------------------

/// [m]_qq = (qq^m - 1)/(qq - 1), qq = v^4; defined for every integer m.
FieldElem qq_int(long m);
/// [l]_qq! for l >= 0; throws on negative l.
FieldElem qq_factorial(long l);
/// Gaussian binomial [m][m-1]...[m-l+1]/[l]! in the qq convention.
FieldElem qq_binom(long m, long l);
/// Symmetric q-integer (q^m - q^(-m))/(q - q^(-1)), q = v^2.
FieldElem sym_q_int(long m);
/// Level-1 Heisenberg commutator scalar [2r][r]/r (symmetric convention).
FieldElem heis_kappa(long r);
/// Generalized binomial coefficient binom(e, t) for half-integer e = e2/2.
FieldElem gen_binom_half(long e2, long t);

}  // namespace qv
