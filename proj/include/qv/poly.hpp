#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace qv {

/// Dense univariate polynomial over Z, coefficients stored lowest degree
/// first with no trailing zeros. The zero polynomial has an empty
/// coefficient vector and degree -1.
class Poly {
public:
    Poly() = default;
    Poly(long c) { if (c != 0) c_.push_back(mpz_class(c)); }
    Poly(const mpz_class& c) { if (c != 0) c_.push_back(c); }

    static Poly monomial(const mpz_class& c, int deg);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_one() const { return c_.size() == 1 && c_[0] == 1; }

    const mpz_class& coeff(int i) const;
    const mpz_class& lead() const { return c_.back(); }

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    bool operator==(const Poly& o) const { return c_ == o.c_; }
    bool operator!=(const Poly& o) const { return c_ != o.c_; }
    bool operator<(const Poly& o) const;

    /// Quotient of an exact division; aborts if the division has a remainder.
    Poly divexact(const Poly& d) const;

    /// Positive gcd of all coefficients (0 for the zero polynomial).
    mpz_class content() const;
    Poly primitive_part() const;

    /// gcd in Z[v], normalized with positive leading coefficient.
    static Poly gcd(const Poly& a, const Poly& b);

    /// Value at v = 1 (used for classical-limit checks).
    mpz_class eval_one() const;

    /// Lowest exponent with a nonzero coefficient (0 for the zero poly).
    int low_order() const;

    std::string to_string(const std::string& var = "v") const;

private:
    std::vector<mpz_class> c_;
    void trim();
    // Pseudo-remainder of a by b (b nonzero), used by the primitive PRS gcd.
    static Poly prem(const Poly& a, const Poly& b);
};

}  // namespace qv
