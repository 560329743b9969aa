#include <doctest.h>

#include <random>

#include "qv/series.hpp"

using namespace qv;

namespace {

ScalarSeries zmono(long k, const FieldElem& c = FieldElem(1),
                   long lo = -40, long hi = 40) {
    return monomial_series(c, 2 * k, 2 * lo, 2 * hi);
}

ScalarSeries random_series(std::mt19937& rng, long lo, long hi) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    ScalarSeries s(2 * lo - 40, 2 * hi + 40);
    for (long k = lo; k <= hi; ++k) s.add_term(2 * k, FieldElem(coeff(rng)));
    return s;
}

}  // namespace

TEST_CASE("qderive of monomials") {
    // z^m -> [m]_qq z^(m-1)
    for (long m = -6; m <= 6; ++m) {
        ScalarSeries d = qderive(zmono(m));
        ScalarSeries expect = zmono(m - 1, qq_int(m));
        CHECK(equal_on_common_window(d, expect));
    }
    // Constant maps to zero.
    CHECK(qderive(zmono(0)).is_zero_on_window());
    // z^(-1) -> -qq^(-1) z^(-2), by the difference formula directly.
    ScalarSeries d = qderive(zmono(-1));
    CHECK(d.coeff_or_zero(-4) == -FieldElem::qqpow(-1));
}

TEST_CASE("qderive_n") {
    ScalarSeries two = qderive_n(zmono(2), 2);
    CHECK(two.coeff_or_zero(0) == qq_int(2) * qq_int(1));
    CHECK(equal_on_common_window(qderive_n(zmono(3), 0), zmono(3)));
    CHECK(qderive_n(zmono(3), 1).coeff_or_zero(4) == qq_int(3));
}

TEST_CASE("qderive classical limit") {
    for (long m = -6; m <= 6; ++m) {
        ScalarSeries d = qderive(zmono(m));
        CHECK(d.coeff_or_zero(2 * (m - 1)).eval_one() == m);
    }
}

TEST_CASE("qderive is linear") {
    std::mt19937 rng(5);
    ScalarSeries a = random_series(rng, -4, 4), b = random_series(rng, -4, 4);
    ScalarSeries lhs = qderive(add(a, b));
    ScalarSeries rhs = add(qderive(a), qderive(b));
    CHECK(equal_on_common_window(lhs, rhs));
}

TEST_CASE("q-Leibniz rule") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 3; ++trial) {
        ScalarSeries a = random_series(rng, -3, 3), b = random_series(rng, -3, 3);
        for (int m = 0; m <= 5; ++m) {
            ScalarSeries lhs = qderive_n(mul(a, b), m);
            ScalarSeries rhs;
            bool init = false;
            for (int l = 0; l <= m; ++l) {
                ScalarSeries term = mul(qderive_n(a, l),
                                        subst_scale(qderive_n(b, m - l), 4 * l));
                term = scale(term, qq_binom(m, l));
                rhs = init ? add(rhs, term) : term;
                init = true;
            }
            CHECK(equal_on_common_window(lhs, rhs));
        }
    }
}

TEST_CASE("nc_normal_order") {
    NCWord w = nc_normal_order({NCVar::Z2, NCVar::Z0});
    CHECK(w.scalar == FieldElem::qqpow(1));
    CHECK(w.b == 1);
    CHECK(w.c == 1);

    NCWord id = nc_normal_order({NCVar::Z, NCVar::Z0});
    CHECK(id.scalar.is_one());

    NCWord zw = nc_normal_order({NCVar::Z0, NCVar::Z});
    CHECK(zw.scalar == FieldElem::qqpow(1));
    CHECK(zw.a == 1);
    CHECK(zw.b == 1);
}

TEST_CASE("nc_binomial basic expansions") {
    auto m1 = nc_binomial(1, 8);
    REQUIRE(m1.size() == 2);
    CHECK(m1[0].scalar.is_one());
    CHECK(m1[1].scalar.is_one());

    auto m2 = nc_binomial(2, 8);
    REQUIRE(m2.size() == 3);
    CHECK(m2[1].scalar == FieldElem(1) + FieldElem::qqpow(1));

    auto neg = nc_binomial(-1, 2);
    REQUIRE(neg.size() == 3);
    CHECK(neg[0].scalar.is_one());
    CHECK(neg[1].scalar == -FieldElem::qqpow(-1));
    CHECK(neg[2].scalar == FieldElem::qqpow(-3));
}

TEST_CASE("nc_binomial m=2 against multiplication oracle") {
    // (z + z0)^2 computed by normal-ordered multiplication of (z + z0)(z + z0).
    std::vector<NCWord> prods;
    std::vector<std::vector<NCVar>> letters = {
        {NCVar::Z, NCVar::Z}, {NCVar::Z, NCVar::Z0},
        {NCVar::Z0, NCVar::Z}, {NCVar::Z0, NCVar::Z0}};
    for (auto& w : letters) prods.push_back(nc_normal_order(w));
    auto collected = nc_collect(prods);
    auto direct = nc_collect(nc_binomial(2, 4));
    REQUIRE(collected.size() == direct.size());
    for (size_t i = 0; i < collected.size(); ++i) {
        CHECK(collected[i].same_monomial(direct[i]));
        CHECK(collected[i].scalar == direct[i].scalar);
    }
}

TEST_CASE("nc products associate with accumulated qq powers") {
    NCWord x{FieldElem(1), 0, 1, 0};  // z0
    NCWord y{FieldElem(1), 1, 0, 0};  // z
    NCWord p = nc_mul(x, y);          // z0 z = qq z z0
    CHECK(p.scalar == FieldElem::qqpow(1));
    CHECK(p.a == 1);
    CHECK(p.b == 1);
}

TEST_CASE("q-Taylor matches nc_binomial coefficients") {
    for (long m = -6; m <= 6; ++m) {
        int order = 6;
        auto coeffs = qtaylor(zmono(m), order);
        auto binom = nc_binomial(m, order);
        for (int l = 0; l <= order; ++l) {
            // Coefficient of z0^l in (z + z0)^m is qq_binom(m, l) z^(m-l).
            FieldElem expect = (l < static_cast<int>(binom.size()))
                                   ? binom[l].scalar
                                   : FieldElem();
            CHECK(coeffs[l].coeff_or_zero(2 * (m - l)) == expect);
        }
    }
}

TEST_CASE("q-Taylor of a constant") {
    auto coeffs = qtaylor(zmono(0), 4);
    CHECK(equal_on_common_window(coeffs[0], zmono(0)));
    for (int l = 1; l <= 4; ++l) CHECK(coeffs[l].is_zero_on_window());
}

TEST_CASE("q-Taylor of z^-1 at order 1") {
    auto coeffs = qtaylor(zmono(-1), 1);
    CHECK(coeffs[1].coeff_or_zero(-4) == -FieldElem::qqpow(-1));
}

TEST_CASE("series windows") {
    ScalarSeries a(-4, 4);
    a.add_term(0, FieldElem(1));
    a.add_term(10, FieldElem(5));  // outside the window: dropped
    CHECK(a.coeff(10) == nullptr);
    ScalarSeries b(-2, 8);
    b.add_term(0, FieldElem(2));
    ScalarSeries s = add(a, b);
    CHECK(s.lo2 == -2);
    CHECK(s.hi2 == 4);
    ScalarSeries empty_window(4, 2);
    CHECK(empty_window.window_empty());
    CHECK_THROWS(equal_on_common_window(a, ScalarSeries(6, 8)));
}
