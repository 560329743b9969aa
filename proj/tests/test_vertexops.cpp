#include <doctest.h>

#include "qv/vertexops.hpp"

using namespace qv;

namespace {

FockVector vac(int j) { return FockVector::vacuum(j); }

FockVector mono(std::vector<int> parts, int charge, FieldElem c = FieldElem(1)) {
    FockVector v;
    v.add_term(FockKey{std::move(parts), charge}, c);
    return v;
}

Box box2(long lo, long hi) {
    Box b;
    b.lo2 = {2 * lo, 2 * lo};
    b.hi2 = {2 * hi, 2 * hi};
    return b;
}

}  // namespace

TEST_CASE("contraction table matches the mode-commutator series") {
    // The closed forms (1-tau)^(a/2) (1-q^-2 tau)^(b/2) must have
    // log-coefficient -(a/2 + (b/2) q^(-2r))/r at tau^r, which is the exact
    // commutator sum c_ann(r) c_cre(r) [2r][r]/r.
    std::vector<ExpRule> anns = {ExpRule::FJPlus, ExpRule::KoyPlus, ExpRule::EHatPlus,
                                 ExpRule::KHat};
    std::vector<ExpRule> cres = {ExpRule::FJMinus, ExpRule::KoyMinus, ExpRule::EHatMinus};
    int checked = 0;
    for (auto a : anns) {
        for (auto c : cres) {
            auto closed = contraction_closed(a, c);
            if (!closed) continue;
            for (int r = 1; r <= 8; ++r) {
                FieldElem lhs = contraction_log_coeff(a, c, r);
                FieldElem rhs = -(FieldElem(closed->first, 2) +
                                  FieldElem(closed->second, 2) * FieldElem::qpow(-2 * r)) /
                                FieldElem(r);
                CHECK(lhs == rhs);
            }
            ++checked;
        }
    }
    CHECK(checked == 9);
}

TEST_CASE("x(z) on the vacuum") {
    OperatorExpr x = OperatorExpr::make("x");
    auto s = apply_truncated(x, vac(0), -6, 6);
    CHECK(s.coeff_or_zero(0) == vac(2));
    // coeff of z^1 is q^(-1/2)/[1] a(-1) e^alpha
    CHECK(s.coeff_or_zero(2) == mono({1}, 2, FieldElem::vpow(-1)));
    CHECK(s.coeff_or_zero(-2).is_zero());
}

TEST_CASE("x(z) on e^alpha starts at z^2") {
    OperatorExpr x = OperatorExpr::make("x");
    auto s = apply_truncated(x, vac(2), -8, 8);
    CHECK(s.coeff_or_zero(4) == vac(4));
    for (long k2 = -8; k2 < 4; ++k2) CHECK(s.coeff_or_zero(k2).is_zero());
}

TEST_CASE("Y(z) on the vacuum") {
    OperatorExpr y = OperatorExpr::make("Y");
    auto s = apply_truncated(y, vac(0), -4, 4);
    CHECK(s.coeff_or_zero(0) == vac(1));
}

TEST_CASE("Y(z) on an odd state has half-integer exponents") {
    OperatorExpr y = OperatorExpr::make("Y");
    auto s = apply_truncated(y, vac(1), -4, 4);
    // z^(d lambda) on e^lambda gives z^(1/2): doubled exponent 1.
    CHECK(s.coeff_or_zero(1) == vac(2));
    CHECK(s.coeff_or_zero(0).is_zero());
}

TEST_CASE("joint table equals nested single applications") {
    // Brute-force oracle: the joint coefficient of z1^k1 z2^k2 in
    // A(z1)B(z2) v must equal extracting k2 from B v, then k1 from A (.).
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"x", "x"}, {"x", "Y"}, {"x_hat", "x_hat"}, {"x_hat", "Y_hat"}};
    std::vector<FockVector> probes = {vac(0), mono({1}, 0), vac(2)};
    for (const auto& [an, bn] : pairs) {
        OperatorExpr A = OperatorExpr::make(an), B = OperatorExpr::make(bn);
        for (const auto& v : probes) {
            JointTable t = product_apply({A, B}, v, box2(-3, 3));
            for (long k1 = -6; k1 <= 6; ++k1) {
                for (long k2 = -6; k2 <= 6; ++k2) {
                    FockVector inner = apply_truncated(B, v, k2, k2).coeff_or_zero(k2);
                    FockVector nested = apply_truncated(A, inner, k1, k1).coeff_or_zero(k1);
                    const FockVector* joint = t.coeff({k1, k2});
                    FockVector jv = joint ? *joint : FockVector();
                    CHECK(jv == nested);
                }
            }
        }
    }
}

TEST_CASE("scale substitution rescales coefficients") {
    OperatorExpr x = OperatorExpr::make("x");
    OperatorExpr xs = x.scale_subst(4);  // x(z*qq)
    for (const FockVector& v : {vac(0), mono({1}, 0), vac(2)}) {
        auto s0 = apply_truncated(x, v, -8, 8);
        auto s1 = apply_truncated(xs, v, -8, 8);
        for (long k2 = -8; k2 <= 8; ++k2) {
            // coeff_k(a(z u) v) = u^k coeff_k(a(z) v); u = qq = v^4, k = k2/2.
            CHECK(s1.coeff_or_zero(k2) == s0.coeff_or_zero(k2) * FieldElem::vpow(2 * k2));
        }
    }
    // Composition of substitutions.
    OperatorExpr a = x.scale_subst(4).scale_subst(-8);
    OperatorExpr b = x.scale_subst(-4);
    auto sa = apply_truncated(a, vac(0), -4, 4);
    auto sb = apply_truncated(b, vac(0), -4, 4);
    for (long k2 = -4; k2 <= 4; ++k2) CHECK(sa.coeff_or_zero(k2) == sb.coeff_or_zero(k2));
}

TEST_CASE("quantum integrability x(z)x(z) and x(z)x(z qq) vanish") {
    OperatorExpr x = OperatorExpr::make("x");
    OperatorExpr xx = x.concat(x);
    OperatorExpr xxq = x.concat(x.scale_subst(4));
    for (const FockVector& v : {vac(0), mono({1}, 0), vac(2)}) {
        CHECK(eval_diag(xx, v, -16, 16).is_zero_on_window());
        CHECK(eval_diag(xxq, v, -16, 16).is_zero_on_window());
    }
}

TEST_CASE("normal-ordered products") {
    OperatorExpr x = OperatorExpr::make("x");
    // :x(z): = x(z)
    auto no1 = normal_ordered_apply({{x, 0}}, vac(0), -6, 6);
    auto d1 = apply_truncated(x, vac(0), -6, 6);
    for (long k2 = -6; k2 <= 6; ++k2)
        CHECK(no1.coeff_or_zero(k2) == d1.coeff_or_zero(k2));
    // :x(z)x(z qq): is nonzero even though x(z)x(z qq) = 0.
    auto no2 = normal_ordered_apply({{x, 0}, {x, 4}}, vac(0), 0, 12);
    CHECK(!no2.is_zero_on_window());
    CHECK(!no2.coeff_or_zero(4).is_zero());
    auto full = eval_diag(x.concat(x.scale_subst(4)), vac(0), 0, 12);
    CHECK(full.is_zero_on_window());
    // :x_hat(z)x_hat(z): is nonzero although x_hat(z)^2 = 0.
    OperatorExpr xh = OperatorExpr::make("x_hat");
    auto no3 = normal_ordered_apply({{xh, 0}, {xh, 0}}, vac(0), 0, 12);
    CHECK(!no3.is_zero_on_window());
}

TEST_CASE("relation r1 on probes") {
    OperatorExpr x = OperatorExpr::make("x");
    for (const FockVector& v : {vac(0), mono({1}, 0), vac(2)}) {
        JointTable lhs = product_apply({x, x}, v, box2(-5, 5));
        Box enlarged;
        enlarged.lo2 = {-14, -14};
        enlarged.hi2 = {10, 10};
        OperatorExpr prod = x.retag(0).concat(x.retag(1));
        JointTable no = eval_box(prod, v, enlarged, true);
        // (z1 - z2)(z1 - q^-2 z2) = z1^2 - (1 + q^-2) z1 z2 + q^-2 z2^2
        TablePoly p = {{{4, 0}, FieldElem(1)},
                       {{2, 2}, -(FieldElem(1) + FieldElem::qpow(-2))},
                       {{0, 4}, FieldElem::qpow(-2)}};
        JointTable rhs = table_mul_poly(no, p);
        CHECK(!table_diff(lhs, rhs).has_value());
    }
}

TEST_CASE("relation r2 on probes, both orders") {
    OperatorExpr x = OperatorExpr::make("x");
    OperatorExpr y = OperatorExpr::make("Y");
    for (const FockVector& v : {vac(0), mono({1}, 0), vac(2)}) {
        JointTable xy = eval_box(x.retag(0).concat(y.retag(1)), v, box2(-4, 4), false);
        JointTable yx = eval_box(y.retag(1).concat(x.retag(0)), v, box2(-4, 4), false);
        CHECK(!table_diff(xy, yx).has_value());
        Box enlarged;
        enlarged.lo2 = {-12, -12};
        enlarged.hi2 = {8, 8};
        JointTable no = eval_box(x.retag(0).concat(y.retag(1)), v, enlarged, true);
        TablePoly p = {{{2, 0}, FieldElem(1)}, {{0, 2}, FieldElem(-1)}};
        JointTable rhs = table_mul_poly(no, p);
        CHECK(!table_diff(xy, rhs).has_value());
    }
}

TEST_CASE("make_operator rejects unknown names") {
    CHECK_THROWS(OperatorExpr::make("BOGUS"));
}

TEST_CASE("qderive of an operator expression") {
    // (x(z qq) - x(z))/(z(qq-1)) evaluated coefficientwise:
    // coeff_k(x^[1] v) = [k+1]_qq coeff_{k+1}(x v).
    OperatorExpr x = OperatorExpr::make("x");
    OperatorExpr dx = x.qderive();
    for (const FockVector& v : {vac(0), vac(2)}) {
        auto s = apply_truncated(x, v, -8, 10);
        auto d = apply_truncated(dx, v, -8, 8);
        for (long k2 = -6; k2 <= 6; k2 += 2) {
            FockVector expect = s.coeff_or_zero(k2 + 2) * qq_int_half(k2 + 2);
            CHECK(d.coeff_or_zero(k2) == expect);
        }
    }
}

TEST_CASE("table utilities") {
    OperatorExpr x = OperatorExpr::make("x");
    JointTable t = product_apply({x, x}, vac(0), box2(-3, 3));
    JointTable sh = table_shift(t, 0, 2);
    for (const auto& [k, v] : t.c) {
        if (k[0] + 2 <= sh.hi2[0]) {
            const FockVector* w = sh.coeff({k[0] + 2, k[1]});
            REQUIRE(w != nullptr);
            CHECK(*w == v);
        }
    }
    JointTable dv = table_deriv(t, 0, 1);
    for (const auto& [k, v] : dv.c) {
        const FockVector* orig = t.coeff({k[0] + 2, k[1]});
        REQUIRE(orig != nullptr);
        CHECK(v == *orig * FieldElem(k[0] + 2, 2));
    }
    // Diagonal sum over the x-x table vanishes (the z1, z2 -> z limit).
    auto diag = table_diag_sum(t, -6, 6);
    CHECK(diag.is_zero_on_window());
}
