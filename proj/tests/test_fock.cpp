#include <doctest.h>

#include "qv/fock.hpp"

using namespace qv;

namespace {

FieldElem q() { return FieldElem::qpow(1); }

FockVector mono(std::vector<int> parts, int charge, FieldElem c = FieldElem(1)) {
    FockVector v;
    v.add_term(FockKey{std::move(parts), charge}, c);
    return v;
}

}  // namespace

TEST_CASE("heis_act basic") {
    FockVector vac = FockVector::vacuum(0);
    // a(1) a(-1) |0> = (q + q^-1) |0>
    FockVector w = heis_act(1, heis_act(-1, vac));
    CHECK(w == vac * (q() + FieldElem::qpow(-1)));
    // annihilator on the vacuum
    CHECK(heis_act(2, vac).is_zero());
    // Leibniz on a square: a(1) (a(-1)^2 e^alpha) = 2(q+q^-1) a(-1) e^alpha
    FockVector sq = mono({1, 1}, 2);
    CHECK(heis_act(1, sq) == mono({1}, 2) * (FieldElem(2) * (q() + FieldElem::qpow(-1))));
    CHECK_THROWS(heis_act(0, vac));
}

TEST_CASE("Heisenberg relation at level 1") {
    // Probe states up to degree 6.
    std::vector<FockVector> probes = {
        FockVector::vacuum(0), mono({1}, 0), mono({1, 2}, 1), mono({2, 4}, 2),
        mono({1, 1, 3}, 0), mono({3, 3}, -1)};
    for (int k = 1; k <= 4; ++k) {
        for (int l = 1; l <= 4; ++l) {
            for (const auto& v : probes) {
                FockVector comm = heis_act(k, heis_act(-l, v)) - heis_act(-l, heis_act(k, v));
                if (k == l) {
                    CHECK(comm == v * heis_kappa(k));
                } else {
                    CHECK(comm.is_zero());
                }
                // Same-sign modes commute.
                CHECK(heis_act(k, heis_act(l, v)) == heis_act(l, heis_act(k, v)));
                CHECK(heis_act(-k, heis_act(-l, v)) == heis_act(-l, heis_act(-k, v)));
            }
        }
    }
}

TEST_CASE("lattice translation") {
    // e^alpha on 1 (x) e^0: labels 0 -> 2.
    FockVector v0 = FockVector::vacuum(0);
    CHECK(lattice_translate({2}, v0) == FockVector::vacuum(2));
    // e^lambda1 on 1 (x) e^lambda1: labels 1 -> 2.
    CHECK(lattice_translate({1}, FockVector::vacuum(1)) == FockVector::vacuum(2));
    // e^(-lambda1) on 1 (x) e^alpha: labels 2 -> 1.
    CHECK(lattice_translate({-1}, FockVector::vacuum(2)) == FockVector::vacuum(1));
}

TEST_CASE("lattice translations commute with heis_act") {
    FockVector v = mono({1, 2}, 1);
    for (int j : {-2, -1, 1, 2}) {
        for (int r : {-2, -1, 1, 2}) {
            CHECK(lattice_translate({j}, heis_act(r, v)) ==
                  heis_act(r, lattice_translate({j}, v)));
        }
    }
}

TEST_CASE("translation operators commute up to the cocycle sign") {
    // T_alpha and T_lambda anticommute; equal labels commute trivially.
    FockVector v = FockVector::vacuum(1);
    FockVector ab = lattice_translate({2}, lattice_translate({1}, v));
    FockVector ba = lattice_translate({1}, lattice_translate({2}, v));
    CHECK(ab == ba * FieldElem(-1));
    FockVector aa = lattice_translate({2}, lattice_translate({2}, v));
    FockVector aa2 = lattice_translate({2}, lattice_translate({2}, v));
    CHECK(aa == aa2);
    // On even charges T_alpha squares consistently with sign +1 overall.
    FockVector w0 = FockVector::vacuum(0);
    CHECK(lattice_translate({2}, lattice_translate({2}, w0)) == FockVector::vacuum(4));
}

TEST_CASE("pairing") {
    CHECK(pairing2({2}, {2}) == 4);   // (alpha, alpha) = 2
    CHECK(pairing2({1}, {1}) == 1);   // (lambda1, lambda1) = 1/2
    CHECK(pairing2({2}, {1}) == 2);   // (alpha, lambda1) = 1
}

TEST_CASE("charge_act") {
    CHECK(charge_act(FockVector::vacuum(2)) == FockVector::vacuum(2) * FieldElem::qpow(2));
    CHECK(charge_act(FockVector::vacuum(0)) == FockVector::vacuum(0));
    CHECK(charge_act(FockVector::vacuum(1)) == FockVector::vacuum(1) * q());
    FockVector v = FockVector::vacuum(1);
    CHECK(charge_act_inverse(charge_act(v)) == v);
}

TEST_CASE("grade") {
    FockVector v = mono({1}, 2) + FockVector::vacuum(0) + mono({2}, 0);
    auto g = grade(v);
    CHECK(g.size() == 3);
    CHECK(g.at({1, 2}) == mono({1}, 2));
    CHECK(g.at({0, 0}) == FockVector::vacuum(0));
    CHECK(g.at({2, 0}) == mono({2}, 0));
    CHECK(grade(FockVector()).empty());
}

TEST_CASE("rendering is canonical") {
    FockVector v = mono({1, 1, 3}, 2, FieldElem(3)) + FockVector::vacuum(0);
    CHECK(v.to_string() == "(1) e[0] + (3) a(-1)^2 a(-3) e[2]");
}
