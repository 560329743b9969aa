#pragma once

#include <map>
#include <string>
#include <vector>

#include "qv/field.hpp"

namespace qv {

/// Lattice point j*lambda1 of the weight lattice P (lambda1 = alpha/2).
/// Even j lands in the root-lattice component, odd j in the shifted one.
struct LatticeLabel {
    int j = 0;
};

/// Doubled pairing 2*(beta, gamma) under (lambda1, lambda1) = 1/2, so the
/// true pairing b.j*g.j/2 stays in exact integer arithmetic.
inline long pairing2(const LatticeLabel& b, const LatticeLabel& g) {
    return static_cast<long>(b.j) * g.j;
}

/// Heisenberg monomial tensored with a lattice label: the a(-r) factors are
/// the sorted multiset `parts` (each entry r > 0), charge is the label j.
struct FockKey {
    std::vector<int> parts;  // ascending
    int charge = 0;

    long heis_degree() const {
        long d = 0;
        for (int r : parts) d += r;
        return d;
    }
    auto operator<=>(const FockKey&) const = default;
};

/// Finite F-linear combination of Heisenberg monomials with lattice labels;
/// a state of L = L0 + L1. No zero coefficients are stored.
class FockVector {
public:
    FockVector() = default;

    /// 1 (x) e^(j*lambda1).
    static FockVector vacuum(int j);

    void add_term(const FockKey& k, const FieldElem& c);

    bool is_zero() const { return t_.empty(); }
    const std::map<FockKey, FieldElem>& terms() const { return t_; }

    FockVector operator+(const FockVector& o) const;
    FockVector operator-(const FockVector& o) const;
    FockVector& operator+=(const FockVector& o);
    FockVector operator*(const FieldElem& f) const;

    bool operator==(const FockVector& o) const { return t_ == o.t_; }
    bool operator!=(const FockVector& o) const { return !(*this == o); }

    long max_heis_degree() const;

    /// Canonical rendering: terms sorted by (degree, charge, monomial).
    std::string to_string() const;

private:
    std::map<FockKey, FieldElem> t_;
};

/// Heisenberg action: r < 0 multiplies by a(r) (a creation mode); r > 0 is
/// the derivation fixed by [a(r), a(-r)] = [2r][r]/r at level one.
FockVector heis_act(int r, const FockVector& v);

/// Lattice translation by beta. The operator for even beta carries the
/// standard cocycle sign (-1)^((beta/2-fold alpha) pairing), realized as
/// (-1)^(j*charge/2) on a charge-`charge` term; odd beta translates
/// sign-free. This makes e^alpha anticommute with e^lambda1 as the level-1
/// exchange relations require.
FockVector lattice_translate(const LatticeLabel& beta, const FockVector& v);

/// The Cartan generator K: multiplies a charge-j term by q^(alpha, j*lambda1) = q^j.
FockVector charge_act(const FockVector& v);
FockVector charge_act_inverse(const FockVector& v);

/// Splits a vector by (Heisenberg degree, charge).
std::map<std::pair<long, int>, FockVector> grade(const FockVector& v);

}  // namespace qv
