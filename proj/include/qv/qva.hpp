#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qv/vertexops.hpp"

namespace qv {

/// r-th product of the nonlocal qq-vertex algebra: zero for r >= 0, and
/// (1/[n]_qq!) a^[n](z) b(z qq^n) with n = -r-1 for r < 0.
OperatorExpr rth_product(const OperatorExpr& a, const OperatorExpr& b, long r);

/// Coefficients of z0^0..z0^order of Y(a(z), z0): entry r is a(z)_{-r-1},
/// i.e. (1/[r]_qq!) a^[r](z).
std::vector<OperatorExpr> Ymap(const OperatorExpr& a, int order);

// ---- monomials -------------------------------------------------------------

enum class Flavor { XHat, X };
enum class Tail { Unit, Y, YHat };

/// One spanning-set element: a tail (1, Y or Y_hat) with an integer index
/// list (l_m, ..., l_1) applied in x or x_hat products. `indices` is stored
/// in operator order (leftmost factor first), so l_1 = indices.back().
struct QVAMonomial {
    Flavor flavor = Flavor::X;
    std::vector<long> indices;
    Tail tail = Tail::Unit;

    bool valid() const;
    /// 0 for tail 1, 1 for the Y/Y_hat tails.
    int sector() const { return tail == Tail::Unit ? 0 : 1; }
    size_t length() const { return indices.size(); }

    /// Difference-two conditions: l_1 <= -1-i and l_{r+1} <= l_r - 2.
    bool satisfies_principal_conditions() const;
    /// Quantum conditions: l_1 <= -1-i and l_r <= -3 for r >= 2.
    bool satisfies_quantum_conditions() const;

    std::string to_string() const;
    /// Grammar: flavor ":" "[" l_m "," ... "," l_1 "]" ":" tail, e.g.
    /// "x:[-1,-2]:unit", "xhat:[-3,-1]:Yhat". Throws on malformed input.
    static QVAMonomial parse(const std::string& spec);

    auto operator<=>(const QVAMonomial&) const = default;
};

using MonomialSum = std::vector<std::pair<FieldElem, QVAMonomial>>;

std::string monomial_sum_to_string(const MonomialSum& s);

/// Exact evaluation of a monomial on a state over a doubled-exponent window.
/// The x flavor folds the qq-products symbolically; the x_hat flavor goes
/// through the joint multi-variable table with classical derivatives applied
/// at the coefficient level.
CoeffSeries<FockVector> eval_monomial(const QVAMonomial& m, const FockVector& v,
                                      long lo2, long hi2);
CoeffSeries<FockVector> eval_monomial_sum(const MonomialSum& s, const FockVector& v,
                                          long lo2, long hi2);

/// A lower bound for the support of the monomial's evaluation on v (used to
/// position scan windows).
long monomial_support_lb2(const QVAMonomial& m, const FockVector& v);

/// Rewrites an x_hat-flavor monomial into the difference-two basis form.
MonomialSum straighten_commutative(const QVAMonomial& m);
/// Rewrites an x-flavor monomial into the quantum basis form (l_r <= -3 for
/// r >= 2) by the paired index relations.
MonomialSum reduce_noncommutative(const QVAMonomial& m);

// ---- relation catalog --------------------------------------------------------

struct VerifyConfig {
    std::vector<FockVector> probes;
    long win_lo2 = -10, win_hi2 = 10;  // doubled exponent window per variable
    int order_z0 = 3, order_z2 = 3;    // associativity orders
    int nmax = 5;                      // bound for the n-indexed families
    unsigned seed = 1;
};

VerifyConfig default_config();
std::vector<FockVector> default_probes();
/// Deterministic pseudo-random states of bounded degree for the Heisenberg
/// and conjugation checks.
std::vector<FockVector> seeded_probes(unsigned seed, int count, int max_degree);

struct CheckResult {
    std::string id;
    bool pass = false;
    std::string detail;  // first mismatch, or a short summary
    long checked = 0;    // number of compared coefficients / identities
};

struct RelationRecord {
    std::string id;
    std::string description;
    std::function<CheckResult(const VerifyConfig&)> run;
};

const std::vector<RelationRecord>& relation_catalog();
std::vector<std::string> relation_ids();
/// Runs one catalog relation; throws std::invalid_argument for unknown ids.
CheckResult verify_relation(const std::string& id, const VerifyConfig& cfg);

/// The qq-associativity check: both sides of
/// Y(a, z0+z2) Y(b, z2) c = Y(Y(a, z0) b, z2) c expanded by independent
/// routes (noncommutative binomial engine vs. symbolic inner q-Leibniz),
/// compared at all z0^p z2^s with p <= order_z0, s <= order_z2.
CheckResult verify_associativity(const std::string& a_name, const std::string& b_name,
                                 const std::string& c_name, const VerifyConfig& cfg);

}  // namespace qv
