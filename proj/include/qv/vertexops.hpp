#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qv/fock.hpp"
#include "qv/series.hpp"

namespace qv {

/// Coefficient rules of the exponential factors. A creation rule r gives the
/// factor exp(sum_{r>=1} c(r) a(-r) (z u)^r), an annihilation rule the
/// analogue in a(r) (z u)^(-r).
enum class ExpRule { FJMinus, FJPlus, KoyMinus, KoyPlus, KHat, EHatMinus, EHatPlus };

bool rule_is_creation(ExpRule r);
/// c(r) for r >= 1.
FieldElem exp_mode_coeff(ExpRule rule, int r);
std::string rule_name(ExpRule r);

/// Closed form of the factor produced by moving an annihilation exponential
/// past a creation exponential: doubled exponents (a2, b2) of
/// (1-tau)^(a2/2) (1-q^-2 tau)^(b2/2); absent when no closed form is used.
std::optional<std::pair<long, long>> contraction_closed(ExpRule ann, ExpRule cre);
/// Coefficient of tau^r in the log of that factor, computed independently
/// from the mode commutators: c_ann(r) c_cre(r) [2r][r]/r.
FieldElem contraction_log_coeff(ExpRule ann, ExpRule cre, int r);

/// One atomic factor of an operator word.
struct Atom {
    enum class Kind { Exp, Translate, ZPartial } kind;
    ExpRule rule = ExpRule::FJMinus;  // Exp only
    bool inverse = false;             // Exp only: negated coefficient rule
    int jbeta = 0;                    // Translate/ZPartial: label j of beta
    int var = 0;                      // formal variable slot
    int uvexp = 0;                    // scale u = v^uvexp on this atom's variable

    static Atom exp_factor(ExpRule r, bool inv = false);
    static Atom translate(int jb);
    static Atom zpartial(int jb);

    auto operator<=>(const Atom&) const = default;
};

/// scalar * prod_v z_v^(zexp2[v]/2) * word (leftmost atom applied last).
struct OpTerm {
    FieldElem scalar;
    std::map<int, long> zexp2;
    std::vector<Atom> word;
};

/// Formal linear combination of operator words: the symbolic vertex
/// operators of the catalog, closed under linear combination, substitution
/// z -> z*u, multiplication by Laurent monomials and concatenation.
class OperatorExpr {
public:
    OperatorExpr() = default;

    static OperatorExpr unit();
    /// Catalog by name: x, Y, k_hat, x_hat, Y_hat, E_minus_koyama,
    /// E_plus_koyama, E_hat_minus, E_hat_plus, E_hat_minus_lambda,
    /// E_hat_minus_lambda_inverse, E_plus_plus, unit.
    static OperatorExpr make(const std::string& name);

    bool is_zero() const { return terms_.empty(); }
    const std::vector<OpTerm>& terms() const { return terms_; }

    OperatorExpr operator+(const OperatorExpr& o) const;
    OperatorExpr operator-(const OperatorExpr& o) const;
    OperatorExpr operator*(const FieldElem& f) const;

    /// Operator product (concatenation of words).
    OperatorExpr concat(const OperatorExpr& o) const;
    /// Formal substitution z -> z * v^uvexp pushed into every atom and
    /// prefactor (single-variable expressions).
    OperatorExpr scale_subst(int uvexp) const;
    /// Multiply by z_var^(k2/2).
    OperatorExpr mul_zmono(long k2, int var = 0) const;
    /// The q-derivation (e(z*qq) - e(z))/(z(qq-1)), symbolically.
    OperatorExpr qderive() const;
    OperatorExpr qderive_n(int n) const;
    /// Re-tags every atom and prefactor to the given variable slot.
    OperatorExpr retag(int var) const;

    void collect();

private:
    std::vector<OpTerm> terms_;
    friend OperatorExpr make_word(std::vector<Atom> atoms);
};

// ---- evaluation ----------------------------------------------------------

/// Exact joint coefficient table of a multi-variable operator expression
/// applied to a state: key = doubled exponents per variable, exact within
/// the requested box.
struct JointTable {
    int nvars = 0;
    std::vector<long> lo2, hi2;
    std::map<std::vector<long>, FockVector> c;

    void add(const std::vector<long>& k, const FockVector& v);
    const FockVector* coeff(const std::vector<long>& k) const;
    bool in_box(const std::vector<long>& k) const;
    bool is_zero_on_box() const { return c.empty(); }
};

struct Box {
    std::vector<long> lo2, hi2;
    /// Optional bound on the joint total k_0 + ... + k_{n-1}; prunes the
    /// enumeration when only a diagonal limit of the table is needed.
    long joint_cap2 = 1L << 40;
};

/// Evaluates e (atoms tagged with variables 0..nvars-1) on v over the box.
/// When normal_ordered is true the exchange factors are dropped, which
/// evaluates :e: instead of e.
JointTable eval_box(const OperatorExpr& e, const FockVector& v, const Box& box,
                    bool normal_ordered = false);

/// Evaluates a single-variable expression (all atoms in one z with their
/// scales) exactly on the doubled window [lo2, hi2]. Requires every combined
/// exchange factor to be polynomial; throws otherwise.
CoeffSeries<FockVector> eval_diag(const OperatorExpr& e, const FockVector& v,
                                  long lo2, long hi2, bool normal_ordered = false);

/// Spec operations over the evaluators.
CoeffSeries<FockVector> apply_truncated(const OperatorExpr& e, const FockVector& v,
                                        long lo2, long hi2);
JointTable product_apply(const std::vector<OperatorExpr>& es, const FockVector& v,
                         const Box& box);
CoeffSeries<FockVector> normal_ordered_apply(
    const std::vector<std::pair<OperatorExpr, int>>& scaled_atoms,
    const FockVector& v, long lo2, long hi2);

// ---- table utilities for relation checking --------------------------------

/// A Laurent polynomial in the table variables: list of (shift per var
/// doubled, coefficient).
using TablePoly = std::vector<std::pair<std::vector<long>, FieldElem>>;

/// Multiply by a Laurent polynomial; the result is exact on the intersection
/// of the shifted input boxes.
JointTable table_mul_poly(const JointTable& t, const TablePoly& p);

/// Multiply by sum_t coeffs[t] * (z_varB/z_varA)^t (an exchange-factor
/// series expanded in nonnegative powers of z_varB/z_varA). The series is
/// summed as far as the input box supports; the result box is shrunk on
/// varA so that every kept coefficient is exact.
JointTable table_mul_ratio_series(const JointTable& t, int varA, int varB,
                                  const std::vector<FieldElem>& coeffs);

/// Classical d/dz_var applied `order` times at the table level.
JointTable table_deriv(const JointTable& t, int var, int order);

/// Shift every key by delta2 on one variable (multiplication by z^(d/2)).
JointTable table_shift(const JointTable& t, int var, long delta2);

JointTable table_scale(const JointTable& t, const FieldElem& f);
JointTable table_add(const JointTable& a, const JointTable& b);

struct TableMismatch {
    std::vector<long> key;
    std::string lhs, rhs;
};

/// Compares two tables on the intersection of their boxes; returns the first
/// differing coefficient if any.
std::optional<TableMismatch> table_diff(const JointTable& a, const JointTable& b);

/// Extracts the mode coefficient: x(n) = coeff of z^(-n-1), i.e. doubled
/// exponent -2n-2, from a one-variable table/series.
FockVector mode_coeff(const CoeffSeries<FockVector>& s, long n);

/// Sum over the diagonal k_0 + ... + k_(n-1) = N2 of a joint table (the
/// z_i -> z limit); every key of the table contributes.
CoeffSeries<FockVector> table_diag_sum(const JointTable& t, long lo2, long hi2);

/// Per-variable lower bounds below which the joint coefficients of e
/// applied to v vanish identically. Requires every combined exchange factor
/// to be polynomial (throws otherwise); used to size exact boxes for
/// diagonal limits.
std::vector<long> support_lower_bounds(const OperatorExpr& e, const FockVector& v,
                                       int nvars);

}  // namespace qv
