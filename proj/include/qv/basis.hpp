#pragma once

#include <string>
#include <vector>

#include "qv/qva.hpp"

namespace qv {

/// The six enumerable families. HatLambda0/1 are sets of state vectors
/// x_hat(l_m)...x_hat(l_1) v_{Lambda_i}; Hat0/1 are the operator families
/// with the same difference-two index conditions; W0qq/W1qq are the
/// quantum-product families with l_1 <= -1-i and l_r <= -3 for r >= 2.
enum class BasisFamily { HatLambda0, HatLambda1, Hat0, Hat1, W0qq, W1qq };

BasisFamily family_from_string(const std::string& s);
std::string family_name(BasisFamily f);
int family_sector(BasisFamily f);
bool family_is_quantum(BasisFamily f);

/// D_k = l_1 + ... + l_k + k - 1, counting from the rightmost index.
long D_stat(const QVAMonomial& m, size_t k);
/// deg_qq = -sum_k D_k; nonnegative on the quantum families.
long deg_qq(const QVAMonomial& m);
/// Weight degree -sum l_p used by the difference-two families.
long weight_deg(const QVAMonomial& m);
/// Family-aware degree.
long family_degree(BasisFamily f, const QVAMonomial& m);

/// All family members of degree <= max_deg, grouped by degree.
std::vector<std::vector<QVAMonomial>> enum_family(BasisFamily f, int max_deg);

/// Column presentation of a monomial: for each factor, in written order,
/// the column height (-l) and the level its bottom box sits on.
struct Diagram {
    struct Column {
        long height = 0;
        long bottom = 0;
    };
    std::vector<Column> columns;
    QVAMonomial origin;

    /// Heights |D_m|, ..., |D_1| of the completed (Young) diagram.
    std::vector<long> completed_heights() const;
    std::string ascii() const;
};

Diagram make_diagram(const QVAMonomial& m);

/// The diagram completion: a quantum-family monomial maps to the
/// difference-two monomial x_hat(D_m)...x_hat(D_1) v_{Lambda_i}.
QVAMonomial complete_diagram(const QVAMonomial& m);

struct BijectionReport {
    bool pass = false;
    int max_deg = 0;
    std::vector<long> lhs_counts, rhs_counts;  // per degree
    std::string detail;
};

/// Checks that complete_diagram is a degree-preserving bijection from the
/// quantum family onto the difference-two family through max_deg.
BijectionReport bijection_check(int i, int max_deg);

/// Coefficient lists (index = degree).
std::vector<long> character_counts(BasisFamily f, int max_deg);
std::vector<long> rr_sum_side(int i, int max_deg);
std::vector<long> rr_product_side(int i, int max_deg);

/// Exact rank over Q(v) of the evaluated family elements: rows are the
/// monomials, columns indexed by (probe, exponent, Fock term). Elimination
/// is fraction-free over Z[v] after clearing row denominators.
struct RankReport {
    std::vector<long> counts;  // per degree
    std::vector<long> ranks;   // per degree
    bool full_rank = false;
};

RankReport independence_rank(BasisFamily f, int max_deg,
                             const std::vector<FockVector>& probes, long window2 = 8);

/// Exact rank of a matrix over the field, by Bareiss elimination.
long matrix_rank(std::vector<std::vector<FieldElem>> rows);

struct LowestPowerReport {
    bool pass = false;
    long checked = 0;
    std::string detail;
    /// Measured lowest powers for the Y-tail family, as (monomial, value):
    /// reported rather than asserted against a closed formula.
    std::vector<std::pair<std::string, long>> measured;
};

/// For the vacuum-sector quantum family: the minimal exponent of the
/// evaluation on v_{Lambda_0} equals D_m + 1 + m(m-1).
LowestPowerReport lowest_power_check(int max_deg, int max_len);
/// Measures the W1qq analogue (no closed formula is asserted).
LowestPowerReport lowest_power_measure_w1(int max_deg, int max_len);

}  // namespace qv
