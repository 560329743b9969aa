#include "qv/basis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qv {

BasisFamily family_from_string(const std::string& s) {
    if (s == "HatLambda0" || s == "W(L0)" || s == "hatL0") return BasisFamily::HatLambda0;
    if (s == "HatLambda1" || s == "W(L1)" || s == "hatL1") return BasisFamily::HatLambda1;
    if (s == "Hat0" || s == "W0hat") return BasisFamily::Hat0;
    if (s == "Hat1" || s == "W1hat") return BasisFamily::Hat1;
    if (s == "W0qq" || s == "W0q") return BasisFamily::W0qq;
    if (s == "W1qq" || s == "W1q") return BasisFamily::W1qq;
    throw std::invalid_argument("unknown basis family '" + s + "'");
}

std::string family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::HatLambda0: return "HatLambda0";
        case BasisFamily::HatLambda1: return "HatLambda1";
        case BasisFamily::Hat0: return "Hat0";
        case BasisFamily::Hat1: return "Hat1";
        case BasisFamily::W0qq: return "W0qq";
        case BasisFamily::W1qq: return "W1qq";
    }
    return "?";
}

int family_sector(BasisFamily f) {
    switch (f) {
        case BasisFamily::HatLambda1:
        case BasisFamily::Hat1:
        case BasisFamily::W1qq:
            return 1;
        default:
            return 0;
    }
}

bool family_is_quantum(BasisFamily f) {
    return f == BasisFamily::W0qq || f == BasisFamily::W1qq;
}

long D_stat(const QVAMonomial& m, size_t k) {
    if (k < 1 || k > m.indices.size())
        throw std::out_of_range("D_stat: k out of range");
    long s = 0;
    for (size_t p = 0; p < k; ++p) s += m.indices[m.indices.size() - 1 - p];
    return s + static_cast<long>(k) - 1;
}

long deg_qq(const QVAMonomial& m) {
    long s = 0;
    for (size_t k = 1; k <= m.indices.size(); ++k) s -= D_stat(m, k);
    return s;
}

long weight_deg(const QVAMonomial& m) {
    long s = 0;
    for (long l : m.indices) s -= l;
    return s;
}

long family_degree(BasisFamily f, const QVAMonomial& m) {
    return family_is_quantum(f) ? deg_qq(m) : weight_deg(m);
}

namespace {

/// Partitions with parts differing by >= 2 and smallest part >= 1+i, encoded
/// as index lists (-largest, ..., -smallest).
void enum_difference_two(int i, int max_deg,
                         std::vector<std::vector<QVAMonomial>>& out, Tail tail) {
    std::vector<long> parts;  // ascending, difference >= 2
    std::function<void(long, long)> rec = [&](long min_part, long rem) {
        QVAMonomial m;
        m.flavor = Flavor::XHat;
        m.tail = tail;
        for (auto it = parts.rbegin(); it != parts.rend(); ++it)
            m.indices.push_back(-*it);
        out[max_deg - rem].push_back(std::move(m));
        for (long p = min_part; p <= rem; ++p) {
            parts.push_back(p);
            rec(p + 2, rem - p);
            parts.pop_back();
        }
    };
    rec(1 + i, max_deg);
}

/// Index sequences with l_1 <= -1-i, l_r <= -3 for r >= 2, ordered by deg_qq.
void enum_quantum(int i, int max_deg, std::vector<std::vector<QVAMonomial>>& out) {
    // deg = sum_p (m-p+1) a_p - m(m-1)/2 with a_p = -l_p and p = 1 rightmost.
    for (long m = 0;; ++m) {
        long min_deg = m * m + i * m;
        if (min_deg > max_deg) break;
        std::vector<long> a(m);
        std::function<void(long, long)> rec = [&](long p, long used) {
            if (p > m) {
                long deg = used - m * (m - 1) / 2;
                QVAMonomial mono;
                mono.flavor = Flavor::X;
                mono.tail = (i == 1) ? Tail::Y : Tail::Unit;
                for (long idx = m - 1; idx >= 0; --idx) mono.indices.push_back(-a[idx]);
                out[deg].push_back(std::move(mono));
                return;
            }
            long w = m - p + 1;
            long amin = (p == 1) ? 1 + i : 3;
            long rest = 0;
            for (long q = p + 1; q <= m; ++q) rest += 3 * (m - q + 1);
            for (long ap = amin;; ++ap) {
                long used2 = used + w * ap;
                if (used2 + rest - m * (m - 1) / 2 > max_deg) break;
                a[p - 1] = ap;
                rec(p + 1, used2);
            }
        };
        rec(1, 0);
    }
}

}  // namespace

std::vector<std::vector<QVAMonomial>> enum_family(BasisFamily f, int max_deg) {
    std::vector<std::vector<QVAMonomial>> out(max_deg + 1);
    int i = family_sector(f);
    switch (f) {
        case BasisFamily::HatLambda0:
        case BasisFamily::HatLambda1:
            enum_difference_two(i, max_deg, out, Tail::Unit);
            break;
        case BasisFamily::Hat0:
            enum_difference_two(0, max_deg, out, Tail::Unit);
            break;
        case BasisFamily::Hat1:
            enum_difference_two(1, max_deg, out, Tail::YHat);
            break;
        case BasisFamily::W0qq:
        case BasisFamily::W1qq:
            enum_quantum(i, max_deg, out);
            break;
    }
    return out;
}

Diagram make_diagram(const QVAMonomial& m) {
    Diagram d;
    d.origin = m;
    long bottom = 0;
    for (long l : m.indices) {  // written order, l_m first
        Diagram::Column col;
        col.height = -l;
        col.bottom = bottom;
        d.columns.push_back(col);
        bottom += col.height - 1;
    }
    return d;
}

std::vector<long> Diagram::completed_heights() const {
    std::vector<long> h;
    size_t m = origin.indices.size();
    for (size_t j = 0; j < m; ++j) h.push_back(-D_stat(origin, m - j));
    return h;
}

std::string Diagram::ascii() const {
    if (columns.empty()) return "(empty diagram)\n";
    auto completed = completed_heights();
    long top = 0;
    for (size_t j = 0; j < columns.size(); ++j)
        top = std::max(top, columns[j].bottom + columns[j].height);
    std::ostringstream os;
    for (long row = top - 1; row >= 0; --row) {
        for (size_t j = 0; j < columns.size(); ++j) {
            bool filled = row >= columns[j].bottom &&
                          row < columns[j].bottom + columns[j].height;
            // completion adds the boxes below the column, down to level 0
            bool added = !filled && row < columns[j].bottom &&
                         (columns[j].bottom + columns[j].height - 1) - row <
                             completed[j];
            os << (filled ? "[x]" : (added ? "[ ]" : "   "));
        }
        os << "\n";
    }
    return os.str();
}

QVAMonomial complete_diagram(const QVAMonomial& m) {
    if (m.flavor != Flavor::X)
        throw std::invalid_argument("complete_diagram expects a quantum-family monomial");
    QVAMonomial out;
    out.flavor = Flavor::XHat;
    out.tail = Tail::Unit;
    size_t mlen = m.indices.size();
    for (size_t j = 0; j < mlen; ++j) out.indices.push_back(D_stat(m, mlen - j));
    return out;
}

BijectionReport bijection_check(int i, int max_deg) {
    BijectionReport rep;
    rep.max_deg = max_deg;
    BasisFamily qf = (i == 0) ? BasisFamily::W0qq : BasisFamily::W1qq;
    BasisFamily hf = (i == 0) ? BasisFamily::HatLambda0 : BasisFamily::HatLambda1;
    auto qs = enum_family(qf, max_deg);
    auto hs = enum_family(hf, max_deg);
    rep.pass = true;
    std::set<std::vector<long>> images;
    for (int d = 0; d <= max_deg; ++d) {
        rep.lhs_counts.push_back(static_cast<long>(qs[d].size()));
        rep.rhs_counts.push_back(static_cast<long>(hs[d].size()));
        for (const auto& m : qs[d]) {
            QVAMonomial b = complete_diagram(m);
            if (weight_deg(b) != deg_qq(m)) {
                rep.pass = false;
                rep.detail = "degree not preserved at " + m.to_string();
                return rep;
            }
            bool ok = b.indices.empty() || b.indices.back() <= -1 - i;
            for (size_t p = b.indices.size(); ok && p-- > 1;)
                if (b.indices[p - 1] > b.indices[p] - 2) ok = false;
            if (!ok) {
                rep.pass = false;
                rep.detail = "image violates the difference conditions at " +
                             m.to_string() + " -> " + b.to_string();
                return rep;
            }
            if (!images.insert(b.indices).second) {
                rep.pass = false;
                rep.detail = "collision at " + m.to_string();
                return rep;
            }
        }
        if (qs[d].size() != hs[d].size()) {
            rep.pass = false;
            rep.detail = "count mismatch at degree " + std::to_string(d);
            return rep;
        }
    }
    return rep;
}

std::vector<long> character_counts(BasisFamily f, int max_deg) {
    auto e = enum_family(f, max_deg);
    std::vector<long> out;
    for (auto& lvl : e) out.push_back(static_cast<long>(lvl.size()));
    return out;
}

namespace {

void mul_inv_one_minus(std::vector<long>& c, int e) {
    for (size_t k = e; k < c.size(); ++k) c[k] += c[k - e];
}

}  // namespace

std::vector<long> rr_sum_side(int i, int max_deg) {
    std::vector<long> out(max_deg + 1, 0);
    for (long r = 0;; ++r) {
        long e = r * r + i * r;
        if (e > max_deg) break;
        std::vector<long> term(max_deg + 1, 0);
        term[e] = 1;
        for (int j = 1; j <= r; ++j) mul_inv_one_minus(term, j);
        for (int k = 0; k <= max_deg; ++k) out[k] += term[k];
    }
    return out;
}

std::vector<long> rr_product_side(int i, int max_deg) {
    std::vector<long> out(max_deg + 1, 0);
    out[0] = 1;
    for (long r = 0;; ++r) {
        long e1 = 5 * r + 1 + i, e2 = 5 * r + 4 - i;
        if (e1 > max_deg && e2 > max_deg) break;
        if (e1 <= max_deg) mul_inv_one_minus(out, static_cast<int>(e1));
        if (e2 <= max_deg) mul_inv_one_minus(out, static_cast<int>(e2));
    }
    return out;
}

// ---- ranks ---------------------------------------------------------------------

long matrix_rank(std::vector<std::vector<FieldElem>> rows) {
    if (rows.empty()) return 0;
    size_t ncols = rows[0].size();
    // Clearing row denominators leaves the rank unchanged.
    std::vector<std::vector<Poly>> m;
    for (auto& row : rows) {
        Poly lcm(1);
        for (const auto& e : row) {
            if (e.is_zero()) continue;
            Poly g = Poly::gcd(lcm, e.den());
            lcm = lcm * e.den().divexact(g);
        }
        std::vector<Poly> r;
        for (const auto& e : row) {
            if (e.is_zero())
                r.emplace_back();
            else
                r.push_back(e.num() * lcm.divexact(e.den()));
        }
        m.push_back(std::move(r));
    }
    size_t nrows = m.size();
    Poly prev(1);
    size_t rank = 0;
    for (size_t col = 0; col < ncols && rank < nrows; ++col) {
        size_t piv = nrows;
        for (size_t r = rank; r < nrows; ++r) {
            if (!m[r][col].is_zero()) {
                piv = r;
                break;
            }
        }
        if (piv == nrows) continue;
        std::swap(m[rank], m[piv]);
        const Poly p = m[rank][col];
        for (size_t r = rank + 1; r < nrows; ++r) {
            for (size_t c2 = col + 1; c2 < ncols; ++c2) {
                Poly t = m[r][c2] * p - m[r][col] * m[rank][c2];
                m[r][c2] = t.is_zero() ? Poly() : t.divexact(prev);
            }
            m[r][col] = Poly();
        }
        prev = p;
        ++rank;
    }
    return static_cast<long>(rank);
}

namespace {

/// x_hat(l) w: the coefficient of z^(-l-1) in x_hat(z) w.
FockVector xhat_mode(long l, const FockVector& w) {
    static const OperatorExpr xh = OperatorExpr::make("x_hat");
    long k2 = 2 * (-l - 1);
    return apply_truncated(xh, w, k2, k2).coeff_or_zero(k2);
}

std::map<std::tuple<int, long, FockKey>, FieldElem> element_row(
    BasisFamily f, const QVAMonomial& m, const std::vector<FockVector>& probes,
    long window2) {
    std::map<std::tuple<int, long, FockKey>, FieldElem> row;
    if (f == BasisFamily::HatLambda0 || f == BasisFamily::HatLambda1) {
        FockVector w = FockVector::vacuum(family_sector(f));
        for (auto it = m.indices.rbegin(); it != m.indices.rend(); ++it)
            w = xhat_mode(*it, w);
        for (const auto& [k, c] : w.terms()) row[{0, 0, k}] = c;
        return row;
    }
    for (size_t pi = 0; pi < probes.size(); ++pi) {
        long lb = monomial_support_lb2(m, probes[pi]);
        auto s = eval_monomial(m, probes[pi], lb, lb + 2 * window2);
        for (const auto& [k2, w] : s.c)
            for (const auto& [key, c] : w.terms())
                row[{static_cast<int>(pi), k2, key}] = c;
    }
    return row;
}

}  // namespace

RankReport independence_rank(BasisFamily f, int max_deg,
                             const std::vector<FockVector>& probes, long window2) {
    RankReport rep;
    auto fam = enum_family(f, max_deg);
    rep.full_rank = true;
    for (int d = 0; d <= max_deg; ++d) {
        const auto& monos = fam[d];
        rep.counts.push_back(static_cast<long>(monos.size()));
        if (monos.empty()) {
            rep.ranks.push_back(0);
            continue;
        }
        std::vector<FockVector> use = probes;
        if (use.empty()) use = {FockVector::vacuum(family_sector(f))};
        long win = window2;
        long rank = 0;
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::vector<std::map<std::tuple<int, long, FockKey>, FieldElem>> rows;
            std::set<std::tuple<int, long, FockKey>> cols;
            for (const auto& m : monos) {
                rows.push_back(element_row(f, m, use, win));
                for (const auto& [k, c] : rows.back()) {
                    (void)c;
                    cols.insert(k);
                }
            }
            std::vector<std::tuple<int, long, FockKey>> colv(cols.begin(), cols.end());
            std::map<std::tuple<int, long, FockKey>, size_t> colidx;
            for (size_t i2 = 0; i2 < colv.size(); ++i2) colidx[colv[i2]] = i2;
            std::vector<std::vector<FieldElem>> mat(rows.size(),
                                                    std::vector<FieldElem>(colv.size()));
            for (size_t r = 0; r < rows.size(); ++r)
                for (const auto& [k, c] : rows[r]) mat[r][colidx[k]] = c;
            rank = matrix_rank(std::move(mat));
            if (rank == static_cast<long>(monos.size())) break;
            // widen and add a degree-one probe before concluding deficiency
            win += 8;
            FockVector extra;
            extra.add_term(FockKey{{1}, family_sector(f)}, FieldElem(1));
            use.push_back(extra);
        }
        rep.ranks.push_back(rank);
        if (rank != static_cast<long>(monos.size())) rep.full_rank = false;
    }
    return rep;
}

LowestPowerReport lowest_power_check(int max_deg, int max_len) {
    LowestPowerReport rep;
    rep.pass = true;
    FockVector v0 = FockVector::vacuum(0);
    auto fam = enum_family(BasisFamily::W0qq, max_deg);
    for (int d = 0; d <= max_deg; ++d) {
        for (const auto& m : fam[d]) {
            long mlen = static_cast<long>(m.indices.size());
            if (mlen == 0 || mlen > max_len) continue;
            long expect2 = 2 * (D_stat(m, m.indices.size()) + 1 + mlen * (mlen - 1));
            auto s = eval_monomial(m, v0, expect2 - 8, expect2 + 8);
            bool below_zero = true;
            for (long k2 = expect2 - 8; k2 < expect2; ++k2)
                if (!s.coeff_or_zero(k2).is_zero()) below_zero = false;
            bool at_nonzero = !s.coeff_or_zero(expect2).is_zero();
            if (!below_zero || !at_nonzero) {
                rep.pass = false;
                rep.detail = "lowest power wrong for " + m.to_string();
                return rep;
            }
            ++rep.checked;
        }
    }
    return rep;
}

LowestPowerReport lowest_power_measure_w1(int max_deg, int max_len) {
    LowestPowerReport rep;
    rep.pass = true;
    FockVector v0 = FockVector::vacuum(0);
    auto fam = enum_family(BasisFamily::W1qq, max_deg);
    for (int d = 0; d <= max_deg; ++d) {
        for (const auto& m : fam[d]) {
            long mlen = static_cast<long>(m.indices.size());
            if (mlen == 0 || mlen > max_len) continue;
            long lb = monomial_support_lb2(m, v0);
            long found = 0;
            bool ok = false;
            for (long w = 0; w <= 6 && !ok; ++w) {
                auto s = eval_monomial(m, v0, lb + 16 * w, lb + 16 * w + 15);
                for (long k2 = lb + 16 * w; k2 <= lb + 16 * w + 15; ++k2) {
                    if (!s.coeff_or_zero(k2).is_zero()) {
                        found = k2;
                        ok = true;
                        break;
                    }
                }
            }
            if (!ok) {
                rep.pass = false;
                rep.detail = "no nonzero coefficient found for " + m.to_string();
                return rep;
            }
            rep.measured.emplace_back(m.to_string(), found);
            ++rep.checked;
        }
    }
    if (!rep.measured.empty()) {
        std::ostringstream os;
        os << "measured lowest powers (doubled exponents): ";
        for (size_t i = 0; i < rep.measured.size() && i < 8; ++i)
            os << rep.measured[i].first << " -> " << rep.measured[i].second << "  ";
        rep.detail = os.str();
    }
    return rep;
}

}  // namespace qv
