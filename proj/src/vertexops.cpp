#include "qv/vertexops.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace qv {

// ---- exponential factor rules ---------------------------------------------

bool rule_is_creation(ExpRule r) {
    switch (r) {
        case ExpRule::FJMinus:
        case ExpRule::KoyMinus:
        case ExpRule::EHatMinus:
            return true;
        default:
            return false;
    }
}

std::string rule_name(ExpRule r) {
    switch (r) {
        case ExpRule::FJMinus: return "E-[FJ]";
        case ExpRule::FJPlus: return "E+[FJ]";
        case ExpRule::KoyMinus: return "E-[koyama]";
        case ExpRule::KoyPlus: return "E+[koyama]";
        case ExpRule::KHat: return "k_hat";
        case ExpRule::EHatMinus: return "E_hat-";
        case ExpRule::EHatPlus: return "E_hat+";
    }
    return "?";
}

FieldElem exp_mode_coeff(ExpRule rule, int r) {
    static std::map<std::pair<int, int>, FieldElem> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto key = std::make_pair(static_cast<int>(rule), r);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    FieldElem c;
    switch (rule) {
        case ExpRule::FJMinus:
            c = FieldElem::vpow(-r) / sym_q_int(r);
            break;
        case ExpRule::FJPlus:
            c = -FieldElem::vpow(-r) / sym_q_int(r);
            break;
        case ExpRule::KoyMinus:
            c = FieldElem::vpow(r) / sym_q_int(2 * r);
            break;
        case ExpRule::KoyPlus:
        case ExpRule::EHatPlus:
            c = -FieldElem::vpow(r) / sym_q_int(2 * r);
            break;
        case ExpRule::EHatMinus:
            c = FieldElem::vpow(-r) / (FieldElem(2) * sym_q_int(r));
            break;
        case ExpRule::KHat:
            c = -(FieldElem::qpow(1) - FieldElem::qpow(-1)) * FieldElem::vpow(r) /
                (FieldElem(1) + FieldElem::qpow(2 * r));
            break;
    }
    cache[key] = c;
    return c;
}

std::optional<std::pair<long, long>> contraction_closed(ExpRule ann, ExpRule cre) {
    if (ann == ExpRule::EHatPlus) ann = ExpRule::KoyPlus;  // identical rule
    switch (ann) {
        case ExpRule::FJPlus:
            if (cre == ExpRule::FJMinus) return std::make_pair(2L, 2L);
            if (cre == ExpRule::KoyMinus) return std::make_pair(2L, 0L);
            if (cre == ExpRule::EHatMinus) return std::make_pair(1L, 1L);
            break;
        case ExpRule::KoyPlus:
            if (cre == ExpRule::FJMinus) return std::make_pair(2L, 0L);
            if (cre == ExpRule::EHatMinus) return std::make_pair(1L, 0L);
            break;
        case ExpRule::KHat:
            if (cre == ExpRule::FJMinus) return std::make_pair(2L, -2L);
            if (cre == ExpRule::EHatMinus) return std::make_pair(1L, -1L);
            break;
        default:
            break;
    }
    return std::nullopt;
}

FieldElem contraction_log_coeff(ExpRule ann, ExpRule cre, int r) {
    return exp_mode_coeff(ann, r) * exp_mode_coeff(cre, r) * heis_kappa(r);
}

// ---- atoms and expressions -------------------------------------------------

Atom Atom::exp_factor(ExpRule r, bool inv) {
    Atom a;
    a.kind = Kind::Exp;
    a.rule = r;
    a.inverse = inv;
    return a;
}

Atom Atom::translate(int jb) {
    Atom a;
    a.kind = Kind::Translate;
    a.jbeta = jb;
    return a;
}

Atom Atom::zpartial(int jb) {
    Atom a;
    a.kind = Kind::ZPartial;
    a.jbeta = jb;
    return a;
}

OperatorExpr make_word(std::vector<Atom> atoms) {
    OperatorExpr e;
    OpTerm t;
    t.scalar = FieldElem(1);
    t.word = std::move(atoms);
    e.terms_.push_back(std::move(t));
    return e;
}

OperatorExpr OperatorExpr::unit() { return make_word({}); }

OperatorExpr OperatorExpr::make(const std::string& name) {
    using K = Atom;
    if (name == "x")
        return make_word({K::exp_factor(ExpRule::FJMinus), K::exp_factor(ExpRule::FJPlus),
                          K::translate(2), K::zpartial(2)});
    if (name == "Y")
        return make_word({K::exp_factor(ExpRule::KoyMinus), K::exp_factor(ExpRule::KoyPlus),
                          K::translate(1), K::zpartial(1)});
    if (name == "k_hat") return make_word({K::exp_factor(ExpRule::KHat)});
    if (name == "x_hat") return make(std::string("x")).concat(make(std::string("k_hat")));
    if (name == "Y_hat")
        return make_word({K::exp_factor(ExpRule::EHatMinus), K::exp_factor(ExpRule::EHatPlus),
                          K::translate(1), K::zpartial(1)});
    if (name == "E_minus_koyama") return make_word({K::exp_factor(ExpRule::KoyMinus)});
    if (name == "E_plus_koyama") return make_word({K::exp_factor(ExpRule::KoyPlus)});
    if (name == "E_hat_minus") return make_word({K::exp_factor(ExpRule::EHatMinus)});
    if (name == "E_hat_plus") return make_word({K::exp_factor(ExpRule::EHatPlus)});
    if (name == "E_hat_minus_lambda")
        return make_word({K::exp_factor(ExpRule::EHatMinus), K::translate(1)});
    if (name == "E_hat_minus_lambda_inverse")
        return make_word({K::exp_factor(ExpRule::EHatMinus, true), K::translate(-1)});
    if (name == "E_plus_plus") return make_word({K::exp_factor(ExpRule::FJPlus)});
    if (name == "unit") return unit();
    throw std::invalid_argument("make_operator: unknown name '" + name + "'");
}

OperatorExpr OperatorExpr::operator+(const OperatorExpr& o) const {
    OperatorExpr r = *this;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    r.collect();
    return r;
}

OperatorExpr OperatorExpr::operator-(const OperatorExpr& o) const {
    return *this + o * FieldElem(-1);
}

OperatorExpr OperatorExpr::operator*(const FieldElem& f) const {
    OperatorExpr r;
    if (f.is_zero()) return r;
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.scalar *= f;
    return r;
}

OperatorExpr OperatorExpr::concat(const OperatorExpr& o) const {
    OperatorExpr r;
    for (const auto& a : terms_) {
        for (const auto& b : o.terms_) {
            OpTerm t;
            t.scalar = a.scalar * b.scalar;
            t.zexp2 = a.zexp2;
            for (const auto& [v, e] : b.zexp2) t.zexp2[v] += e;
            t.word = a.word;
            t.word.insert(t.word.end(), b.word.begin(), b.word.end());
            r.terms_.push_back(std::move(t));
        }
    }
    r.collect();
    return r;
}

OperatorExpr OperatorExpr::scale_subst(int uvexp) const {
    OperatorExpr r = *this;
    for (auto& t : r.terms_) {
        for (auto& a : t.word) a.uvexp += uvexp;
        long e = 0;
        for (const auto& [v, k2] : t.zexp2) e += static_cast<long>(uvexp) * k2;
        if (e % 2 != 0) throw std::domain_error("scale_subst: fractional power of v");
        t.scalar *= FieldElem::vpow(e / 2);
    }
    return r;
}

OperatorExpr OperatorExpr::mul_zmono(long k2, int var) const {
    OperatorExpr r = *this;
    for (auto& t : r.terms_) t.zexp2[var] += k2;
    return r;
}

OperatorExpr OperatorExpr::qderive() const {
    FieldElem inv = (FieldElem::qqpow(1) - FieldElem(1)).inverse();
    OperatorExpr diff = scale_subst(4) - *this;
    return (diff * inv).mul_zmono(-2);
}

OperatorExpr OperatorExpr::qderive_n(int n) const {
    OperatorExpr r = *this;
    for (int i = 0; i < n; ++i) r = r.qderive();
    return r;
}

OperatorExpr OperatorExpr::retag(int var) const {
    OperatorExpr r = *this;
    for (auto& t : r.terms_) {
        for (auto& a : t.word) a.var = var;
        std::map<int, long> z;
        long tot = 0;
        for (const auto& [v, e] : t.zexp2) tot += e;
        if (tot != 0) z[var] = tot;
        t.zexp2 = std::move(z);
    }
    return r;
}

void OperatorExpr::collect() {
    std::map<std::pair<std::vector<Atom>, std::vector<std::pair<int, long>>>, FieldElem> acc;
    for (auto& t : terms_) {
        std::vector<std::pair<int, long>> z;
        for (const auto& [v, e] : t.zexp2)
            if (e != 0) z.emplace_back(v, e);
        auto key = std::make_pair(std::move(t.word), std::move(z));
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(std::move(key), t.scalar);
        else
            it->second += t.scalar;
    }
    terms_.clear();
    for (auto& [key, s] : acc) {
        if (s.is_zero()) continue;
        OpTerm t;
        t.scalar = s;
        t.word = key.first;
        for (auto& [v, e] : key.second) t.zexp2[v] = e;
        terms_.push_back(std::move(t));
    }
}

// ---- normal form ------------------------------------------------------------

namespace {

struct ContractionFactor {
    int varA = 0, uvA = 0, varB = 0, uvB = 0;
    long a2 = 0, b2 = 0;
};

struct NormalForm {
    FieldElem scalar;
    std::map<int, long> zexp2;
    // Powers collected when z^(d beta) crosses e^gamma during reordering.
    // They belong to the full product but not to the normal-ordered
    // prescription :...:, so they are kept separate.
    FieldElem cross_scalar = FieldElem(1);
    std::map<int, long> cross_zexp2;
    std::vector<Atom> cre, trans, zpart, ann;
    std::vector<ContractionFactor> factors;
};

NormalForm normalize(const OpTerm& term) {
    NormalForm nf;
    nf.scalar = term.scalar;
    nf.zexp2 = term.zexp2;
    const auto& w = term.word;
    std::map<std::tuple<int, int, int, int>, std::pair<long, long>> fac;
    for (size_t i = 0; i < w.size(); ++i) {
        const Atom& a = w[i];
        if (a.kind == Atom::Kind::Exp && !rule_is_creation(a.rule)) {
            for (size_t j = i + 1; j < w.size(); ++j) {
                const Atom& b = w[j];
                if (b.kind != Atom::Kind::Exp || !rule_is_creation(b.rule)) continue;
                auto closed = contraction_closed(a.rule, b.rule);
                if (!closed)
                    throw std::domain_error("no closed exchange factor for " +
                                            rule_name(a.rule) + " x " + rule_name(b.rule));
                long sgn = ((a.inverse ? 1 : 0) + (b.inverse ? 1 : 0)) % 2 == 0 ? 1 : -1;
                auto& slot = fac[{a.var, a.uvexp, b.var, b.uvexp}];
                slot.first += sgn * closed->first;
                slot.second += sgn * closed->second;
            }
        }
        if (a.kind == Atom::Kind::ZPartial) {
            for (size_t j = i + 1; j < w.size(); ++j) {
                const Atom& b = w[j];
                if (b.kind != Atom::Kind::Translate) continue;
                long p2 = static_cast<long>(a.jbeta) * b.jbeta;
                nf.cross_zexp2[a.var] += p2;
                long e = static_cast<long>(a.uvexp) * p2;
                if (e % 2 != 0) throw std::domain_error("normalize: fractional v power");
                nf.cross_scalar *= FieldElem::vpow(e / 2);
            }
        }
        switch (a.kind) {
            case Atom::Kind::Exp:
                (rule_is_creation(a.rule) ? nf.cre : nf.ann).push_back(a);
                break;
            case Atom::Kind::Translate:
                nf.trans.push_back(a);
                break;
            case Atom::Kind::ZPartial:
                nf.zpart.push_back(a);
                break;
        }
    }
    for (const auto& [k, e] : fac) {
        if (e.first == 0 && e.second == 0) continue;
        ContractionFactor f;
        std::tie(f.varA, f.uvA, f.varB, f.uvB) = k;
        f.a2 = e.first;
        f.b2 = e.second;
        nf.factors.push_back(f);
    }
    return nf;
}

bool factor_is_polynomial(const ContractionFactor& f) {
    return f.a2 >= 0 && f.b2 >= 0 && f.a2 % 2 == 0 && f.b2 % 2 == 0;
}

/// Coefficient of (z_B/z_A)^t in (1 - X)^(a2/2) (1 - q^-2 X)^(b2/2) at
/// X = v^(uvB-uvA) (z_B/z_A).
FieldElem factor_coeff(const ContractionFactor& f, long t) {
    FieldElem sum;
    for (long j = 0; j <= t; ++j) {
        long k = t - j;
        sum += gen_binom_half(f.a2, j) * gen_binom_half(f.b2, k) * FieldElem::vpow(-4 * k);
    }
    if (t % 2 != 0) sum = -sum;
    return sum * FieldElem::vpow((f.uvB - f.uvA) * t);
}

FieldElem factor_diag_value(const ContractionFactor& f) {
    if (!factor_is_polynomial(f))
        throw std::domain_error("diagonal evaluation requires polynomial exchange factors");
    FieldElem tau = FieldElem::vpow(f.uvB - f.uvA);
    FieldElem one(1);
    return (one - tau).pow(f.a2 / 2) * (one - FieldElem::vpow(-4) * tau).pow(f.b2 / 2);
}

struct PartChoice {
    std::vector<int> parts;
    long dexp2 = 0;
    FieldElem weight;
};

/// Emits every weighted multiset a creation factor can produce within the
/// doubled exponent budget; weight is prod_r (c(r) v^(uv r))^m / m!.
void gen_creation(ExpRule rule, bool inv, int uv, long budget2,
                  const std::function<void(const PartChoice&)>& cb) {
    PartChoice cur;
    cur.weight = FieldElem(1);
    std::function<void(int, long)> rec = [&](int rmin, long rem2) {
        cb(cur);
        for (int r = rmin; 2LL * r <= rem2; ++r) {
            FieldElem c = exp_mode_coeff(rule, r) * FieldElem::vpow(static_cast<long>(uv) * r);
            if (inv) c = -c;
            PartChoice saved = cur;
            FieldElem pw(1);
            for (int m = 1; 2LL * m * r <= rem2; ++m) {
                pw *= c / FieldElem(m);
                cur.parts.push_back(r);
                cur.dexp2 = saved.dexp2 + 2LL * m * r;
                cur.weight = saved.weight * pw;
                rec(r + 1, rem2 - 2LL * m * r);
            }
            cur = saved;
        }
    };
    rec(1, budget2);
}

constexpr long kNoCap = 1L << 40;

/// Diagonal evaluation of one normalized term. All atoms share the single
/// variable z, so the commuting exponentials of each direction combine into
/// one effective exponential and every exchange factor is a scalar.
void apply_diag_term(const NormalForm& nf, const FockVector& v, bool normal_ordered,
                     long lo2, long hi2, CoeffSeries<FockVector>* out) {
    FieldElem scalar = nf.scalar;
    long base_fixed = 0;
    if (!normal_ordered) {
        scalar *= nf.cross_scalar;
        for (const auto& [var, e] : nf.cross_zexp2) base_fixed += e;
        for (const auto& f : nf.factors) scalar *= factor_diag_value(f);
    }
    if (scalar.is_zero()) return;
    for (const auto& [var, e] : nf.zexp2) base_fixed += e;

    std::map<int, FieldElem> cre_cache, ann_cache;
    auto cre_tot = [&](int r) {
        auto it = cre_cache.find(r);
        if (it != cre_cache.end()) return it->second;
        FieldElem s;
        for (const auto& a : nf.cre) {
            FieldElem c = exp_mode_coeff(a.rule, r) *
                          FieldElem::vpow(static_cast<long>(a.uvexp) * r);
            s += a.inverse ? -c : c;
        }
        cre_cache.emplace(r, s);
        return s;
    };
    auto ann_tot = [&](int r) {
        auto it = ann_cache.find(r);
        if (it != ann_cache.end()) return it->second;
        FieldElem s;
        for (const auto& a : nf.ann) {
            FieldElem c = exp_mode_coeff(a.rule, r) *
                          FieldElem::vpow(-static_cast<long>(a.uvexp) * r);
            s += a.inverse ? -c : c;
        }
        ann_cache.emplace(r, s);
        return s;
    };

    for (const auto& [key0, coeff0] : v.terms()) {
        // zero-mode bookkeeping first: it is deterministic per component
        FieldElem w0 = coeff0 * scalar;
        long base = base_fixed;
        int charge = key0.charge;
        for (const auto& zp : nf.zpart) {
            base += static_cast<long>(zp.jbeta) * charge;
            long e = static_cast<long>(zp.uvexp) * zp.jbeta * charge;
            if (e % 2 != 0) throw std::domain_error("apply: fractional v power");
            w0 *= FieldElem::vpow(e / 2);
        }
        for (auto it = nf.trans.rbegin(); it != nf.trans.rend(); ++it) {
            if (it->jbeta % 2 == 0) {
                long s = static_cast<long>(it->jbeta / 2) * charge;
                if (s % 2 != 0) w0 = -w0;
            }
            charge += it->jbeta;
        }

        std::vector<std::pair<int, int>> runs;
        for (size_t i = 0; i < key0.parts.size();) {
            size_t j = i;
            while (j < key0.parts.size() && key0.parts[j] == key0.parts[i]) ++j;
            runs.emplace_back(key0.parts[i], static_cast<int>(j - i));
            i = j;
        }

        // annihilation patterns with the combined coefficient rule
        struct AnnOut {
            long d2 = 0;
            FieldElem w;
            std::vector<int> kept;
        };
        std::vector<AnnOut> annOuts;
        {
            AnnOut cur;
            cur.w = w0;
            std::function<void(size_t)> rec = [&](size_t ri) {
                if (ri == runs.size()) {
                    annOuts.push_back(cur);
                    return;
                }
                auto [r, m] = runs[ri];
                AnnOut saved = cur;
                FieldElem c = nf.ann.empty() ? FieldElem() : ann_tot(r) * heis_kappa(r);
                FieldElem wT = FieldElem(1);
                for (int T = 0; T <= m; ++T) {
                    if (T > 0) {
                        if (c.is_zero()) break;
                        wT *= c * FieldElem(m - T + 1) / FieldElem(T);
                    }
                    cur = saved;
                    cur.w = saved.w * wT;
                    cur.d2 = saved.d2 - 2LL * r * T;
                    for (int i = 0; i < m - T; ++i) cur.kept.push_back(r);
                    rec(ri + 1);
                }
                cur = saved;
            };
            rec(0);
        }

        // combined creation partitions within the remaining budget
        for (const auto& a : annOuts) {
            long start = base + a.d2;
            std::vector<int> parts = a.kept;
            std::function<void(int, long, const FieldElem&)> grow =
                [&](int rmin, long total, const FieldElem& w) {
                    if (total >= lo2 && total <= hi2) {
                        FockKey nk;
                        nk.parts = parts;
                        std::sort(nk.parts.begin(), nk.parts.end());
                        nk.charge = charge;
                        FockVector fv;
                        fv.add_term(nk, w);
                        out->add_term(total, fv);
                    }
                    if (nf.cre.empty()) return;
                    for (int r = rmin; total + 2LL * r <= hi2; ++r) {
                        FieldElem c = cre_tot(r);
                        if (c.is_zero()) continue;
                        FieldElem pw(1);
                        size_t n0 = parts.size();
                        for (int mm = 1; total + 2LL * mm * r <= hi2; ++mm) {
                            pw *= c / FieldElem(mm);
                            parts.push_back(r);
                            grow(r + 1, total + 2LL * mm * r, w * pw);
                        }
                        parts.resize(n0);
                    }
                };
            grow(1, start, a.w);
        }
    }
}

/// Box-mode core enumeration: zones only, exchange factors are applied later
/// as table multiplications. `include_cross` distinguishes the full product
/// from the normal-ordered prescription.
void apply_box_core(const NormalForm& nf, const FockVector& v, const Box& box,
                    long cap2, bool include_cross, JointTable* out) {
    const int nv = static_cast<int>(box.lo2.size());
    FieldElem scalar = nf.scalar;
    std::vector<long> base0(nv, 0);
    for (const auto& [var, e] : nf.zexp2) {
        if (var < 0 || var >= nv) throw std::domain_error("apply: variable out of range");
        base0[var] += e;
    }
    if (include_cross) {
        scalar *= nf.cross_scalar;
        for (const auto& [var, e] : nf.cross_zexp2) base0[var] += e;
    }
    if (scalar.is_zero()) return;

    for (const auto& [key0, coeff0] : v.terms()) {
        std::vector<std::pair<int, int>> runs;
        for (size_t i = 0; i < key0.parts.size();) {
            size_t j = i;
            while (j < key0.parts.size() && key0.parts[j] == key0.parts[i]) ++j;
            runs.emplace_back(key0.parts[i], static_cast<int>(j - i));
            i = j;
        }

        struct AnnOut {
            FieldElem w;
            std::vector<long> dexp2;
            std::vector<int> kept;
        };
        std::vector<AnnOut> annOuts;
        {
            AnnOut cur;
            cur.w = FieldElem(1);
            cur.dexp2.assign(nv, 0);
            const auto& ann = nf.ann;
            std::function<void(size_t)> rec = [&](size_t ri) {
                if (ri == runs.size()) {
                    annOuts.push_back(cur);
                    return;
                }
                auto [r, m] = runs[ri];
                std::function<void(size_t, int, const FieldElem&)> rec2 =
                    [&](size_t ai, int used, const FieldElem& w) {
                        if (ai == ann.size()) {
                            AnnOut saved = cur;
                            cur.w *= w;
                            for (int c2 = 0; c2 < m - used; ++c2) cur.kept.push_back(r);
                            rec(ri + 1);
                            cur = saved;
                            return;
                        }
                        rec2(ai + 1, used, w);
                        FieldElem c = exp_mode_coeff(ann[ai].rule, r) * heis_kappa(r) *
                                      FieldElem::vpow(-static_cast<long>(ann[ai].uvexp) * r);
                        if (ann[ai].inverse) c = -c;
                        FieldElem w2 = w;
                        AnnOut saved = cur;
                        for (int k = 1; used + k <= m; ++k) {
                            w2 *= c * FieldElem(m - used - k + 1) / FieldElem(k);
                            cur.dexp2[ann[ai].var] -= 2LL * r;
                            rec2(ai + 1, used + k, w2);
                        }
                        cur = saved;
                    };
                rec2(0, 0, FieldElem(1));
            };
            rec(0);
        }

        for (auto& aout : annOuts) {
            FieldElem w = aout.w * coeff0 * scalar;
            std::vector<long> base = base0;
            for (int i = 0; i < nv; ++i) base[i] += aout.dexp2[i];
            int charge = key0.charge;
            for (const auto& zp : nf.zpart) {
                base[zp.var] += static_cast<long>(zp.jbeta) * charge;
                long e = static_cast<long>(zp.uvexp) * zp.jbeta * charge;
                if (e % 2 != 0) throw std::domain_error("apply: fractional v power");
                w *= FieldElem::vpow(e / 2);
            }
            for (auto it = nf.trans.rbegin(); it != nf.trans.rend(); ++it) {
                if (it->jbeta % 2 == 0) {
                    long s = static_cast<long>(it->jbeta / 2) * charge;
                    if (s % 2 != 0) w = -w;
                }
                charge += it->jbeta;
            }

            const auto& cre = nf.cre;
            std::vector<int> created;
            std::function<void(size_t, std::vector<long>&, long, const FieldElem&)> recCre =
                [&](size_t ci, std::vector<long>& cur, long total, const FieldElem& wc) {
                    if (ci == cre.size()) {
                        for (int i = 0; i < nv; ++i)
                            if (cur[i] < box.lo2[i] || cur[i] > box.hi2[i]) return;
                        FockKey nk;
                        nk.parts = aout.kept;
                        nk.parts.insert(nk.parts.end(), created.begin(), created.end());
                        std::sort(nk.parts.begin(), nk.parts.end());
                        nk.charge = charge;
                        FockVector fv;
                        fv.add_term(nk, wc);
                        out->add(cur, fv);
                        return;
                    }
                    const Atom& atom = cre[ci];
                    long budget2 = std::min(box.hi2[atom.var] - cur[atom.var], cap2 - total);
                    if (budget2 < 0) return;
                    gen_creation(atom.rule, atom.inverse, atom.uvexp, budget2,
                                 [&](const PartChoice& pc) {
                                     cur[atom.var] += pc.dexp2;
                                     size_t n0 = created.size();
                                     created.insert(created.end(), pc.parts.begin(),
                                                    pc.parts.end());
                                     recCre(ci + 1, cur, total + pc.dexp2,
                                            wc * pc.weight);
                                     created.resize(n0);
                                     cur[atom.var] -= pc.dexp2;
                                 });
                };
            long total0 = 0;
            for (long e : base) total0 += e;
            std::vector<long> cur = base;
            recCre(0, cur, total0, w);
        }
    }
}

/// Support lower bound of the factor-free core per variable, for one term.
std::vector<long> core_lower_bounds(const NormalForm& nf, const FockVector& v, int nv) {
    const long kBig = 1L << 40;
    std::vector<long> lb(nv, kBig);
    for (const auto& [key0, c0] : v.terms()) {
        (void)c0;
        long d2 = 2 * key0.heis_degree();
        for (int i = 0; i < nv; ++i) {
            long base = 0;
            auto it = nf.zexp2.find(i);
            if (it != nf.zexp2.end()) base += it->second;
            auto ic = nf.cross_zexp2.find(i);
            if (ic != nf.cross_zexp2.end()) base += ic->second;
            for (const auto& zp : nf.zpart)
                if (zp.var == i) base += static_cast<long>(zp.jbeta) * key0.charge;
            bool has_ann = false;
            for (const auto& an : nf.ann)
                if (an.var == i) has_ann = true;
            if (has_ann) base -= d2;
            lb[i] = std::min(lb[i], base);
        }
    }
    return lb;
}

JointTable restrict_to(const JointTable& t, const Box& box) {
    JointTable out;
    out.nvars = static_cast<int>(box.lo2.size());
    out.lo2 = box.lo2;
    out.hi2 = box.hi2;
    for (const auto& [k, w] : t.c)
        if (out.in_box(k)) out.add(k, w);
    return out;
}

/// Full (factor-carrying) box evaluation of one term: pad the box, run the
/// core, then multiply the exchange factors in as table operations.
void eval_term_box(const NormalForm& nf, const FockVector& v, const Box& req, long cap2,
                   JointTable* out) {
    const int nv = static_cast<int>(req.lo2.size());
    std::vector<const ContractionFactor*> facs;
    bool any_series = false;
    for (const auto& f : nf.factors) {
        facs.push_back(&f);
        if (!factor_is_polynomial(f)) any_series = true;
    }
    std::sort(facs.begin(), facs.end(),
              [](const ContractionFactor* x, const ContractionFactor* y) {
                  return x->varB > y->varB;
              });
    std::vector<long> corelb;
    if (any_series) corelb = core_lower_bounds(nf, v, nv);
    std::vector<long> lower(nv, 0), tmaxes;
    for (const auto* f : facs) {
        long tmax;
        if (factor_is_polynomial(*f)) {
            tmax = (f->a2 + f->b2) / 2;
        } else {
            long lbB = corelb[f->varB] - lower[f->varB];
            tmax = std::max(0L, (req.hi2[f->varB] - lbB) / 2);
        }
        tmaxes.push_back(tmax);
        lower[f->varA] += 2 * tmax;
    }
    Box in = req;
    for (size_t i = 0; i < facs.size(); ++i) {
        in.lo2[facs[i]->varB] -= 2 * tmaxes[i];
        in.hi2[facs[i]->varA] += 2 * tmaxes[i];
    }
    // Series factors read the B-variable down to its true support.
    for (size_t i = 0; i < facs.size(); ++i) {
        if (!factor_is_polynomial(*facs[i]))
            in.lo2[facs[i]->varB] =
                std::min(in.lo2[facs[i]->varB], corelb[facs[i]->varB] - lower[facs[i]->varB]);
    }
    JointTable t;
    t.nvars = nv;
    t.lo2 = in.lo2;
    t.hi2 = in.hi2;
    apply_box_core(nf, v, in, cap2, true, &t);
    for (size_t i = 0; i < facs.size(); ++i) {
        const ContractionFactor& f = *facs[i];
        if (factor_is_polynomial(f)) {
            TablePoly p;
            for (long s = 0; s <= tmaxes[i]; ++s) {
                FieldElem c = factor_coeff(f, s);
                if (c.is_zero()) continue;
                std::vector<long> shift(nv, 0);
                shift[f.varB] += 2 * s;
                shift[f.varA] -= 2 * s;
                p.emplace_back(std::move(shift), c);
            }
            t = table_mul_poly(t, p);
        } else {
            std::vector<FieldElem> coeffs;
            for (long s = 0; s <= tmaxes[i]; ++s) coeffs.push_back(factor_coeff(f, s));
            t = table_mul_ratio_series(t, f.varA, f.varB, coeffs);
        }
    }
    JointTable r = restrict_to(t, req);
    for (const auto& [k, w] : r.c) out->add(k, w);
}

}  // namespace

// ---- table plumbing ---------------------------------------------------------

void JointTable::add(const std::vector<long>& k, const FockVector& v) {
    if (v.is_zero()) return;
    auto it = c.find(k);
    if (it == c.end()) {
        c.emplace(k, v);
    } else {
        it->second += v;
        if (it->second.is_zero()) c.erase(it);
    }
}

const FockVector* JointTable::coeff(const std::vector<long>& k) const {
    auto it = c.find(k);
    return it == c.end() ? nullptr : &it->second;
}

bool JointTable::in_box(const std::vector<long>& k) const {
    for (int i = 0; i < nvars; ++i)
        if (k[i] < lo2[i] || k[i] > hi2[i]) return false;
    return true;
}

JointTable eval_box(const OperatorExpr& e, const FockVector& v, const Box& box,
                    bool normal_ordered) {
    JointTable out;
    out.nvars = static_cast<int>(box.lo2.size());
    out.lo2 = box.lo2;
    out.hi2 = box.hi2;
    for (const auto& t : e.terms()) {
        NormalForm nf = normalize(t);
        if (normal_ordered) {
            apply_box_core(nf, v, box, kNoCap, false, &out);
        } else {
            eval_term_box(nf, v, box, box.joint_cap2, &out);
        }
    }
    return out;
}

CoeffSeries<FockVector> eval_diag(const OperatorExpr& e, const FockVector& v,
                                  long lo2, long hi2, bool normal_ordered) {
    CoeffSeries<FockVector> out(lo2, hi2);
    for (const auto& t : e.terms())
        apply_diag_term(normalize(t), v, normal_ordered, lo2, hi2, &out);
    return out;
}

CoeffSeries<FockVector> apply_truncated(const OperatorExpr& e, const FockVector& v,
                                        long lo2, long hi2) {
    return eval_diag(e, v, lo2, hi2, false);
}

JointTable product_apply(const std::vector<OperatorExpr>& es, const FockVector& v,
                         const Box& box) {
    OperatorExpr prod = OperatorExpr::unit();
    for (size_t i = 0; i < es.size(); ++i)
        prod = prod.concat(es[i].retag(static_cast<int>(i)));
    return eval_box(prod, v, box, false);
}

CoeffSeries<FockVector> normal_ordered_apply(
    const std::vector<std::pair<OperatorExpr, int>>& scaled_atoms,
    const FockVector& v, long lo2, long hi2) {
    OperatorExpr prod = OperatorExpr::unit();
    for (const auto& [op, uv] : scaled_atoms) prod = prod.concat(op.scale_subst(uv));
    return eval_diag(prod, v, lo2, hi2, true);
}

JointTable table_mul_poly(const JointTable& t, const TablePoly& p) {
    JointTable out;
    out.nvars = t.nvars;
    out.lo2.assign(t.nvars, 0);
    out.hi2.assign(t.nvars, 0);
    bool first = true;
    for (const auto& [shift, coeff] : p) {
        (void)coeff;
        for (int i = 0; i < t.nvars; ++i) {
            long lo = t.lo2[i] + shift[i], hi = t.hi2[i] + shift[i];
            if (first) {
                out.lo2[i] = lo;
                out.hi2[i] = hi;
            } else {
                out.lo2[i] = std::max(out.lo2[i], lo);
                out.hi2[i] = std::min(out.hi2[i], hi);
            }
        }
        first = false;
    }
    for (const auto& [key, v] : t.c) {
        for (const auto& [shift, coeff] : p) {
            std::vector<long> nk = key;
            for (int i = 0; i < t.nvars; ++i) nk[i] += shift[i];
            if (!out.in_box(nk)) continue;
            out.add(nk, v * coeff);
        }
    }
    return out;
}

JointTable table_mul_ratio_series(const JointTable& t, int varA, int varB,
                                  const std::vector<FieldElem>& coeffs) {
    long tmax = static_cast<long>(coeffs.size()) - 1;
    JointTable out;
    out.nvars = t.nvars;
    out.lo2 = t.lo2;
    out.hi2 = t.hi2;
    out.hi2[varA] = t.hi2[varA] - 2 * tmax;
    for (const auto& [key, v] : t.c) {
        for (long s = 0; s <= tmax; ++s) {
            if (coeffs[s].is_zero()) continue;
            std::vector<long> nk = key;
            nk[varA] -= 2 * s;
            nk[varB] += 2 * s;
            if (!out.in_box(nk)) continue;
            out.add(nk, v * coeffs[s]);
        }
    }
    return out;
}

JointTable table_deriv(const JointTable& t, int var, int order) {
    JointTable out = t;
    for (int n = 0; n < order; ++n) {
        JointTable next;
        next.nvars = out.nvars;
        next.lo2 = out.lo2;
        next.hi2 = out.hi2;
        next.lo2[var] -= 2;
        next.hi2[var] -= 2;
        for (const auto& [key, v] : out.c) {
            FieldElem f(key[var], 2);  // d/dz z^(k2/2) = (k2/2) z^(k2/2-1)
            if (f.is_zero()) continue;
            std::vector<long> nk = key;
            nk[var] -= 2;
            next.add(nk, v * f);
        }
        out = std::move(next);
    }
    return out;
}

JointTable table_shift(const JointTable& t, int var, long delta2) {
    JointTable out;
    out.nvars = t.nvars;
    out.lo2 = t.lo2;
    out.hi2 = t.hi2;
    out.lo2[var] += delta2;
    out.hi2[var] += delta2;
    for (const auto& [key, v] : t.c) {
        std::vector<long> nk = key;
        nk[var] += delta2;
        out.add(nk, v);
    }
    return out;
}

JointTable table_scale(const JointTable& t, const FieldElem& f) {
    JointTable out;
    out.nvars = t.nvars;
    out.lo2 = t.lo2;
    out.hi2 = t.hi2;
    if (f.is_zero()) return out;
    for (const auto& [key, v] : t.c) out.add(key, v * f);
    return out;
}

JointTable table_add(const JointTable& a, const JointTable& b) {
    JointTable out;
    out.nvars = a.nvars;
    out.lo2.resize(a.nvars);
    out.hi2.resize(a.nvars);
    for (int i = 0; i < a.nvars; ++i) {
        out.lo2[i] = std::max(a.lo2[i], b.lo2[i]);
        out.hi2[i] = std::min(a.hi2[i], b.hi2[i]);
    }
    for (const auto& [key, v] : a.c)
        if (out.in_box(key)) out.add(key, v);
    for (const auto& [key, v] : b.c)
        if (out.in_box(key)) out.add(key, v);
    return out;
}

std::optional<TableMismatch> table_diff(const JointTable& a, const JointTable& b) {
    std::vector<long> lo(a.nvars), hi(a.nvars);
    for (int i = 0; i < a.nvars; ++i) {
        lo[i] = std::max(a.lo2[i], b.lo2[i]);
        hi[i] = std::min(a.hi2[i], b.hi2[i]);
        if (lo[i] > hi[i]) throw std::domain_error("table_diff: empty common box");
    }
    auto inbox = [&](const std::vector<long>& k) {
        for (int i = 0; i < a.nvars; ++i)
            if (k[i] < lo[i] || k[i] > hi[i]) return false;
        return true;
    };
    std::map<std::vector<long>, char> keys;
    for (const auto& [k, v] : a.c)
        if (inbox(k)) keys[k] = 1;
    for (const auto& [k, v] : b.c)
        if (inbox(k)) keys[k] = 1;
    for (const auto& [k, dummy] : keys) {
        (void)dummy;
        const FockVector* x = a.coeff(k);
        const FockVector* y = b.coeff(k);
        FockVector xv = x ? *x : FockVector();
        FockVector yv = y ? *y : FockVector();
        if (xv != yv) return TableMismatch{k, xv.to_string(), yv.to_string()};
    }
    return std::nullopt;
}

FockVector mode_coeff(const CoeffSeries<FockVector>& s, long n) {
    return s.coeff_or_zero(-2 * n - 2);
}

CoeffSeries<FockVector> table_diag_sum(const JointTable& t, long lo2, long hi2) {
    CoeffSeries<FockVector> out(lo2, hi2);
    for (const auto& [key, v] : t.c) {
        long total = 0;
        for (long e : key) total += e;
        out.add_term(total, v);
    }
    return out;
}

std::vector<long> support_lower_bounds(const OperatorExpr& e, const FockVector& v,
                                       int nvars) {
    const long kBig = 1L << 40;
    std::vector<long> lb(nvars, kBig);
    for (const auto& term : e.terms()) {
        NormalForm nf = normalize(term);
        for (const auto& f : nf.factors)
            if (!factor_is_polynomial(f))
                throw std::domain_error(
                    "support_lower_bounds: non-polynomial exchange factor");
        for (const auto& [key0, c0] : v.terms()) {
            (void)c0;
            long d2 = 2 * key0.heis_degree();
            for (int i = 0; i < nvars; ++i) {
                long base = 0;
                auto it = nf.zexp2.find(i);
                if (it != nf.zexp2.end()) base += it->second;
                auto ic = nf.cross_zexp2.find(i);
                if (ic != nf.cross_zexp2.end()) base += ic->second;
                for (const auto& zp : nf.zpart)
                    if (zp.var == i) base += static_cast<long>(zp.jbeta) * key0.charge;
                bool has_ann = false;
                for (const auto& an : nf.ann)
                    if (an.var == i) has_ann = true;
                if (has_ann) base -= d2;
                for (const auto& f : nf.factors)
                    if (f.varA == i) base -= f.a2 + f.b2;
                lb[i] = std::min(lb[i], base);
            }
        }
    }
    return lb;
}

}  // namespace qv
