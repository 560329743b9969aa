#include "qv/fock.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qv {

FockVector FockVector::vacuum(int j) {
    FockVector v;
    v.t_.emplace(FockKey{{}, j}, FieldElem(1));
    return v;
}

void FockVector::add_term(const FockKey& k, const FieldElem& c) {
    if (c.is_zero()) return;
    auto it = t_.find(k);
    if (it == t_.end()) {
        t_.emplace(k, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) t_.erase(it);
    }
}

FockVector FockVector::operator+(const FockVector& o) const {
    FockVector r = *this;
    r += o;
    return r;
}

FockVector FockVector::operator-(const FockVector& o) const {
    FockVector r = *this;
    for (const auto& [k, c] : o.t_) r.add_term(k, -c);
    return r;
}

FockVector& FockVector::operator+=(const FockVector& o) {
    for (const auto& [k, c] : o.t_) add_term(k, c);
    return *this;
}

FockVector FockVector::operator*(const FieldElem& f) const {
    FockVector r;
    if (f.is_zero()) return r;
    for (const auto& [k, c] : t_) r.t_.emplace(k, c * f);
    return r;
}

long FockVector::max_heis_degree() const {
    long d = 0;
    for (const auto& [k, c] : t_) d = std::max(d, k.heis_degree());
    return d;
}

std::string FockVector::to_string() const {
    if (t_.empty()) return "0";
    std::vector<const std::pair<const FockKey, FieldElem>*> rows;
    for (const auto& kv : t_) rows.push_back(&kv);
    std::sort(rows.begin(), rows.end(), [](auto* x, auto* y) {
        auto dx = x->first.heis_degree(), dy = y->first.heis_degree();
        if (dx != dy) return dx < dy;
        if (x->first.charge != y->first.charge) return x->first.charge < y->first.charge;
        return x->first.parts < y->first.parts;
    });
    std::ostringstream os;
    bool first = true;
    for (auto* kv : rows) {
        if (!first) os << " + ";
        first = false;
        os << "(" << kv->second.to_string() << ")";
        int run = 0;
        for (size_t i = 0; i < kv->first.parts.size(); ++i) {
            int r = kv->first.parts[i];
            ++run;
            bool last = (i + 1 == kv->first.parts.size()) || kv->first.parts[i + 1] != r;
            if (last) {
                os << " a(-" << r << ")";
                if (run > 1) os << "^" << run;
                run = 0;
            }
        }
        os << " e[" << kv->first.charge << "]";
    }
    return os.str();
}

FockVector heis_act(int r, const FockVector& v) {
    if (r == 0) throw std::invalid_argument("heis_act: r must be nonzero");
    FockVector out;
    if (r < 0) {
        for (const auto& [k, c] : v.terms()) {
            FockKey nk = k;
            nk.parts.insert(std::upper_bound(nk.parts.begin(), nk.parts.end(), -r), -r);
            out.add_term(nk, c);
        }
        return out;
    }
    FieldElem kap = heis_kappa(r);
    for (const auto& [k, c] : v.terms()) {
        // Derivation: one factor a(-r) removed per occurrence.
        for (size_t i = 0; i < k.parts.size(); ++i) {
            if (k.parts[i] != r) continue;
            if (i > 0 && k.parts[i - 1] == r) continue;  // count each value once
            long mult = std::count(k.parts.begin(), k.parts.end(), r);
            FockKey nk = k;
            nk.parts.erase(nk.parts.begin() + i);
            out.add_term(nk, c * kap * FieldElem(mult));
        }
    }
    return out;
}

FockVector lattice_translate(const LatticeLabel& beta, const FockVector& v) {
    FockVector out;
    for (const auto& [k, c] : v.terms()) {
        FockKey nk = k;
        nk.charge += beta.j;
        FieldElem nc = c;
        if (beta.j % 2 == 0) {
            long s = static_cast<long>(beta.j / 2) * k.charge;
            if (s % 2 != 0) nc = -nc;
        }
        out.add_term(nk, nc);
    }
    return out;
}

FockVector charge_act(const FockVector& v) {
    FockVector out;
    for (const auto& [k, c] : v.terms()) out.add_term(k, c * FieldElem::qpow(k.charge));
    return out;
}

FockVector charge_act_inverse(const FockVector& v) {
    FockVector out;
    for (const auto& [k, c] : v.terms()) out.add_term(k, c * FieldElem::qpow(-k.charge));
    return out;
}

std::map<std::pair<long, int>, FockVector> grade(const FockVector& v) {
    std::map<std::pair<long, int>, FockVector> out;
    for (const auto& [k, c] : v.terms())
        out[{k.heis_degree(), k.charge}].add_term(k, c);
    return out;
}

}  // namespace qv
