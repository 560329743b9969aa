#include "qv/poly.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace qv {

namespace {
const mpz_class kZero = 0;
}

void Poly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Poly Poly::monomial(const mpz_class& c, int deg) {
    Poly p;
    if (c != 0) {
        assert(deg >= 0);
        p.c_.assign(deg + 1, kZero);
        p.c_[deg] = c;
    }
    return p;
}

const mpz_class& Poly::coeff(int i) const {
    if (i < 0 || i >= static_cast<int>(c_.size())) return kZero;
    return c_[i];
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r;
    r.c_.resize(std::max(c_.size(), o.c_.size()), kZero);
    for (size_t i = 0; i < r.c_.size(); ++i) {
        if (i < c_.size()) r.c_[i] += c_[i];
        if (i < o.c_.size()) r.c_[i] += o.c_[i];
    }
    r.trim();
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly();
    Poly r;
    r.c_.assign(c_.size() + o.c_.size() - 1, kZero);
    for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] == 0) continue;
        for (size_t j = 0; j < o.c_.size(); ++j) {
            if (o.c_[j] == 0) continue;
            r.c_[i + j] += c_[i] * o.c_[j];
        }
    }
    r.trim();
    return r;
}

bool Poly::operator<(const Poly& o) const { return c_ < o.c_; }

Poly Poly::divexact(const Poly& d) const {
    if (is_zero()) return Poly();
    if (d.is_zero()) throw std::domain_error("Poly: division by zero");
    Poly rem = *this;
    Poly q;
    q.c_.assign(degree() - d.degree() + 1, kZero);
    for (int k = rem.degree() - d.degree(); rem.degree() >= d.degree(); ) {
        mpz_class qc;
        mpz_divexact(qc.get_mpz_t(), rem.lead().get_mpz_t(), d.lead().get_mpz_t());
        k = rem.degree() - d.degree();
        q.c_[k] = qc;
        Poly sub = Poly::monomial(qc, k) * d;
        rem = rem - sub;
        if (rem.is_zero()) break;
    }
    if (!rem.is_zero()) throw std::domain_error("Poly: division not exact");
    q.trim();
    return q;
}

mpz_class Poly::content() const {
    mpz_class g = 0;
    for (const auto& x : c_) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

Poly Poly::primitive_part() const {
    if (is_zero()) return Poly();
    mpz_class ct = content();
    Poly r = *this;
    for (auto& x : r.c_) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), ct.get_mpz_t());
    return r;
}

Poly Poly::prem(const Poly& a, const Poly& b) {
    // Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a = q*b + r.
    Poly r = a;
    int e = a.degree() - b.degree() + 1;
    while (!r.is_zero() && r.degree() >= b.degree()) {
        Poly sub = Poly::monomial(r.lead(), r.degree() - b.degree()) * b;
        Poly scaled = r;
        for (auto& x : scaled.c_) x *= b.lead();
        r = scaled - sub;
        --e;
    }
    // Normalize the remaining power so all prem results are comparable.
    if (e > 0 && !r.is_zero()) {
        mpz_class f;
        mpz_pow_ui(f.get_mpz_t(), b.lead().get_mpz_t(), e);
        for (auto& x : r.c_) x *= f;
    }
    return r;
}

Poly Poly::gcd(const Poly& a, const Poly& b) {
    if (a.is_zero() && b.is_zero()) return Poly();
    if (a.is_zero() || b.is_zero()) {
        Poly g = a.is_zero() ? b : a;
        mpz_class ct = g.content();
        if (g.lead() < 0) ct = -ct;
        Poly r = g;
        for (auto& x : r.c_) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), ct.get_mpz_t());
        return r;
    }
    if (a.is_one() || b.is_one()) return Poly(1);
    // Strip the common power of the variable first; monomials then resolve
    // without a remainder sequence.
    int la = a.low_order(), lb = b.low_order();
    int common = std::min(la, lb);
    mpz_class ca = a.content(), cb = b.content(), cg;
    mpz_gcd(cg.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    if (a.degree() == la || b.degree() == lb)  // one side is a monomial
        return Poly::monomial(cg, common);
    Poly f = a.primitive_part(), g = b.primitive_part();
    if (common > 0) {
        Poly sf, sg;
        sf.c_.assign(f.c_.begin() + la, f.c_.end());
        sg.c_.assign(g.c_.begin() + lb, g.c_.end());
        f = std::move(sf);
        g = std::move(sg);
    } else if (la > 0 || lb > 0) {
        // only one side divisible by v: v does not divide the gcd
        Poly sf, sg;
        sf.c_.assign(f.c_.begin() + la, f.c_.end());
        sg.c_.assign(g.c_.begin() + lb, g.c_.end());
        f = std::move(sf);
        g = std::move(sg);
    }
    if (f.degree() < g.degree()) std::swap(f, g);
    while (!g.is_zero()) {
        Poly r = prem(f, g);
        f = g;
        g = r.is_zero() ? Poly() : r.primitive_part();
    }
    if (f.lead() < 0) f = -f;
    Poly out = Poly::monomial(cg, common) * f;
    return out;
}

mpz_class Poly::eval_one() const {
    mpz_class s = 0;
    for (const auto& x : c_) s += x;
    return s;
}

int Poly::low_order() const {
    for (size_t i = 0; i < c_.size(); ++i)
        if (c_[i] != 0) return static_cast<int>(i);
    return 0;
}

std::string Poly::to_string(const std::string& var) const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const mpz_class& c = coeff(i);
        if (c == 0) continue;
        mpz_class a = abs(c);
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        if (i == 0 || a != 1) {
            os << a.get_str();
            if (i != 0) os << "*";
        }
        if (i > 0) {
            os << var;
            if (i > 1) os << "^" << i;
        }
    }
    return os.str();
}

}  // namespace qv
