#include "qv/field.hpp"

#include <cctype>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace qv {

FieldElem::FieldElem(long n, long d) : num_(n), den_(d) { normalize(); }
FieldElem::FieldElem(const mpz_class& n, const mpz_class& d) : num_(n), den_(d) { normalize(); }
FieldElem::FieldElem(const Poly& n, const Poly& d) : num_(n), den_(d) { normalize(); }

void FieldElem::normalize() {
    if (den_.is_zero()) throw std::domain_error("FieldElem: zero denominator");
    if (num_.is_zero()) {
        den_ = Poly(1);
        return;
    }
    Poly g = Poly::gcd(num_, den_);
    if (!g.is_one()) {
        num_ = num_.divexact(g);
        den_ = den_.divexact(g);
    }
    if (den_.lead() < 0) {
        num_ = -num_;
        den_ = -den_;
    }
}

FieldElem FieldElem::vpow(long k) {
    FieldElem r;
    if (k >= 0) {
        r.num_ = Poly::monomial(1, static_cast<int>(k));
        r.den_ = Poly(1);
    } else {
        r.num_ = Poly(1);
        r.den_ = Poly::monomial(1, static_cast<int>(-k));
    }
    return r;
}

FieldElem FieldElem::operator-() const {
    FieldElem r = *this;
    r.num_ = -r.num_;
    return r;
}

FieldElem FieldElem::operator+(const FieldElem& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    if (den_.is_one() && o.den_.is_one()) {
        FieldElem r;
        r.num_ = num_ + o.num_;
        return r;
    }
    if (den_ == o.den_) return FieldElem(num_ + o.num_, den_);
    Poly g = Poly::gcd(den_, o.den_);
    if (g.is_one()) return FieldElem(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    Poly d1 = den_.divexact(g), d2 = o.den_.divexact(g);
    return FieldElem(num_ * d2 + o.num_ * d1, den_ * d2);
}

FieldElem FieldElem::operator-(const FieldElem& o) const { return *this + (-o); }

FieldElem FieldElem::operator*(const FieldElem& o) const {
    if (is_zero() || o.is_zero()) return FieldElem();
    // Cross-reduction keeps the factors small and the result stays reduced.
    FieldElem r;
    if (den_.is_one() && o.den_.is_one()) {
        r.num_ = num_ * o.num_;
        return r;
    }
    Poly g1 = Poly::gcd(num_, o.den_);
    Poly g2 = Poly::gcd(o.num_, den_);
    const Poly n1 = g1.is_one() ? num_ : num_.divexact(g1);
    const Poly n2 = g2.is_one() ? o.num_ : o.num_.divexact(g2);
    const Poly d1 = g2.is_one() ? den_ : den_.divexact(g2);
    const Poly d2 = g1.is_one() ? o.den_ : o.den_.divexact(g1);
    r.num_ = n1 * n2;
    r.den_ = d1 * d2;
    return r;
}

FieldElem FieldElem::operator/(const FieldElem& o) const {
    if (o.is_zero()) throw std::domain_error("FieldElem: division by zero");
    if (is_zero()) return FieldElem();
    return FieldElem(num_ * o.den_, den_ * o.num_);
}

FieldElem FieldElem::inverse() const {
    if (is_zero()) throw std::domain_error("FieldElem: inverse of zero");
    return FieldElem(den_, num_);
}

FieldElem FieldElem::pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    FieldElem r(1), b = *this;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

bool FieldElem::operator<(const FieldElem& o) const {
    if (num_ != o.num_) return num_ < o.num_;
    return den_ < o.den_;
}

mpq_class FieldElem::eval_one() const {
    mpz_class d = den_.eval_one();
    if (d == 0) throw std::domain_error("FieldElem: denominator vanishes at v=1");
    mpq_class r(num_.eval_one(), d);
    r.canonicalize();
    return r;
}

std::string FieldElem::to_string() const {
    if (den_.is_one()) return num_.to_string();
    std::ostringstream os;
    os << "(" << num_.to_string() << ")/(" << den_.to_string() << ")";
    return os.str();
}

// ---- recursive-descent parser -------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    size_t i = 0;

    explicit Parser(const std::string& str) : s(str) {}

    void skip() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }

    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("FieldElem parse error at offset " +
                                    std::to_string(i) + ": " + what);
    }

    FieldElem expr() {
        FieldElem r = term();
        for (;;) {
            if (eat('+')) r += term();
            else if (eat('-')) r -= term();
            else return r;
        }
    }

    FieldElem term() {
        FieldElem r = factor();
        for (;;) {
            skip();
            if (eat('*')) r *= factor();
            else if (eat('/')) r /= factor();
            else if (i < s.size() && (s[i] == 'v' || s[i] == '(')) r *= factor();
            else return r;
        }
    }

    FieldElem factor() {
        FieldElem b = base();
        skip();
        if (eat('^')) {
            long e = integer();
            b = b.pow(e);
        }
        return b;
    }

    long integer() {
        skip();
        bool neg = eat('-');
        skip();
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) fail("expected integer");
        long n = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            n = n * 10 + (s[i] - '0');
            ++i;
        }
        return neg ? -n : n;
    }

    FieldElem base() {
        skip();
        if (i >= s.size()) fail("unexpected end");
        if (eat('(')) {
            FieldElem r = expr();
            if (!eat(')')) fail("expected ')'");
            return r;
        }
        if (eat('-')) return -factor();
        if (s[i] == 'v') { ++i; return FieldElem::vpow(1); }
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            mpz_class n = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
                n = n * 10 + (s[i] - '0');
                ++i;
            }
            return FieldElem(n, 1);
        }
        fail("unexpected character");
    }
};

}  // namespace

FieldElem FieldElem::parse(const std::string& s) {
    Parser p(s);
    FieldElem r = p.expr();
    p.skip();
    if (p.i != s.size()) p.fail("trailing input");
    return r;
}

// ---- q-numbers -----------------------------------------------------------

FieldElem qq_int(long m) {
    // (qq^m - 1)/(qq - 1) with qq = v^4.
    return (FieldElem::qqpow(m) - FieldElem(1)) / (FieldElem::qqpow(1) - FieldElem(1));
}

FieldElem qq_factorial(long l) {
    if (l < 0) throw std::invalid_argument("qq_factorial: negative argument");
    static std::map<long, FieldElem> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    FieldElem r(1);
    for (long i = 1; i <= l; ++i) r *= qq_int(i);
    cache[l] = r;
    return r;
}

FieldElem qq_binom(long m, long l) {
    if (l < 0) throw std::invalid_argument("qq_binom: negative lower index");
    FieldElem r(1);
    for (long i = 0; i < l; ++i) r *= qq_int(m - i);
    return r / qq_factorial(l);
}

FieldElem sym_q_int(long m) {
    return (FieldElem::qpow(m) - FieldElem::qpow(-m)) /
           (FieldElem::qpow(1) - FieldElem::qpow(-1));
}

FieldElem heis_kappa(long r) {
    static std::map<long, FieldElem> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    FieldElem v = sym_q_int(2 * r) * sym_q_int(r) / FieldElem(r);
    cache[r] = v;
    return v;
}

FieldElem gen_binom_half(long e2, long t) {
    // binom(e2/2, t) = prod_{j<t} (e2/2 - j) / t!
    FieldElem r(1);
    for (long j = 0; j < t; ++j) r *= FieldElem(e2 - 2 * j, 2);
    for (long j = 2; j <= t; ++j) r /= FieldElem(j);
    return r;
}

}  // namespace qv
