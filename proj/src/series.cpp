#include "qv/series.hpp"

#include <algorithm>
#include <cassert>

namespace qv {

ScalarSeries monomial_series(const FieldElem& a, long k2, long lo2, long hi2) {
    ScalarSeries s(lo2, hi2);
    s.add_term(k2, a);
    return s;
}

ScalarSeries add(const ScalarSeries& a, const ScalarSeries& b) {
    ScalarSeries r(std::max(a.lo2, b.lo2), std::min(a.hi2, b.hi2));
    for (const auto& [k, v] : a.c) r.add_term(k, v);
    for (const auto& [k, v] : b.c) r.add_term(k, v);
    return r;
}

ScalarSeries scale(const ScalarSeries& a, const FieldElem& f) {
    ScalarSeries r(a.lo2, a.hi2);
    for (const auto& [k, v] : a.c) r.add_term(k, v * f);
    return r;
}

ScalarSeries subst_scale(const ScalarSeries& a, long uv) {
    ScalarSeries r(a.lo2, a.hi2);
    for (const auto& [k, v] : a.c) {
        long e = uv * k;
        if (e % 2 != 0) throw std::domain_error("subst_scale: fractional power of v");
        r.add_term(k, v * FieldElem::vpow(e / 2));
    }
    return r;
}

ScalarSeries mul(const ScalarSeries& a, const ScalarSeries& b) {
    // Correct-window product: coefficient at k is exact when every split
    // k = i + j with i in a's support range and j in b's is covered, which
    // holds when k - j stays inside a's window for all j in b's window and
    // vice versa. The conservative guarantee below assumes both inputs have
    // no support below their windows (true for everything built here).
    ScalarSeries r(a.lo2 + b.lo2, std::min(a.hi2 + b.lo2, b.hi2 + a.lo2));
    for (const auto& [i, x] : a.c)
        for (const auto& [j, y] : b.c) r.add_term(i + j, x * y);
    return r;
}

ScalarSeries qderive(const ScalarSeries& a) {
    ScalarSeries r(a.lo2 - 2, a.hi2 - 2);
    for (const auto& [k, v] : a.c) r.add_term(k - 2, v * qq_int_half(k));
    return r;
}

ScalarSeries qderive_n(const ScalarSeries& a, int n) {
    ScalarSeries r = a;
    for (int i = 0; i < n; ++i) r = qderive(r);
    return r;
}

std::vector<ScalarSeries> qtaylor(const ScalarSeries& a, int order) {
    std::vector<ScalarSeries> out;
    ScalarSeries cur = a;
    for (int l = 0; l <= order; ++l) {
        out.push_back(scale(cur, qq_factorial(l).inverse()));
        cur = qderive(cur);
    }
    return out;
}

bool equal_on_common_window(const ScalarSeries& a, const ScalarSeries& b) {
    long lo = std::max(a.lo2, b.lo2), hi = std::min(a.hi2, b.hi2);
    if (lo > hi) throw std::domain_error("equal_on_common_window: empty common window");
    for (long k = lo; k <= hi; ++k) {
        const FieldElem* x = a.coeff(k);
        const FieldElem* y = b.coeff(k);
        FieldElem xv = x ? *x : FieldElem();
        FieldElem yv = y ? *y : FieldElem();
        if (xv != yv) return false;
    }
    return true;
}

// ---- noncommutative monomials --------------------------------------------

std::string NCWord::to_string() const {
    std::ostringstream os;
    os << "(" << scalar.to_string() << ")";
    if (a) os << " z^" << a;
    if (b) os << " z0^" << b;
    if (c) os << " z2^" << c;
    return os.str();
}

NCWord nc_normal_order(const std::vector<NCVar>& word) {
    // Counting inversions: every out-of-order pair costs exactly one
    // transposition of adjacent distinct letters, each worth a factor qq.
    long inv = 0;
    int na = 0, nb = 0, nc = 0;
    for (size_t i = 0; i < word.size(); ++i) {
        for (size_t j = i + 1; j < word.size(); ++j) {
            if (static_cast<int>(word[i]) > static_cast<int>(word[j])) ++inv;
        }
        switch (word[i]) {
            case NCVar::Z: ++na; break;
            case NCVar::Z0: ++nb; break;
            case NCVar::Z2: ++nc; break;
        }
    }
    return NCWord{FieldElem::qqpow(inv), na, nb, nc};
}

std::vector<NCWord> nc_collect(std::vector<NCWord> words) {
    std::sort(words.begin(), words.end(), [](const NCWord& x, const NCWord& y) {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    });
    std::vector<NCWord> out;
    for (auto& w : words) {
        if (!out.empty() && out.back().same_monomial(w)) {
            out.back().scalar += w.scalar;
        } else {
            out.push_back(w);
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const NCWord& w) { return w.scalar.is_zero(); }),
              out.end());
    return out;
}

NCWord nc_mul(const NCWord& x, const NCWord& y) {
    // x = s z^a z0^b z2^c, y = t z^d z0^e z2^f. Moving z^d left past z0^b z2^c
    // costs qq^(d*(b+c)); moving z0^e left past z2^c costs qq^(e*c).
    long inv = static_cast<long>(y.a) * (x.b + x.c) + static_cast<long>(y.b) * x.c;
    return NCWord{x.scalar * y.scalar * FieldElem::qqpow(inv),
                  x.a + y.a, x.b + y.b, x.c + y.c};
}

std::vector<NCWord> nc_binomial(long m, int order) {
    std::vector<NCWord> out;
    long top = (m >= 0) ? m : order;
    for (long l = 0; l <= top; ++l) {
        out.push_back(NCWord{qq_binom(m, l),
                             static_cast<int>(m - l), static_cast<int>(l), 0});
    }
    return out;
}

}  // namespace qv
