#pragma once

#include "eqloc/rat.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqloc {

using Exponent = std::vector<int>;

// Sparse multivariate polynomial over a coefficient ring T.
// Zero coefficients are never stored.
template <class T>
class MPoly {
public:
    using Terms = std::map<Exponent, T>;

    MPoly() : dim_(0) {}
    explicit MPoly(int dim) : dim_(dim) {}

    static MPoly constant(int dim, const T& c) {
        MPoly p(dim);
        if (!Ring<T>::is_zero(c)) p.terms_[Exponent(dim, 0)] = c;
        return p;
    }
    static MPoly var(int dim, int i, const T& c = Ring<T>::one()) {
        if (i < 0 || i >= dim) throw std::out_of_range("MPoly::var: index");
        MPoly p(dim);
        Exponent e(dim, 0);
        e[i] = 1;
        if (!Ring<T>::is_zero(c)) p.terms_[e] = c;
        return p;
    }
    static MPoly monomial(const Exponent& e, const T& c) {
        MPoly p(int(e.size()));
        if (!Ring<T>::is_zero(c)) p.terms_[e] = c;
        return p;
    }

    int dim() const { return dim_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    T coeff(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Ring<T>::zero() : it->second;
    }
    T constant_term() const { return coeff(Exponent(dim_, 0)); }

    void add_term(const Exponent& e, const T& c) {
        if (int(e.size()) != dim_) throw std::invalid_argument("MPoly: exponent length mismatch");
        if (Ring<T>::is_zero(c)) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (Ring<T>::is_zero(it->second)) terms_.erase(it);
        }
    }

    int total_degree() const {
        int d = -1;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k : e) s += k;
            d = std::max(d, s);
        }
        return d;
    }
    int degree_in(int var) const {
        int d = -1;
        for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
        return d;
    }

    MPoly& operator+=(const MPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MPoly& operator-=(const MPoly& o) {
        check_dim(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MPoly operator-() const {
        MPoly p(dim_);
        for (const auto& [e, c] : terms_) p.terms_.emplace(e, -c);
        return p;
    }
    friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
    friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
    friend MPoly operator*(const MPoly& a, const MPoly& b) {
        a.check_dim(b);
        MPoly p(a.dim_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponent e(ea);
                for (int k = 0; k < a.dim_; ++k) e[k] += eb[k];
                p.add_term(e, ca * cb);
            }
        return p;
    }
    MPoly& operator*=(const MPoly& o) { return *this = *this * o; }
    MPoly scaled(const T& s) const {
        MPoly p(dim_);
        if (Ring<T>::is_zero(s)) return p;
        for (const auto& [e, c] : terms_) p.add_term(e, c * s);
        return p;
    }
    friend bool operator==(const MPoly& a, const MPoly& b) { return a.dim_ == b.dim_ && a.terms_ == b.terms_; }

    MPoly pow(int k) const {
        if (k < 0) throw std::invalid_argument("MPoly::pow: negative exponent");
        MPoly out = constant(dim_, Ring<T>::one());
        MPoly base = *this;
        while (k > 0) {
            if (k & 1) out = out * base;
            k >>= 1;
            if (k) base = base * base;
        }
        return out;
    }

    MPoly diff(int var) const {
        if (var < 0 || var >= dim_) throw std::out_of_range("MPoly::diff: variable index");
        MPoly p(dim_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            Exponent f(e);
            f[var] -= 1;
            p.add_term(f, c * Ring<T>::from_int(e[var]));
        }
        return p;
    }

    // Evaluation at a point with coordinates of type U; returns the product type.
    template <class U>
    auto eval(const std::vector<U>& x) const {
        using R = decltype(std::declval<T>() * std::declval<U>());
        if (int(x.size()) != dim_) throw std::invalid_argument("MPoly::eval: point dimension mismatch");
        R acc = R(Ring<T>::zero());
        for (const auto& [e, c] : terms_) {
            R t = R(c);
            for (int k = 0; k < dim_; ++k)
                for (int j = 0; j < e[k]; ++j) t = t * x[k];
            acc = acc + t;
        }
        return acc;
    }

    // Substitute variable k by the polynomial images[k] (all images share a dim).
    MPoly compose(const std::vector<MPoly>& images) const {
        if (int(images.size()) != dim_) throw std::invalid_argument("MPoly::compose: image count");
        int nd = images.empty() ? 0 : images[0].dim();
        MPoly out(nd);
        std::vector<std::vector<MPoly>> powers(dim_);
        for (const auto& [e, c] : terms_) {
            MPoly t = constant(nd, c);
            for (int k = 0; k < dim_; ++k) {
                if (e[k] == 0) continue;
                auto& pk = powers[k];
                if (pk.empty()) pk.push_back(constant(nd, Ring<T>::one()));
                while (int(pk.size()) <= e[k]) pk.push_back(pk.back() * images[k]);
                t = t * pk[e[k]];
            }
            out += t;
        }
        return out;
    }

    // Drop all monomials of total degree > maxdeg.
    MPoly truncated(int maxdeg) const {
        MPoly p(dim_);
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k : e) s += k;
            if (s <= maxdeg) p.terms_.emplace(e, c);
        }
        return p;
    }

    template <class F>
    auto map_coeffs(F f) const {
        using U = decltype(f(std::declval<T>()));
        MPoly<U> p(dim_);
        for (const auto& [e, c] : terms_) p.add_term(e, f(c));
        return p;
    }

    std::string str(const std::vector<std::string>& names = {}) const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << c;
            for (int k = 0; k < dim_; ++k) {
                if (e[k] == 0) continue;
                os << "*" << (k < int(names.size()) ? names[k] : "Y" + std::to_string(k + 1));
                if (e[k] > 1) os << "^" << e[k];
            }
        }
        return os.str();
    }

private:
    void check_dim(const MPoly& o) const {
        if (o.dim_ != dim_) throw std::invalid_argument("MPoly: dimension mismatch");
    }
    int dim_;
    Terms terms_;
};

using QPoly = MPoly<Rat>;
using CQPoly = MPoly<CRat>;
using DPoly = MPoly<double>;

inline DPoly to_dpoly(const QPoly& p) {
    return p.map_coeffs([](const Rat& r) { return r.to_double(); });
}
inline CQPoly to_cqpoly(const QPoly& p) {
    return p.map_coeffs([](const Rat& r) { return CRat(r); });
}

// Operation wrapper with an explicit mode, mirroring the poly_ops interface.
enum class PolyMode { Add, Mul, Diff, Eval };
struct PolyResult {
    bool is_scalar = false;
    QPoly poly;
    Rat scalar;
};
PolyResult poly_ops(const QPoly& p, const QPoly& q, PolyMode mode, int var = 0,
                    const std::vector<Rat>& point = {});

}  // namespace eqloc
