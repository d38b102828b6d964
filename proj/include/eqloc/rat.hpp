#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace eqloc {

// Exact rational number. mpq_class keeps num/den reduced with den > 0.
class Rat {
public:
    Rat() : v_(0) {}
    Rat(long n) : v_(n) {}
    Rat(int n) : v_(n) {}
    Rat(long n, long d) : v_(n, d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        v_.canonicalize();
    }
    explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }
    explicit Rat(const mpz_class& n, const mpz_class& d = 1) : v_(n, d) {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        v_.canonicalize();
    }

    // Parses "n" or "n/d".
    static Rat parse(const std::string& s) {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rat: cannot parse '" + s + "'");
        if (q.get_den() == 0) throw std::domain_error("Rat: zero denominator");
        q.canonicalize();
        return Rat(q);
    }

    // Exact conversion of a finite double.
    static Rat from_double(double x) {
        mpq_class q(x);
        return Rat(q);
    }

    // Nearest rational with denominator <= maxden (continued fractions).
    static Rat approximate(double x, long maxden = 1000000);

    const mpq_class& q() const { return v_; }
    mpz_class num() const { return v_.get_num(); }
    mpz_class den() const { return v_.get_den(); }
    std::string num_str() const { return v_.get_num().get_str(); }
    std::string den_str() const { return v_.get_den().get_str(); }
    std::string str() const { return v_.get_str(); }
    double to_double() const { return v_.get_d(); }
    bool is_zero() const { return sgn(v_) == 0; }
    int sign() const { return sgn(v_); }

    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
    Rat& operator/=(const Rat& o) {
        if (o.is_zero()) throw std::domain_error("Rat: division by zero");
        v_ /= o.v_;
        return *this;
    }
    friend Rat operator+(Rat a, const Rat& b) { return a += b; }
    friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
    friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
    friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
    friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    friend std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

    Rat pow(int e) const {
        Rat base = e >= 0 ? *this : Rat(1) / *this;
        Rat out(1);
        for (int i = 0; i < (e >= 0 ? e : -e); ++i) out *= base;
        return out;
    }
    Rat abs() const { return sign() < 0 ? -*this : *this; }

private:
    mpq_class v_;
};

inline Rat Rat::approximate(double x, long maxden) {
    if (!std::isfinite(x)) throw std::domain_error("Rat::approximate: non-finite");
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        long ai = static_cast<long>(a);
        long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > maxden) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double frac = r - a;
        if (std::abs(frac) < 1e-15 || std::abs(x - double(p1) / double(q1)) < 1e-15 * std::max(1.0, std::abs(x))) break;
        r = 1.0 / frac;
    }
    if (q1 == 0) return Rat(0);
    return Rat(p1, q1);
}

// Complex rational a + b i.
struct CRat {
    Rat re, im;
    CRat() = default;
    CRat(const Rat& r) : re(r), im(0) {}
    CRat(long r) : re(r), im(0) {}
    CRat(int r) : re(r), im(0) {}
    CRat(const Rat& r, const Rat& i) : re(r), im(i) {}
    static CRat I() { return CRat(Rat(0), Rat(1)); }

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    CRat conj() const { return CRat(re, -im); }
    CRat operator-() const { return CRat(-re, -im); }
    CRat& operator+=(const CRat& o) { re += o.re; im += o.im; return *this; }
    CRat& operator-=(const CRat& o) { re -= o.re; im -= o.im; return *this; }
    CRat& operator*=(const CRat& o) {
        Rat r = re * o.re - im * o.im;
        Rat i = re * o.im + im * o.re;
        re = r; im = i;
        return *this;
    }
    CRat& operator/=(const CRat& o) {
        Rat n = o.re * o.re + o.im * o.im;
        if (n.is_zero()) throw std::domain_error("CRat: division by zero");
        Rat r = (re * o.re + im * o.im) / n;
        Rat i = (im * o.re - re * o.im) / n;
        re = r; im = i;
        return *this;
    }
    friend CRat operator+(CRat a, const CRat& b) { return a += b; }
    friend CRat operator-(CRat a, const CRat& b) { return a -= b; }
    friend CRat operator*(CRat a, const CRat& b) { return a *= b; }
    friend CRat operator/(CRat a, const CRat& b) { return a /= b; }
    friend bool operator==(const CRat& a, const CRat& b) { return a.re == b.re && a.im == b.im; }
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
    double to_double() const { return re.to_double(); }
    // i^k
    static CRat ipow(int k) {
        int m = ((k % 4) + 4) % 4;
        switch (m) {
            case 0: return CRat(1);
            case 1: return CRat(0, 1);
            case 2: return CRat(-1);
            default: return CRat(0, -1);
        }
    }
    friend std::ostream& operator<<(std::ostream& os, const CRat& c) {
        if (c.im.is_zero()) return os << c.re;
        return os << "(" << c.re << (c.im.sign() < 0 ? "-" : "+") << c.im.abs() << "i)";
    }
};

// Coefficient-ring helpers so that MPoly<T> works for Rat, CRat, double and complex<double>.
template <class T> struct Ring;
template <> struct Ring<Rat> {
    static Rat zero() { return Rat(0); }
    static Rat one() { return Rat(1); }
    static bool is_zero(const Rat& x) { return x.is_zero(); }
    static Rat from_int(long k) { return Rat(k); }
};
template <> struct Ring<CRat> {
    static CRat zero() { return CRat(0); }
    static CRat one() { return CRat(1); }
    static bool is_zero(const CRat& x) { return x.is_zero(); }
    static CRat from_int(long k) { return CRat(k); }
};
template <> struct Ring<double> {
    static double zero() { return 0.0; }
    static double one() { return 1.0; }
    static bool is_zero(double x) { return x == 0.0; }
    static double from_int(long k) { return double(k); }
};
template <> struct Ring<std::complex<double>> {
    static std::complex<double> zero() { return 0.0; }
    static std::complex<double> one() { return 1.0; }
    static bool is_zero(const std::complex<double>& x) { return x == 0.0; }
    static std::complex<double> from_int(long k) { return double(k); }
};

inline double to_double(const Rat& r) { return r.to_double(); }
inline double to_double(double x) { return x; }
inline std::complex<double> to_complex(const Rat& r) { return r.to_double(); }
inline std::complex<double> to_complex(const CRat& c) { return c.to_complex(); }
inline std::complex<double> to_complex(double x) { return x; }
inline std::complex<double> to_complex(const std::complex<double>& x) { return x; }

}  // namespace eqloc
