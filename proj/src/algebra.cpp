#include "eqloc/algebra.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace eqloc {

PolyResult poly_ops(const QPoly& p, const QPoly& q, PolyMode mode, int var, const std::vector<Rat>& point) {
    PolyResult r;
    switch (mode) {
        case PolyMode::Add:
            r.poly = p + q;
            break;
        case PolyMode::Mul:
            r.poly = p * q;
            break;
        case PolyMode::Diff:
            r.poly = p.diff(var);
            break;
        case PolyMode::Eval:
            r.is_scalar = true;
            r.scalar = p.eval(point);
            break;
    }
    return r;
}

// ---------------------------------------------------------------- LinForm

Rat LinForm::eval(const std::vector<Rat>& y) const {
    if (y.size() != coeffs.size()) throw std::invalid_argument("LinForm::eval: dimension mismatch");
    Rat s(0);
    for (std::size_t i = 0; i < y.size(); ++i) s += coeffs[i] * y[i];
    return s;
}

double LinForm::eval(const std::vector<double>& y) const {
    if (y.size() != coeffs.size()) throw std::invalid_argument("LinForm::eval: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += coeffs[i].to_double() * y[i];
    return s;
}

QPoly LinForm::to_poly() const {
    QPoly p(dim());
    for (int i = 0; i < dim(); ++i) p += QPoly::var(dim(), i, coeffs[i]);
    return p;
}

LinForm LinForm::operator-() const { return scaled(Rat(-1)); }

LinForm LinForm::scaled(const Rat& s) const {
    LinForm l(coeffs);
    for (auto& c : l.coeffs) c *= s;
    return l;
}

LinForm operator+(const LinForm& a, const LinForm& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("LinForm: dimension mismatch");
    LinForm l(a.coeffs);
    for (int i = 0; i < a.dim(); ++i) l.coeffs[i] += b.coeffs[i];
    return l;
}

bool operator<(const LinForm& a, const LinForm& b) {
    return std::lexicographical_compare(a.coeffs.begin(), a.coeffs.end(), b.coeffs.begin(), b.coeffs.end());
}

std::string LinForm::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < dim(); ++i) os << (i ? "," : "") << coeffs[i];
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------- RatExp

void RatExp::add(RatExpTerm t) {
    if (t.phase.dim() == 0) t.phase = LinForm::zero(dim);
    if (t.P.dim() == 0 && t.P.is_zero()) t.P = QPoly::constant(dim, Rat(1));
    terms.push_back(std::move(t));
    validate();
}

void RatExp::validate() const {
    for (const auto& t : terms) {
        if (t.phase.dim() != dim || t.P.dim() != dim)
            throw std::invalid_argument("RatExp: forms must share the torus dimension");
        for (const auto& [l, r] : t.denoms) {
            if (l.dim() != dim) throw std::invalid_argument("RatExp: denominator dimension mismatch");
            if (l.is_zero()) throw std::invalid_argument("RatExp: zero denominator form");
            if (r <= 0) throw std::invalid_argument("RatExp: multiplicity must be positive");
        }
    }
}

std::complex<double> RatExp::eval(const std::vector<double>& y) const {
    return eval_shifted(y, std::vector<double>(y.size(), 0.0));
}

std::complex<double> RatExp::eval_shifted(const std::vector<double>& y, const std::vector<double>& z) const {
    using C = std::complex<double>;
    std::vector<C> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = C(y[i], z[i]);
    C acc = 0;
    for (const auto& t : terms) {
        C ph = 0;
        for (int i = 0; i < dim; ++i) ph += t.phase.coeffs[i].to_double() * w[i];
        C v = t.c.to_complex() * std::pow(2 * std::numbers::pi, t.twopi) * std::exp(C(0, 1) * ph);
        C pv = 0;
        for (const auto& [e, c] : t.P.terms()) {
            C m = c.to_double();
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < e[i]; ++j) m *= w[i];
            pv += m;
        }
        v *= pv;
        for (const auto& [l, r] : t.denoms) {
            C lv = 0;
            for (int i = 0; i < dim; ++i) lv += l.coeffs[i].to_double() * w[i];
            v /= std::pow(lv, r);
        }
        acc += v;
    }
    return acc;
}

RatExp RatExp::times_poly(const QPoly& p) const {
    RatExp out(dim);
    for (auto t : terms) {
        t.P = t.P * p;
        out.terms.push_back(std::move(t));
    }
    return out;
}

RatExp RatExp::scaled(const CRat& s) const {
    RatExp out(dim);
    for (auto t : terms) {
        t.c *= s;
        out.terms.push_back(std::move(t));
    }
    return out;
}

RatExp RatExp::operator+(const RatExp& o) const {
    if (o.dim != dim) throw std::invalid_argument("RatExp: dimension mismatch");
    RatExp out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    return out;
}

// ---------------------------------------------------------------- SymMat / LDLT

SymMat SymMat::identity(int n) {
    SymMat m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, Rat(1));
    return m;
}

SymMat SymMat::from_rows(const std::vector<std::vector<Rat>>& rows) {
    int n = int(rows.size());
    SymMat m(n);
    for (int i = 0; i < n; ++i) {
        if (int(rows[i].size()) != n) throw std::invalid_argument("SymMat: not square");
        for (int j = 0; j < n; ++j) m.a_[std::size_t(i) * n + j] = rows[i][j];
    }
    if (!m.is_symmetric()) throw std::invalid_argument("SymMat: not symmetric");
    return m;
}

bool SymMat::is_symmetric() const {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < i; ++j)
            if (!((*this)(i, j) == (*this)(j, i))) return false;
    return true;
}

SymMat SymMat::congruence(const std::vector<std::vector<Rat>>& P) const {
    SymMat out(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j) {
            Rat s(0);
            for (int k = 0; k < n_; ++k) {
                if (P[k][i].is_zero()) continue;
                Rat t(0);
                for (int l = 0; l < n_; ++l) t += (*this)(k, l) * P[l][j];
                s += P[k][i] * t;
            }
            out.set(i, j, s);
        }
    return out;
}

std::vector<std::vector<double>> SymMat::to_double() const {
    std::vector<std::vector<double>> m(n_, std::vector<double>(n_));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m[i][j] = (*this)(i, j).to_double();
    return m;
}

namespace {

using QMat = std::vector<std::vector<Rat>>;

QMat zeros(int n) { return QMat(n, std::vector<Rat>(n, Rat(0))); }

void sym_swap(QMat& A, int i, int j) {
    if (i == j) return;
    std::swap(A[i], A[j]);
    for (auto& row : A) std::swap(row[i], row[j]);
}

std::optional<QMat> inverse_exact(QMat A) {
    int n = int(A.size());
    QMat B = zeros(n);
    for (int i = 0; i < n; ++i) B[i][i] = Rat(1);
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (!A[r][c].is_zero()) { piv = r; break; }
        if (piv < 0) return std::nullopt;
        std::swap(A[c], A[piv]);
        std::swap(B[c], B[piv]);
        Rat inv = Rat(1) / A[c][c];
        for (int k = 0; k < n; ++k) { A[c][k] *= inv; B[c][k] *= inv; }
        for (int r = 0; r < n; ++r) {
            if (r == c || A[r][c].is_zero()) continue;
            Rat f = A[r][c];
            for (int k = 0; k < n; ++k) { A[r][k] -= f * A[c][k]; B[r][k] -= f * B[c][k]; }
        }
    }
    return B;
}

}  // namespace

LDLT ldlt(const SymMat& m) {
    if (!m.is_symmetric()) throw std::invalid_argument("ldlt: matrix not symmetric");
    int n = m.dim();
    QMat A = zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i][j] = m(i, j);

    LDLT out;
    out.perm.resize(n);
    for (int i = 0; i < n; ++i) out.perm[i] = i;
    QMat L = zeros(n), D = zeros(n);
    for (int i = 0; i < n; ++i) L[i][i] = Rat(1);
    out.det = Rat(1);

    auto swap_all = [&](int i, int j) {
        if (i == j) return;
        sym_swap(A, i, j);
        std::swap(out.perm[i], out.perm[j]);
        // L columns already computed (0..k-1) follow the row permutation.
        std::swap(L[i], L[j]);
        std::swap(L[i][i], L[i][j]);
        std::swap(L[j][j], L[j][i]);
    };

    int k = 0;
    while (k < n) {
        // Prefer the diagonal entry of largest magnitude.
        int best = -1;
        for (int i = k; i < n; ++i)
            if (!A[i][i].is_zero() && (best < 0 || A[i][i].abs() > A[best][best].abs())) best = i;
        if (best >= 0) {
            swap_all(k, best);
            Rat d = A[k][k];
            D[k][k] = d;
            out.det *= d;
            out.signature += d.sign();
            for (int j = k + 1; j < n; ++j) L[j][k] = A[j][k] / d;
            for (int i = k + 1; i < n; ++i)
                for (int j = k + 1; j < n; ++j) A[i][j] -= L[i][k] * d * L[j][k];
            for (int j = k + 1; j < n; ++j) { A[j][k] = Rat(0); A[k][j] = Rat(0); }
            k += 1;
            continue;
        }
        int bi = -1, bj = -1;
        for (int i = k; i < n && bi < 0; ++i)
            for (int j = i + 1; j < n; ++j)
                if (!A[i][j].is_zero()) { bi = i; bj = j; break; }
        if (bi < 0) {
            out.singular = true;
            break;
        }
        swap_all(k, bi);
        swap_all(k + 1, bj == k ? bi : bj);
        // Pivot block E = [[a, b], [b, c]] with a = c = 0 here.
        Rat a = A[k][k], b = A[k][k + 1], c = A[k + 1][k + 1];
        Rat det2 = a * c - b * b;
        D[k][k] = a; D[k][k + 1] = b; D[k + 1][k] = b; D[k + 1][k + 1] = c;
        out.det *= det2;
        out.signature += det2.sign() < 0 ? 0 : 2 * (a + c).sign();
        Rat e00 = c / det2, e01 = -b / det2, e11 = a / det2;
        for (int j = k + 2; j < n; ++j) {
            Rat x = A[j][k], y = A[j][k + 1];
            L[j][k] = x * e00 + y * e01;
            L[j][k + 1] = x * e01 + y * e11;
        }
        for (int i = k + 2; i < n; ++i)
            for (int j = k + 2; j < n; ++j)
                A[i][j] -= L[i][k] * A[j][k] + L[i][k + 1] * A[j][k + 1];
        for (int j = k + 2; j < n; ++j) {
            A[j][k] = A[k][j] = A[j][k + 1] = A[k + 1][j] = Rat(0);
        }
        k += 2;
    }
    out.rank = k;
    if (out.singular) {
        out.det = Rat(0);
    } else {
        QMat M = zeros(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M[i][j] = m(i, j);
        auto inv = inverse_exact(M);
        if (inv) {
            SymMat s(n);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) s.set(i, j, (*inv)[i][j]);
            out.inverse = s;
        }
    }
    out.L = L;
    out.D = D;
    return out;
}

SymMat LDLT::reconstruct() const {
    int n = int(L.size());
    QMat LD = zeros(n), M = zeros(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (!L[i][k].is_zero() && !D[k][j].is_zero()) LD[i][j] += L[i][k] * D[k][j];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (!LD[i][k].is_zero() && !L[j][k].is_zero()) M[i][j] += LD[i][k] * L[j][k];
    SymMat out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out.set(perm[i], perm[j], M[i][j]);
    return out;
}

// ---------------------------------------------------------------- Chambers

namespace {

Rat wall_value(const Wall& w, const std::vector<Rat>& xi) {
    Rat s = -w.offset;
    for (std::size_t i = 0; i < xi.size(); ++i) s += w.c[i] * xi[i];
    return s;
}

}  // namespace

bool Chamber::contains(const std::vector<Rat>& xi) const {
    for (const auto& w : walls)
        if (wall_value(w, xi).sign() < 0) return false;
    return true;
}

bool Chamber::contains_open(const std::vector<Rat>& xi) const {
    for (const auto& w : walls)
        if (wall_value(w, xi).sign() <= 0) return false;
    return true;
}

bool Chamber::contains(const std::vector<double>& xi, double tol) const {
    for (const auto& w : walls) {
        double s = -w.offset.to_double();
        for (std::size_t i = 0; i < xi.size(); ++i) s += w.c[i].to_double() * xi[i];
        if (s < -tol) return false;
    }
    return true;
}

double PiecewisePoly::scale() const { return std::pow(2 * std::numbers::pi, twopi); }

std::complex<double> PiecewisePoly::density(const std::vector<double>& xi) const {
    for (const auto& ch : chambers) {
        if (!ch.contains(xi)) continue;
        std::complex<double> v = 0;
        for (const auto& [e, c] : ch.density.terms()) {
            std::complex<double> m = c.to_complex();
            for (std::size_t i = 0; i < xi.size(); ++i) m *= std::pow(xi[i], e[i]);
            v += m;
        }
        return v * scale();
    }
    return 0.0;
}

std::complex<double> PiecewisePoly::mass() const {
    if (dim != 1) throw std::invalid_argument("PiecewisePoly::mass: dim 1 only");
    CRat total(0);
    for (const auto& ch : chambers) {
        std::optional<Rat> lo, hi;
        for (const auto& w : ch.walls) {
            Rat b = w.offset / w.c[0];
            if (w.c[0].sign() > 0) { if (!lo || b > *lo) lo = b; }
            else { if (!hi || b < *hi) hi = b; }
        }
        if (!lo || !hi) throw std::domain_error("PiecewisePoly::mass: unbounded chamber with nonzero density");
        for (const auto& [e, c] : ch.density.terms()) {
            int k = e[0] + 1;
            total += c * CRat((hi->pow(k) - lo->pow(k)) / Rat(k));
        }
    }
    return total.to_complex() * scale();
}

bool PiecewisePoly::same_densities(const PiecewisePoly& o) const {
    if (dim != o.dim || twopi != o.twopi) return false;
    auto poly_at = [](const PiecewisePoly& U, const std::vector<Rat>& w) -> CQPoly {
        for (const auto& ch : U.chambers)
            if (ch.contains_open(w)) return ch.density;
        return CQPoly(U.dim);
    };
    for (const auto* A : {this, &o}) {
        const PiecewisePoly* B = (A == this) ? &o : this;
        for (const auto& ch : A->chambers)
            if (!(poly_at(*B, ch.witness) == ch.density)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- JSON / CSV

namespace {

using nlohmann::json;

json rat_pair(const Rat& r) { return json::array({r.num_str(), r.den_str()}); }
Rat rat_from_pair(const json& j) {
    if (j.is_array()) return Rat(mpz_class(j.at(0).get<std::string>()), mpz_class(j.at(1).get<std::string>()));
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    return Rat::from_double(j.get<double>());
}
std::string exp_key(const Exponent& e) {
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s;
}
Exponent exp_from_key(const std::string& s, int dim) {
    Exponent e;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) e.push_back(std::stoi(tok));
    if (int(e.size()) != dim) throw std::invalid_argument("PiecewisePoly JSON: exponent length");
    return e;
}

}  // namespace

std::string to_json_string(const PiecewisePoly& U) {
    json j;
    j["dim"] = U.dim;
    j["twopi_power"] = U.twopi;
    j["bounded"] = U.bounded;
    json chs = json::array();
    for (const auto& ch : U.chambers) {
        json cj;
        json walls = json::array();
        for (const auto& w : ch.walls) {
            json coeffs = json::array();
            for (const auto& c : w.c) coeffs.push_back(c.str());
            walls.push_back(json::array({coeffs, w.offset.str()}));
        }
        cj["walls"] = walls;
        json dre = json::object(), dim_ = json::object();
        for (const auto& [e, c] : ch.density.terms()) {
            if (!c.re.is_zero()) dre[exp_key(e)] = rat_pair(c.re);
            if (!c.im.is_zero()) dim_[exp_key(e)] = rat_pair(c.im);
        }
        cj["density"] = dre;
        if (!dim_.empty()) cj["density_im"] = dim_;
        json wit = json::array();
        for (const auto& x : ch.witness) wit.push_back(x.str());
        cj["witness"] = wit;
        chs.push_back(cj);
    }
    j["chambers"] = chs;
    j["atoms"] = int(U.atoms.size());
    return j.dump(2);
}

PiecewisePoly piecewise_from_json_string(const std::string& s) {
    json j = json::parse(s);
    PiecewisePoly U;
    U.dim = j.at("dim").get<int>();
    U.twopi = j.value("twopi_power", 0);
    U.bounded = j.value("bounded", true);
    for (const auto& cj : j.at("chambers")) {
        Chamber ch;
        for (const auto& wj : cj.at("walls")) {
            Wall w;
            for (const auto& c : wj.at(0)) w.c.push_back(rat_from_pair(c));
            w.offset = rat_from_pair(wj.at(1));
            if (int(w.c.size()) != U.dim) throw std::invalid_argument("PiecewisePoly JSON: wall dimension");
            ch.walls.push_back(w);
        }
        ch.density = CQPoly(U.dim);
        for (const auto& [k, v] : cj.at("density").items()) ch.density.add_term(exp_from_key(k, U.dim), CRat(rat_from_pair(v)));
        if (cj.contains("density_im"))
            for (const auto& [k, v] : cj.at("density_im").items())
                ch.density.add_term(exp_from_key(k, U.dim), CRat(Rat(0), rat_from_pair(v)));
        if (cj.contains("witness"))
            for (const auto& x : cj.at("witness")) ch.witness.push_back(rat_from_pair(x));
        U.chambers.push_back(std::move(ch));
    }
    return U;
}

std::string to_csv(const PiecewisePoly& U, const std::vector<double>& lo, const std::vector<double>& hi, int n) {
    std::ostringstream os;
    os.precision(17);
    if (U.dim == 1) {
        os << "xi,re,im\n";
        for (int i = 0; i < n; ++i) {
            double x = lo[0] + (hi[0] - lo[0]) * (n == 1 ? 0.5 : double(i) / (n - 1));
            auto v = U.density({x});
            os << x << "," << v.real() << "," << v.imag() << "\n";
        }
    } else {
        os << "xi1,xi2,re,im\n";
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double x = lo[0] + (hi[0] - lo[0]) * (n == 1 ? 0.5 : double(i) / (n - 1));
                double y = lo[1] + (hi[1] - lo[1]) * (n == 1 ? 0.5 : double(k) / (n - 1));
                auto v = U.density({x, y});
                os << x << "," << y << "," << v.real() << "," << v.imag() << "\n";
            }
    }
    return os.str();
}

// ---------------------------------------------------------------- Residues

WallDirection::WallDirection(const Wall& w) : std::runtime_error("wall direction"), wall(w) {}

std::complex<double> ResidueResult::numeric() const {
    return value.to_complex() * std::pow(2 * std::numbers::pi, twopi);
}

ResidueResult residue_ray(const PiecewisePoly& U, const std::vector<Rat>& dir) {
    if (int(dir.size()) != U.dim) throw std::invalid_argument("residue_ray: direction dimension");
    bool nonzero = false;
    for (const auto& x : dir) nonzero = nonzero || !x.is_zero();
    if (!nonzero) throw std::invalid_argument("residue_ray: zero direction");
    ResidueResult res;
    res.twopi = U.twopi;
    for (const auto& ch : U.chambers) {
        bool inside = true;
        for (const auto& w : ch.walls) {
            int so = w.offset.sign();
            if (so < 0) continue;
            if (so > 0) { inside = false; break; }
            Rat slope(0);
            for (int i = 0; i < U.dim; ++i) slope += w.c[i] * dir[i];
            if (slope.is_zero()) throw WallDirection(w);
            if (slope.sign() < 0) { inside = false; break; }
        }
        if (inside) {
            res.value = ch.density.constant_term();
            return res;
        }
    }
    res.value = CRat(0);
    return res;
}

}  // namespace eqloc
