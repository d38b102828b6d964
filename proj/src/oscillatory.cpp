#include "eqloc/oscillatory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace eqloc {

namespace {

constexpr double kPi = 3.14159265358979323846;

double legendre(int n, double x, double* dp = nullptr) {
    double p0 = 1, p1 = x;
    if (n == 0) {
        if (dp) *dp = 0;
        return 1;
    }
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if (dp) *dp = n * (x * p1 - p0) / (x * x - 1);
    return p1;
}

struct LegendreTable {
    std::vector<std::vector<double>> P;  // P[m][k] = P_m(x_k)
};

const LegendreTable& legendre_table(int n) {
    static std::mutex mu;
    static std::map<int, LegendreTable> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const auto& x = gauss_legendre(n).first;
    LegendreTable t;
    t.P.assign(n, std::vector<double>(n));
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) t.P[m][k] = legendre(m, x[k]);
    return cache.emplace(n, std::move(t)).first->second;
}

// j_0 .. j_{n-1} at x >= 0: upward recurrence when it is stable (x >= n), library values otherwise.
std::vector<double> sph_bessel_all(int n, double x) {
    std::vector<double> j(n);
    if (x >= n && x > 0) {
        double s = std::sin(x), c = std::cos(x);
        j[0] = s / x;
        if (n > 1) j[1] = s / (x * x) - c / x;
        for (int m = 2; m < n; ++m) j[m] = (2 * m - 1) / x * j[m - 1] - j[m - 2];
    } else {
        for (int m = 0; m < n; ++m) j[m] = std::sph_bessel(unsigned(m), x);
    }
    return j;
}

double norm(const VecD& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct Engine {
    const RealFnN& psi;
    const FnN& amp;
    const GradFn& grad;
    double mu;
    bool oscillatory;
    int n;
    int d;

    VecD gradient(const VecD& c, const VecD& hw) const {
        if (grad) return grad(c);
        VecD g(d);
        VecD x = c;
        for (int k = 0; k < d; ++k) {
            double h = 1e-5 * std::max(hw[k], 1e-3);
            x[k] = c[k] + h;
            double fp = psi(x);
            x[k] = c[k] - h;
            double fm = psi(x);
            x[k] = c[k];
            g[k] = (fp - fm) / (2 * h);
        }
        return g;
    }

    cplx cell(const VecD& c, const VecD& hw) const {
        const auto& [x, w] = gauss_legendre(n);
        std::vector<std::vector<cplx>> W(d);
        bool filon = false;
        VecD g;
        double psic = 0;
        if (oscillatory) {
            g = gradient(c, hw);
            double diam = 2 * norm(hw);
            filon = norm(g) * diam / mu > 2 * kPi;
            if (filon) psic = psi(c);
        }
        for (int k = 0; k < d; ++k) {
            if (filon)
                W[k] = filon_weights(n, g[k] * hw[k] / mu);
            else
                W[k].assign(w.begin(), w.end());
        }
        std::vector<int> idx(d, 0);
        VecD p(d);
        cplx acc = 0;
        long total = 1;
        for (int k = 0; k < d; ++k) total *= n;
        for (long t = 0; t < total; ++t) {
            cplx wt = 1;
            for (int k = 0; k < d; ++k) {
                p[k] = c[k] + hw[k] * x[idx[k]];
                wt *= W[k][idx[k]];
            }
            cplx a = amp(p);
            if (a != 0.0) {
                if (oscillatory) {
                    double ph;
                    if (filon) {
                        ph = psi(p) - psic;
                        for (int k = 0; k < d; ++k) ph -= g[k] * (p[k] - c[k]);
                    } else {
                        ph = psi(p);
                    }
                    a *= std::polar(1.0, ph / mu);
                }
                acc += wt * a;
            }
            for (int k = 0; k < d; ++k) {
                if (++idx[k] < n) break;
                idx[k] = 0;
            }
        }
        double vol = 1;
        for (double h : hw) vol *= h;
        if (filon) acc *= std::polar(1.0, psic / mu);
        return acc * vol;
    }

    double mass(const VecD& c, const VecD& hw) const {
        const auto& [x, w] = gauss_legendre(n);
        std::vector<int> idx(d, 0);
        VecD p(d);
        double acc = 0;
        long total = 1;
        for (int k = 0; k < d; ++k) total *= n;
        for (long t = 0; t < total; ++t) {
            double wt = 1;
            for (int k = 0; k < d; ++k) {
                p[k] = c[k] + hw[k] * x[idx[k]];
                wt *= w[idx[k]];
            }
            acc += wt * std::abs(amp(p));
            for (int k = 0; k < d; ++k) {
                if (++idx[k] < n) break;
                idx[k] = 0;
            }
        }
        double vol = 1;
        for (double h : hw) vol *= h;
        return acc * vol;
    }
};

struct Leafs {
    std::vector<cplx> values;
    double error = 0;
    long cells = 0;
    bool converged = true;
};

void refine(const Engine& e, const VecD& c, const VecD& hw, cplx parent, int depth, double tol_density, long budget,
            int max_depth, Leafs& out) {
    int nchild = 1 << e.d;
    std::vector<VecD> cc(nchild, VecD(e.d));
    VecD hh(e.d);
    for (int k = 0; k < e.d; ++k) hh[k] = hw[k] / 2;
    std::vector<cplx> vals(nchild);
    cplx sum = 0;
    for (int m = 0; m < nchild; ++m) {
        for (int k = 0; k < e.d; ++k) cc[m][k] = c[k] + ((m >> k) & 1 ? hh[k] : -hh[k]);
        vals[m] = e.cell(cc[m], hh);
        sum += vals[m];
    }
    out.cells += nchild;
    double vol = 1;
    for (double h : hw) vol *= 2 * h;
    double err = std::abs(sum - parent);
    bool accept = err <= tol_density * vol;
    if (!accept && (depth >= max_depth || out.cells >= budget)) {
        out.converged = false;
        accept = true;
    }
    if (accept) {
        for (const auto& v : vals) out.values.push_back(v);
        out.error += err;
        return;
    }
    for (int m = 0; m < nchild; ++m) refine(e, cc[m], hh, vals[m], depth + 1, tol_density, budget, max_depth, out);
}

QuadResult run_engine(const Engine& e, const VecD& lo, const VecD& hi, const QuadOptions& opt) {
    QuadResult res;
    int d = e.d;
    for (int k = 0; k < d; ++k)
        if (!(hi[k] > lo[k])) {
            if (hi[k] == lo[k]) return res;
            throw std::invalid_argument("quadrature: empty box");
        }
    int m = std::max(1, opt.init_cells);
    long ntop = 1;
    for (int k = 0; k < d; ++k) ntop *= m;
    std::vector<VecD> centers(ntop, VecD(d));
    VecD hw(d);
    double vol = 1;
    for (int k = 0; k < d; ++k) {
        hw[k] = (hi[k] - lo[k]) / (2 * m);
        vol *= hi[k] - lo[k];
    }
    for (long t = 0; t < ntop; ++t) {
        long r = t;
        for (int k = 0; k < d; ++k) {
            int i = int(r % m);
            r /= m;
            centers[t][k] = lo[k] + (2 * i + 1) * hw[k];
        }
    }
    double mass = 0;
    for (const auto& c : centers) mass += e.mass(c, hw);
    double tol = std::max(opt.abs_tol, opt.rel_tol * mass);
    double tol_density = tol / vol;
    long budget = std::max<long>(1, opt.max_cells / ntop);

    std::vector<Leafs> leafs(ntop);
    auto work = [&](long t0, long t1) {
        for (long t = t0; t < t1; ++t) {
            cplx v = e.cell(centers[t], hw);
            leafs[t].cells = 1;
            refine(e, centers[t], hw, v, 0, tol_density, budget, opt.max_depth, leafs[t]);
        }
    };
    int nth = std::max(1, std::min<int>(opt.threads, int(ntop)));
    if (nth == 1) {
        work(0, ntop);
    } else {
        std::vector<std::thread> pool;
        long chunk = (ntop + nth - 1) / nth;
        for (int i = 0; i < nth; ++i) {
            long a = i * chunk, b = std::min(ntop, a + chunk);
            if (a < b) pool.emplace_back(work, a, b);
        }
        for (auto& th : pool) th.join();
    }
    std::vector<cplx> all;
    for (auto& l : leafs) {
        all.insert(all.end(), l.values.begin(), l.values.end());
        res.error += l.error;
        res.cells += l.cells;
        res.converged = res.converged && l.converged;
    }
    res.value = pairwise_sum(all);
    return res;
}

cplx pairwise(const cplx* v, std::size_t n) {
    if (n == 0) return 0;
    if (n <= 8) {
        cplx s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise(v, h) + pairwise(v + h, n - h);
}

std::vector<double> merged_breaks(double a, double b, const std::vector<double>& breaks) {
    std::vector<double> pts{a};
    std::vector<double> inner;
    for (double x : breaks)
        if (x > a && x < b) inner.push_back(x);
    std::sort(inner.begin(), inner.end());
    for (double x : inner)
        if (x > pts.back()) pts.push_back(x);
    pts.push_back(b);
    return pts;
}

// −Σ A_ab ∂_a ∂_b applied to P.
template <class T, class AFn>
MPoly<T> apply_op(const MPoly<T>& P, int l, AFn A) {
    MPoly<T> out(l);
    for (int a = 0; a < l; ++a) {
        MPoly<T> da = P.diff(a);
        if (da.is_zero()) continue;
        for (int b = 0; b < l; ++b) {
            T c = A(a, b);
            if (Ring<T>::is_zero(c)) continue;
            out -= da.diff(b).scaled(c);
        }
    }
    return out;
}

template <class T>
MPoly<T> homogeneous_part(const MPoly<T>& P, int deg) {
    MPoly<T> out(P.dim());
    for (const auto& [e, c] : P.terms()) {
        int s = std::accumulate(e.begin(), e.end(), 0);
        if (s == deg) out.add_term(e, c);
    }
    return out;
}

template <class T, class AFn>
T hormander_impl(const MPoly<T>& H, const MPoly<T>& f, int l, AFn A, int r, int k) {
    if (r < 0 || k < 0) throw std::invalid_argument("hormander_operator: negative index");
    int deg = 2 * r;
    MPoly<T> P = f.truncated(deg);
    for (int i = 0; i < k && !P.is_zero(); ++i) P = (P * H).truncated(deg);
    P = homogeneous_part(P, deg);
    for (int i = 0; i < r && !P.is_zero(); ++i) P = apply_op(P, l, A);
    return P.constant_term();
}

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Solves A w = b exactly (Gaussian elimination with nonzero pivoting).
std::vector<Rat> solve_exact(std::vector<std::vector<Rat>> A, std::vector<Rat> b) {
    int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        while (piv < n && A[piv][col].is_zero()) ++piv;
        if (piv == n) throw std::domain_error("stencil: singular Vandermonde system");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col || A[r][col].is_zero()) continue;
            Rat f = A[r][col] / A[col][col];
            for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<Rat> w(n);
    for (int i = 0; i < n; ++i) w[i] = b[i] / A[i][i];
    return w;
}

std::vector<Exponent> exponents_upto(int dim, int m) {
    std::vector<Exponent> out;
    Exponent e(dim, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == dim) {
            out.push_back(e);
            return;
        }
        for (int j = 0; j <= left; ++j) {
            e[k] = j;
            rec(k + 1, left - j);
        }
        e[k] = 0;
    };
    rec(0, m);
    return out;
}

Eigen::MatrixXd hessian_from_poly(const DPoly& P, int l) {
    Eigen::MatrixXd Hs = Eigen::MatrixXd::Zero(l, l);
    for (int a = 0; a < l; ++a)
        for (int b = a; b < l; ++b) {
            Exponent e(l, 0);
            e[a] += 1;
            e[b] += 1;
            double c = P.coeff(e);
            if (a == b)
                Hs(a, a) = 2 * c;
            else
                Hs(a, b) = Hs(b, a) = c;
        }
    return Hs;
}

double fd_step(const CleanPhase& ph) {
    return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0) * ph.scale;
}

}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p = legendre(n, z, &dp);
            double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        legendre(n, z, &dp);
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
    }
    if (n == 1) {
        x[0] = 0;
        w[0] = 2;
    }
    return cache.emplace(n, std::make_pair(x, w)).first->second;
}

cplx pairwise_sum(const std::vector<cplx>& v) { return pairwise(v.data(), v.size()); }

std::vector<cplx> filon_weights(int n, double omega) {
    const auto& [x, w] = gauss_legendre(n);
    const auto& tab = legendre_table(n);
    double a = std::abs(omega);
    std::vector<cplx> moments(n);
    std::vector<double> jn = sph_bessel_all(n, a);
    for (int m = 0; m < n; ++m) {
        double j = jn[m];
        if (omega < 0 && (m & 1)) j = -j;
        cplx im = CRat::ipow(m).re.to_double() + cplx(0, 1) * CRat::ipow(m).im.to_double();
        moments[m] = double(2 * m + 1) * im * j;
    }
    std::vector<cplx> W(n);
    for (int k = 0; k < n; ++k) {
        cplx s = 0;
        for (int m = 0; m < n; ++m) s += moments[m] * tab.P[m][k];
        W[k] = w[k] * s;
    }
    return W;
}

QuadResult integrate_1d(const Fn1& f, double a, double b, const QuadOptions& opt, const std::vector<double>& breaks) {
    RealFnN psi = [](const VecD&) { return 0.0; };
    FnN amp = [&](const VecD& x) { return f(x[0]); };
    GradFn grad = nullptr;
    Engine e{psi, amp, grad, 1.0, false, opt.order, 1};
    auto pts = merged_breaks(a, b, breaks);
    QuadResult res;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) res += run_engine(e, {pts[i]}, {pts[i + 1]}, opt);
    return res;
}

QuadResult oscillatory_1d(const RealFn1& psi, const Fn1& f, double a, double b, double mu, const QuadOptions& opt,
                          const std::vector<double>& breaks, const RealFn1& dpsi) {
    if (!(mu > 0)) throw std::invalid_argument("oscillatory_1d: mu must be positive");
    RealFnN p = [&](const VecD& x) { return psi(x[0]); };
    FnN amp = [&](const VecD& x) { return f(x[0]); };
    GradFn grad = nullptr;
    if (dpsi) grad = [&](const VecD& x) { return VecD{dpsi(x[0])}; };
    Engine e{p, amp, grad, mu, true, opt.order, 1};
    auto pts = merged_breaks(a, b, breaks);
    QuadResult res;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) res += run_engine(e, {pts[i]}, {pts[i + 1]}, opt);
    return res;
}

QuadResult oscillatory_integral(const RealFnN& psi, const FnN& a, const VecD& lo, const VecD& hi, double mu,
                                const QuadOptions& opt, const GradFn& grad) {
    if (!(mu > 0)) throw std::invalid_argument("oscillatory_integral: mu must be positive");
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("oscillatory_integral: bad box");
    Engine e{psi, a, grad, mu, true, opt.order, int(lo.size())};
    return run_engine(e, lo, hi, opt);
}

std::vector<Rat> central_stencil(int deriv, int half_width) {
    if (deriv < 0 || half_width < 0 || 2 * half_width < deriv) throw std::invalid_argument("central_stencil: bad order");
    int n = 2 * half_width + 1;
    std::vector<std::vector<Rat>> A(n, std::vector<Rat>(n));
    std::vector<Rat> b(n, Rat(0));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Rat k(i - half_width);
            Rat p(1);
            for (int t = 0; t < j; ++t) p *= k;
            A[j][i] = p;
        }
    }
    Rat fact(1);
    for (int t = 2; t <= deriv; ++t) fact *= Rat(t);
    b[deriv] = fact;
    return solve_exact(A, b);
}

DPoly fd_jet(const std::function<double(const VecD&)>& g, int dim, int m, double h) {
    if (dim < 1 || m < 0 || !(h > 0)) throw std::invalid_argument("fd_jet: bad arguments");
    // Function values keyed by offsets in units of h/2.
    std::map<std::vector<int>, double> cache;
    auto value = [&](const std::vector<int>& off) {
        auto it = cache.find(off);
        if (it != cache.end()) return it->second;
        VecD s(dim);
        for (int k = 0; k < dim; ++k) s[k] = off[k] * (h / 2);
        double v = g(s);
        cache.emplace(off, v);
        return v;
    };
    std::map<int, std::vector<double>> stencils;
    auto stencil = [&](int deriv) -> const std::vector<double>& {
        auto it = stencils.find(deriv);
        if (it != stencils.end()) return it->second;
        int P = deriv == 0 ? 0 : (deriv + 3) / 2;
        auto w = central_stencil(deriv, P);
        std::vector<double> wd;
        for (const auto& r : w) wd.push_back(r.to_double());
        return stencils.emplace(deriv, wd).first->second;
    };
    auto derivative = [&](const Exponent& alpha, int unit) {
        // unit = 2 for step h, 1 for step h/2
        std::vector<const std::vector<double>*> st(dim);
        std::vector<int> half(dim);
        for (int k = 0; k < dim; ++k) {
            st[k] = &stencil(alpha[k]);
            half[k] = int(st[k]->size()) / 2;
        }
        std::vector<int> idx(dim, 0), off(dim);
        double acc = 0;
        while (true) {
            double w = 1;
            for (int k = 0; k < dim; ++k) {
                w *= (*st[k])[idx[k]];
                off[k] = (idx[k] - half[k]) * unit;
            }
            if (w != 0) acc += w * value(off);
            int k = 0;
            for (; k < dim; ++k) {
                if (++idx[k] < int(st[k]->size())) break;
                idx[k] = 0;
            }
            if (k == dim) break;
        }
        int order = std::accumulate(alpha.begin(), alpha.end(), 0);
        double step = unit * (h / 2);
        return acc / std::pow(step, order);
    };
    DPoly out(dim);
    for (const auto& alpha : exponents_upto(dim, m)) {
        int order = std::accumulate(alpha.begin(), alpha.end(), 0);
        double D;
        if (order == 0) {
            D = value(std::vector<int>(dim, 0));
        } else {
            double Dh = derivative(alpha, 2), Dh2 = derivative(alpha, 1);
            D = (16 * Dh2 - Dh) / 15;
        }
        double fact = 1;
        for (int a : alpha) fact *= factorial(a);
        out.add_term(alpha, D / fact);
    }
    return out;
}

double hormander_operator(const DPoly& H, const DPoly& f, const Eigen::MatrixXd& A, int r, int k) {
    int l = int(A.rows());
    return hormander_impl<double>(H, f, l, [&](int a, int b) { return A(a, b); }, r, k);
}

Rat hormander_operator_exact(const QPoly& H, const QPoly& f, const SymMat& A, int r, int k) {
    return hormander_impl<Rat>(H, f, A.dim(), [&](int a, int b) { return A(a, b); }, r, k);
}

cplx hormander_coefficient(int r, int k) {
    int j = r - k;
    CRat ij = CRat::ipow(((-j) % 4 + 4) % 4);
    double den = factorial(r) * factorial(k) * std::pow(2.0, r);
    return cplx(ij.re.to_double(), ij.im.to_double()) / den;
}

CleanPhase CleanPhase::quadratic_bump(double R, int order) {
    if (!(R > 0) || order < 0) throw std::invalid_argument("quadratic_bump: R must be positive and order >= 0");
    CleanPhase ph;
    ph.l = 1;
    ph.psi = [](const VecD&, const VecD& s) { return s[0] * s[0] / 2; };
    ph.amp = [R, order](const VecD&, const VecD& s) {
        double u = s[0] / R;
        return std::abs(u) >= 1 ? 0.0 : std::pow(1 - u * u, order + 1);
    };
    ph.psi_poly = [](const VecD&) { return DPoly::monomial({2}, 0.5); };
    ph.amp_poly = [R, order](const VecD&) { return (DPoly::constant(1, 1.0) - DPoly::monomial({2}, 1 / (R * R))).pow(order + 1); };
    ph.scale = R;
    ph.amp_smoothness = order;
    return ph;
}

void CleanPhase::validate() const {
    if (l < 1) throw std::invalid_argument("CleanPhase: transversal rank must be positive");
    if (!psi || !amp) throw std::invalid_argument("CleanPhase: missing phase or amplitude evaluator");
    double h = 1e-4 * scale;
    for (std::size_t ib = 0; ib < base.size(); ++ib) {
        const VecD& x = base[ib].first;
        auto g = [&](const VecD& s) { return psi(x, s); };
        DPoly jet = fd_jet(g, l, 2, std::max(h, 1e-3 * scale));
        double v0 = jet.constant_term();
        if (std::abs(v0 - psi0) > 1e-8 * (1 + std::abs(psi0)))
            throw std::domain_error("CleanPhase: phase is not constant on C at base node " + std::to_string(ib));
        Eigen::MatrixXd Hs = hessian_from_poly(jet, l);
        for (int a = 0; a < l; ++a) {
            Exponent e(l, 0);
            e[a] = 1;
            if (std::abs(jet.coeff(e)) > 1e-7 * (1 + Hs.norm()) * scale)
                throw std::domain_error("CleanPhase: gradient does not vanish at base node " + std::to_string(ib));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
        double mn = es.eigenvalues().cwiseAbs().minCoeff();
        if (!(mn > 1e-9 * std::max(1.0, Hs.norm())))
            throw std::domain_error("CleanPhase: transversal Hessian singular at base node " + std::to_string(ib));
        // Third-order vanishing of H along coordinate and diagonal probe directions.
        std::vector<VecD> dirs;
        for (int a = 0; a < l; ++a) {
            VecD u(l, 0.0);
            u[a] = 1;
            dirs.push_back(u);
        }
        dirs.push_back(VecD(l, 1.0 / std::sqrt(double(l))));
        for (const auto& u : dirs) {
            auto Hval = [&](double t) {
                VecD s(l);
                for (int a = 0; a < l; ++a) s[a] = t * u[a];
                double q = 0;
                for (int a = 0; a < l; ++a)
                    for (int b = 0; b < l; ++b) q += Hs(a, b) * s[a] * s[b];
                return psi(x, s) - psi0 - q / 2;
            };
            double t0 = 0.05 * scale;
            double c0 = std::abs(Hval(t0)) / std::pow(t0, 3);
            double t1 = t0 / 4;
            double c1 = std::abs(Hval(t1)) / std::pow(t1, 3);
            double floor = 1e-6 * (1 + Hs.norm()) / t1;
            if (c1 > 2 * c0 + floor)
                throw std::domain_error("CleanPhase: H does not vanish to third order at base node " + std::to_string(ib));
        }
    }
}

cplx SPExpansion::evaluate(double mu) const {
    if (!(mu > 0)) throw std::invalid_argument("SPExpansion::evaluate: mu must be positive");
    cplx s = 0, p = 1;
    for (const auto& q : Q) {
        s += p * q;
        p *= mu;
    }
    cplx pre = std::polar(std::pow(2 * kPi * mu, 0.5 * l), kPi * sigma / 4.0) * std::polar(1.0, psi0 / mu);
    return pre * s;
}

SPExpansion sp_coefficients(const CleanPhase& ph, int N, SPMethod method) {
    if (N < 1) throw std::invalid_argument("sp_coefficients: N must be at least 1");
    if (ph.l < 1) throw std::invalid_argument("sp_coefficients: transversal rank must be positive");
    if (ph.amp_smoothness < 2 * N - 2)
        throw std::domain_error("sp_coefficients: amplitude is only C^" + std::to_string(ph.amp_smoothness) +
                                ", need 2N-2 = " + std::to_string(2 * N - 2) + " derivatives");
    bool symbolic = method == SPMethod::Symbolic || (method == SPMethod::Auto && ph.psi_poly && ph.amp_poly);
    if (symbolic && (!ph.psi_poly || !ph.amp_poly))
        throw std::invalid_argument("sp_coefficients: symbolic path needs polynomial phase and amplitude");
    if (!symbolic && (!ph.psi || !ph.amp)) throw std::invalid_argument("sp_coefficients: missing evaluators");
    int l = ph.l;
    SPExpansion out;
    out.psi0 = ph.psi0;
    out.l = l;
    out.N = N;
    out.Q.assign(N, 0.0);
    bool have_sigma = false;
    double h = fd_step(ph);
    for (std::size_t ib = 0; ib < ph.base.size(); ++ib) {
        const auto& [x, wbase] = ph.base[ib];
        DPoly Psi, F;
        if (symbolic) {
            Psi = ph.psi_poly(x).truncated(2 * N);
            F = ph.amp_poly(x).truncated(std::max(2 * N - 2, 0));
        } else {
            Psi = fd_jet([&](const VecD& s) { return ph.psi(x, s); }, l, 2 * N, h);
            F = fd_jet([&](const VecD& s) { return ph.amp(x, s); }, l, std::max(2 * N - 2, 0), h);
        }
        if (Psi.dim() != l || F.dim() != l) throw std::invalid_argument("sp_coefficients: Taylor polynomial dimension");
        Eigen::MatrixXd Hs = hessian_from_poly(Psi, l);
        double det = Hs.determinant();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
        double mn = es.eigenvalues().cwiseAbs().minCoeff();
        if (!(mn > 1e-12 * std::max(1.0, Hs.norm())))
            throw std::domain_error("sp_coefficients: transversal Hessian singular at base node " + std::to_string(ib));
        SymMat S(l);
        for (int a = 0; a < l; ++a)
            for (int b = a; b < l; ++b) S.set(a, b, Rat::from_double(Hs(a, b)));
        LDLT f = ldlt(S);
        int sig_eig = 0;
        for (int a = 0; a < l; ++a) sig_eig += es.eigenvalues()(a) > 0 ? 1 : -1;
        if (f.signature != sig_eig) out.sigma_matches_eigen = false;
        if (!have_sigma) {
            out.sigma = f.signature;
            have_sigma = true;
        } else if (out.sigma != f.signature) {
            throw std::domain_error("sp_coefficients: Hessian signature changes along C");
        }
        Eigen::MatrixXd A = Hs.inverse();
        DPoly H(l);
        for (const auto& [e, c] : Psi.terms())
            if (std::accumulate(e.begin(), e.end(), 0) >= 3) H.add_term(e, c);
        double wt = wbase / std::sqrt(std::abs(det));
        for (int j = 0; j < N; ++j) {
            cplx q = 0;
            for (int k = 0; k <= 2 * j; ++k) {
                int r = j + k;
                q += hormander_coefficient(r, k) * hormander_operator(H, F, A, r, k);
            }
            out.Q[j] += wt * q;
        }
    }
    return out;
}

std::pair<VecD, VecD> support_box(const SymplecticModel& m, const Amplitude& a) {
    int n = m.phase_dim();
    const double inf = std::numeric_limits<double>::infinity();
    VecD lo(n, -inf), hi(n, inf);
    if (m.kind() == ModelKind::Sphere) {
        lo = {0, -m.radius()};
        hi = {2 * kPi, m.radius()};
    } else if (m.kind() == ModelKind::CotangentCircle) {
        lo[0] = 0;
        hi[0] = 2 * kPi;
    }
    if (a.eta_bump) {
        double R = a.eta_bump->R;
        std::vector<int> coords = a.eta_bump_coords;
        if (coords.empty())
            for (int k = 0; k < n; ++k) coords.push_back(k);
        for (std::size_t i = 0; i < coords.size(); ++i) {
            int k = coords[i];
            if (m.kind() != ModelKind::LinearCotangent && k == 0) continue;  // angle coordinate
            double c = i < a.eta_bump_center.size() ? a.eta_bump_center[i] : 0.0;
            lo[k] = std::max(lo[k], c - R);
            hi[k] = std::min(hi[k], c + R);
        }
    }
    for (int k = 0; k < n; ++k)
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]))
            throw std::domain_error("amplitude is not compactly supported in coordinate " + std::to_string(k));
    return {lo, hi};
}

DecayResult decay_check(const SymplecticModel& m, const Amplitude& a, const VecD& Y, const DecayOptions& opt) {
    DecayResult out;
    if (int(Y.size()) != m.g_dim()) throw std::invalid_argument("decay_check: Y has wrong dimension");
    if (a.zero()) {
        out.zero_signal = true;
        return out;
    }
    auto [lo, hi] = support_box(m, a);
    int n = m.phase_dim();
    VecD X0(m.g_dim(), 0.0);
    // Probe the support against the critical set of J_Y (zeros of the fundamental field).
    int per = n <= 2 ? 41 : 9;
    long total = 1;
    for (int k = 0; k < n; ++k) total *= per;
    double amax = 0;
    std::vector<int> idx(n, 0);
    VecD p(n);
    for (long t = 0; t < total; ++t) {
        for (int k = 0; k < n; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (per - 1);
        double av = std::abs(a(p, X0));
        amax = std::max(amax, av);
        if (av > 0) {
            VecD v = m.fundamental_field(p, Y);
            Eigen::MatrixXd g = m.metric(p);
            double s = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (v[i] != 0 && v[j] != 0) s += g(i, j) * v[i] * v[j];
            if (std::sqrt(std::max(s, 0.0)) < 1e-9) throw std::domain_error("decay_check: support intersects the critical set");
        }
        for (int k = 0; k < n; ++k) {
            if (++idx[k] < per) break;
            idx[k] = 0;
        }
    }
    if (amax == 0) {
        out.zero_signal = true;
        return out;
    }
    RealFnN psi = [&](const VecD& eta) { return m.momentum(eta, Y); };
    FnN amp = [&](const VecD& eta) { return cplx(a(eta, X0) * m.liouville_density(eta)); };
    std::vector<double> lt, lv;
    double l0 = std::log(opt.t_min), l1 = std::log(opt.t_max);
    double peak = 0;
    for (int w = 0; w < opt.windows; ++w) {
        double ta = std::exp(l0 + (l1 - l0) * w / opt.windows);
        double tb = std::exp(l0 + (l1 - l0) * (w + 1) / opt.windows);
        double env = 0;
        for (int k = 0; k < opt.per_window; ++k) {
            double t = ta + (tb - ta) * (k + 0.5) / opt.per_window;
            QuadResult r = oscillatory_integral(psi, amp, lo, hi, 1.0 / t, opt.quad);
            env = std::max(env, std::abs(r.value));
        }
        double tc = std::sqrt(ta * tb);
        out.samples.push_back({tc, env});
        peak = std::max(peak, env);
        if (env > 0) {
            lt.push_back(std::log(tc));
            lv.push_back(std::log(env));
        }
    }
    if (peak == 0 || lt.size() < 2) {
        out.zero_signal = true;
        return out;
    }
    double mt = std::accumulate(lt.begin(), lt.end(), 0.0) / lt.size();
    double mv = std::accumulate(lv.begin(), lv.end(), 0.0) / lv.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        sxy += (lt[i] - mt) * (lv[i] - mv);
        sxx += (lt[i] - mt) * (lt[i] - mt);
    }
    out.slope = sxy / sxx;
    return out;
}

namespace {

OrderFit fit_impl(const std::vector<std::pair<double, double>>& samples, bool with_log) {
    if (samples.size() < (with_log ? 4u : 3u))
        throw std::invalid_argument(with_log ? "order_fit: need at least 4 samples" : "order_fit_pure: need at least 3 samples");
    double mn = std::numeric_limits<double>::infinity(), mx = 0;
    for (const auto& [mu, e] : samples) {
        if (!(mu > 0 && mu < 1)) throw std::invalid_argument("order_fit: mu must lie in (0, 1)");
        if (!(e >= 0) || !std::isfinite(e)) throw std::invalid_argument("order_fit: errors must be finite and nonnegative");
        mn = std::min(mn, mu);
        mx = std::max(mx, mu);
    }
    if (mx / mn < 100 * (1 - 1e-12)) throw std::invalid_argument("order_fit: samples must span at least 2 decades");
    OrderFit out;
    std::vector<std::pair<double, double>> nz;
    for (const auto& s : samples)
        if (s.second > 0) nz.push_back(s);
    if (nz.empty()) {
        out.exact = true;
        return out;
    }
    int cols = with_log ? 3 : 2;
    if (int(nz.size()) < cols) throw std::invalid_argument("order_fit: degenerate design matrix");
    Eigen::MatrixXd A(nz.size(), cols);
    Eigen::VectorXd b(nz.size());
    for (std::size_t i = 0; i < nz.size(); ++i) {
        double lm = std::log(nz[i].first);
        A(i, 0) = 1;
        A(i, 1) = lm;
        if (with_log) A(i, 2) = std::log(-lm);
        b(i) = std::log(nz[i].second);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) throw std::invalid_argument("order_fit: degenerate design matrix");
    Eigen::VectorXd x = qr.solve(b);
    out.c = x(0);
    out.exponent = x(1);
    out.logPower = with_log ? x(2) : 0.0;
    return out;
}

}  // namespace

OrderFit order_fit(const std::vector<std::pair<double, double>>& samples) { return fit_impl(samples, true); }
OrderFit order_fit_pure(const std::vector<std::pair<double, double>>& samples) { return fit_impl(samples, false); }

}  // namespace eqloc
