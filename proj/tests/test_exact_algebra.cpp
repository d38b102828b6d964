#include "doctest.h"

#include "eqloc/algebra.hpp"
#include "support.hpp"

#include <algorithm>
#include <numbers>
#include <random>

using namespace eqloc;
using testsupport::cplx;

namespace {

Rat rand_rat(std::mt19937& g, int range = 20) {
    std::uniform_int_distribution<int> num(-range, range), den(1, range);
    return Rat(num(g), den(g));
}

QPoly rand_poly(std::mt19937& g, int dim, int terms, int maxdeg) {
    QPoly p(dim);
    std::uniform_int_distribution<int> deg(0, maxdeg);
    for (int t = 0; t < terms; ++t) {
        Exponent e(dim);
        for (auto& k : e) k = deg(g);
        p.add_term(e, rand_rat(g));
    }
    return p;
}

LinForm lf(std::initializer_list<int> c) {
    std::vector<Rat> v;
    for (int x : c) v.emplace_back(x);
    return LinForm(v);
}

RatExpTerm term(CRat c, LinForm phase, QPoly P, std::vector<std::pair<LinForm, int>> denoms, int twopi = 0) {
    RatExpTerm t;
    t.c = c;
    t.twopi = twopi;
    t.phase = std::move(phase);
    t.P = std::move(P);
    t.denoms = std::move(denoms);
    return t;
}

// Double-precision copy of a PiecewisePoly for fast sampling.
struct FastPW {
    struct Ch {
        std::vector<std::pair<std::vector<double>, double>> walls;
        std::vector<std::pair<Exponent, cplx>> terms;
    };
    std::vector<Ch> chs;
    double scale;
    explicit FastPW(const PiecewisePoly& U) : scale(U.scale()) {
        for (const auto& ch : U.chambers) {
            Ch c;
            for (const auto& w : ch.walls) {
                std::vector<double> cc;
                for (const auto& r : w.c) cc.push_back(r.to_double());
                c.walls.push_back({cc, w.offset.to_double()});
            }
            for (const auto& [e, v] : ch.density.terms()) c.terms.push_back({e, v.to_complex()});
            chs.push_back(c);
        }
    }
    cplx operator()(const std::vector<double>& x) const {
        for (const auto& c : chs) {
            bool in = true;
            for (const auto& [cc, off] : c.walls) {
                double s = -off;
                for (std::size_t i = 0; i < x.size(); ++i) s += cc[i] * x[i];
                if (s < 0) { in = false; break; }
            }
            if (!in) continue;
            cplx v = 0;
            for (const auto& [e, t] : c.terms) {
                cplx m = t;
                for (std::size_t i = 0; i < x.size(); ++i) m *= std::pow(x[i], e[i]);
                v += m;
            }
            return v * scale;
        }
        return 0.0;
    }
};

std::vector<double> split_points(std::vector<double> bps, double lo, double hi, double maxlen) {
    bps.push_back(lo);
    bps.push_back(hi);
    std::sort(bps.begin(), bps.end());
    std::vector<double> out;
    for (double b : bps) {
        if (b < lo || b > hi) continue;
        if (!out.empty() && b - out.back() < 1e-13) continue;
        if (!out.empty()) {
            int k = int(std::ceil((b - out.back()) / maxlen));
            double a = out.back();
            for (int j = 1; j < k; ++j) out.push_back(a + (b - a) * j / k);
        }
        out.push_back(b);
    }
    return out;
}

template <class F>
cplx integrate_pieces(F f, const std::vector<double>& pts) {
    cplx s = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += testsupport::gl_integrate(f, pts[i], pts[i + 1], 24);
    return s;
}

// ∫ e^{i<xi, y + i z>} U(xi) dxi over a box, split along all walls so each cell is smooth.
cplx shifted_transform(const PiecewisePoly& U, const std::vector<double>& y, const std::vector<double>& z,
                       double lo, double hi) {
    FastPW fu(U);
    std::vector<std::pair<std::vector<double>, double>> lines;
    for (const auto& ch : fu.chs)
        for (const auto& w : ch.walls) lines.push_back(w);
    if (U.dim == 1) {
        std::vector<double> bps;
        for (const auto& [c, off] : lines) bps.push_back(off / c[0]);
        auto f = [&](double x) { return std::exp(cplx(0, x * y[0]) - x * z[0]) * fu({x}); };
        return integrate_pieces(f, split_points(bps, lo, hi, 1.0));
    }
    std::vector<double> outer;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& [a, oa] = lines[i];
        if (a[0] == 0) outer.push_back(oa / a[1]);
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const auto& [b, ob] = lines[j];
            double det = a[0] * b[1] - a[1] * b[0];
            if (std::abs(det) < 1e-14) continue;
            outer.push_back((a[0] * ob - oa * b[0]) / det);
        }
    }
    auto slice = [&](double x2) {
        std::vector<double> bps;
        for (const auto& [c, off] : lines)
            if (c[0] != 0) bps.push_back((off - c[1] * x2) / c[0]);
        auto f = [&](double x1) {
            return std::exp(cplx(0, x1 * y[0] + x2 * y[1]) - x1 * z[0] - x2 * z[1]) * fu({x1, x2});
        };
        return integrate_pieces(f, split_points(bps, lo, hi, 1.0));
    };
    return integrate_pieces(slice, split_points(outer, lo, hi, 1.0));
}

std::vector<double> to_d(const std::vector<Rat>& v) {
    std::vector<double> o;
    for (const auto& r : v) o.push_back(r.to_double());
    return o;
}

PiecewisePoly interval_pw(Rat lo, Rat hi, CQPoly dens) {
    PiecewisePoly U;
    U.dim = 1;
    Chamber ch;
    ch.walls = {{{Rat(1)}, lo}, {{Rat(-1)}, -hi}};
    ch.density = std::move(dens);
    ch.witness = {(lo + hi) / Rat(2)};
    U.chambers.push_back(ch);
    return U;
}

}  // namespace

TEST_SUITE("exact-algebra") {

TEST_CASE("Rat stays reduced with positive denominator") {
    Rat a(6, 4);
    CHECK(a.num_str() == "3");
    CHECK(a.den_str() == "2");
    Rat b(1, -2);
    CHECK(b.num_str() == "-1");
    CHECK(b.den_str() == "2");
    CHECK(Rat::parse("-10/4") == Rat(-5, 2));
    CHECK_THROWS(Rat(1, 0));
    CHECK_THROWS(Rat(1) / Rat(0));
    CHECK(Rat::approximate(0.125) == Rat(1, 8));
}

TEST_CASE("Rat field axioms on random inputs") {
    std::mt19937 g(7);
    for (int it = 0; it < 200; ++it) {
        Rat a = rand_rat(g), b = rand_rat(g), c = rand_rat(g);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a * b == b * a);
        CHECK(a + (-a) == Rat(0));
        if (!a.is_zero()) CHECK(a * (Rat(1) / a) == Rat(1));
        Rat s = a * b - c;
        CHECK(s.den() > 0);
        CHECK(gcd(s.num(), s.den()) == 1);
    }
}

TEST_CASE("MPoly ring axioms on random inputs") {
    std::mt19937 g(11);
    for (int it = 0; it < 40; ++it) {
        QPoly p = rand_poly(g, 2, 4, 3), q = rand_poly(g, 2, 4, 3), r = rand_poly(g, 2, 3, 2);
        CHECK((p + q) * r == p * r + q * r);
        CHECK(p * q == q * p);
        CHECK((p * q) * r == p * (q * r));
        CHECK((p - p).is_zero());
        QPoly pq = p * q;
        for (const auto& [e, c] : pq.terms()) CHECK(!c.is_zero());
        // Leibniz rule for diff.
        CHECK((p * q).diff(0) == p.diff(0) * q + p * q.diff(0));
        std::vector<Rat> pt{rand_rat(g), rand_rat(g)};
        CHECK((p * q).eval(pt) == p.eval(pt) * q.eval(pt));
    }
}

TEST_CASE("poly_ops examples") {
    QPoly Y1 = QPoly::var(2, 0), Y2 = QPoly::var(2, 1);
    auto r = poly_ops(Y1 * Y1, Y1, PolyMode::Add);
    CHECK(r.poly == Y1 * Y1 + Y1);
    r = poly_ops(Y1 * Y2, QPoly(2), PolyMode::Diff, 0);
    CHECK(r.poly == Y2);
    QPoly phi = QPoly::var(1, 0, Rat(2));
    r = poly_ops(phi, QPoly(1), PolyMode::Eval, 0, {Rat(3)});
    CHECK(r.is_scalar);
    CHECK(r.scalar == Rat(6));
    CHECK_THROWS(poly_ops(Y1, QPoly::var(1, 0), PolyMode::Add));
    r = poly_ops(Y1 + Y2, Y1 - Y2, PolyMode::Mul);
    CHECK(r.poly == Y1 * Y1 - Y2 * Y2);
}

TEST_CASE("ldlt examples") {
    auto a = ldlt(SymMat::from_rows({{Rat(0), Rat(-1)}, {Rat(-1), Rat(0)}}));
    CHECK(a.det == Rat(-1));
    CHECK(a.signature == 0);
    REQUIRE(a.inverse);
    CHECK(*a.inverse == SymMat::from_rows({{Rat(0), Rat(-1)}, {Rat(-1), Rat(0)}}));
    auto b = ldlt(SymMat::identity(3));
    CHECK(b.det == Rat(1));
    CHECK(b.signature == 3);
    auto c = ldlt(SymMat::from_rows({{Rat(2), Rat(1)}, {Rat(1), Rat(2)}}));
    CHECK(c.det == Rat(3));
    CHECK(c.signature == 2);
    REQUIRE(c.inverse);
    CHECK(*c.inverse == SymMat::from_rows({{Rat(2, 3), Rat(-1, 3)}, {Rat(-1, 3), Rat(2, 3)}}));
}

TEST_CASE("ldlt of a singular matrix flags the nondegenerate part") {
    auto s = ldlt(SymMat::from_rows({{Rat(1), Rat(1), Rat(0)}, {Rat(1), Rat(1), Rat(0)}, {Rat(0), Rat(0), Rat(-2)}}));
    CHECK(s.singular);
    CHECK(s.det == Rat(0));
    CHECK(!s.inverse);
    CHECK(s.rank == 2);
    CHECK(s.signature == 0);
}

TEST_CASE("ldlt reconstructs and signature is a congruence invariant") {
    std::mt19937 g(3);
    std::uniform_int_distribution<int> small(-3, 3), coin(0, 2);
    for (int it = 0; it < 60; ++it) {
        int n = 2 + it % 4;
        SymMat m(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m.set(i, j, (i == j && coin(g) == 0) ? Rat(0) : rand_rat(g, 5));
        auto f = ldlt(m);
        CHECK(f.reconstruct() == m);
        if (f.inverse) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Rat s(0);
                    for (int k = 0; k < n; ++k) s += m(i, k) * (*f.inverse)(k, j);
                    CHECK(s == Rat(i == j ? 1 : 0));
                }
        }
        // Random unimodular matrix as a product of elementary shears.
        std::vector<std::vector<Rat>> P(n, std::vector<Rat>(n, Rat(0)));
        for (int i = 0; i < n; ++i) P[i][i] = Rat(1);
        for (int k = 0; k < 6; ++k) {
            int i = it % n, j = (it + k + 1) % n;
            if (i == j) continue;
            Rat s(small(g));
            for (int r = 0; r < n; ++r) P[r][i] += s * P[r][j];
        }
        auto h = ldlt(m.congruence(P));
        CHECK(h.signature == f.signature);
        CHECK(h.det == f.det);
        CHECK(h.rank == f.rank);
    }
}

TEST_CASE("ft_shifted: simple pole gives a half-line step") {
    RatExp u(1);
    u.add(term(CRat(0, -1), lf({1}), QPoly::constant(1, Rat(1)), {{lf({1}), 1}}));
    auto U = ft_shifted(u, {lf({1})});
    REQUIRE(U.chambers.size() == 1);
    CHECK(!U.bounded);
    CHECK(!U.has_atoms());
    // Constant -1 on xi >= 1 under u(Y) = ∫ e^{i xi Y} U(xi) dxi.
    CHECK(U.density({2.0}) == cplx(-1, 0));
    CHECK(U.density({0.5}) == cplx(0, 0));
    for (double y : {-1.5, 0.3, 2.0}) {
        cplx num = shifted_transform(U, {y}, {1.0}, -5, 60);
        CHECK(testsupport::rel_err(num, u.eval_shifted({y}, {1.0})) < 1e-9);
    }
}

TEST_CASE("ft_shifted: polynomial without denominators is atomic") {
    RatExp u(1);
    u.add(term(CRat(1), LinForm::zero(1), QPoly::constant(1, Rat(1)), {}));
    auto U = ft_shifted(u, {lf({1})});
    CHECK(U.chambers.empty());
    CHECK(U.has_atoms());
}

TEST_CASE("ft_shifted: sphere pair gives the indicator of [-1, 1]") {
    RatExp u(1);
    u.add(term(CRat(0, -1), lf({1}), QPoly::constant(1, Rat(1)), {{lf({1}), 1}}, 1));
    u.add(term(CRat(0, 1), lf({-1}), QPoly::constant(1, Rat(1)), {{lf({1}), 1}}, 1));
    auto U = ft_shifted(u, {lf({1})});
    REQUIRE(U.chambers.size() == 1);
    CHECK(U.bounded);
    CHECK(U.chambers[0].density == CQPoly::constant(1, CRat(1)));
    CHECK(std::abs(U.mass() - cplx(4 * std::numbers::pi, 0)) < 1e-12);
    auto V = ft_shifted(u, {lf({-1})});
    CHECK(U.same_densities(V));
}

TEST_CASE("ft_shifted: pointwise inverse transform in dim 1 at 20 points") {
    // e^{2iY} (Y + 3)/Y^3 - 5 e^{-iY}/(2Y)^2
    RatExp u(1);
    u.add(term(CRat(1), lf({2}), QPoly::var(1, 0) + QPoly::constant(1, Rat(3)), {{lf({1}), 3}}));
    u.add(term(CRat(-5), lf({-1}), QPoly::constant(1, Rat(1)), {{lf({2}), 2}}));
    for (int side : {1, -1}) {
        auto U = ft_shifted(u, {lf({side})});
        std::mt19937 g(5);
        std::uniform_real_distribution<double> d(-3, 3);
        double z = side;
        for (int k = 0; k < 20; ++k) {
            double y = d(g);
            cplx num = side > 0 ? shifted_transform(U, {y}, {z}, -5, 60) : shifted_transform(U, {y}, {z}, -60, 5);
            CHECK(testsupport::rel_err(num, u.eval_shifted({y}, {z})) < 1e-6);
        }
    }
}

TEST_CASE("ft_shifted: dim 2 with three directions, both flag orders") {
    // e^{i(Y1 + 2Y2)} (1 + Y2) / (Y1^2 Y2 (Y1 + Y2))
    RatExp u(2);
    u.add(term(CRat(1), lf({1, 2}), QPoly::constant(2, Rat(1)) + QPoly::var(2, 1),
               {{lf({1, 0}), 2}, {lf({0, 1}), 1}, {lf({1, 1}), 1}}));
    u.add(term(CRat(0, 2), lf({-1, 0}), QPoly::constant(2, Rat(1)), {{lf({1, -1}), 1}, {lf({0, 2}), 2}}));
    std::vector<LinForm> cone{lf({1, -2}), lf({0, 1})};
    auto U = ft_shifted(u, cone);
    auto V = ft_shifted(u, cone, FTOptions{true});
    CHECK(U.same_densities(V));
    CHECK(!U.chambers.empty());
    auto Z = to_d(cone_point(cone, 2));
    std::mt19937 g(9);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> y{d(g), d(g)};
        cplx num = shifted_transform(U, y, Z, -40, 40);
        CHECK(testsupport::rel_err(num, u.eval_shifted(y, Z)) < 1e-6);
    }
}

TEST_CASE("ft_shifted: errors") {
    RatExp u(2);
    u.add(term(CRat(1), LinForm::zero(2), QPoly::constant(2, Rat(1)), {{lf({1, -1}), 1}, {lf({0, 1}), 1}}));
    CHECK_THROWS(ft_shifted(u, {lf({1, 0}), lf({0, 1})}));
    RatExp w(3);
    w.add(term(CRat(1), LinForm::zero(3), QPoly::constant(3, Rat(1)), {{lf({1, 0, 0}), 1}}));
    CHECK_THROWS(ft_shifted(w, {lf({1, 0, 0})}));
}

TEST_CASE("residue_ray examples") {
    auto ind = interval_pw(Rat(-1), Rat(1), CQPoly::constant(1, CRat(Rat(7, 2))));
    CHECK(residue_ray(ind, {Rat(1)}).value == CRat(Rat(7, 2)));
    PiecewisePoly H;
    H.dim = 1;
    Chamber h;
    h.walls = {{{Rat(1)}, Rat(0)}};
    h.density = CQPoly::constant(1, CRat(1));
    h.witness = {Rat(1)};
    H.chambers.push_back(h);
    H.bounded = false;
    CHECK(residue_ray(H, {Rat(-1)}).value == CRat(0));
    CHECK(residue_ray(H, {Rat(1)}).value == CRat(1));
    auto lin = interval_pw(Rat(0), Rat(2), CQPoly::var(1, 0));
    CHECK(residue_ray(lin, {Rat(1)}).value == CRat(0));
}

TEST_CASE("residue_ray is invariant under positive scaling and detects walls") {
    RatExp u(2);
    u.add(term(CRat(1), LinForm::zero(2), QPoly::constant(2, Rat(1)), {{lf({1, 0}), 1}, {lf({1, 1}), 2}}));
    auto U = ft_shifted(u, {lf({1, 0}), lf({0, 1})});
    std::mt19937 g(1);
    for (int k = 0; k < 10; ++k) {
        std::vector<Rat> dir{rand_rat(g, 9), rand_rat(g, 9)};
        if (dir[0].is_zero() || dir[1].is_zero() || (dir[0] + dir[1]).is_zero() || (dir[0] - dir[1]).is_zero()) continue;
        ResidueResult r1;
        try {
            r1 = residue_ray(U, dir);
        } catch (const WallDirection&) {
            continue;
        }
        Rat c = Rat(k + 1, 3);
        auto r2 = residue_ray(U, {dir[0] * c, dir[1] * c});
        CHECK(r1.value == r2.value);
    }
    // Walls through the origin: the ray along the first wall direction is rejected.
    bool threw = false;
    for (const auto& ch : U.chambers)
        for (const auto& w : ch.walls)
            if (w.offset.is_zero() && !threw) {
                try {
                    residue_ray(U, {-w.c[1], w.c[0]});
                } catch (const WallDirection&) {
                    threw = true;
                }
            }
    CHECK(threw);
}

TEST_CASE("PiecewisePoly JSON round trip") {
    RatExp u(2);
    u.add(term(CRat(Rat(1, 3), Rat(2)), lf({1, -1}), QPoly::var(2, 0), {{lf({1, 0}), 2}, {lf({1, 2}), 1}}, 1));
    auto U = ft_shifted(u, {lf({1, 0}), lf({0, 1})});
    auto V = piecewise_from_json_string(to_json_string(U));
    CHECK(V.dim == 2);
    CHECK(V.twopi == U.twopi);
    CHECK(U.same_densities(V));
    CHECK(to_json_string(V) == to_json_string(U));
}

}  // TEST_SUITE
