// Shifted Fourier transforms of exponential-rational functions (dim 1 and 2).
#include "eqloc/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace eqloc {

namespace {

using Vec = std::vector<Rat>;

struct Piece {
    std::vector<Wall> walls;
    CQPoly density;
};

Rat dot(const Vec& a, const Vec& b) {
    Rat s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Transform of e^{i a Y}/(iY)^k along one axis, as a polynomial in t = xi - a
// supported on side*t >= 0. Built from the simple pole by the relation
// d/da [e^{iaY}/(iY)^k] = e^{iaY}/(iY)^{k-1}, i.e. -Q_k' = Q_{k-1}, Q_k(0) = 0 for k > 1.
QPoly pole_density(int k, int side) {
    QPoly q = QPoly::constant(1, Rat(side > 0 ? -1 : 1));
    for (int j = 2; j <= k; ++j) {
        QPoly anti(1);
        for (const auto& [e, c] : q.terms()) anti.add_term({e[0] + 1}, -c / Rat(e[0] + 1));
        q = anti;
    }
    return q;
}

// Sector representatives of the arrangement of lines {l = 0} through the origin in R^2.
std::vector<Vec> sector_reps(const std::vector<LinForm>& forms) {
    struct Dir { Vec d; double ang; };
    std::vector<Dir> dirs;
    for (const auto& l : forms) {
        if (l.is_zero()) continue;
        Vec d{-l.coeffs[1], l.coeffs[0]};
        for (int s : {1, -1}) {
            Vec e{d[0] * Rat(s), d[1] * Rat(s)};
            dirs.push_back({e, std::atan2(e[1].to_double(), e[0].to_double())});
        }
    }
    if (dirs.empty()) return {Vec{Rat(1), Rat(0)}};
    std::sort(dirs.begin(), dirs.end(), [](const Dir& a, const Dir& b) { return a.ang < b.ang; });
    std::vector<Dir> uniq;
    for (const auto& d : dirs) {
        bool dup = false;
        for (const auto& u : uniq) {
            // Same ray iff cross product zero and dot positive.
            Rat cross = u.d[0] * d.d[1] - u.d[1] * d.d[0];
            if (cross.is_zero() && dot(u.d, d.d).sign() > 0) { dup = true; break; }
        }
        if (!dup) uniq.push_back(d);
    }
    std::vector<Vec> reps;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        const Vec& a = uniq[i].d;
        const Vec& b = uniq[(i + 1) % uniq.size()].d;
        Rat cross = a[0] * b[1] - a[1] * b[0];
        if (cross.sign() > 0) {
            reps.push_back({a[0] + b[0], a[1] + b[1]});
        } else {
            // Opposite rays: the sector is a half-plane; rotate a by +90 degrees.
            reps.push_back({-a[1], a[0]});
        }
    }
    return reps;
}

struct ShiftInfo {
    Vec Z;
};

ShiftInfo shift_point(const RatExp& u, const std::vector<LinForm>& cone) {
    int dim = u.dim;
    std::vector<LinForm> denoms;
    for (const auto& t : u.terms)
        for (const auto& [l, r] : t.denoms) denoms.push_back(l);
    if (dim == 1) {
        int s = 0;
        for (const auto& c : cone) {
            int cs = c.coeffs[0].sign();
            if (cs == 0) continue;
            if (s != 0 && cs != s) throw std::invalid_argument("ft_shifted: empty cone");
            s = cs;
        }
        if (s == 0) {
            if (!denoms.empty()) throw std::invalid_argument("ft_shifted: denominator vanishing on the cone");
            s = 1;
        }
        return {Vec{Rat(s)}};
    }
    std::vector<LinForm> all = cone;
    all.insert(all.end(), denoms.begin(), denoms.end());
    auto reps = sector_reps(all);
    std::vector<Vec> inside;
    for (const auto& r : reps) {
        bool ok = true;
        for (const auto& c : cone)
            if (c.eval(r).sign() <= 0) { ok = false; break; }
        if (ok) inside.push_back(r);
    }
    if (inside.empty()) throw std::invalid_argument("ft_shifted: empty cone");
    for (const auto& l : denoms) {
        int s0 = l.eval(inside[0]).sign();
        for (const auto& r : inside)
            if (l.eval(r).sign() != s0 || s0 == 0)
                throw std::invalid_argument("ft_shifted: denominator " + l.str() + " vanishing on the cone");
    }
    return {inside[0]};
}

// ---------------- dim 1

void pieces_dim1(const RatExpTerm& t, const Vec& Z, std::vector<Piece>& out, std::vector<AtomicPart>& atoms) {
    Rat B(1);
    int R = 0;
    for (const auto& [l, r] : t.denoms) {
        B *= l.coeffs[0].pow(r);
        R += r;
    }
    int side = Z[0].sign();
    Rat a = t.phase.coeffs[0];
    QPoly shift = QPoly::var(1, 0) - QPoly::constant(1, a);
    for (const auto& [e, pm] : t.P.terms()) {
        int m = e[0];
        if (m >= R) {
            RatExpTerm at = t;
            at.P = QPoly::monomial(e, pm);
            atoms.push_back({at, "polynomial numerator dominates: delta-type"});
            continue;
        }
        int k = R - m;
        CRat coef = t.c * CRat(pm / B) * CRat::ipow(k);
        QPoly q = pole_density(k, side).compose({shift});
        Piece p;
        p.walls.push_back(side > 0 ? Wall{{Rat(1)}, a} : Wall{{Rat(-1)}, -a});
        p.density = to_cqpoly(q).scaled(coef);
        out.push_back(std::move(p));
    }
}

PiecewisePoly assemble_dim1(const std::vector<Piece>& pieces) {
    PiecewisePoly U;
    U.dim = 1;
    std::vector<Rat> bps;
    for (const auto& p : pieces) {
        const Wall& w = p.walls[0];
        bps.push_back(w.offset / w.c[0]);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    if (bps.empty()) return U;
    struct Iv { std::optional<Rat> lo, hi; Rat wit; CQPoly dens; };
    std::vector<Iv> ivs;
    for (std::size_t i = 0; i <= bps.size(); ++i) {
        Iv iv;
        if (i > 0) iv.lo = bps[i - 1];
        if (i < bps.size()) iv.hi = bps[i];
        if (iv.lo && iv.hi) iv.wit = (*iv.lo + *iv.hi) / Rat(2);
        else if (iv.lo) iv.wit = *iv.lo + Rat(1);
        else iv.wit = *iv.hi - Rat(1);
        iv.dens = CQPoly(1);
        for (const auto& p : pieces)
            if (p.walls[0].c[0] * iv.wit - p.walls[0].offset > Rat(0) ||
                (p.walls[0].c[0] * iv.wit - p.walls[0].offset).is_zero())
                iv.dens += p.density;
        ivs.push_back(iv);
    }
    // Merge neighbours with identical density.
    std::vector<Iv> merged;
    for (auto& iv : ivs) {
        if (!merged.empty() && merged.back().dens == iv.dens) {
            merged.back().hi = iv.hi;
            continue;
        }
        merged.push_back(iv);
    }
    U.bounded = true;
    for (auto& iv : merged) {
        if (iv.dens.is_zero()) continue;
        Chamber ch;
        if (iv.lo) ch.walls.push_back({{Rat(1)}, *iv.lo});
        if (iv.hi) ch.walls.push_back({{Rat(-1)}, -*iv.hi});
        if (iv.lo && iv.hi) ch.witness = {(*iv.lo + *iv.hi) / Rat(2)};
        else if (iv.lo) ch.witness = {*iv.lo + Rat(1)};
        else if (iv.hi) ch.witness = {*iv.hi - Rat(1)};
        else ch.witness = {Rat(0)};
        if (!iv.lo || !iv.hi) U.bounded = false;
        ch.density = iv.dens;
        U.chambers.push_back(std::move(ch));
    }
    return U;
}

// ---------------- dim 2

struct DTerm {
    CRat c;
    QPoly P;
    std::vector<std::pair<LinForm, int>> denoms;
};

bool proportional(const LinForm& a, const LinForm& b, Rat& s) {
    // b = s * a ?
    Rat cross = a.coeffs[0] * b.coeffs[1] - a.coeffs[1] * b.coeffs[0];
    if (!cross.is_zero()) return false;
    s = a.coeffs[0].is_zero() ? b.coeffs[1] / a.coeffs[1] : b.coeffs[0] / a.coeffs[0];
    return true;
}

DTerm normalize_denoms(const RatExpTerm& t) {
    DTerm d{t.c, t.P, {}};
    for (const auto& [l, r] : t.denoms) {
        bool merged = false;
        for (auto& [m, rm] : d.denoms) {
            Rat s;
            if (proportional(m, l, s)) {
                // l^r = s^r m^r
                d.c /= CRat(s.pow(r));
                rm += r;
                merged = true;
                break;
            }
        }
        if (!merged) d.denoms.push_back({l, r});
    }
    return d;
}

void reduce_partial_fractions(DTerm t, bool reverse, std::vector<DTerm>& out) {
    if (t.denoms.size() <= 2) {
        out.push_back(std::move(t));
        return;
    }
    std::vector<std::size_t> idx(t.denoms.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return t.denoms[a].first < t.denoms[b].first; });
    if (reverse) std::reverse(idx.begin(), idx.end());
    std::size_t i1 = idx[0], i2 = idx[1], i3 = idx[2];
    const LinForm &l1 = t.denoms[i1].first, &l2 = t.denoms[i2].first, &l3 = t.denoms[i3].first;
    // l3 = c1 l1 + c2 l2
    Rat det = l1.coeffs[0] * l2.coeffs[1] - l1.coeffs[1] * l2.coeffs[0];
    Rat c1 = (l3.coeffs[0] * l2.coeffs[1] - l3.coeffs[1] * l2.coeffs[0]) / det;
    Rat c2 = (l1.coeffs[0] * l3.coeffs[1] - l1.coeffs[1] * l3.coeffs[0]) / det;
    for (int which = 0; which < 2; ++which) {
        Rat cw = which == 0 ? c1 : c2;
        if (cw.is_zero()) continue;
        DTerm s = t;
        s.c *= CRat(cw);
        std::size_t dec = which == 0 ? i1 : i2;
        s.denoms[dec].second -= 1;
        s.denoms[i3].second += 1;
        if (s.denoms[dec].second == 0) s.denoms.erase(s.denoms.begin() + long(dec));
        reduce_partial_fractions(std::move(s), reverse, out);
    }
}

void pieces_dim2(const RatExpTerm& t, const Vec& Z, bool reverse, std::vector<Piece>& out,
                 std::vector<AtomicPart>& atoms) {
    std::vector<DTerm> reduced;
    reduce_partial_fractions(normalize_denoms(t), reverse, reduced);
    for (const auto& d : reduced) {
        if (d.denoms.size() < 2) {
            RatExpTerm at = t;
            at.c = d.c;
            at.P = d.P;
            at.denoms = d.denoms;
            atoms.push_back({at, d.denoms.empty() ? "no denominators: delta-type" : "single denominator direction: line-supported"});
            continue;
        }
        const LinForm& l1 = d.denoms[0].first;
        const LinForm& l2 = d.denoms[1].first;
        int r1 = d.denoms[0].second, r2 = d.denoms[1].second;
        // M rows l1, l2; Mi = M^{-1}.
        Rat det = l1.coeffs[0] * l2.coeffs[1] - l1.coeffs[1] * l2.coeffs[0];
        Rat mi[2][2] = {{l2.coeffs[1] / det, -l1.coeffs[1] / det}, {-l2.coeffs[0] / det, l1.coeffs[0] / det}};
        // Y = Mi w
        QPoly Y1 = QPoly::var(2, 0, mi[0][0]) + QPoly::var(2, 1, mi[0][1]);
        QPoly Y2 = QPoly::var(2, 0, mi[1][0]) + QPoly::var(2, 1, mi[1][1]);
        QPoly Pw = d.P.compose({Y1, Y2});
        int s1 = l1.eval(Z).sign(), s2 = l2.eval(Z).sign();
        const Vec a = t.phase.coeffs;
        // zeta_j(xi) = sum_i Mi[i][j] (xi_i - a_i)
        QPoly z1 = QPoly::var(2, 0, mi[0][0]) + QPoly::var(2, 1, mi[1][0]) -
                   QPoly::constant(2, mi[0][0] * a[0] + mi[1][0] * a[1]);
        QPoly z2 = QPoly::var(2, 0, mi[0][1]) + QPoly::var(2, 1, mi[1][1]) -
                   QPoly::constant(2, mi[0][1] * a[0] + mi[1][1] * a[1]);
        Wall w1{{mi[0][0] * Rat(s1), mi[1][0] * Rat(s1)}, (mi[0][0] * a[0] + mi[1][0] * a[1]) * Rat(s1)};
        Wall w2{{mi[0][1] * Rat(s2), mi[1][1] * Rat(s2)}, (mi[0][1] * a[0] + mi[1][1] * a[1]) * Rat(s2)};
        Rat absdet = det.abs();
        for (const auto& [e, pm] : Pw.terms()) {
            if (e[0] >= r1 || e[1] >= r2) {
                RatExpTerm at = t;
                at.c = d.c;
                at.P = d.P;
                at.denoms = d.denoms;
                atoms.push_back({at, "polynomial numerator dominates along one direction: singular"});
                continue;
            }
            int k1 = r1 - e[0], k2 = r2 - e[1];
            CRat coef = d.c * CRat(pm / absdet) * CRat::ipow(k1 + k2);
            QPoly q = pole_density(k1, s1).compose({z1}) * pole_density(k2, s2).compose({z2});
            Piece p;
            p.walls = {w1, w2};
            p.density = to_cqpoly(q).scaled(coef);
            out.push_back(std::move(p));
        }
    }
}

struct Line {
    Vec c;
    Rat off;
};

Line normalize_line(const Wall& w) {
    Rat lead = w.c[0].is_zero() ? w.c[1] : w.c[0];
    return {{w.c[0] / lead, w.c[1] / lead}, w.offset / lead};
}

Rat line_val(const Line& L, const Vec& x) { return dot(L.c, x) - L.off; }

bool is_facet(const std::vector<Wall>& walls, std::size_t idx) {
    const Wall& L = walls[idx];
    Rat cc = dot(L.c, L.c);
    Vec p0{L.c[0] * L.offset / cc, L.c[1] * L.offset / cc};
    Vec d{-L.c[1], L.c[0]};
    std::optional<Rat> lo, hi;
    for (std::size_t j = 0; j < walls.size(); ++j) {
        if (j == idx) continue;
        const Wall& W = walls[j];
        Rat v0 = dot(W.c, p0) - W.offset;
        Rat sl = dot(W.c, d);
        if (sl.is_zero()) {
            if (v0.sign() <= 0) return false;
            continue;
        }
        Rat b = -v0 / sl;
        if (sl.sign() > 0) { if (!lo || b > *lo) lo = b; }
        else { if (!hi || b < *hi) hi = b; }
    }
    return !(lo && hi && !(*lo < *hi));
}

PiecewisePoly assemble_dim2(const std::vector<Piece>& pieces) {
    PiecewisePoly U;
    U.dim = 2;
    std::vector<Line> lines;
    for (const auto& p : pieces)
        for (const auto& w : p.walls) {
            Line L = normalize_line(w);
            bool dup = false;
            for (const auto& M : lines)
                if (M.c == L.c && M.off == L.off) { dup = true; break; }
            if (!dup) lines.push_back(L);
        }
    if (lines.empty()) return U;

    std::vector<Vec> cands;
    std::vector<Vec> vertices;
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const Line &A = lines[i], &B = lines[j];
            Rat det = A.c[0] * B.c[1] - A.c[1] * B.c[0];
            if (det.is_zero()) continue;
            Vec v{(A.off * B.c[1] - A.c[1] * B.off) / det, (A.c[0] * B.off - A.off * B.c[0]) / det};
            if (std::find(vertices.begin(), vertices.end(), v) == vertices.end()) vertices.push_back(v);
        }
    for (const auto& v : vertices) {
        std::vector<LinForm> through;
        std::vector<const Line*> others;
        for (const auto& L : lines) {
            if (line_val(L, v).is_zero()) through.push_back(LinForm(L.c));
            else others.push_back(&L);
        }
        for (const auto& r : sector_reps(through)) {
            Rat delta(1);
            for (const Line* L : others) {
                Rat f = line_val(*L, v);
                Rat sl = dot(L->c, r);
                if (sl.is_zero() || f.sign() == sl.sign()) continue;
                Rat lim = (f / sl).abs() / Rat(2);
                if (lim < delta) delta = lim;
            }
            cands.push_back({v[0] + delta * r[0], v[1] + delta * r[1]});
        }
    }
    if (vertices.empty()) {
        // All lines parallel.
        const Vec c = lines[0].c;
        Rat cc = dot(c, c);
        std::vector<Rat> offs;
        for (const auto& L : lines) offs.push_back(L.off);
        std::sort(offs.begin(), offs.end());
        std::vector<Rat> ts{offs.front() - Rat(1), offs.back() + Rat(1)};
        for (std::size_t i = 0; i + 1 < offs.size(); ++i) ts.push_back((offs[i] + offs[i + 1]) / Rat(2));
        for (const auto& t : ts) cands.push_back({c[0] * t / cc, c[1] * t / cc});
    }

    std::vector<std::vector<int>> seen;
    bool bounded = true;
    for (const auto& x : cands) {
        std::vector<int> sv;
        for (const auto& L : lines) sv.push_back(line_val(L, x).sign());
        if (std::find(seen.begin(), seen.end(), sv) != seen.end()) continue;
        seen.push_back(sv);
        CQPoly dens(2);
        for (const auto& p : pieces) {
            bool in = true;
            for (const auto& w : p.walls)
                if ((dot(w.c, x) - w.offset).sign() < 0) { in = false; break; }
            if (in) dens += p.density;
        }
        if (dens.is_zero()) continue;
        std::vector<Wall> walls;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            Rat s(sv[i]);
            walls.push_back({{lines[i].c[0] * s, lines[i].c[1] * s}, lines[i].off * s});
        }
        Chamber ch;
        for (std::size_t i = 0; i < walls.size(); ++i)
            if (is_facet(walls, i)) ch.walls.push_back(walls[i]);
        ch.density = dens;
        ch.witness = x;
        // Unbounded iff some direction d has <c, d> >= 0 for all walls.
        std::vector<LinForm> normals;
        for (const auto& w : ch.walls) normals.push_back(LinForm(w.c));
        auto dirs = sector_reps(normals);
        for (const auto& w : ch.walls) dirs.push_back({-w.c[1], w.c[0]}), dirs.push_back({w.c[1], -w.c[0]});
        for (const auto& d : dirs) {
            bool rec = true;
            for (const auto& w : ch.walls)
                if (dot(w.c, d).sign() < 0) { rec = false; break; }
            if (rec) { bounded = false; break; }
        }
        U.chambers.push_back(std::move(ch));
    }
    U.bounded = bounded;
    return U;
}

}  // namespace

std::vector<Rat> cone_point(const std::vector<LinForm>& cone, int dim) {
    RatExp u(dim);
    return shift_point(u, cone).Z;
}

PiecewisePoly ft_shifted(const RatExp& u, const std::vector<LinForm>& cone, const FTOptions& opt) {
    u.validate();
    if (u.dim < 1 || u.dim > 2) throw std::invalid_argument("ft_shifted: dim > 2 unsupported");
    for (const auto& c : cone)
        if (c.dim() != u.dim) throw std::invalid_argument("ft_shifted: cone form dimension mismatch");
    ShiftInfo sh = shift_point(u, cone);
    int twopi = u.terms.empty() ? 0 : u.terms[0].twopi;
    for (const auto& t : u.terms)
        if (t.twopi != twopi) throw std::invalid_argument("ft_shifted: mixed powers of 2pi");
    std::vector<Piece> pieces;
    std::vector<AtomicPart> atoms;
    for (const auto& t : u.terms) {
        if (t.c.is_zero()) continue;
        if (u.dim == 1) pieces_dim1(t, sh.Z, pieces, atoms);
        else pieces_dim2(t, sh.Z, opt.reverse_flag, pieces, atoms);
    }
    PiecewisePoly U = u.dim == 1 ? assemble_dim1(pieces) : assemble_dim2(pieces);
    U.twopi = twopi;
    U.atoms = std::move(atoms);
    return U;
}

}  // namespace eqloc
