// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "eqloc/localization.hpp"
#include "eqloc/resolution.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace eqloc;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

Amplitude gauss_bump(const SymplecticModel& m) {
    Amplitude a = Amplitude::constant(m.phase_dim() + m.g_dim(), 1.0);
    a.gauss = 1;
    a.x_bump = Bump{1.0, 4};
    return a;
}

Amplitude circle_cos2_bump() {
    Amplitude a = Amplitude::constant(3, 1.0);
    a.cos2_coords = {0};
    a.eta_bump = Bump{1.0, 4};
    a.eta_bump_coords = {1};
    return a;
}

double bump5(double p) { return std::abs(p) >= 1 ? 0.0 : std::pow(1 - p * p, 5); }

// 1. Fresnel integral with the polynomial bump of radius 20 and order 4.
void fresnel(Outcome& o) {
    const double R = 20;
    std::vector<std::pair<double, double>> errs;
    double worst = 0;
    for (double mu : {1e-1, 1e-2, 1e-3}) {
        auto q = oscillatory_1d([](double s) { return s * s / 2; },
                                [R](double s) { return cplx(std::abs(s) >= R ? 0.0 : std::pow(1 - s * s / (R * R), 5)); },
                                -R, R, mu, {1e-16, 1e-12});
        double e = std::abs(q.value - std::sqrt(2 * kPi * mu) * std::polar(1.0, kPi / 4));
        worst = std::max(worst, e / (0.05 * std::pow(mu, 1.5)));
        errs.push_back({mu, e});
        o.require(q.converged, "quadrature converged");
    }
    OrderFit f = order_fit_pure(errs);
    o.detail << "max err/(0.05 mu^1.5) = " << worst << ", exponent = " << f.exponent;
    o.require(worst <= 1, "error bound");
    o.require(std::abs(f.exponent - 1.5) <= 0.1, "exponent 1.5 +- 0.1");
}

// 2. Localization sum on the sphere against the closed form 4π sin(Y)/Y.
void bv_sphere(Outcome& o) {
    auto S = SymplecticModel::sphere();
    double worst = 0;
    for (double Y : {0.5, 1.0, 2.0, 5.0}) {
        BVResult bv = bv_sum(S, ClosedForm::one(1), {Y});
        o.require(bv.applicable, "applicable");
        worst = std::max(worst, std::abs(bv.value - 4 * kPi * std::sin(Y) / Y));
    }
    o.detail << "max abs err = " << worst;
    o.require(worst <= 1e-8, "1e-8 absolute");
}

// 3. DH measure of the unit sphere: 2π on [−1, 1], and a 10⁶-sample Monte Carlo histogram.
void dh_sphere(Outcome& o) {
    auto S = SymplecticModel::sphere();
    PiecewisePoly U = dh_measure(S, ClosedForm::one(1));
    double flat = 0;
    for (int k = 0; k <= 200; ++k) {
        double x = -0.995 + 1.99 * k / 200;
        flat = std::max(flat, std::abs(U.density({x}) - 2 * kPi));
    }
    for (double x : {-1.5, -1.01, 1.01, 2.0}) flat = std::max(flat, std::abs(U.density({x})));
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> N01;
    const int bins = 10;
    const long samples = 1000000;
    std::vector<long> count(bins, 0);
    for (long i = 0; i < samples; ++i) {
        double a = N01(rng), b = N01(rng), c = N01(rng);
        double z = c / std::sqrt(a * a + b * b + c * c);
        ++count[std::min(bins - 1, int((z + 1) / 2 * bins))];
    }
    double worst = 0;
    for (int k = 0; k < bins; ++k) {
        double lo = -1 + 2.0 * k / bins, hi = lo + 2.0 / bins;
        // the density is exactly constant on each bin, so the midpoint rule is exact
        double exact = U.density({0.5 * (lo + hi)}).real() * (hi - lo);
        double mc = 4 * kPi * double(count[k]) / samples;
        worst = std::max(worst, std::abs(mc - exact) / exact);
    }
    o.detail << "max |density - 2pi| = " << flat << ", max bin rel err = " << worst;
    o.require(flat <= 1e-12, "constant density");
    o.require(worst <= 1e-2, "1% per bin");
}

// 4. Ray residues do not depend on the chamber; smeared limit = Kirwan integral.
void residues(Outcome& o) {
    auto S = SymplecticModel::sphere();
    JKResult p = jk_residue(S, ClosedForm::one(1), {Rat(1)}), m = jk_residue(S, ClosedForm::one(1), {Rat(-1)});
    bool same = p.raw.value == m.raw.value && p.raw.twopi == m.raw.twopi;
    SmearingKernel k(1);
    auto area = EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0));
    double ss = smeared_limit(S, area, k).limit, ks = kirwan_integral(S, area).value;
    auto C = SymplecticModel::cotangent_circle();
    auto fc = EquivariantForm::from_amplitude(C, circle_cos2_bump());
    double sc = smeared_limit(C, fc, k).limit, kc = kirwan_integral(C, fc).value;
    double gs = std::abs(ss - ks) / ks, gc = std::abs(sc - kc) / kc;
    o.detail << "residues equal = " << (same ? "yes" : "no") << ", sphere " << ss << " vs " << ks << " (4pi^2 = " << 4 * kPi * kPi
             << "), circle " << sc << " vs " << kc << " (2pi^2 = " << 2 * kPi * kPi << ")";
    o.require(same, "exact equality for +-1");
    o.require(gs <= 1e-2 && std::abs(ks - 4 * kPi * kPi) <= 1e-2 * 4 * kPi * kPi, "sphere within 1%");
    o.require(gc <= 1e-2 && std::abs(kc - 2 * kPi * kPi) <= 1e-2 * 2 * kPi * kPi, "circle within 1%");
}

// sup of the components of β over a grid of the box
double sup_norm(const std::function<VecD(const VecD&)>& b, VecD lo, VecD hi) {
    double s = 0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j)
            for (double v : b({lo[0] + (hi[0] - lo[0]) * i / 200, lo[1] + (hi[1] - lo[1]) * j / 200})) s = std::max(s, std::abs(v));
    return s;
}

// 5. Equivariantly exact forms smear to zero.
void exact_forms(Outcome& o) {
    SmearingKernel k(1);
    auto S = SymplecticModel::sphere();
    auto bs = [](const VecD& e) {
        double z = e[1];
        return VecD{(1 - z * z) * (1 + z + z * z * z), z * z};
    };
    double ns = sup_norm(bs, {0, -1}, {2 * kPi, 1});
    double vs = std::abs(smeared_limit(S, EquivariantForm::exact(S, bs, QPoly::constant(1, Rat(1))), k).limit_c);
    auto C = SymplecticModel::cotangent_circle();
    auto bc = [](const VecD& e) {
        double p = e[1];
        return VecD{bump5(p) * (1 + p), p * bump5(p)};
    };
    double nc = sup_norm(bc, {0, -1}, {2 * kPi, 1});
    auto Dc = EquivariantForm::exact(C, bc, QPoly::var(1, 0) + QPoly::constant(1, Rat(2)), {{0, -1}, {2 * kPi, 1}});
    double vc = std::abs(smeared_limit(C, Dc, k).limit_c);
    o.detail << "sphere |limit|/|beta| = " << vs / ns << ", circle |limit|/|beta| = " << vc / nc;
    o.require(vs <= 1e-6 * ns, "sphere");
    o.require(vc <= 1e-6 * nc, "circle");
}

// 6. Regular level ς = 0.7 of the cotangent circle.
void circle_sweep(Outcome& o) {
    auto m = SymplecticModel::cotangent_circle();
    Amplitude a;
    a.poly = DPoly::constant(3, 1.0) + DPoly::var(3, 2, 0.25);
    a.cos2_coords = {0};
    a.eta_bump = Bump{2.0, 4};
    a.eta_bump_coords = {1};
    a.x_bump = Bump{1.0, 4};
    auto rep = singular_sweep(m, a, {3e-2, 1e-2, 3e-3, 1e-3, 3e-4}, {{0.7}});
    double rel = rep.rows[3].rel_err;
    o.detail << "rel err at mu=1e-3 = " << rel << ", exponent = " << rep.fit.exponent << ", logPower = " << rep.fit.logPower;
    o.require(rep.converged, "converged");
    o.require(rel <= 1e-3, "rel err 1e-3");
    o.require(std::abs(rep.fit.exponent - 2) <= 0.15, "exponent 2 +- 0.15");
    o.require(std::abs(rep.fit.logPower) <= 0.2, "logPower 0 +- 0.2");
}

// 7. Rotation model on T*R²: singular zero level.
void linrot2_sweep(Outcome& o) {
    auto m = SymplecticModel::preset("linrot2");
    auto rep = singular_sweep(m, gauss_bump(m), {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
    double rel = rep.rows[4].rel_err;
    o.detail << "rel err at mu=1e-3 = " << rel << ", exponent = " << rep.fit.exponent << ", logPower = " << rep.fit.logPower;
    o.require(rep.converged, "converged");
    o.require(rel <= 1e-2, "rel err 1%");
    o.require(std::abs(rep.fit.exponent - 2) <= 0.2, "exponent 2 +- 0.2");
    o.require(rep.fit.logPower <= 1, "logPower <= 1");
}

// 8. Certificate of the resolution on both linear models.
void resolution(Outcome& o) {
    const double delta = 1e-3;
    for (const char* name : {"linrot2", "linrot4"}) {
        auto m = SymplecticModel::preset(name);
        auto cs = build_charts(m, stratify(m));
        double fact = 0, eig = std::numeric_limits<double>::infinity();
        int mism = 0;
        for (const auto& c : cs) {
            fact = std::max(fact, factorization_check(m, c, 1000, 3).max_rel_err);
            if (c.non_stationary) continue;
            auto g = crit_grid_check(m, c, 10000, 5, 1e-9);
            mism += g.mismatches + g.rank_failures;
            eig = std::min(eig, sigma_uniformity(c).min_eig);
        }
        Amplitude a = gauss_bump(m);
        double res = resolved_leading(m, cs, a).value;
        double dir = direct_leading(m, a, {}, m.g_dim() == 2 ? SamplerOptions{16, 6} : SamplerOptions{}).value;
        double gap = std::abs(res - dir) / dir;
        o.detail << name << ": factorization " << fact << ", mismatches " << mism << ", min eig " << eig << ", resolved " << res
                 << " direct " << dir << ";  ";
        o.require(fact <= 1e-12, std::string(name) + " factorization");
        o.require(mism == 0, std::string(name) + " crit grid");
        o.require(eig >= delta, std::string(name) + " transversal eigenvalue");
        o.require(gap <= 1e-2, std::string(name) + " resolved vs direct");
    }
}

// 9. Transversal Hessian at regular points of the zero level equals det Ξ.
void regular_hessian(Outcome& o) {
    auto m = SymplecticModel::preset("linrot2");
    std::mt19937 rng(11);
    std::normal_distribution<double> N(0, 1);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        // the zero level is {p ∥ q}
        double q0 = N(rng), q1 = N(rng), s = N(rng);
        VecD eta{q0, q1, s * q0, s * q1};
        double ref = std::abs(xi_map(m, eta).det());
        worst = std::max(worst, std::abs(std::abs(regular_transversal_hessian(m, eta).det) - ref) / ref);
    }
    o.detail << "max rel err over 20 points = " << worst;
    o.require(worst <= 1e-8, "1e-8");
}

// 10. Symbolic and finite-difference stationary-phase coefficients; the 3k > 2r selection rule.
void sp_paths(Outcome& o) {
    std::mt19937 g(7);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst = 0;
    for (int t = 0; t < 25; ++t) {
        Eigen::Matrix2d S;
        do {
            double a = U(g), b = U(g), d = U(g);
            S << 1 + a, b, b, (U(g) > 0 ? 1 : -1) * (1 + d * d);
        } while (std::abs(S.determinant()) <= 0.2);
        DPoly P(2), F = DPoly::constant(2, 1.0);
        P.add_term({2, 0}, S(0, 0) / 2);
        P.add_term({1, 1}, S(0, 1));
        P.add_term({0, 2}, S(1, 1) / 2);
        for (int i = 0; i <= 3; ++i) P.add_term({3 - i, i}, U(g));
        for (int i = 0; i <= 4; ++i) P.add_term({4 - i, i}, 0.5 * U(g));
        F.add_term({1, 0}, U(g));
        F.add_term({0, 2}, U(g));
        CleanPhase ph;
        ph.l = 2;
        ph.psi = [P](const VecD&, const VecD& s) { return P.eval(s); };
        ph.amp = [F](const VecD&, const VecD& s) { return F.eval(s); };
        ph.psi_poly = [P](const VecD&) { return P; };
        ph.amp_poly = [F](const VecD&) { return F; };
        auto sym = sp_coefficients(ph, 2, SPMethod::Symbolic);
        auto fd = sp_coefficients(ph, 2, SPMethod::FiniteDifference);
        for (int j = 0; j < 2; ++j) worst = std::max(worst, std::abs(sym.Q[j] - fd.Q[j]) / std::abs(sym.Q[j]));
    }
    std::mt19937 h(11);
    std::uniform_int_distribution<int> Z(-5, 5);
    int nonzero = 0, total = 0;
    for (int t = 0; t < 10; ++t) {
        QPoly H(2), f(2);
        for (int i = 0; i <= 3; ++i) H.add_term({3 - i, i}, Rat(Z(h), 1 + std::abs(Z(h))));
        f.add_term({0, 0}, Rat(1));
        f.add_term({1, 1}, Rat(Z(h)));
        SymMat A(2);
        A.set(0, 0, Rat(2));
        A.set(0, 1, Rat(1, 3));
        A.set(1, 1, Rat(-1));
        for (int r = 0; r <= 5; ++r)
            for (int k = 0; k <= 4; ++k)
                if (3 * k > 2 * r) {
                    ++total;
                    if (!hormander_operator_exact(H, f, A, r, k).is_zero()) ++nonzero;
                }
    }
    o.detail << "max rel gap = " << worst << ", nonzero excluded terms = " << nonzero << "/" << total;
    o.require(worst <= 1e-6, "paths agree to 1e-6");
    o.require(nonzero == 0, "exact zeros");
}

}  // namespace

int main() {
    struct Item {
        const char* name;
        void (*run)(Outcome&);
    };
    const Item items[] = {
        {"fresnel integral", fresnel},
        {"localization sum on the sphere", bv_sphere},
        {"DH measure of the sphere", dh_sphere},
        {"residue consistency and pairing", residues},
        {"exact forms vanish", exact_forms},
        {"circle at regular level", circle_sweep},
        {"rotation model sweep", linrot2_sweep},
        {"resolution certificate", resolution},
        {"regular-point Hessian", regular_hessian},
        {"stationary-phase paths", sp_paths},
    };
    int failed = 0, n = 0;
    for (const auto& it : items) {
        Outcome o;
        try {
            it.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", ++n, it.name, o.detail.str().c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
