#include "doctest.h"

#include "eqloc/localization.hpp"
#include "support.hpp"

#include <numbers>
#include <random>

using namespace eqloc;
using testsupport::gl_composite;

namespace {
constexpr double kPi = std::numbers::pi;
const cplx I1(0, 1);

// ∫_{S²_R} e^{iYz} dA in the (φ, z) chart, exact.
cplx sphere_exact(double Y, double R = 1) { return 2 * kPi * (std::exp(I1 * Y * R) - std::exp(-I1 * Y * R)) / (I1 * Y); }

Amplitude circle_cos2_bump() {
    Amplitude a;
    a.poly = DPoly::constant(3, 1.0);
    a.cos2_coords = {0};
    a.eta_bump = Bump{1.0, 4};
    a.eta_bump_coords = {1};
    return a;
}

double bump5(double p) { return std::abs(p) >= 1 ? 0.0 : std::pow(1 - p * p, 5); }
}  // namespace

TEST_CASE("euler_inverse examples") {
    auto S = SymplecticModel::sphere();
    auto comps = S.fixed_components();
    CHECK(euler_inverse(comps[0], {2.0}).value == doctest::Approx(-0.5));
    FixedComponent F;
    F.weights = {{LinForm({Rat(1)}), 1}, {LinForm({Rat(-1)}), 1}};
    CHECK(euler_inverse(F, {3.0}).value == doctest::Approx(-1.0 / 9));
    CHECK_THROWS_AS(euler_inverse(F, {0.0}), std::domain_error);
}

TEST_CASE("Berline-Vergne sum on the sphere against quadrature and the closed form") {
    auto S = SymplecticModel::sphere();
    auto rho = ClosedForm::one(1);
    for (double Y : {0.5, 1.0, 2.0, 5.0}) {
        BVResult bv = bv_sum(S, rho, {Y});
        CHECK(bv.applicable);
        CHECK(std::abs(bv.value - sphere_exact(Y)) < 1e-12);
        QuadResult q = bv_direct(S, rho, {Y});
        CHECK(std::abs(bv.value - q.value) < 1e-8);
    }
    CHECK(bv_sum(S, rho, {2.0}).value.real() == doctest::Approx(4 * kPi * std::sin(2.0) / 2));
    for (double Y : {10.0, 50.0, 400.0}) CHECK(std::abs(bv_sum(S, rho, {Y}).value) <= 4 * kPi / Y + 1e-12);
    // Radius 2 and a nonconstant closed form ρ = 1 + Y·ω̄ (quadrature oracle only).
    auto S2 = SymplecticModel::sphere(2.0);
    ClosedForm r2{{QPoly::constant(1, Rat(1)), QPoly::var(1, 0)}};
    for (double Y : {0.5, 2.0}) {
        CHECK(std::abs(bv_sum(S2, rho, {Y}).value - sphere_exact(Y, 2)) < 1e-11);
        CHECK(std::abs(bv_sum(S2, r2, {Y}).value - bv_direct(S2, r2, {Y}).value) < 1e-8);
    }
}

TEST_CASE("no fixed points on the cotangent circle") {
    auto C = SymplecticModel::cotangent_circle();
    BVResult bv = bv_sum(C, ClosedForm::one(1), {1.0});
    CHECK_FALSE(bv.applicable);
    CHECK(bv.value == cplx(0));
    CHECK(bv.note == "no fixed points: localization sum not applicable");
    JKResult jk = jk_residue(C, ClosedForm::one(1), {Rat(1)});
    CHECK_FALSE(jk.applicable);
    CHECK_THROWS_AS(dh_measure(C, ClosedForm::one(1)), std::domain_error);
}

TEST_CASE("symbolic u_F matches bv_term and scales linearly") {
    auto S = SymplecticModel::sphere();
    auto rho = ClosedForm::one(1);
    auto comps = S.fixed_components();
    for (const auto& F : comps) {
        RatExp u = u_F_symbolic(S, F, rho);
        REQUIRE(u.terms.size() == 1);
        CHECK(u.terms[0].twopi == 1);
        CHECK(u.terms[0].denoms.size() == 1);
        CHECK(u.terms[0].phase == F.Jvalue);
        for (double Y : {1.0, 2.0, 3.0}) CHECK(std::abs(u.eval({Y}) - bv_term(S, F, rho, {Y})) < 1e-13);
    }
    CHECK(comps[0].Jvalue == LinForm({Rat(1)}));
    CHECK(comps[1].Jvalue == LinForm({Rat(-1)}));
    RatExp u = u_symbolic(S, rho), u3 = u_symbolic(S, rho.scaled(Rat(3, 7)));
    for (double Y : {0.7, 2.2}) CHECK(std::abs(u3.eval({Y}) - 3.0 / 7 * u.eval({Y})) < 1e-13);
    FixedComponent bad = comps[0];
    bad.dim = 2;
    CHECK_THROWS_AS(u_F_symbolic(S, bad, rho), std::domain_error);
}

TEST_CASE("Duistermaat-Heckman measure of the sphere") {
    auto S = SymplecticModel::sphere();
    PiecewisePoly U = dh_measure(S, ClosedForm::one(1));
    CHECK_FALSE(U.has_atoms());
    for (double x : {-0.9, -0.2, 0.4, 0.99}) CHECK(std::abs(U.density({x}) - 2 * kPi) < 1e-12);
    for (double x : {-1.5, 1.01, 3.0}) CHECK(std::abs(U.density({x})) < 1e-12);
    CHECK(std::abs(U.mass() - 4 * kPi) < 1e-12);

    auto S2 = SymplecticModel::sphere(2.0);
    PiecewisePoly U2 = dh_measure(S2, ClosedForm::one(1));
    CHECK(std::abs(U2.density({1.9}) - 2 * kPi) < 1e-12);
    CHECK(std::abs(U2.density({2.1})) < 1e-12);
    CHECK(std::abs(U2.mass() - 8 * kPi) < 1e-12);

    auto cone = default_cone(S);
    std::vector<LinForm> flipped;
    for (const auto& l : cone) flipped.push_back(-l);
    CHECK(dh_measure(S, ClosedForm::one(1), flipped).same_densities(U));
}

TEST_CASE("DH measure against a Monte Carlo pushforward of the area") {
    auto S = SymplecticModel::sphere();
    PiecewisePoly U = dh_measure(S, ClosedForm::one(1));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> C(-1, 1);
    const int samples = 1000000;
    std::vector<double> z(samples);
    for (double& v : z) {
        double a = N01(rng), b = N01(rng), c = N01(rng);
        v = c / std::sqrt(a * a + b * b + c * c);
    }
    for (int t = 0; t < 10; ++t) {
        double c0 = C(rng), c1 = C(rng), c2 = C(rng), c3 = C(rng);
        auto f = [&](double x) { return 1.5 + c0 + x * (c1 + x * (c2 + x * c3)); };
        double mc = 0;
        for (double v : z) mc += f(v);
        mc *= 4 * kPi / samples;
        double dh = gl_composite([&](double x) { return f(x) * U.density({x}).real(); }, -1, 1, 4);
        CHECK(std::abs(dh - mc) <= 0.01 * std::abs(mc));
    }
}

TEST_CASE("ray residues are independent of the direction and cone") {
    auto S = SymplecticModel::sphere();
    auto rho = ClosedForm::one(1);
    JKResult p = jk_residue(S, rho, {Rat(1)}), m = jk_residue(S, rho, {Rat(-1)});
    CHECK(p.raw.value == m.raw.value);
    CHECK(p.raw.twopi == m.raw.twopi);
    CHECK(std::abs(p.raw.numeric() - 2 * kPi) < 1e-12);
    CHECK(p.paired == doctest::Approx(4 * kPi * kPi).epsilon(1e-13));
    CHECK(jk_residue(S, rho, {Rat(5, 3)}).raw.value == p.raw.value);
    std::vector<LinForm> flipped{LinForm({Rat(-1)})};
    CHECK(jk_residue(S, rho, {Rat(1)}, flipped).raw.value == p.raw.value);
    // The residue equals the DH density at 0⁺ after the 2π powers.
    CHECK(std::abs(p.raw.numeric() - dh_measure(S, rho).density({1e-9})) < 1e-12);
}

TEST_CASE("Weyl factors") {
    CHECK(weyl_factor({}, 1).phi == QPoly::constant(1, Rat(1)));
    auto w = weyl_factor({LinForm({Rat(2)})}, 1);
    CHECK(w.phi == QPoly::var(1, 0).scaled(Rat(2)));
    CHECK(w.phi2 == QPoly::var(1, 0).pow(2).scaled(Rat(4)));
    auto w2 = weyl_factor({LinForm({Rat(1), Rat(-1)}), LinForm({Rat(1), Rat(1)})}, 2);
    CHECK(w2.phi == QPoly::var(2, 0).pow(2) - QPoly::var(2, 1).pow(2));
}

TEST_CASE("smearing kernel") {
    for (int d : {1, 2, 3}) {
        SmearingKernel k(d);
        CHECK(k.phihat(VecD(d, 0.0)) == doctest::Approx(1.0));
        for (double eps : {0.2, 0.05}) {
            double s;
            if (d == 1) {
                s = gl_composite([&](double x) { return k.phi_eps({x}, eps); }, -eps, eps, 2);
            } else if (d == 2) {
                s = gl_composite([&](double r) { return 2 * kPi * r * k.phi_eps({r, 0}, eps); }, 0, eps, 2);
            } else {
                s = gl_composite([&](double r) { return 4 * kPi * r * r * k.phi_eps({r, 0, 0}, eps); }, 0, eps, 2);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SmearingKernel k1(1), k2(2);
    for (double X : {0.5, 3.0, 37.0}) {
        double ref = gl_composite([&](double x) { return std::cos(X * x) * k1.phi({x}); }, -1, 1, 16);
        CHECK(std::abs(k1.phihat({X}) - ref) < 1e-13);
        double ref2 = 0;
        ref2 = gl_composite([&](double x) {
            return gl_composite([&](double y) { return std::cos(X * x) * k2.phi({x, y}); }, -std::sqrt(std::max(0.0, 1 - x * x)),
                                std::sqrt(std::max(0.0, 1 - x * x)), 4);
        }, -1, 1, 16);
        CHECK(std::abs(k2.phihat({0.0, X}) - ref2) < 1e-9);
    }
    // ∂φ_ε by central differences.
    double h = 1e-5, x = 0.013, eps = 0.05;
    CHECK(k1.dphi_eps({1}, {x}, eps) ==
          doctest::Approx((k1.phi_eps({x + h}, eps) - k1.phi_eps({x - h}, eps)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("forms from amplitudes and invariance") {
    auto S = SymplecticModel::sphere();
    auto area = EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0));
    CHECK(area.density({1.0, 0.3}, {2.0}) == cplx(1.0));
    CHECK(area.invariance_defect(S) < 1e-15);
    Amplitude lin;
    lin.poly = DPoly::var(3, 1) * DPoly::var(3, 2);  // z·X
    auto f = EquivariantForm::from_amplitude(S, lin);
    REQUIRE(f.terms.size() == 1);
    CHECK(f.terms[0].first == Exponent{1});
    CHECK(f.density({0.4, 0.5}, {3.0}).real() == doctest::Approx(1.5));
    Amplitude bad;
    bad.poly = DPoly::constant(3, 1.0);
    bad.cos2_coords = {0};
    CHECK(EquivariantForm::from_amplitude(S, bad).invariance_defect(S) > 1e-3);
    bad.x_bump = Bump{};
    CHECK_THROWS_AS(EquivariantForm::from_amplitude(S, bad), std::domain_error);
}

TEST_CASE("smeared limits on the compact catalog models") {
    auto S = SymplecticModel::sphere();
    SmearingKernel k(1);
    SmearResult r = smeared_limit(S, EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0)), k);
    CHECK(r.converged);
    CHECK(r.limit == doctest::Approx(4 * kPi * kPi).epsilon(1e-8));
    for (auto v : r.values) CHECK(std::abs(v - 4 * kPi * kPi) < 1e-8);

    auto C = SymplecticModel::cotangent_circle();
    auto fc = EquivariantForm::from_amplitude(C, circle_cos2_bump());
    SmearResult rc = smeared_limit(C, fc, k);
    CHECK(rc.converged);
    CHECK(rc.limit == doctest::Approx(2 * kPi * kPi).epsilon(1e-5));
    // I(ε) − 2π² is O(ε²): the first value is visibly off.
    CHECK(std::abs(rc.values[0] - 2 * kPi * kPi) > 1e-3);
}

TEST_CASE("smeared value agrees with the literal double quadrature") {
    auto S = SymplecticModel::sphere();
    SmearingKernel k(1);
    auto area = EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0));
    QuadResult q = smeared_direct(S, area, k, 0.2, 20, {1e-8, 1e-7});
    CHECK(std::abs(q.value - 4 * kPi * kPi) < 1e-4 * 4 * kPi * kPi);
    auto C = SymplecticModel::cotangent_circle();
    auto fc = EquivariantForm::from_amplitude(C, circle_cos2_bump());
    SmearOptions o;
    o.eps = {0.2, 0.1};
    cplx inv = smeared_limit(C, fc, k, o).values[0];
    QuadResult qc = smeared_direct(C, fc, k, 0.2, 20, {1e-8, 1e-7});
    CHECK(std::abs(qc.value - inv) < 1e-4 * std::abs(inv));
}

TEST_CASE("exact forms smear to zero") {
    SmearingKernel k(1);
    auto S = SymplecticModel::sphere();
    auto bs = [](const VecD& e) {
        double z = e[1];
        return VecD{(1 - z * z) * (1 + z + z * z * z), z * z};
    };
    auto Ds = EquivariantForm::exact(S, bs, QPoly::constant(1, Rat(1)));
    CHECK(Ds.invariance_defect(S) < 1e-9);
    SmearResult r = smeared_limit(S, Ds, k);
    CHECK(std::abs(r.limit_c) <= 1e-6 * 3);
    for (auto v : r.values) CHECK(std::abs(v) <= 1e-6 * 3);

    auto C = SymplecticModel::cotangent_circle();
    auto bc = [](const VecD& e) {
        double p = e[1];
        return VecD{bump5(p) * (1 + p), p * bump5(p)};
    };
    auto Dc = EquivariantForm::exact(C, bc, QPoly::var(1, 0) + QPoly::constant(1, Rat(2)), {{0, -1}, {2 * kPi, 1}});
    SmearResult rc = smeared_limit(C, Dc, k);
    CHECK(std::abs(rc.limit_c) <= 1e-6 * 2);
    // The X-independent part alone does not vanish, so the cancellation is genuine.
    EquivariantForm part = Dc;
    part.terms.erase(part.terms.begin() + 1, part.terms.end());
    CHECK(std::abs(smeared_limit(C, part, k).values[0]) > 1.0);
}

TEST_CASE("Kirwan stratum integral") {
    auto S = SymplecticModel::sphere();
    auto area = EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0));
    KirwanResult kr = kirwan_integral(S, area);
    CHECK(kr.value == doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
    CHECK(kr.stratum_integral == doctest::Approx(1.0).epsilon(1e-12));
    auto S2 = SymplecticModel::sphere(2.0);
    CHECK(kirwan_integral(S2, EquivariantForm::from_amplitude(S2, Amplitude::constant(3, 1.0))).value ==
          doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
    auto C = SymplecticModel::cotangent_circle();
    auto fc = EquivariantForm::from_amplitude(C, circle_cos2_bump());
    KirwanResult kc = kirwan_integral(C, fc);
    CHECK(kc.value == doctest::Approx(2 * kPi * kPi).epsilon(1e-12));
    CHECK(kc.prefactor == doctest::Approx(4 * kPi * kPi));
    Amplitude zf;
    zf.poly = DPoly::var(3, 1);  // z vanishes on the equator
    CHECK(std::abs(kirwan_integral(S, EquivariantForm::from_amplitude(S, zf)).value) < 1e-14);
    // Pairing identity: smeared limit equals the Kirwan integral within 1%.
    SmearingKernel k(1);
    CHECK(std::abs(smeared_limit(C, fc, k).limit - kc.value) <= 0.01 * kc.value);
}

TEST_CASE("Hessian of J_Y at the poles is nondegenerate") {
    auto S = SymplecticModel::sphere();
    for (const auto& F : S.fixed_components())
        for (double Y : {1.0, -2.5}) {
            Eigen::MatrixXd H = fixed_point_hessian(S, F, {Y});
            CHECK(std::abs(H.determinant() - Y * Y) < 1e-5 * Y * Y);
            double sign = F.point[1] > 0 ? -1 : 1;
            CHECK(H(0, 0) == doctest::Approx(sign * Y).epsilon(1e-6));
        }
}

TEST_CASE("asymptotic expansion of L at the fixed points") {
    auto S = SymplecticModel::sphere();
    auto A = asymptotic_L(S, Amplitude::constant(3, 1.0), {3.0}, 0);
    REQUIRE(A.applicable);
    REQUIRE(A.per_component.size() == 2);
    CHECK(A.per_component[0].sigma == -2);
    CHECK(A.per_component[1].sigma == 2);
    // Exact stationary phase for the area: the leading terms reproduce bv_sum at every t.
    for (double t : {3.0, 10.0, 40.0}) CHECK(std::abs(A.evaluate(t) - bv_sum(S, ClosedForm::one(1), {t}).value) < 1e-6);
    auto A1 = asymptotic_L(S, Amplitude::constant(3, 1.0), {3.0}, 1);
    for (const auto& e : A1.per_component) CHECK(std::abs(e.Q[1]) < 1e-6);

    // Amplitude z: the 1/t² coefficient from quadrature against the second coefficient.
    Amplitude za;
    za.poly = DPoly::var(3, 1);
    auto Az = asymptotic_L(S, za, {1.0}, 1);
    double t = 100;
    auto lead = [&](const SPExpansion& e) {
        return std::exp(I1 * e.psi0 * t) * (2 * kPi / t) * std::polar(1.0, kPi * e.sigma / 4) * e.Q[0];
    };
    auto next = [&](const SPExpansion& e) {
        return std::exp(I1 * e.psi0 * t) * (2 * kPi / t) * std::polar(1.0, kPi * e.sigma / 4) * e.Q[1];
    };
    auto psi = [&](const VecD& eta) { return eta[1]; };
    auto amp = [&](const VecD& eta) { return cplx(eta[1]); };
    cplx quad = oscillatory_integral(psi, amp, {0, -1}, {2 * kPi, 1}, 1 / t, {1e-14, 1e-13}).value;
    cplx c_quad = (quad - lead(Az.per_component[0]) - lead(Az.per_component[1])) * t;
    cplx c_asym = next(Az.per_component[0]) + next(Az.per_component[1]);
    CHECK(std::abs(c_quad - c_asym) <= 0.05 * std::abs(c_asym));
    CHECK(std::abs(Az.per_component[0].Q[1] - I1) < 1e-5);

    auto C = SymplecticModel::cotangent_circle();
    CHECK_FALSE(asymptotic_L(C, circle_cos2_bump(), {1.0}, 0).applicable);
    auto L2 = SymplecticModel::preset("linrot2");
    CHECK_THROWS_AS(asymptotic_L(L2, Amplitude::constant(5, 1.0), {1.0}, 0), std::domain_error);
}
