#include "doctest.h"

#include "eqloc/models.hpp"

#include <numbers>
#include <random>

using namespace eqloc;

namespace {
constexpr double kPi = std::numbers::pi;

RatMat rot(int n, int a, int b, long w = 1) {
    RatMat M(n, std::vector<Rat>(n, Rat(0)));
    M[a][b] = Rat(-w);
    M[b][a] = Rat(w);
    return M;
}

std::vector<SymplecticModel> catalog() {
    return {SymplecticModel::sphere(1.0), SymplecticModel::sphere(2.0), SymplecticModel::cotangent_circle(),
            SymplecticModel::preset("linrot2"), SymplecticModel::preset("linrot4"),
            SymplecticModel::linear_cotangent(2, {rot(2, 0, 1, 2)})};
}

VecD random_point(const SymplecticModel& m, std::mt19937& g) {
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    VecD eta(m.phase_dim());
    for (auto& x : eta) x = U(g);
    if (m.kind() == ModelKind::Sphere) eta[1] = 0.9 * m.radius() * std::tanh(eta[1]);
    return eta;
}

VecD random_g(const SymplecticModel& m, std::mt19937& g) {
    std::uniform_real_distribution<double> U(-2, 2);
    VecD X(m.g_dim());
    for (auto& x : X) x = U(g);
    return X;
}
}  // namespace

TEST_SUITE("models") {

TEST_CASE("momentum examples") {
    auto lin = SymplecticModel::preset("linrot2");
    CHECK(lin.momentum({1, 0, 0, 1}, {1}) == doctest::Approx(1.0));
    CHECK(lin.momentum_exact({Rat(1), Rat(0), Rat(0), Rat(1)}, {Rat(1)}) == Rat(1));
    CHECK(SymplecticModel::sphere(1).momentum({0.3, 0.5}, {1}) == doctest::Approx(0.5));
    CHECK(SymplecticModel::cotangent_circle().momentum({0, 2}, {1}) == doctest::Approx(2.0));
    CHECK_THROWS(SymplecticModel::sphere(1).momentum({0, 1.5}, {1}));
}

TEST_CASE("momentum is linear in X and exact for linear models") {
    std::mt19937 g(2);
    for (const auto& m : catalog()) {
        for (int k = 0; k < 10; ++k) {
            VecD eta = random_point(m, g);
            VecD X = random_g(m, g), Y = random_g(m, g);
            double a = 0.7, b = -1.3;
            VecD Z(X.size());
            for (std::size_t i = 0; i < X.size(); ++i) Z[i] = a * X[i] + b * Y[i];
            CHECK(m.momentum(eta, Z) == doctest::Approx(a * m.momentum(eta, X) + b * m.momentum(eta, Y)).epsilon(1e-13));
        }
    }
    auto lin = SymplecticModel::preset("linrot4");
    std::uniform_int_distribution<int> I(-9, 9);
    for (int k = 0; k < 10; ++k) {
        std::vector<Rat> eta, X, Y;
        for (int i = 0; i < 8; ++i) eta.emplace_back(I(g), 7);
        for (int i = 0; i < 2; ++i) X.emplace_back(I(g)), Y.emplace_back(I(g), 3);
        std::vector<Rat> Z{Rat(2) * X[0] - Y[0], Rat(2) * X[1] - Y[1]};
        CHECK(lin.momentum_exact(eta, Z) == Rat(2) * lin.momentum_exact(eta, X) - lin.momentum_exact(eta, Y));
    }
}

TEST_CASE("momentum is equivariant under the torus") {
    std::mt19937 g(4);
    for (const auto& m : catalog()) {
        for (int k = 0; k < 10; ++k) {
            VecD eta = random_point(m, g), X = random_g(m, g), t = random_g(m, g);
            CHECK(m.momentum(m.act(eta, t), X) == doctest::Approx(m.momentum(eta, X)).epsilon(1e-12));
        }
    }
}

TEST_CASE("dJ_X + i_X omega = 0 by finite differences") {
    std::mt19937 g(5);
    for (const auto& m : catalog()) {
        for (int k = 0; k < 10; ++k) {
            VecD eta = random_point(m, g), X = random_g(m, g);
            auto W = m.omega_matrix(eta);
            VecD v = m.fundamental_field(eta, X);
            for (int j = 0; j < m.phase_dim(); ++j) {
                VecD a = eta, b = eta;
                double h = 1e-5;
                a[j] += h;
                b[j] -= h;
                double dJ = (m.momentum(a, X) - m.momentum(b, X)) / (2 * h);
                double iw = 0;
                for (int i = 0; i < m.phase_dim(); ++i) iw += v[i] * W(i, j);
                CHECK(std::abs(dJ + iw) < 1e-8);
            }
        }
    }
}

TEST_CASE("fixed components of the catalog") {
    auto S = SymplecticModel::sphere(1).fixed_components();
    REQUIRE(S.size() == 2);
    CHECK(S[0].point[1] == doctest::Approx(1.0));
    CHECK(S[0].Jvalue.coeffs[0] == Rat(1));
    CHECK(S[0].weights[0].first.coeffs[0] == Rat(-1));
    CHECK(S[1].Jvalue.coeffs[0] == Rat(-1));
    CHECK(S[1].weights[0].first.coeffs[0] == Rat(1));
    CHECK(S[0].rankNF == 2);
    CHECK(SymplecticModel::cotangent_circle().fixed_components().empty());
    auto L = SymplecticModel::preset("linrot2").fixed_components();
    REQUIRE(L.size() == 1);
    CHECK(L[0].dim == 0);
    CHECK(L[0].rankNF == 4);
    REQUIRE(L[0].weights.size() == 2);
    CHECK(L[0].weights[0].first.coeffs[0] == Rat(1));
    CHECK(L[0].weights[1].first.coeffs[0] == Rat(-1));
    // The linearized action on R^4 has eigenvalues ±i, each twice.
    auto lr2 = SymplecticModel::preset("linrot2");
    const auto& G = lr2.generators_d()[0];
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A.topLeftCorner(2, 2) = G;
    A.bottomRightCorner(2, 2) = G;
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(A);
    int plus = 0, minus = 0;
    for (int i = 0; i < 4; ++i) (es.eigenvalues()[i].imag() > 0 ? plus : minus) += 1;
    CHECK(plus == 2);
    CHECK(minus == 2);
}

TEST_CASE("fixed components together with nonvanishing fields exhaust a sample") {
    std::mt19937 g(8);
    for (const auto& m : catalog()) {
        VecD Y(m.g_dim());
        for (int j = 0; j < m.g_dim(); ++j) Y[j] = 1.0 + 0.37 * j;
        auto F = m.fixed_components();
        std::vector<VecD> pts;
        for (const auto& f : F) pts.push_back(f.point);
        for (int k = 0; k < 200; ++k) pts.push_back(random_point(m, g));
        for (const auto& eta : pts) {
            if (!m.is_fixed(eta, Y)) continue;
            bool found = false;
            for (const auto& f : F) {
                double d = 0;
                for (int i = 0; i < m.phase_dim(); ++i) {
                    if (m.kind() == ModelKind::Sphere && i == 0) continue;
                    d += (eta[i] - f.point[i]) * (eta[i] - f.point[i]);
                }
                if (std::sqrt(d) < 1e-9) found = true;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("orbit volume and isotropy examples") {
    auto lin = SymplecticModel::preset("linrot2");
    CHECK(lin.orbit_volume({1, 0, 2, 0}) == doctest::Approx(2 * kPi * std::sqrt(5.0)).epsilon(1e-12));
    CHECK(lin.isotropy_dim({1, 0, 2, 0}) == 0);
    CHECK(lin.orbit_volume({0, 0, 0, 0}) == 0.0);
    CHECK(lin.isotropy_dim({0, 0, 0, 0}) == 1);
    auto S = SymplecticModel::sphere(1);
    CHECK(S.orbit_volume({0.4, 0}) == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(S.isotropy_dim({0.4, 0}) == 0);
    CHECK(S.isotropy_dim({0, 1}) == 1);
    auto L2 = SymplecticModel::linear_cotangent(2, {rot(2, 0, 1, 2)});
    CHECK(L2.isotropy_order({1, 0, 2, 0}) == 2);
    CHECK(L2.orbit_volume({1, 0, 2, 0}) == doctest::Approx(2 * kPi * std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("xi_map examples") {
    auto lin = SymplecticModel::preset("linrot2");
    auto xi = xi_map_exact(lin, {Rat(1), Rat(0), Rat(2), Rat(0)});
    REQUIRE(xi.gram_exact);
    CHECK((*xi.gram_exact)(0, 0) == Rat(5));
    CHECK(xi.ortho(0, 0) == doctest::Approx(5.0));
    CHECK(xi_map(SymplecticModel::sphere(1), {1.0, 0.0}).ortho(0, 0) == doctest::Approx(1.0));
    auto xc = xi_map_exact(lin, {Rat(3), Rat(0), Rat(6), Rat(0)});
    CHECK((*xc.gram_exact)(0, 0) == Rat(9) * Rat(5));
    CHECK_THROWS(xi_map(lin, {0, 0, 0, 0}));
}

TEST_CASE("|det Xi|^(1/2) = vol(orbit) |G_eta| / volG at random regular points") {
    std::mt19937 g(12);
    for (const auto& m : catalog()) {
        for (int k = 0; k < 5; ++k) {
            VecD eta = random_point(m, g);
            if (m.isotropy_dim(eta) != 0) continue;
            double lhs = std::sqrt(std::abs(xi_map(m, eta).det()));
            double rhs = m.orbit_volume(eta) * double(m.isotropy_order(eta)) / m.group().volG;
            CHECK(std::abs(lhs - rhs) <= 1e-10 * lhs);
        }
    }
}

TEST_CASE("lie derivative map") {
    auto lin = SymplecticModel::preset("linrot2");
    auto L0 = lie_derivative_map(lin, {1, 0, 2, 0}, {0});
    CHECK(L0.norm() == 0.0);
    CHECK_THROWS(lie_derivative_map(lin, {1, 0, 2, 0}, {1}));
    auto l4 = SymplecticModel::preset("linrot4");
    VecD eta{1, 0, 0, 0, 0, 2, 0, 0};  // second block zero: fixed by the second generator
    CHECK(l4.isotropy_dim(eta) == 1);
    auto L = lie_derivative_map(l4, eta, {0, 1});
    REQUIRE(L.rows() == 1);
    CHECK(L.norm() < 1e-8);
    // Antisymmetric with respect to ω on g·η (trivially so for a one-dimensional orbit).
    auto W = l4.omega_matrix(eta);
    VecD e = l4.fundamental_field(eta, {1, 0});
    Eigen::Map<Eigen::VectorXd> ev(e.data(), long(e.size()));
    CHECK(std::abs(L(0, 0) * ev.dot(W * ev) * 2) < 1e-8);
    CHECK_THROWS(lie_derivative_map(l4, eta, {1, 0}));
}

TEST_CASE("stratum sampler") {
    SamplerOptions opt;
    opt.n_radial = 10;
    opt.n_angle = 12;
    opt.rmax = 3;
    for (const auto& m : catalog()) {
        if (m.g_dim() == 2) {
            opt.n_radial = 4;
            opt.n_angle = 5;
        }
        VecD level(m.g_dim(), 0.0);
        if (m.kind() == ModelKind::CotangentCircle) level[0] = 0.7;
        auto s = stratum_sampler(m, level, opt);
        double W = 0;
        for (const auto& x : s) {
            W += x.weight;
            VecD J = m.momentum_components(x.eta);
            for (std::size_t j = 0; j < J.size(); ++j) CHECK(std::abs(J[j] - level[j]) < 1e-12);
            CHECK(m.isotropy_dim(x.eta) == m.g_dim() - m.group().kappa);
        }
        CHECK(W == doctest::Approx(stratum_region_measure(m, level, opt)).epsilon(1e-12));
    }
    auto eq = stratum_sampler(SymplecticModel::sphere(1), {0.0});
    double w = 0;
    for (const auto& x : eq) w += x.weight;
    CHECK(w == doctest::Approx(2 * kPi));
    CHECK_THROWS(stratum_sampler(SymplecticModel::sphere(1), {1.0}));
}

TEST_CASE("group data invariants and config validation") {
    for (const auto& m : catalog()) {
        m.group().validate();
        CHECK(m.group().d - m.group().dT == 2 * int(m.group().roots.size()));
        CHECK(m.group().kappa <= m.group().d);
    }
    CHECK(SymplecticModel::preset("linrot4").group().kappa == 2);
    CHECK(SymplecticModel::preset("linrot4").group().volG == doctest::Approx(4 * kPi * kPi));
    try {
        model_from_json_string(R"({"kind":"linear_cotangent","n":2,"generators":[[[0,1],[1,0]]]})");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        REQUIRE(e.problems.size() == 1);
        CHECK(e.problems[0] == "generator 0 is not antisymmetric");
    }
    CHECK_THROWS_AS(model_from_json_string(R"({"kind":"linear_cotangent","n":2,"generators":[[[0,"-1/2"],["1/2",0]]]})"),
                    ConfigError);
    CHECK_THROWS_AS(model_from_json_string(R"({"kind":"linear_cotangent","n":3,"generators":[[[0,-1,0],[1,0,0],[0,0,0]],[[0,0,-1],[0,0,0],[1,0,0]]]})"),
                    ConfigError);
    CHECK_THROWS_AS(model_from_json_string(R"({"kind":"sphere","roots":[[2]]})"), ConfigError);
    CHECK_THROWS_AS(model_from_json_string(R"({"kind":"torus"})"), ConfigError);
    auto m = model_from_json_string(R"({"kind":"sphere","radius":2})");
    CHECK(m.radius() == 2.0);
}

TEST_CASE("bump is polynomial on its support and C^order at the edge") {
    Bump b{2.0, 4};
    QPoly P = b.poly(Rat(2));
    for (double s : {0.0, 0.3, -1.1, 1.9}) CHECK(b(s) == doctest::Approx(to_dpoly(P).eval(VecD{s})).epsilon(1e-14));
    CHECK(b(2.0) == 0.0);
    QPoly D = P;
    for (int k = 1; k <= 4; ++k) {
        D = D.diff(0);
        CHECK(D.eval(std::vector<Rat>{Rat(2)}) == Rat(0));
    }
    CHECK(!(D.diff(0).eval(std::vector<Rat>{Rat(2)}) == Rat(0)));
    auto a = amplitude_from_json_string(R"({"cos2":[0],"bump":{"R":4,"order":4,"coords":[1]},"xbump":{"R":2}})", 2, 1);
    CHECK(a({0.0, 0.0}, {0.0}) == doctest::Approx(1.0));
    CHECK(a({kPi / 2, 0.0}, {0.0}) == doctest::Approx(0.0));
}

}  // TEST_SUITE
