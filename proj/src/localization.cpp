#include "eqloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eqloc {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

double norm(const VecD& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double binom(int n, int k) {
    double r = 1;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

double factorial(int n) {
    double r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

cplx ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return 1.0;
        case 1: return kI;
        case 2: return -1.0;
        default: return -kI;
    }
}

void check_Y(const SymplecticModel& m, const VecD& Y) {
    if (int(Y.size()) != m.g_dim()) throw std::invalid_argument("Y has wrong dimension");
}

void require_point(const FixedComponent& F) {
    if (F.dim != 0)
        throw std::domain_error("non-isolated fixed component: Chern-class corrections are not expanded");
}

// Integration box for the amplitude support, with Gaussian factors truncated where e^{−g r²} < 1e-17.
std::pair<VecD, VecD> amplitude_box(const SymplecticModel& m, const Amplitude& a) {
    if (a.gauss > 0 && !a.eta_bump && m.kind() == ModelKind::LinearCotangent) {
        double r = std::sqrt(40.0 / a.gauss);
        return {VecD(m.phase_dim(), -r), VecD(m.phase_dim(), r)};
    }
    return support_box(m, a);
}

// Box for an EquivariantForm: the whole chart on compact coordinates or the recorded support.
std::pair<VecD, VecD> form_box(const SymplecticModel& m, const std::pair<VecD, VecD>& supp) {
    if (!supp.first.empty()) return supp;
    if (m.kind() == ModelKind::Sphere) return {{0, -m.radius()}, {2 * kPi, m.radius()}};
    throw std::domain_error("form has no recorded support box on a noncompact model");
}

// J-components are the second coordinate on the two-dimensional models.
bool momentum_is_coordinate(const SymplecticModel& m) { return m.kind() != ModelKind::LinearCotangent; }

}  // namespace

EulerInverse euler_inverse(const FixedComponent& F, const VecD& Y) {
    EulerInverse out;
    out.point = F.dim == 0;
    double v = 1, scale = std::max(1.0, norm(Y));
    for (const auto& [lam, mult] : F.weights) {
        if (lam.dim() != int(Y.size())) throw std::invalid_argument("euler_inverse: Y has wrong dimension");
        double l = lam.eval(Y);
        if (std::abs(l) <= 1e-14 * scale)
            throw std::domain_error("euler_inverse: Y lies on the weight hyperplane " + lam.str() + " = 0");
        out.weight_values.push_back({l, mult});
        v /= std::pow(l, mult);
    }
    out.value = v;
    return out;
}

ClosedForm ClosedForm::scaled(const Rat& c) const {
    ClosedForm r;
    for (const auto& t : theta) r.theta.push_back(t.scaled(c));
    return r;
}

cplx ClosedForm::density(const SymplecticModel& m, const VecD& eta, const VecD& Y) const {
    check_Y(m, Y);
    int n = m.phase_dim() / 2;
    double J = m.momentum(eta, Y);
    cplx s = 0;
    for (int k = 0; k < int(theta.size()); ++k) {
        if (theta[k].is_zero()) continue;
        double th = to_dpoly(theta[k]).eval(Y);
        cplx part = 0;
        for (int j = 0; j <= std::min(k, n); ++j)
            part += binom(k, j) * std::pow(-J, k - j) * ipow(j) / factorial(n - j);
        s += th * factorial(n) * part;
    }
    return s;
}

QPoly ClosedForm::at_fixed(const FixedComponent& F) const {
    int d = F.Jvalue.dim();
    QPoly out(d), mj = (-F.Jvalue).to_poly(), pk = QPoly::constant(d, Rat(1));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k].dim() != d) throw std::invalid_argument("ClosedForm: coefficient arity mismatch");
        out += theta[k] * pk;
        pk = pk * mj;
    }
    return out;
}

cplx bv_term(const SymplecticModel& m, const FixedComponent& F, const ClosedForm& rho, const VecD& Y) {
    check_Y(m, Y);
    require_point(F);
    int n = F.rankNF / 2;
    EulerInverse e = euler_inverse(F, Y);
    double P = to_dpoly(rho.at_fixed(F)).eval(Y);
    return std::pow(2 * kPi, n) * ipow(n) * std::exp(kI * F.Jvalue.eval(Y)) * P * e.value;
}

BVResult bv_sum(const SymplecticModel& m, const ClosedForm& rho, const VecD& Y) {
    check_Y(m, Y);
    BVResult out;
    auto comps = m.fixed_components();
    if (comps.empty()) {
        out.applicable = false;
        out.note = "no fixed points: localization sum not applicable";
        return out;
    }
    for (const auto& F : comps) {
        cplx t = bv_term(m, F, rho, Y);
        out.terms.push_back(t);
        out.value += t;
    }
    return out;
}

QuadResult bv_direct(const SymplecticModel& m, const ClosedForm& rho, const VecD& Y, const QuadOptions& opt) {
    check_Y(m, Y);
    if (!m.compact()) throw std::domain_error("bv_direct: phase space is not compact");
    VecD lo{0, -m.radius()}, hi{2 * kPi, m.radius()};
    auto psi = [&](const VecD& eta) { return m.momentum(eta, Y); };
    auto amp = [&](const VecD& eta) { return rho.density(m, eta, Y) * m.liouville_density(eta); };
    return oscillatory_integral(psi, amp, lo, hi, 1.0, opt);
}

RatExp u_F_symbolic(const SymplecticModel& m, const FixedComponent& F, const ClosedForm& rho) {
    require_point(F);
    int n = F.rankNF / 2;
    RatExp u(m.g_dim());
    RatExpTerm t;
    t.c = CRat::ipow(n % 4);
    t.twopi = n;
    t.phase = F.Jvalue;
    t.P = rho.at_fixed(F);
    t.denoms = F.weights;
    if (!t.P.is_zero()) u.add(t);
    return u;
}

RatExp u_symbolic(const SymplecticModel& m, const ClosedForm& rho) {
    RatExp u(m.g_dim());
    for (const auto& F : m.fixed_components()) u = u + u_F_symbolic(m, F, rho);
    return u;
}

std::vector<LinForm> default_cone(const SymplecticModel& m) {
    int d = m.g_dim();
    std::vector<LinForm> lines;
    for (const auto& F : m.fixed_components())
        for (const auto& [lam, mult] : F.weights)
            if (!lam.is_zero()) lines.push_back(lam);
    std::vector<LinForm> cone;
    if (lines.empty()) {
        for (int j = 0; j < d; ++j) cone.push_back(LinForm::unit(d, j));
        return cone;
    }
    // Generic direction v = (1, 1/q, 1/q², ...) with q increased until no weight vanishes on v.
    for (long q = 3;; q += 2) {
        std::vector<Rat> v(d);
        Rat p(1);
        for (int j = 0; j < d; ++j) {
            v[j] = p;
            p = p / Rat(q);
        }
        bool ok = true;
        for (const auto& l : lines)
            if (l.eval(v).is_zero()) ok = false;
        if (!ok) continue;
        for (const auto& l : lines) {
            LinForm f = l.eval(v).sign() > 0 ? l : -l;
            if (std::find(cone.begin(), cone.end(), f) == cone.end()) cone.push_back(f);
        }
        std::sort(cone.begin(), cone.end());
        return cone;
    }
}

PiecewisePoly dh_measure(const SymplecticModel& m, const ClosedForm& rho, const std::vector<LinForm>& cone) {
    if (m.fixed_components().empty())
        throw std::domain_error("dh_measure: no fixed points; use smeared_limit for this model");
    return ft_shifted(u_symbolic(m, rho), cone.empty() ? default_cone(m) : cone);
}

WeylFactor weyl_factor(const std::vector<LinForm>& roots, int dim) {
    QPoly phi = QPoly::constant(dim, Rat(1));
    for (const auto& r : roots) {
        if (r.dim() != dim) throw std::invalid_argument("weyl_factor: root has wrong dimension");
        phi = phi * r.to_poly();
    }
    return {phi, phi * phi};
}

JKResult jk_residue(const SymplecticModel& m, const ClosedForm& rho, const std::vector<Rat>& direction,
                    const std::vector<LinForm>& cone) {
    if (int(direction.size()) != m.g_dim()) throw std::invalid_argument("jk_residue: direction has wrong dimension");
    JKResult out;
    auto comps = m.fixed_components();
    if (comps.empty()) {
        out.applicable = false;
        out.note = "no fixed points: residue routed through smeared_limit";
        return out;
    }
    const auto& G = m.group();
    WeylFactor W = weyl_factor(G.roots, m.g_dim());
    auto C = cone.empty() ? default_cone(m) : cone;
    bool first = true;
    for (const auto& F : comps) {
        RatExp u = u_F_symbolic(m, F, rho).times_poly(W.phi2);
        ResidueResult r{CRat(0), 0};
        if (!u.terms.empty()) r = residue_ray(ft_shifted(u, C), direction);
        out.per_component.push_back(r);
        if (r.value.is_zero()) continue;
        if (first) {
            out.raw = r;
            first = false;
        } else if (r.twopi == out.raw.twopi) {
            out.raw.value = out.raw.value + r.value;
        } else {
            throw std::domain_error("jk_residue: components carry different powers of 2π");
        }
    }
    out.paired = out.raw.numeric().real() * std::pow(2 * kPi, G.dT) * G.volG / (G.weylOrder * G.volT);
    return out;
}

SmearingKernel::SmearingKernel(int dim) : d(dim) {
    if (dim < 1) throw std::invalid_argument("SmearingKernel: dimension must be positive");
    c = std::tgamma(6.0 + d / 2.0) / (std::pow(kPi, d / 2.0) * 120.0);
}

DPoly SmearingKernel::poly() const {
    DPoly r2(d);
    for (int j = 0; j < d; ++j) r2 += DPoly::var(d, j).pow(2);
    return (DPoly::constant(d, 1.0) - r2).pow(5).scaled(c);
}

double SmearingKernel::phi(const VecD& xi) const {
    double r2 = 0;
    for (double x : xi) r2 += x * x;
    return r2 >= 1 ? 0.0 : c * std::pow(1 - r2, 5);
}

double SmearingKernel::phi_eps(const VecD& xi, double eps) const {
    VecD s(xi);
    for (double& x : s) x /= eps;
    return phi(s) / std::pow(eps, d);
}

double SmearingKernel::dphi_eps(const Exponent& alpha, const VecD& xi, double eps) const {
    VecD s(xi);
    double r2 = 0;
    for (double& x : s) {
        x /= eps;
        r2 += x * x;
    }
    if (r2 >= 1) return 0.0;
    DPoly P = poly();
    int order = 0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < alpha.at(j); ++k) {
            P = P.diff(j);
            ++order;
        }
    return P.eval(s) / std::pow(eps, d + order);
}

double SmearingKernel::phihat(const VecD& X) const {
    double rho = norm(X);
    if (rho == 0) return 1.0;
    // Composite Gauss on [0, 1] of the radial Hankel integral.
    int pieces = 1 + int(rho / 8);
    const auto& [x, w] = gauss_legendre(20);
    double nu = d / 2.0 - 1, s = 0;
    for (int p = 0; p < pieces; ++p) {
        double a = double(p) / pieces, b = double(p + 1) / pieces;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
            double f = c * std::pow(1 - r * r, 5);
            double k = d == 1 ? 2 * std::cos(rho * r)
                              : std::pow(2 * kPi, d / 2.0) * std::pow(rho, -nu) * std::pow(r, d / 2.0) * std::cyl_bessel_j(nu, rho * r);
            s += 0.5 * (b - a) * w[i] * k * f;
        }
    }
    return s;
}

EquivariantForm EquivariantForm::from_amplitude(const SymplecticModel& m, const Amplitude& a) {
    int phase_dim = m.phase_dim(), g_dim = m.g_dim();
    if (a.poly.dim() != phase_dim + g_dim) throw std::invalid_argument("from_amplitude: polynomial arity mismatch");
    if (a.x_bump) throw std::domain_error("from_amplitude: amplitude carries a g-cutoff; forms must be polynomial in X");
    EquivariantForm f;
    f.g_dim = g_dim;
    std::map<Exponent, DPoly> parts;
    for (const auto& [e, c] : a.poly.terms()) {
        Exponent beta(e.begin() + phase_dim, e.end());
        Exponent eta_e(e);
        std::fill(eta_e.begin() + phase_dim, eta_e.end(), 0);
        auto [it, fresh] = parts.try_emplace(beta, DPoly(phase_dim + g_dim));
        it->second.add_term(eta_e, c);
    }
    for (auto& [beta, P] : parts) {
        Amplitude part = a;
        part.poly = P;
        VecD X0(g_dim, 0.0);
        f.terms.push_back({beta, [part, X0](const VecD& eta) { return cplx(part(eta, X0)); }});
    }
    f.label = "amplitude";
    if (!m.compact() && !a.zero()) f.support = amplitude_box(m, a);
    return f;
}

EquivariantForm EquivariantForm::exact(const SymplecticModel& m, std::function<VecD(const VecD&)> beta1,
                                       const QPoly& theta, std::pair<VecD, VecD> support) {
    if (m.phase_dim() != 2) throw std::domain_error("EquivariantForm::exact: two-dimensional models only");
    int d = m.g_dim();
    if (theta.dim() != d) throw std::invalid_argument("EquivariantForm::exact: θ has wrong arity");
    EquivariantForm f;
    f.g_dim = d;
    f.label = "exact";
    f.support = std::move(support);
    const double h = 1e-4;
    auto b = beta1;
    // Fourth-order central differences for the exterior derivative.
    auto curl = [b, h](const VecD& eta) {
        auto at = [&](int k, double t) {
            VecD e(eta);
            e[k] += t;
            return b(e);
        };
        auto D = [&](int k, int comp) {
            return (-at(k, 2 * h)[comp] + 8 * at(k, h)[comp] - 8 * at(k, -h)[comp] + at(k, -2 * h)[comp]) / (12 * h);
        };
        return D(0, 1) - D(1, 0);
    };
    std::map<Exponent, std::vector<std::function<cplx(const VecD&)>>> acc;
    for (const auto& [alpha, c] : theta.terms()) {
        double th = c.to_double();
        acc[alpha].push_back([=, &m](const VecD& eta) { return cplx(th * curl(eta) / m.omega_matrix(eta)(0, 1)); });
        for (int j = 0; j < d; ++j) {
            Exponent e(alpha);
            ++e[j];
            acc[e].push_back([=, &m](const VecD& eta) {
                VecD X(d, 0.0);
                X[j] = 1;
                VecD v = m.fundamental_field(eta, X), bv = b(eta);
                return th * kI * (v[0] * bv[0] + v[1] * bv[1]);
            });
        }
    }
    for (auto& [e, fs] : acc)
        f.terms.push_back({e, [fs](const VecD& eta) {
                               cplx s = 0;
                               for (const auto& g : fs) s += g(eta);
                               return s;
                           }});
    return f;
}

cplx EquivariantForm::density(const VecD& eta, const VecD& X) const {
    if (int(X.size()) != g_dim) throw std::invalid_argument("EquivariantForm: X has wrong dimension");
    cplx s = 0;
    for (const auto& [beta, c] : terms) {
        double xm = 1;
        for (int j = 0; j < g_dim; ++j) xm *= std::pow(X[j], beta[j]);
        s += xm * c(eta);
    }
    return s;
}

double EquivariantForm::invariance_defect(const SymplecticModel& m, int samples, unsigned seed) const {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst = 0;
    int D = m.phase_dim(), d = g_dim;
    for (int s = 0; s < samples; ++s) {
        VecD eta(D), X(d), t(d);
        for (double& e : eta) e = U(rng);
        if (m.kind() != ModelKind::LinearCotangent) {
            eta[0] = kPi * (1 + eta[0]);
            eta[1] *= m.kind() == ModelKind::Sphere ? 0.999 * m.radius() : 2.0;
        }
        for (double& x : X) x = U(rng);
        for (double& x : t) x = kPi * U(rng);
        VecD g = m.act(eta, t);
        if (m.kind() != ModelKind::LinearCotangent) g[0] = std::fmod(std::fmod(g[0], 2 * kPi) + 2 * kPi, 2 * kPi);
        worst = std::max(worst, std::abs(density(g, X) - density(eta, X)));
    }
    return worst;
}

namespace {

// ∫_M c_β(η) [(−i∂)^β φ_ε](J(η) − ς) dL(η)
cplx smeared_at(const SymplecticModel& m, const EquivariantForm& alpha, const SmearingKernel& k, double eps,
                const VecD& level, const std::pair<VecD, VecD>& box, const QuadOptions& opt) {
    int d = m.g_dim();
    VecD lo = box.first, hi = box.second;
    if (momentum_is_coordinate(m)) {
        lo[1] = std::max(lo[1], level[0] - eps);
        hi[1] = std::min(hi[1], level[0] + eps);
        if (!(hi[1] > lo[1])) return 0.0;
    }
    auto amp = [&](const VecD& eta) {
        VecD J = m.momentum_components(eta);
        for (int j = 0; j < d; ++j) J[j] -= level[j];
        cplx s = 0;
        for (const auto& [beta, c] : alpha.terms) {
            double kv = k.dphi_eps(beta, J, eps);
            if (kv == 0) continue;
            int order = 0;
            for (int b : beta) order += b;
            s += ipow(-order) * kv * c(eta);
        }
        return s == 0.0 ? s : s * m.liouville_density(eta);
    };
    auto zero = [](const VecD&) { return 0.0; };
    QuadResult r = oscillatory_integral(zero, amp, lo, hi, 1.0, opt);
    return std::pow(2 * kPi, d) * r.value;
}

}  // namespace

SmearResult smeared_limit(const SymplecticModel& m, const EquivariantForm& alpha, const SmearingKernel& k,
                          const SmearOptions& opt) {
    int d = m.g_dim();
    if (k.d != d) throw std::invalid_argument("smeared_limit: kernel dimension differs from dim g");
    if (alpha.g_dim != d) throw std::invalid_argument("smeared_limit: form has wrong g-dimension");
    if (opt.eps.size() < 2) throw std::invalid_argument("smeared_limit: need at least two ε values");
    VecD level = opt.level.empty() ? VecD(d, 0.0) : opt.level;
    if (int(level.size()) != d) throw std::invalid_argument("smeared_limit: level has wrong dimension");
    auto box = form_box(m, alpha.support);
    SmearResult out;
    for (double e : opt.eps) {
        if (!(e > 0)) throw std::invalid_argument("smeared_limit: ε must be positive");
        out.values.push_back(smeared_at(m, alpha, k, e, level, box, opt.quad));
    }
    // Neville table in h = ε²; the diagonal holds successive extrapolants.
    std::size_t n = opt.eps.size();
    std::vector<cplx> T(out.values);
    out.extrapolants.push_back(T[n - 1]);
    for (std::size_t lev = 1; lev < n; ++lev) {
        for (std::size_t i = n - 1; i >= lev; --i) {
            double hi = opt.eps[i - lev] * opt.eps[i - lev], hl = opt.eps[i] * opt.eps[i];
            T[i] = (hi * T[i] - hl * T[i - 1]) / (hi - hl);
        }
        out.extrapolants.push_back(T[n - 1]);
    }
    out.limit_c = out.extrapolants.back();
    out.limit = out.limit_c.real();
    out.spread = std::abs(out.extrapolants.back() - out.extrapolants[out.extrapolants.size() - 2]);
    double floor = 100 * opt.quad.abs_tol * std::pow(2 * kPi, d);
    out.converged = out.spread <= opt.converge_tol * std::abs(out.limit_c) || out.spread <= floor;
    return out;
}

QuadResult smeared_direct(const SymplecticModel& m, const EquivariantForm& alpha, const SmearingKernel& k, double eps,
                          double T, const QuadOptions& opt) {
    if (m.g_dim() != 1 || k.d != 1) throw std::domain_error("smeared_direct: one-dimensional g only");
    if (!(eps > 0) || !(T > 0)) throw std::invalid_argument("smeared_direct: ε and T must be positive");
    auto box = form_box(m, alpha.support);
    QuadOptions inner{opt.abs_tol * 0.1, opt.rel_tol};
    auto L = [&](double X) {
        auto psi = [&](const VecD& eta) { return m.momentum_components(eta)[0]; };
        auto amp = [&](const VecD& eta) { return alpha.density(eta, {X}) * m.liouville_density(eta); };
        if (X == 0) return oscillatory_integral([](const VecD&) { return 0.0; }, amp, box.first, box.second, 1.0, inner).value;
        // e^{iJX} = e^{i (J sgn X)/(1/|X|)}
        auto spsi = [&](const VecD& eta) { return X > 0 ? psi(eta) : -psi(eta); };
        return oscillatory_integral(spsi, amp, box.first, box.second, 1 / std::abs(X), inner).value;
    };
    double W = T / eps;
    std::vector<double> breaks;
    for (double x = -W + 1; x < W; x += 1) breaks.push_back(x);
    return integrate_1d([&](double X) { return k.phihat({eps * X}) * L(X); }, -W, W, opt, breaks);
}

KirwanResult kirwan_integral(const SymplecticModel& m, const EquivariantForm& alpha, const VecD& level,
                             const SamplerOptions& opt) {
    const auto& G = m.group();
    if (!G.kappa_equals_d()) throw std::domain_error("kirwan_integral: principal orbit dimension differs from dim g");
    int d = m.g_dim();
    VecD lev = level.empty() ? VecD(d, 0.0) : level;
    auto samples = stratum_sampler(m, lev, opt);
    VecD X0(d, 0.0);
    KirwanResult out;
    double s = 0;
    for (const auto& [eta, w] : samples) {
        double a = alpha.density(eta, X0).real();
        if (a == 0) continue;
        Eigen::MatrixXd g = m.metric(eta), W = m.omega_matrix(eta);
        Eigen::MatrixXd ginv = g.inverse();
        Eigen::MatrixXd dJ(d, m.phase_dim());
        for (int j = 0; j < d; ++j) {
            VecD e(d, 0.0);
            e[j] = 1;
            VecD v = m.fundamental_field(eta, e);
            for (int c = 0; c < m.phase_dim(); ++c) {
                double s2 = 0;
                for (int l = 0; l < m.phase_dim(); ++l) s2 += v[l] * W(l, c);
                dJ(j, c) = -s2;
            }
        }
        double gradJ = std::sqrt((dJ * ginv * dJ.transpose()).determinant());
        double xi = std::sqrt(xi_map(m, eta).gram.determinant());
        double r = a * m.liouville_density(eta) / std::sqrt(g.determinant()) * xi / gradJ;
        s += w * r / m.orbit_volume(eta);
    }
    out.samples = long(samples.size());
    out.stratum_integral = s;
    out.prefactor = std::pow(2 * kPi, d) * G.volG / double(G.principalIsotropyOrder);
    out.value = out.prefactor * s;
    return out;
}

FixedChart fixed_point_chart(const SymplecticModel& m, const FixedComponent& F) {
    require_point(F);
    FixedChart c;
    if (m.kind() == ModelKind::Sphere) {
        double R = m.radius(), sg = F.point.at(1) > 0 ? 1.0 : -1.0;
        c.dim = 2;
        c.scale = 4 * R;
        c.to_phase = [R, sg](const VecD& s) {
            double r2 = s[0] * s[0] + s[1] * s[1];
            if (r2 >= R * R) throw std::domain_error("sphere pole chart: point outside the hemisphere");
            double phi = std::atan2(s[1], s[0]);
            if (phi < 0) phi += 2 * kPi;
            return VecD{phi, sg * std::sqrt(R * R - r2)};
        };
        c.liouville = [R](const VecD& s) { return 1 / std::sqrt(R * R - s[0] * s[0] - s[1] * s[1]); };
        return c;
    }
    if (m.kind() == ModelKind::LinearCotangent) {
        VecD p = F.point;
        c.dim = m.phase_dim();
        c.scale = 4;
        c.to_phase = [p](const VecD& s) {
            VecD e(p);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += s[i];
            return e;
        };
        c.liouville = [](const VecD&) { return 1.0; };
        return c;
    }
    throw std::domain_error("fixed_point_chart: model has no fixed points");
}

Eigen::MatrixXd fixed_point_hessian(const SymplecticModel& m, const FixedComponent& F, const VecD& Y) {
    check_Y(m, Y);
    FixedChart c = fixed_point_chart(m, F);
    int n = c.dim;
    double h = 1e-5 * c.scale;
    auto f = [&](VecD s) { return m.momentum(c.to_phase(s), Y); };
    Eigen::MatrixXd H(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            auto at = [&](double ta, double tb) {
                VecD s(n, 0.0);
                s[a] += ta;
                s[b] += tb;
                return f(s);
            };
            H(a, b) = H(b, a) = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
        }
    return H;
}

cplx AsymptoticL::evaluate(double t) const {
    if (!(t > 0)) throw std::invalid_argument("AsymptoticL::evaluate: t must be positive");
    cplx s = 0;
    for (const auto& e : per_component) s += e.evaluate(1 / t);
    return s;
}

AsymptoticL asymptotic_L(const SymplecticModel& m, const Amplitude& a, const VecD& Y, int N) {
    check_Y(m, Y);
    if (N < 0) throw std::invalid_argument("asymptotic_L: N must be non-negative");
    AsymptoticL out;
    double t = norm(Y);
    if (t == 0) throw std::domain_error("asymptotic_L: Y = 0 is not regular");
    out.direction = Y;
    for (double& y : out.direction) y /= t;
    auto comps = m.fixed_components();
    if (comps.empty()) {
        out.applicable = false;
        out.note = "no fixed points: L decays faster than any power (see decay_check)";
        return out;
    }
    if (!m.compact() && a.gauss <= 0 && !a.eta_bump)
        throw std::domain_error("asymptotic_L: amplitude support leaks outside the fixed-point neighbourhoods");
    for (const auto& F : comps) euler_inverse(F, Y);
    VecD dir = out.direction;
    for (const auto& F : comps) {
        FixedChart c = fixed_point_chart(m, F);
        CleanPhase ph;
        ph.l = c.dim;
        ph.scale = c.scale;
        ph.psi0 = F.Jvalue.eval(dir);
        // Amplitude X-dependence is frozen at the given Y.
        ph.psi = [&m, c, dir](const VecD&, const VecD& s) { return m.momentum(c.to_phase(s), dir); };
        ph.amp = [&m, c, a, Y](const VecD&, const VecD& s) { return a(c.to_phase(s), Y) * c.liouville(s); };
        if (a.eta_bump) ph.amp_smoothness = a.eta_bump->order;
        SPExpansion e = sp_coefficients(ph, N + 1, SPMethod::FiniteDifference);
        out.per_component.push_back(e);
    }
    return out;
}

}  // namespace eqloc
