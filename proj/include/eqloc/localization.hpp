#pragma once

#include "eqloc/oscillatory.hpp"

#include <string>
#include <vector>

namespace eqloc {

// 1/Π λ_q(Y)^{m_q} for an isolated fixed point; for positive-dimensional components the
// record keeps the weight values, and the nilpotent Chern-class corrections are not expanded.
struct EulerInverse {
    bool point = true;
    double value = 0;
    std::vector<std::pair<double, int>> weight_values;
};
EulerInverse euler_inverse(const FixedComponent& F, const VecD& Y);

// Equivariantly closed form ρ(Y) = Σ_k θ_k(Y) ω̄(Y)^k, ω̄ = ω − J_Y, normalized so that ρ = 1
// pairs to the Liouville measure: the integrals computed are i^n ∫ e^{i(J_Y − ω)} ρ(Y).
struct ClosedForm {
    std::vector<QPoly> theta;  // θ_0, θ_1, ... over g
    static ClosedForm one(int d) { return ClosedForm{{QPoly::constant(d, Rat(1))}}; }
    ClosedForm scaled(const Rat& c) const;
    // Density against the Liouville measure of the integrand at (η, Y).
    cplx density(const SymplecticModel& m, const VecD& eta, const VecD& Y) const;
    // Restriction of the degree-0 part to a fixed point, as a polynomial in Y.
    QPoly at_fixed(const FixedComponent& F) const;
};

cplx bv_term(const SymplecticModel& m, const FixedComponent& F, const ClosedForm& rho, const VecD& Y);
struct BVResult {
    cplx value{};
    std::vector<cplx> terms;
    bool applicable = true;
    std::string note;
};
BVResult bv_sum(const SymplecticModel& m, const ClosedForm& rho, const VecD& Y);
// Direct quadrature of the same integral over the phase space (compact models).
QuadResult bv_direct(const SymplecticModel& m, const ClosedForm& rho, const VecD& Y, const QuadOptions& opt = {1e-14, 1e-13});

RatExp u_F_symbolic(const SymplecticModel& m, const FixedComponent& F, const ClosedForm& rho);
RatExp u_symbolic(const SymplecticModel& m, const ClosedForm& rho);
// Generic proper cone avoiding every weight hyperplane (the chamber of a generic direction).
std::vector<LinForm> default_cone(const SymplecticModel& m);
PiecewisePoly dh_measure(const SymplecticModel& m, const ClosedForm& rho, const std::vector<LinForm>& cone = {});

struct WeylFactor {
    QPoly phi;
    QPoly phi2;
};
WeylFactor weyl_factor(const std::vector<LinForm>& positive_roots, int dim);

struct JKResult {
    ResidueResult raw;        // Σ_F Res(u_F Φ²) along the ray
    double paired = 0;        // (2π)^{d_T} vol G / (|W| vol T) · raw
    std::vector<ResidueResult> per_component;
    bool applicable = true;
    std::string note;
};
JKResult jk_residue(const SymplecticModel& m, const ClosedForm& rho, const std::vector<Rat>& direction,
                    const std::vector<LinForm>& cone = {});

// Radial C⁴ bump φ(ξ) = c_d (1 − |ξ|²)⁵ on g* with ∫φ = 1.
struct SmearingKernel {
    int d = 1;
    double c = 0;
    explicit SmearingKernel(int dim = 1);
    DPoly poly() const;                          // c_d (1 − |ξ|²)⁵
    double phi(const VecD& xi) const;
    double phi_eps(const VecD& xi, double eps) const;
    // ∂^α φ_ε(ξ)
    double dphi_eps(const Exponent& alpha, const VecD& xi, double eps) const;
    // φ̂(X) = ∫ e^{−i⟨ξ,X⟩} φ(ξ) dξ (real, radial)
    double phihat(const VecD& X) const;
};

// Form on M given by its density against Liouville, polynomial in X:
// α(η, X) = Σ_β X^β c_β(η).
struct EquivariantForm {
    int g_dim = 1;
    std::vector<std::pair<Exponent, std::function<cplx(const VecD&)>>> terms;
    std::string label;
    std::pair<VecD, VecD> support;  // coordinate box containing the support (empty: the compact chart)

    static EquivariantForm from_amplitude(const SymplecticModel& m, const Amplitude& a);
    // D(θ β₁) for a 1-form β₁ = Σ b_k dη_k on a 2-dimensional model, density against Liouville:
    // θ(X) [ (∂₀b₁ − ∂₁b₀)/ω₀₁ + i Σ_k X̃_k b_k ].
    static EquivariantForm exact(const SymplecticModel& m, std::function<VecD(const VecD&)> beta1, const QPoly& theta,
                                 std::pair<VecD, VecD> support = {});
    cplx density(const VecD& eta, const VecD& X) const;
    // Horizontality probe ι_{X̃}α = 0 is automatic for top-degree densities; invariance is checked
    // at samples: max |α(g·η) − α(η)|.
    double invariance_defect(const SymplecticModel& m, int samples = 64, unsigned seed = 1) const;
};

struct SmearOptions {
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    VecD level;                  // ς (default 0)
    QuadOptions quad{1e-14, 1e-12};
    double converge_tol = 1e-3;  // relative spread of the last two extrapolants
};
struct SmearResult {
    double limit = 0;            // real part of the extrapolated value
    cplx limit_c{};
    std::vector<cplx> values;    // I(ε) per ε
    std::vector<cplx> extrapolants;
    bool converged = true;
    double spread = 0;
};
// lim_{ε→0} ∫_g L_α(X) φ̂(εX) dX, evaluated for each ε by Fourier inversion in X:
// (2π)^d Σ_β ∫_M c_β(η) [(−i∂)^β φ_ε](J(η) − ς) dη, then Richardson in ε².
SmearResult smeared_limit(const SymplecticModel& m, const EquivariantForm& alpha, const SmearingKernel& k,
                          const SmearOptions& opt = {});
// The same quantity at one ε by the literal double quadrature ∫_{|εX|≤T} φ̂(εX) L_α(X) dX (d = 1).
QuadResult smeared_direct(const SymplecticModel& m, const EquivariantForm& alpha, const SmearingKernel& k, double eps,
                          double T = 40, const QuadOptions& opt = {1e-10, 1e-9});

struct KirwanResult {
    double value = 0;
    double stratum_integral = 0;  // ∫_{Reg Ω} r(α)/vol O
    double prefactor = 0;         // (2π)^d vol G / |H|
    long samples = 0;
};
// The restricted density r(α) is a·(L/√g)·√det Ξ / √det(g⁻¹(dJ_i, dJ_j)); the last two factors
// cancel for ω-compatible metrics.
KirwanResult kirwan_integral(const SymplecticModel& m, const EquivariantForm& alpha, const VecD& level = {},
                             const SamplerOptions& opt = {});

// Local chart s ↦ η around an isolated fixed point with the Liouville density in s.
struct FixedChart {
    std::function<VecD(const VecD&)> to_phase;
    std::function<double(const VecD&)> liouville;
    int dim = 0;
    double scale = 1;
};
FixedChart fixed_point_chart(const SymplecticModel& m, const FixedComponent& F);
// Full Hessian of J_Y in the chart at the fixed point (finite differences).
Eigen::MatrixXd fixed_point_hessian(const SymplecticModel& m, const FixedComponent& F, const VecD& Y);

struct AsymptoticL {
    std::vector<SPExpansion> per_component;
    VecD direction;  // Y/|Y|
    bool applicable = true;
    std::string note;
    // Σ_F expansions at |Y| = t along the direction.
    cplx evaluate(double t) const;
};
AsymptoticL asymptotic_L(const SymplecticModel& m, const Amplitude& a, const VecD& Y, int N);

}  // namespace eqloc
