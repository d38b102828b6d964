#pragma once

#include "eqloc/oscillatory.hpp"

#include <functional>
#include <string>
#include <vector>

namespace eqloc {

// Isotropy type of the linear torus action on M = R^n. A point q has support S (the weight blocks
// where q is nonzero); its stabilizer is H_S = {t : λ_b(t) ∈ 2πZ, b ∈ S}.
struct IsotropyType {
    std::vector<int> support;       // largest support realizing the type
    int stab_dim = 0;               // dim g_x
    long component_order = 1;       // |H_S / H_S⁰|
    Eigen::MatrixXd stab_basis;     // d × stab_dim, orthonormal basis of g_x
    std::string label;
};

struct ChainLevel {
    int type = 0;
    int c = 0;  // slice-sphere dimension + 1
    int d = 0;  // dim g_{x^{(j-1)}} − dim g_{x^{(j)}}
    int e = 0;  // dim g_{x^{(j)}}
    int exponent = 0;  // c + Σ_{r≤j} d − 1
    bool kappa_ok = true;
};

struct IsotropyChain {
    std::vector<ChainLevel> levels;  // most singular first
    int N() const { return int(levels.size()); }
};

struct Stratification {
    std::vector<IsotropyType> types;
    std::vector<std::vector<int>> below;  // below[i]: types strictly smaller than i (H_j ⊊ H_i)
    int principal = 0;
    int Lambda = 1;  // longest totally ordered set of types
    int kappa = 0;
    std::vector<IsotropyChain> chains;  // maximal chains of non-principal types
};
Stratification stratify(const SymplecticModel& m);

// Chart of the blown-up space. Coordinates are laid out as [base | ξ | p]: base collects the
// divisor coordinates τ, the positions x on the strata and the sphere coordinates θ; ξ are the
// components of X (the α of g_x^⊥ increments and the β of the last stabilizer); p the fibre.
struct BlowupChart {
    std::string name;
    int chain = 0;
    std::vector<int> rho;             // sphere-chart index per level
    bool non_stationary = false;      // α-chart: ψ^wk has no critical points
    int n_base = 0, n_xi = 0, n_p = 0;
    std::vector<std::string> coord_names;
    std::vector<int> tau_index;       // positions of τ_{i_j} in the coordinates
    std::vector<int> exponents;       // c + Σd − 1 per level
    std::vector<char> xi_kind;        // 'A' or 'B' per ξ component
    std::vector<int> xi_level;        // level of each ξ component
    double multiplicity = 1;          // generic number of preimages of a point of M
    bool integrable = true;           // base_from_u parametrizes the whole chart domain
    int kappa = 0;

    std::function<void(const VecD& coords, VecD& q, VecD& X)> to_original;
    std::function<double(const VecD& coords)> psi_wk;
    // θ-charts: ψ^wk = Σ_k ξ_k ⟨V_k(base), p⟩.
    std::function<std::vector<VecD>(const VecD& base)> vectors;
    // Smooth part Φ of the Jacobian (the |τ| powers are in `exponents`) in base coordinates.
    std::function<double(const VecD& base)> jacobian;
    std::function<double(const VecD& base)> partition;
    // Integration coordinates u ↦ base with du-Jacobian, over the box [lo, hi].
    std::function<VecD(const VecD& u, double& jac)> base_from_u;
    VecD u_lo, u_hi;
    // Interior points of [lo, hi] per u coordinate where the integrand is not smooth.
    std::vector<std::vector<double>> u_breaks;
    // Preimages in base coordinates of a point q of M (θ-charts).
    std::function<std::vector<VecD>(const VecD& q)> preimages;

    int dim() const { return n_base + n_xi + n_p; }
    double divisor(const VecD& coords) const;  // Π τ_{i_j}
    double psi_tot(const SymplecticModel& m, const VecD& coords) const;
    VecD grad_wk(const VecD& coords) const;
};

// Charts for every chain (the partition of unity couples chains that share a sphere).
std::vector<BlowupChart> build_charts(const SymplecticModel& m, const Stratification& s);
std::vector<BlowupChart> build_charts(const SymplecticModel& m, const Stratification& s, int chain);

struct CritWitness {
    VecD point;
    bool I = false, II = false, III = false;
    double grad_norm = 0;
    bool all() const { return I && II && III; }
};
CritWitness crit_conditions(const BlowupChart& c, const VecD& point, double tol = 1e-9);
// Critical point of a θ-chart over `base`: ξ = 0 and p the projection of `p` onto Ann{V_k}.
VecD critical_point(const BlowupChart& c, const VecD& base, const VecD& p);

struct TransversalHessian {
    double det = 0;
    int signature = 0;
    double min_abs_eig = 0;
    int rank = 0;       // numerical rank of the full Hessian
    int normal_dim = 0;
};
// Finite-difference Hessian of ψ^wk restricted to the orthonormalized normal frame spanned by
// the ξ directions and the gradients of ⟨V_k, p⟩.
TransversalHessian transversal_hessian(const BlowupChart& c, const VecD& point);
// Hessian of ψ(η, X) = J(η)(X) at a regular point (η, 0) of the critical set, on the normal
// frame {∇J_i} ∪ g.
TransversalHessian regular_transversal_hessian(const SymplecticModel& m, const VecD& eta);

struct FactorizationCheck {
    double max_rel_err = 0;
    int samples = 0;
};
// Max of |ψ^tot − Πτ·ψ^wk| relative to max(|ψ^tot|, |Xq||p|) over random chart points.
FactorizationCheck factorization_check(const SymplecticModel& m, const BlowupChart& c, int samples = 1000,
                                       unsigned seed = 1);

struct CritGridCheck {
    int points = 0;
    int critical = 0;
    int mismatches = 0;
    int rank_failures = 0;       // witnesses where the Hessian rank differs from 2κ
    double max_tot_grad = 0;     // |∇ψ^tot| at witnesses with τ ≠ 0
    double min_eig = 0;          // transversal min |eigenvalue| over the witnesses
};
// Grid of chart points, half of them on Crit(ψ^wk) by construction and half displaced off it;
// counts disagreements between "gradient vanishes" and "(I)–(III) hold".
CritGridCheck crit_grid_check(const SymplecticModel& m, const BlowupChart& c, int points = 10000, unsigned seed = 1,
                              double tol = 1e-9);

struct UniformityProbe {
    double min_eig = 0;
    double min_ratio = 0, max_ratio = 0;  // min|eig| at σ = 0.5 over σ = 0
};
UniformityProbe sigma_uniformity(const BlowupChart& c, const std::vector<double>& sigmas = {0, 0.25, 0.5, 0.75},
                                 int base_points = 16, unsigned seed = 1);

// Max over random q of |Σ_charts Σ_preimages χ / multiplicity − 1|.
double partition_defect(const SymplecticModel& m, const std::vector<BlowupChart>& charts, int samples = 200,
                        unsigned seed = 1);
// Min over a probe grid of |∂_p ψ^wk| (positive for α-charts).
double alpha_chart_probe(const BlowupChart& c, int points = 2000, unsigned seed = 1);

// The base integral uses tensor Gauss rules on the sub-boxes cut by u_breaks; unbounded τ
// ranges are cut at the amplitude radius and split into tau_pieces intervals. The node count
// grows from u_nodes until two consecutive rules agree to tol.
struct ResolvedOptions {
    int u_nodes = 6;      // initial Gauss nodes per sub-interval of each u coordinate
    long max_evals = 400000;  // base points per chart
    int tau_pieces = 4;   // intervals per half-line of each τ
    int p_nodes = 24;     // Gauss nodes per fibre direction of Ann{V_k}
    double tol = 1e-5;    // relative gap between consecutive rules counted as converged
    double tau_max = -1;  // restrict |τ_N| < tau_max (ε-splitting diagnostics)
    int threads = 1;
};
struct ResolvedLeading {
    double value = 0;
    std::vector<double> per_chart;
    std::vector<std::string> omitted;  // α-charts, O(μ^{κ+1})
    double partition_defect = 0;
    double error = 0;  // |Q_n − Q_{n−1}| summed over charts
    long evaluations = 0;
    bool converged = true;
};
// Σ over θ-charts of ∫ χ Φ Π|τ_j|^{exponent_j − κ} ∫_{Ann V} a(η, 0) dp / √det(V_k·V_l).
ResolvedLeading resolved_leading(const SymplecticModel& m, const std::vector<BlowupChart>& charts, const Amplitude& a,
                                 const ResolvedOptions& opt = {});

struct DirectLeading {
    double value = 0;
    long samples = 0;
};
// (vol G/|H|) ∫_{Reg Ω_ς} a(η, 0)/vol O_η dσ (κ = d).
DirectLeading direct_leading(const SymplecticModel& m, const Amplitude& a, const VecD& level = {},
                             const SamplerOptions& opt = {});

// I(μ) = ∫∫ e^{i(J(η) − ς)(X)/μ} a(η, X) dη dX.
struct OracleResult {
    QuadResult quad;
    std::string method;
};
OracleResult singular_oracle(const SymplecticModel& m, const Amplitude& a, double mu, const VecD& level = {},
                             const QuadOptions& opt = {1e-14, 1e-9});

struct SweepRow {
    double mu = 0;
    cplx I{};
    cplx ratio{};      // I/(2πμ)^κ
    double rel_err = 0;
    double remainder = 0;  // |I − (2πμ)^κ L₀|
    double eps = 0;        // μ^{1/N}
    double inner_share = 0;  // share of the resolved L from |τ_N| < ε (charts available)
    std::string method;
    bool converged = true;
};
struct SweepReport {
    std::vector<SweepRow> rows;
    double L0 = 0;
    int kappa = 0, Lambda = 1, N = 0;
    OrderFit fit;
    bool converged = true;
};
struct SweepOptions {
    VecD level;
    QuadOptions quad{1e-14, 1e-9};
    SamplerOptions sampler{};
    bool tau_split = true;
};
SweepReport singular_sweep(const SymplecticModel& m, const Amplitude& a, const std::vector<double>& mus,
                           const SweepOptions& opt = {});

}  // namespace eqloc
