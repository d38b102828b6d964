#pragma once

#include "eqloc/models.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace eqloc {

using cplx = std::complex<double>;

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int order = 10;          // Gauss points per dimension in a cell
    int max_depth = 60;
    long max_cells = 4000000;
    int init_cells = 1;      // initial uniform split per dimension
    int threads = 1;         // top-level cells are distributed over worker threads
};

struct QuadResult {
    cplx value{};
    double error = 0;
    bool converged = true;
    long cells = 0;
    QuadResult& operator+=(const QuadResult& o) {
        value += o.value;
        error += o.error;
        converged = converged && o.converged;
        cells += o.cells;
        return *this;
    }
};

// Gauss-Legendre nodes and weights on [-1, 1] (cached, Newton on P_n).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);
// Deterministic pairwise summation.
cplx pairwise_sum(const std::vector<cplx>& v);
// Weights W_k with Σ W_k g(x_k) = ∫_{-1}^{1} e^{iωx} p(x) dx for p the interpolant of g at the n Gauss nodes.
std::vector<cplx> filon_weights(int n, double omega);

using Fn1 = std::function<cplx(double)>;
using RealFn1 = std::function<double(double)>;
using FnN = std::function<cplx(const VecD&)>;
using RealFnN = std::function<double(const VecD&)>;
using GradFn = std::function<VecD(const VecD&)>;

// Adaptive Gauss-Legendre on [a, b] with forced breakpoints.
QuadResult integrate_1d(const Fn1& f, double a, double b, const QuadOptions& opt = {}, const std::vector<double>& breaks = {});
// ∫_a^b e^{iψ(s)/μ} f(s) ds with Filon cells (phase linearized at the cell centre) whenever
// |ψ'|·h/μ > 2π, plain Gauss otherwise.
QuadResult oscillatory_1d(const RealFn1& psi, const Fn1& f, double a, double b, double mu, const QuadOptions& opt = {},
                          const std::vector<double>& breaks = {}, const RealFn1& dpsi = nullptr);
// ∫_box e^{iψ(x)/μ} a(x) dx with adaptive tensor cells and the same Filon switch.
QuadResult oscillatory_integral(const RealFnN& psi, const FnN& a, const VecD& lo, const VecD& hi, double mu,
                                const QuadOptions& opt = {}, const GradFn& grad = nullptr);

// Clean critical manifold in tubular coordinates (x on C, s transversal).
struct CleanPhase {
    int l = 1;                                          // transversal rank
    std::vector<std::pair<VecD, double>> base{{{}, 1.0}};  // quadrature nodes on C with measure weights
    std::function<double(const VecD& x, const VecD& s)> psi;
    std::function<double(const VecD& x, const VecD& s)> amp;
    double psi0 = 0;
    double scale = 1;  // transversal length scale for finite-difference steps
    int amp_smoothness = 1 << 20;  // differentiability order of the amplitude
    // Optional exact Taylor polynomials in s (the symbolic path).
    std::function<DPoly(const VecD& x)> psi_poly;
    std::function<DPoly(const VecD& x)> amp_poly;

    // Checks ψ'(x,0) = 0, ψ''(x,0) nonsingular and |H(x,s)| ≤ c|s|³ at every base node.
    void validate() const;

    // ψ = s²/2 on R with the polynomial bump (1 − s²/R²)^{order+1}.
    static CleanPhase quadratic_bump(double R, int order);
};

struct SPExpansion {
    double psi0 = 0;
    int sigma = 0;
    int l = 0;
    std::vector<cplx> Q;  // Q_0 .. Q_{N-1}
    int N = 0;
    // e^{iψ0/μ} (2πμ)^{l/2} e^{iπσ/4} Σ_j μ^j Q_j
    cplx evaluate(double mu) const;
    bool sigma_matches_eigen = true;
};

enum class SPMethod { Auto, Symbolic, FiniteDifference };
SPExpansion sp_coefficients(const CleanPhase& phase, int N, SPMethod method = SPMethod::Auto);

// ⟨A D, D⟩^r (H^k f)(0) with D = −i∂ (so each application is −Σ A_ab ∂_a ∂_b).
double hormander_operator(const DPoly& H, const DPoly& f, const Eigen::MatrixXd& A, int r, int k);
Rat hormander_operator_exact(const QPoly& H, const QPoly& f, const SymMat& A, int r, int k);
// Coefficient i^{−(r−k)} / (r! k! 2^r).
cplx hormander_coefficient(int r, int k);

// Taylor jet of g at 0 up to total degree m: exact coefficients from nested 4th-order
// central differences (weights from an exact Vandermonde solve) and one Richardson level.
DPoly fd_jet(const std::function<double(const VecD&)>& g, int dim, int m, double h);
std::vector<Rat> central_stencil(int deriv, int half_width);

struct DecayResult {
    bool zero_signal = false;
    double slope = 0;
    std::vector<std::pair<double, double>> samples;  // (t, |L(tY)|) envelope samples
};
struct DecayOptions {
    double t_min = 4, t_max = 64;
    int windows = 8;
    int per_window = 12;
    QuadOptions quad{1e-14, 1e-10};
};
// Decay of L_α(tY) = ∫ e^{itJ_Y} a dη for an amplitude supported off Crit J_Y.
DecayResult decay_check(const SymplecticModel& m, const Amplitude& a, const VecD& Y, const DecayOptions& opt = {});
// Bounding box of the amplitude support in phase coordinates.
std::pair<VecD, VecD> support_box(const SymplecticModel& m, const Amplitude& a);

struct OrderFit {
    double exponent = 0;
    double logPower = 0;
    double c = 0;
    bool exact = false;  // all errors zero
};
// Least squares of log err = c + e log μ + ℓ log(−log μ).
OrderFit order_fit(const std::vector<std::pair<double, double>>& samples);
// Same with ℓ fixed to 0.
OrderFit order_fit_pure(const std::vector<std::pair<double, double>>& samples);

}  // namespace eqloc
