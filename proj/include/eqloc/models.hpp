#pragma once

#include "eqloc/algebra.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqloc {

using VecD = std::vector<double>;
using RatMat = std::vector<std::vector<Rat>>;

// Collects every validation failure before throwing.
struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> p);
};

struct GroupData {
    int d = 1;
    int dT = 1;
    std::vector<LinForm> roots;
    double volG = 0, volT = 0;
    int weylOrder = 1;
    long principalIsotropyOrder = 1;
    int kappa = 1;

    bool kappa_equals_d() const { return kappa == d; }
    // Throws ConfigError listing violated invariants.
    void validate() const;
};

// Character of the torus on a complex line: Y -> λ(Y), with the real 2-plane it lives on.
struct WeightBlock {
    LinForm lambda;
    int multiplicity = 1;
    Eigen::MatrixXcd basis;  // n x multiplicity, orthonormal complex eigenvectors in R^n ⊗ C
};

struct FixedComponent {
    VecD point;
    int dim = 0;  // 0 for isolated points
    LinForm Jvalue;
    std::vector<std::pair<LinForm, int>> weights;
    int rankNF = 0;
};

// (1 - (s/R)^2)^(order+1) on |s| < R: C^order at the boundary, polynomial inside.
struct Bump {
    double R = 1;
    int order = 4;
    double operator()(double s) const;
    // Taylor polynomial in s (exact, the bump is polynomial on its support).
    QPoly poly(const Rat& R_exact) const;
};

// a(η, X) = P(η, X) · Π cos²(η_k) · e^{−g|η|²} · b_η(|η_I|) · b_X(|X|).
struct Amplitude {
    DPoly poly;                   // variables: phase coordinates followed by g coordinates
    std::vector<int> cos2_coords;
    double gauss = 0;
    std::optional<Bump> eta_bump;
    std::vector<int> eta_bump_coords;  // empty means all phase coordinates
    VecD eta_bump_center;              // same length as eta_bump_coords (default 0)
    std::optional<Bump> x_bump;

    double operator()(const VecD& eta, const VecD& X) const;
    bool zero() const { return poly.is_zero(); }
    static Amplitude constant(int nvars, double c);
};

enum class ModelKind { Sphere, CotangentCircle, LinearCotangent };

// Phase-space coordinates:
//   Sphere(R):        (φ, z), ω = dφ∧dz, J = z, X̃ = −∂_φ
//   CotangentCircle:  (θ, p), ω = dp∧dθ, J = p, X̃ = ∂_θ
//   LinearCotangent:  (q, p) ∈ R^{2n}, ω = Σ dp_i∧dq_i, J_X = ⟨Xq, p⟩, X̃ = (Xq, Xp)
class SymplecticModel {
public:
    static SymplecticModel sphere(double R = 1.0);
    static SymplecticModel cotangent_circle();
    static SymplecticModel linear_cotangent(int n, const std::vector<RatMat>& generators);
    // Preset names: sphere, circle, linrot2, linrot4.
    static SymplecticModel preset(const std::string& name);

    ModelKind kind() const { return kind_; }
    std::string name() const;
    double radius() const { return radius_; }
    int n() const { return n_; }
    int phase_dim() const { return kind_ == ModelKind::LinearCotangent ? 2 * n_ : 2; }
    int g_dim() const { return group_.d; }
    bool compact() const { return kind_ == ModelKind::Sphere; }
    const GroupData& group() const { return group_; }
    const std::vector<RatMat>& generators() const { return gens_; }
    const std::vector<Eigen::MatrixXd>& generators_d() const { return gensd_; }
    const std::vector<WeightBlock>& weight_blocks() const { return blocks_; }

    void check_point(const VecD& eta) const;
    double momentum(const VecD& eta, const VecD& X) const;
    VecD momentum_components(const VecD& eta) const;
    Rat momentum_exact(const std::vector<Rat>& eta, const std::vector<Rat>& X) const;  // LinearCotangent only
    VecD fundamental_field(const VecD& eta, const VecD& X) const;
    Eigen::MatrixXd omega_matrix(const VecD& eta) const;   // ω(e_i, e_j)
    Eigen::MatrixXd metric(const VecD& eta) const;         // Riemannian metric in coordinates
    double liouville_density(const VecD& eta) const;       // Liouville measure / coordinate Lebesgue
    VecD act(const VecD& eta, const VecD& t) const;        // exp(Σ t_j A_j) · η
    bool is_fixed(const VecD& eta, const VecD& Y, double tol = 1e-12) const;

    std::vector<FixedComponent> fixed_components() const;
    int isotropy_dim(const VecD& eta, double tol = 1e-12) const;
    long isotropy_order(const VecD& eta, double tol = 1e-12) const;  // |G_η| when finite
    double orbit_volume(const VecD& eta) const;

private:
    ModelKind kind_ = ModelKind::Sphere;
    double radius_ = 1;
    int n_ = 1;
    std::vector<RatMat> gens_;
    std::vector<Eigen::MatrixXd> gensd_;
    std::vector<WeightBlock> blocks_;
    GroupData group_;
    std::vector<int> nonzero_blocks(const VecD& eta, double tol) const;
};

// Ξ on g·η: the exact Gram matrix g(Ã_i, Ã_j) (rational for LinearCotangent at rational
// points) and the matrix of Ξ in an orthonormal basis of g·η.
struct XiMap {
    std::optional<SymMat> gram_exact;
    Eigen::MatrixXd gram;
    Eigen::MatrixXd ortho;
    double det() const { return ortho.determinant(); }
};
XiMap xi_map(const SymplecticModel& m, const VecD& eta);
XiMap xi_map_exact(const SymplecticModel& m, const std::vector<Rat>& eta);

// L_X(𝔛) = [X̃, 𝔛̃]_η on g·η, from finite differences of the vector fields.
Eigen::MatrixXd lie_derivative_map(const SymplecticModel& m, const VecD& eta, const VecD& X);

struct StratumSample {
    VecD eta;
    double weight;
};
struct SamplerOptions {
    int n_radial = 24;
    int n_angle = 32;
    double rmax = 6.0;  // truncation radius for noncompact strata
    unsigned seed = 1;
};
// Samples of Reg Ω_ς with Riemannian surface-measure weights.
std::vector<StratumSample> stratum_sampler(const SymplecticModel& m, const VecD& level, const SamplerOptions& opt = {});
// Exact measure of the sampled region (for the weight-sum check).
double stratum_region_measure(const SymplecticModel& m, const VecD& level, const SamplerOptions& opt = {});

// JSON ingestion: {kind, n, generators, roots, radius, bump:{R, order}}.
SymplecticModel model_from_json_string(const std::string& s);
Amplitude amplitude_from_json_string(const std::string& s, int phase_dim, int g_dim);

// Exact gcd of the k x k minors of an integer matrix (rows = weights).
long minors_gcd(const std::vector<std::vector<long>>& W, int k);
int integer_rank(const std::vector<std::vector<long>>& W);

}  // namespace eqloc
