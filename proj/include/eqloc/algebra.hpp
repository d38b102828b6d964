#pragma once

#include "eqloc/mpoly.hpp"

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eqloc {

// Linear functional on t with rational coefficients.
struct LinForm {
    std::vector<Rat> coeffs;

    LinForm() = default;
    explicit LinForm(std::vector<Rat> c) : coeffs(std::move(c)) {}
    static LinForm zero(int dim) { return LinForm(std::vector<Rat>(dim, Rat(0))); }
    static LinForm unit(int dim, int i, const Rat& c = Rat(1)) {
        LinForm l = zero(dim);
        l.coeffs.at(i) = c;
        return l;
    }

    int dim() const { return int(coeffs.size()); }
    bool is_zero() const {
        for (const auto& c : coeffs)
            if (!c.is_zero()) return false;
        return true;
    }
    Rat eval(const std::vector<Rat>& y) const;
    double eval(const std::vector<double>& y) const;
    QPoly to_poly() const;
    LinForm operator-() const;
    LinForm scaled(const Rat& s) const;
    friend LinForm operator+(const LinForm& a, const LinForm& b);
    friend LinForm operator-(const LinForm& a, const LinForm& b) { return a + (-b); }
    friend bool operator==(const LinForm& a, const LinForm& b) { return a.coeffs == b.coeffs; }
    friend bool operator<(const LinForm& a, const LinForm& b);
    std::string str() const;
};

// c * (2π)^twopi * e^{i a(Y)} P(Y) / Π l_j(Y)^{r_j}
struct RatExpTerm {
    CRat c{1};
    int twopi = 0;
    LinForm phase;
    QPoly P;
    std::vector<std::pair<LinForm, int>> denoms;
};

struct RatExp {
    int dim = 0;
    std::vector<RatExpTerm> terms;

    RatExp() = default;
    explicit RatExp(int d) : dim(d) {}

    void add(RatExpTerm t);
    void validate() const;
    std::complex<double> eval(const std::vector<double>& y) const;
    // Evaluation at the complex point y + i z.
    std::complex<double> eval_shifted(const std::vector<double>& y, const std::vector<double>& z) const;
    RatExp times_poly(const QPoly& p) const;
    RatExp scaled(const CRat& s) const;
    RatExp operator+(const RatExp& o) const;
};

// Dense symmetric matrix with rational entries.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(int n) : n_(n), a_(std::size_t(n) * n, Rat(0)) {}
    static SymMat identity(int n);
    static SymMat from_rows(const std::vector<std::vector<Rat>>& rows);

    int dim() const { return n_; }
    const Rat& operator()(int i, int j) const { return a_[std::size_t(i) * n_ + j]; }
    // Sets both (i,j) and (j,i).
    void set(int i, int j, const Rat& v) {
        a_[std::size_t(i) * n_ + j] = v;
        a_[std::size_t(j) * n_ + i] = v;
    }
    bool is_symmetric() const;
    SymMat congruence(const std::vector<std::vector<Rat>>& P) const;  // P^T M P
    friend bool operator==(const SymMat& a, const SymMat& b) { return a.n_ == b.n_ && a.a_ == b.a_; }
    std::vector<std::vector<double>> to_double() const;

private:
    int n_ = 0;
    std::vector<Rat> a_;
};

// Block LDL^T with symmetric pivoting. Blocks are 1x1 or 2x2.
struct LDLT {
    Rat det;
    int signature = 0;
    int rank = 0;
    bool singular = false;
    std::optional<SymMat> inverse;
    std::vector<int> perm;  // symmetric permutation applied before factoring
    // Unit lower triangular L (on the permuted matrix) and block-diagonal D.
    std::vector<std::vector<Rat>> L;
    std::vector<std::vector<Rat>> D;
    // Reconstructs P^T L D L^T P, which must equal the input.
    SymMat reconstruct() const;
};
LDLT ldlt(const SymMat& m);

// Polyhedral chamber: intersection of half-spaces <c, xi> >= offset.
struct Wall {
    std::vector<Rat> c;
    Rat offset;
};

struct Chamber {
    std::vector<Wall> walls;
    CQPoly density;
    // Interior witness point, used for membership tests and reporting.
    std::vector<Rat> witness;
    bool contains(const std::vector<Rat>& xi) const;         // closed
    bool contains_open(const std::vector<Rat>& xi) const;    // interior
    bool contains(const std::vector<double>& xi, double tol = 0.0) const;
};

// Atomic (delta-type) parts: c (2π)^twopi P(D) δ_{phase} with the residual
// denominators remaining. Kept explicit and never evaluated pointwise.
struct AtomicPart {
    RatExpTerm term;
    std::string note;
};

struct PiecewisePoly {
    int dim = 1;
    int twopi = 0;  // overall factor (2π)^twopi multiplying every density
    std::vector<Chamber> chambers;
    std::vector<AtomicPart> atoms;
    bool bounded = true;

    // Density at a point (absolutely continuous part), zero off all chambers.
    std::complex<double> density(const std::vector<double>& xi) const;
    double scale() const;  // (2π)^twopi
    // Exact integral of the density over all chambers for dim 1 (requires bounded support).
    std::complex<double> mass() const;
    bool has_atoms() const { return !atoms.empty(); }
    // Chamber-wise comparison after normalizing the chamber lists.
    bool same_densities(const PiecewisePoly& o) const;
};

std::string to_json_string(const PiecewisePoly& U);
PiecewisePoly piecewise_from_json_string(const std::string& s);
// CSV of (xi..., re, im) sampled on a regular grid.
std::string to_csv(const PiecewisePoly& U, const std::vector<double>& lo, const std::vector<double>& hi, int n);

// Fourier transform under the pushforward reading u(Y) = ∫ e^{i<xi,Y>} U(xi) dxi,
// with the contour shifted into t + iΛ. `cone` lists forms whose positivity defines Λ;
// a generic point of Λ is computed from them.
struct FTOptions {
    // Alternative reduction order for dim 2 (used for the two-flag consistency check).
    bool reverse_flag = false;
};
PiecewisePoly ft_shifted(const RatExp& u, const std::vector<LinForm>& cone, const FTOptions& opt = {});
// Interior point of the cone {l_j > 0}.
std::vector<Rat> cone_point(const std::vector<LinForm>& cone, int dim);

struct ResidueResult {
    CRat value;
    int twopi = 0;
    std::complex<double> numeric() const;
};
// Density of the chamber containing t*dir for small t > 0, evaluated at 0.
// Throws WallDirection if the ray runs along a wall through the origin.
struct WallDirection : std::runtime_error {
    Wall wall;
    explicit WallDirection(const Wall& w);
};
ResidueResult residue_ray(const PiecewisePoly& U, const std::vector<Rat>& dir);

}  // namespace eqloc
