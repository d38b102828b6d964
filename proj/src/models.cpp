#include "eqloc/models.hpp"

#include "json.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <sstream>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace eqloc {

using json = nlohmann::json;
namespace {
constexpr double kPi = std::numbers::pi;

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

Eigen::VectorXd to_eigen(const VecD& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size())); }
VecD from_eigen(const Eigen::VectorXd& v) { return VecD(v.data(), v.data() + v.size()); }

mpz_class bareiss_det(std::vector<std::vector<mpz_class>> a) {
    int n = int(a.size());
    mpz_class prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return n == 0 ? mpz_class(1) : mpz_class(sign * a[n - 1][n - 1]);
}

// All k-subsets of {0..n-1}.
void subsets(int n, int k, std::vector<std::vector<int>>& out, std::vector<int>& cur, int start = 0) {
    if (int(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, out, cur, i + 1);
        cur.pop_back();
    }
}

Rat json_rat(const json& j) {
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long>());
    if (j.is_number()) return Rat::approximate(j.get<double>());
    throw std::invalid_argument("expected a number or \"p/q\" string");
}

std::vector<std::vector<long>> weight_matrix(const std::vector<WeightBlock>& blocks, const std::vector<int>& which) {
    std::vector<std::vector<long>> W;
    for (int b : which) {
        std::vector<long> row;
        for (const auto& c : blocks[b].lambda.coeffs) row.push_back(c.num().get_si());
        W.push_back(row);
    }
    return W;
}

std::vector<WeightBlock> compute_blocks(int n, const std::vector<Eigen::MatrixXd>& G, std::vector<std::string>& problems) {
    std::vector<WeightBlock> blocks;
    if (G.empty()) return blocks;
    Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < G.size(); ++j) A0 += G[j] / (std::sqrt(2.0) + std::sqrt(3.0) * double(j) + 0.1 * double(j * j));
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A0.cast<std::complex<double>>());
    std::vector<std::pair<double, Eigen::VectorXcd>> pos;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()[i].imag() > 1e-9) pos.push_back({es.eigenvalues()[i].imag(), es.eigenvectors().col(i)});
    std::sort(pos.begin(), pos.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t i = 0;
    while (i < pos.size()) {
        std::size_t j = i;
        while (j < pos.size() && std::abs(pos[j].first - pos[i].first) < 1e-7 * std::max(1.0, pos[i].first)) ++j;
        int m = int(j - i);
        Eigen::MatrixXcd V(n, m);
        for (int k = 0; k < m; ++k) V.col(k) = pos[i + k].second;
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(V);
        Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, m);
        WeightBlock b;
        b.multiplicity = m;
        b.basis = Q;
        std::vector<Rat> lam;
        for (std::size_t g = 0; g < G.size(); ++g) {
            std::complex<double> c = (Q.col(0).adjoint() * G[g].cast<std::complex<double>>() * Q.col(0))(0, 0);
            double cj = c.imag();
            double rj = std::round(cj);
            if (std::abs(cj - rj) > 1e-8 || std::abs(c.real()) > 1e-8)
                problems.push_back("generator " + std::to_string(g) + " has a non-integral weight " + std::to_string(cj) +
                                   " (exp(2πX) must be the identity)");
            lam.emplace_back(long(rj));
        }
        b.lambda = LinForm(lam);
        blocks.push_back(b);
        i = j;
    }
    return blocks;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> p) : std::runtime_error("invalid config: " + join(p)), problems(std::move(p)) {}

void GroupData::validate() const {
    std::vector<std::string> p;
    if (d < 1) p.push_back("group.d must be >= 1");
    if (dT < 1 || dT > d) p.push_back("group.dT must satisfy 1 <= dT <= d");
    if (d - dT != 2 * int(roots.size()))
        p.push_back("group: d - dT = " + std::to_string(d - dT) + " but 2|roots| = " + std::to_string(2 * roots.size()));
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (roots[i].dim() != dT) p.push_back("root " + std::to_string(i) + " has length != dT");
    if (kappa > d || kappa < 0) p.push_back("group.kappa must satisfy 0 <= kappa <= d");
    if (!(volG > 0)) p.push_back("group.volG must be positive");
    if (!(volT > 0)) p.push_back("group.volT must be positive");
    if (weylOrder < 1) p.push_back("group.weylOrder must be >= 1");
    if (principalIsotropyOrder < 1) p.push_back("group.principalIsotropyOrder must be >= 1");
    if (!p.empty()) throw ConfigError(p);
}

long minors_gcd(const std::vector<std::vector<long>>& W, int k) {
    int rows = int(W.size());
    int cols = rows ? int(W[0].size()) : 0;
    if (k == 0) return 1;
    if (k > rows || k > cols) return 0;
    std::vector<std::vector<int>> rs, cs;
    std::vector<int> cur;
    subsets(rows, k, rs, cur);
    subsets(cols, k, cs, cur);
    mpz_class g = 0;
    for (const auto& r : rs)
        for (const auto& c : cs) {
            std::vector<std::vector<mpz_class>> a(k, std::vector<mpz_class>(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) a[i][j] = W[r[i]][c[j]];
            mpz_class det = bareiss_det(a);
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), det.get_mpz_t());
        }
    return g.get_si();
}

int integer_rank(const std::vector<std::vector<long>>& W) {
    int cols = W.empty() ? 0 : int(W[0].size());
    for (int k = std::min(int(W.size()), cols); k > 0; --k)
        if (minors_gcd(W, k) != 0) return k;
    return 0;
}

double Bump::operator()(double s) const {
    double x = s / R;
    if (std::abs(x) >= 1) return 0.0;
    return std::pow(1 - x * x, order + 1);
}

QPoly Bump::poly(const Rat& Rx) const {
    QPoly base = QPoly::constant(1, Rat(1)) - QPoly::var(1, 0).pow(2).scaled(Rat(1) / (Rx * Rx));
    return base.pow(order + 1);
}

Amplitude Amplitude::constant(int nvars, double c) {
    Amplitude a;
    a.poly = DPoly::constant(nvars, c);
    return a;
}

double Amplitude::operator()(const VecD& eta, const VecD& X) const {
    if (poly.is_zero()) return 0.0;
    double v = 1;
    for (int k : cos2_coords) {
        double c = std::cos(eta.at(k));
        v *= c * c;
    }
    if (gauss != 0) {
        double r2 = 0;
        for (double e : eta) r2 += e * e;
        v *= std::exp(-gauss * r2);
    }
    if (eta_bump) {
        double r2 = 0;
        if (eta_bump_coords.empty())
            for (double e : eta) r2 += e * e;
        else
            for (std::size_t i = 0; i < eta_bump_coords.size(); ++i) {
                double c = i < eta_bump_center.size() ? eta_bump_center[i] : 0.0;
                double e = eta.at(eta_bump_coords[i]) - c;
                r2 += e * e;
            }
        v *= (*eta_bump)(std::sqrt(r2));
    }
    if (x_bump) {
        double r2 = 0;
        for (double x : X) r2 += x * x;
        v *= (*x_bump)(std::sqrt(r2));
    }
    if (v == 0) return 0.0;
    if (poly.size() == 1) {
        const auto& [e, c] = *poly.terms().begin();
        if (std::all_of(e.begin(), e.end(), [](int k) { return k == 0; })) return v * c;
    }
    VecD all(eta);
    all.insert(all.end(), X.begin(), X.end());
    if (int(all.size()) != poly.dim()) throw std::invalid_argument("Amplitude: polynomial arity mismatch");
    return v * poly.eval(all);
}

SymplecticModel SymplecticModel::sphere(double R) {
    if (!(R > 0)) throw ConfigError({"sphere radius must be positive"});
    SymplecticModel m;
    m.kind_ = ModelKind::Sphere;
    m.radius_ = R;
    m.n_ = 1;
    m.group_.d = m.group_.dT = 1;
    m.group_.volG = m.group_.volT = 2 * kPi;
    m.group_.kappa = 1;
    return m;
}

SymplecticModel SymplecticModel::cotangent_circle() {
    SymplecticModel m = sphere(1.0);
    m.kind_ = ModelKind::CotangentCircle;
    return m;
}

SymplecticModel SymplecticModel::linear_cotangent(int n, const std::vector<RatMat>& gens) {
    std::vector<std::string> p;
    if (n < 1) p.push_back("n must be >= 1");
    if (gens.empty()) p.push_back("at least one generator required");
    for (std::size_t g = 0; g < gens.size(); ++g) {
        if (int(gens[g].size()) != n) {
            p.push_back("generator " + std::to_string(g) + " is not " + std::to_string(n) + "x" + std::to_string(n));
            continue;
        }
        bool shape = true, anti = true;
        for (int i = 0; i < n; ++i) {
            if (int(gens[g][i].size()) != n) { shape = false; break; }
        }
        if (!shape) {
            p.push_back("generator " + std::to_string(g) + " is not " + std::to_string(n) + "x" + std::to_string(n));
            continue;
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!(gens[g][i][j] == -gens[g][j][i])) anti = false;
        if (!anti) p.push_back("generator " + std::to_string(g) + " is not antisymmetric");
    }
    if (!p.empty()) throw ConfigError(p);
    for (std::size_t a = 0; a < gens.size(); ++a)
        for (std::size_t b = a + 1; b < gens.size(); ++b) {
            bool comm = true;
            for (int i = 0; i < n && comm; ++i)
                for (int j = 0; j < n; ++j) {
                    Rat s(0);
                    for (int k = 0; k < n; ++k) s += gens[a][i][k] * gens[b][k][j] - gens[b][i][k] * gens[a][k][j];
                    if (!s.is_zero()) { comm = false; break; }
                }
            if (!comm) p.push_back("generators " + std::to_string(a) + " and " + std::to_string(b) + " do not commute");
        }
    if (!p.empty()) throw ConfigError(p);

    SymplecticModel m;
    m.kind_ = ModelKind::LinearCotangent;
    m.n_ = n;
    m.gens_ = gens;
    for (const auto& G : gens) {
        Eigen::MatrixXd D(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D(i, j) = G[i][j].to_double();
        m.gensd_.push_back(D);
    }
    m.blocks_ = compute_blocks(n, m.gensd_, p);
    if (!p.empty()) throw ConfigError(p);
    int d = int(gens.size());
    m.group_.d = m.group_.dT = d;
    m.group_.volG = m.group_.volT = std::pow(2 * kPi, d);
    std::vector<int> all(m.blocks_.size());
    std::iota(all.begin(), all.end(), 0);
    auto W = weight_matrix(m.blocks_, all);
    m.group_.kappa = integer_rank(W);
    long h = minors_gcd(W, m.group_.kappa);
    m.group_.principalIsotropyOrder = h > 0 ? h : 1;
    m.group_.validate();
    return m;
}

SymplecticModel SymplecticModel::preset(const std::string& name) {
    auto J = [](int n, int a, int b) {
        RatMat M(n, std::vector<Rat>(n, Rat(0)));
        M[a][b] = Rat(-1);
        M[b][a] = Rat(1);
        return M;
    };
    if (name == "sphere") return sphere(1.0);
    if (name == "circle" || name == "cotangent_circle") return cotangent_circle();
    if (name == "linrot2") return linear_cotangent(2, {J(2, 0, 1)});
    if (name == "linrot4") return linear_cotangent(4, {J(4, 0, 1), J(4, 2, 3)});
    throw ConfigError({"unknown model preset '" + name + "'"});
}

std::string SymplecticModel::name() const {
    switch (kind_) {
        case ModelKind::Sphere: return "sphere";
        case ModelKind::CotangentCircle: return "cotangent_circle";
        default: return "linear_cotangent";
    }
}

void SymplecticModel::check_point(const VecD& eta) const {
    if (int(eta.size()) != phase_dim()) throw std::invalid_argument("phase point has wrong dimension");
    if (kind_ == ModelKind::Sphere && std::abs(eta[1]) > radius_ * (1 + 1e-14))
        throw std::domain_error("point outside the sphere chart (|z| > R)");
}

VecD SymplecticModel::momentum_components(const VecD& eta) const {
    check_point(eta);
    if (kind_ != ModelKind::LinearCotangent) return {eta[1]};
    VecD J;
    auto q = to_eigen(VecD(eta.begin(), eta.begin() + n_));
    auto p = to_eigen(VecD(eta.begin() + n_, eta.end()));
    for (const auto& G : gensd_) J.push_back((G * q).dot(p));
    return J;
}

double SymplecticModel::momentum(const VecD& eta, const VecD& X) const {
    VecD J = momentum_components(eta);
    if (X.size() != J.size()) throw std::invalid_argument("g-vector has wrong dimension");
    double s = 0;
    for (std::size_t j = 0; j < J.size(); ++j) s += J[j] * X[j];
    return s;
}

Rat SymplecticModel::momentum_exact(const std::vector<Rat>& eta, const std::vector<Rat>& X) const {
    if (kind_ != ModelKind::LinearCotangent) throw std::invalid_argument("momentum_exact: LinearCotangent only");
    if (int(eta.size()) != 2 * n_ || X.size() != gens_.size()) throw std::invalid_argument("momentum_exact: dimension");
    Rat s(0);
    for (std::size_t g = 0; g < gens_.size(); ++g)
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) s += X[g] * gens_[g][i][k] * eta[k] * eta[n_ + i];
    return s;
}

VecD SymplecticModel::fundamental_field(const VecD& eta, const VecD& X) const {
    check_point(eta);
    if (int(X.size()) != group_.d) throw std::invalid_argument("g-vector has wrong dimension");
    switch (kind_) {
        case ModelKind::Sphere: return {-X[0], 0.0};
        case ModelKind::CotangentCircle: return {X[0], 0.0};
        default: break;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t j = 0; j < gensd_.size(); ++j) A += X[j] * gensd_[j];
    auto q = to_eigen(VecD(eta.begin(), eta.begin() + n_));
    auto p = to_eigen(VecD(eta.begin() + n_, eta.end()));
    Eigen::VectorXd out(2 * n_);
    out << A * q, A * p;
    return from_eigen(out);
}

Eigen::MatrixXd SymplecticModel::omega_matrix(const VecD& eta) const {
    check_point(eta);
    int D = phase_dim();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(D, D);
    switch (kind_) {
        case ModelKind::Sphere: W(0, 1) = 1; W(1, 0) = -1; break;
        case ModelKind::CotangentCircle: W(0, 1) = -1; W(1, 0) = 1; break;
        default:
            for (int i = 0; i < n_; ++i) {
                W(i, n_ + i) = -1;
                W(n_ + i, i) = 1;
            }
    }
    return W;
}

Eigen::MatrixXd SymplecticModel::metric(const VecD& eta) const {
    check_point(eta);
    int D = phase_dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(D, D);
    if (kind_ == ModelKind::Sphere) {
        double r2 = radius_ * radius_ - eta[1] * eta[1];
        g(0, 0) = r2;
        g(1, 1) = radius_ * radius_ / r2;
    }
    return g;
}

double SymplecticModel::liouville_density(const VecD& eta) const {
    check_point(eta);
    return 1.0;
}

VecD SymplecticModel::act(const VecD& eta, const VecD& t) const {
    check_point(eta);
    switch (kind_) {
        case ModelKind::Sphere: return {eta[0] - t.at(0), eta[1]};
        case ModelKind::CotangentCircle: return {eta[0] + t.at(0), eta[1]};
        default: break;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_, n_);
    for (std::size_t j = 0; j < gensd_.size(); ++j) A += t.at(j) * gensd_[j];
    Eigen::MatrixXd E = A.exp();
    auto q = to_eigen(VecD(eta.begin(), eta.begin() + n_));
    auto p = to_eigen(VecD(eta.begin() + n_, eta.end()));
    Eigen::VectorXd out(2 * n_);
    out << E * q, E * p;
    return from_eigen(out);
}

bool SymplecticModel::is_fixed(const VecD& eta, const VecD& Y, double tol) const {
    if (kind_ == ModelKind::Sphere) return radius_ - std::abs(eta[1]) <= tol;
    VecD v = fundamental_field(eta, Y);
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s) <= tol;
}

std::vector<FixedComponent> SymplecticModel::fixed_components() const {
    std::vector<FixedComponent> out;
    if (kind_ == ModelKind::CotangentCircle) return out;
    if (kind_ == ModelKind::Sphere) {
        Rat R = Rat::approximate(radius_);
        FixedComponent N{{0.0, radius_}, 0, LinForm({R}), {{LinForm({Rat(-1)}), 1}}, 2};
        FixedComponent S{{0.0, -radius_}, 0, LinForm({-R}), {{LinForm({Rat(1)}), 1}}, 2};
        out.push_back(N);
        out.push_back(S);
        return out;
    }
    // Cotangent lift of a unitary character λ with multiplicity m on R^n contributes
    // m copies of +λ (from V) and m copies of −λ (from V*) to T*R^n.
    FixedComponent F;
    F.point = VecD(2 * n_, 0.0);
    int paired = 0;
    for (const auto& b : blocks_) {
        F.weights.push_back({b.lambda, b.multiplicity});
        F.weights.push_back({-b.lambda, b.multiplicity});
        paired += 2 * b.multiplicity;
    }
    F.dim = 2 * (n_ - paired);
    F.rankNF = 2 * paired;
    F.Jvalue = LinForm::zero(group_.d);
    out.push_back(F);
    return out;
}

std::vector<int> SymplecticModel::nonzero_blocks(const VecD& eta, double tol) const {
    std::vector<int> nz;
    Eigen::VectorXcd q = to_eigen(VecD(eta.begin(), eta.begin() + n_)).cast<std::complex<double>>();
    Eigen::VectorXcd p = to_eigen(VecD(eta.begin() + n_, eta.end())).cast<std::complex<double>>();
    double scale = std::max(1.0, to_eigen(eta).norm());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        double c = (blocks_[b].basis.adjoint() * q).norm() + (blocks_[b].basis.adjoint() * p).norm();
        if (c > tol * scale) nz.push_back(int(b));
    }
    return nz;
}

int SymplecticModel::isotropy_dim(const VecD& eta, double tol) const {
    check_point(eta);
    if (kind_ == ModelKind::Sphere) return radius_ - std::abs(eta[1]) <= tol ? 1 : 0;
    if (kind_ == ModelKind::CotangentCircle) return 0;
    return group_.d - integer_rank(weight_matrix(blocks_, nonzero_blocks(eta, tol)));
}

long SymplecticModel::isotropy_order(const VecD& eta, double tol) const {
    if (isotropy_dim(eta, tol) > 0) return 0;
    if (kind_ != ModelKind::LinearCotangent) return 1;
    return minors_gcd(weight_matrix(blocks_, nonzero_blocks(eta, tol)), group_.d);
}

double SymplecticModel::orbit_volume(const VecD& eta) const {
    check_point(eta);
    int r = group_.d - isotropy_dim(eta);
    if (r == 0) return 0.0;
    // Choose r generators acting with full rank at η; their coordinate subtorus covers the orbit.
    std::vector<int> cols;
    {
        auto W = kind_ == ModelKind::LinearCotangent ? weight_matrix(blocks_, nonzero_blocks(eta, 1e-12))
                                                     : std::vector<std::vector<long>>{{1}};
        for (int c = 0; c < group_.d && int(cols.size()) < r; ++c) {
            std::vector<std::vector<long>> sub;
            for (const auto& row : W) {
                std::vector<long> s;
                for (int cc : cols) s.push_back(row[cc]);
                s.push_back(row[c]);
                sub.push_back(s);
            }
            if (integer_rank(sub) == int(cols.size()) + 1) cols.push_back(c);
        }
    }
    auto point_at = [&](const VecD& t) {
        VecD full(group_.d, 0.0);
        for (int k = 0; k < r; ++k) full[cols[k]] = t[k];
        return act(eta, full);
    };
    // Surface measure of t ↦ g(t)·η over [0, 2π]^r from finite differences of the action map.
    auto gl = [](int n) {
        std::vector<double> x(n), w(n);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        for (int i = 0; i < n; ++i) {
            x[i] = es.eigenvalues()[i];
            w[i] = 2 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        }
        return std::make_pair(x, w);
    };
    const int cells = 8, npt = 6;
    auto [gx, gw] = gl(npt);
    int per = cells * npt;
    std::vector<double> ts(per), ws(per);
    for (int c = 0; c < cells; ++c)
        for (int k = 0; k < npt; ++k) {
            double h = 2 * kPi / cells;
            ts[c * npt + k] = h * (c + 0.5 + 0.5 * gx[k]);
            ws[c * npt + k] = 0.5 * h * gw[k];
        }
    double area = 0;
    std::vector<int> idx(r, 0);
    const double h = 1e-3;
    bool orthogonal = kind_ == ModelKind::LinearCotangent;
    for (const auto& G : gensd_) orthogonal = orthogonal && (G + G.transpose()).norm() == 0;
    if (orthogonal) {
        // orthogonal commuting action: the orbit metric is constant
        Eigen::MatrixXd D(phase_dim(), r);
        for (int k = 0; k < r; ++k) {
            VecD X(group_.d, 0.0);
            X[cols[k]] = 1;
            VecD v = fundamental_field(eta, X);
            for (int i = 0; i < phase_dim(); ++i) D(i, k) = v[i];
        }
        area = std::pow(2 * kPi, r) * std::sqrt(std::abs((D.transpose() * D).determinant()));
    }
    while (!orthogonal) {
        VecD t(r);
        double w = 1;
        for (int k = 0; k < r; ++k) {
            t[k] = ts[idx[k]];
            w *= ws[idx[k]];
        }
        VecD x0 = point_at(t);
        Eigen::MatrixXd g = metric(x0);
        Eigen::MatrixXd D(phase_dim(), r);
        for (int k = 0; k < r; ++k) {
            VecD t1 = t, t2 = t, t3 = t, t4 = t;
            t1[k] += h;
            t2[k] -= h;
            t3[k] += 2 * h;
            t4[k] -= 2 * h;
            VecD a = point_at(t1), b = point_at(t2), c = point_at(t3), e = point_at(t4);
            for (int i = 0; i < phase_dim(); ++i) D(i, k) = (8 * (a[i] - b[i]) - (c[i] - e[i])) / (12 * h);
        }
        area += w * std::sqrt(std::abs((D.transpose() * g * D).determinant()));
        int k = 0;
        while (k < r && ++idx[k] == per) idx[k++] = 0;
        if (k == r) break;
    }
    // Covering multiplicity: lattice points t ∈ 2π/M · Z^r in [0, 2π)^r fixing η.
    long M = 1;
    if (kind_ == ModelKind::LinearCotangent) {
        auto W = weight_matrix(blocks_, nonzero_blocks(eta, 1e-12));
        std::vector<std::vector<long>> sub;
        for (const auto& row : W) {
            std::vector<long> s;
            for (int c : cols) s.push_back(row[c]);
            sub.push_back(s);
        }
        // Denominators of the stabilizer divide any nonzero r x r minor; search with their product bound.
        M = 1;
        std::vector<std::vector<int>> rs;
        std::vector<int> cur;
        subsets(int(sub.size()), r, rs, cur);
        for (const auto& rr : rs) {
            std::vector<std::vector<mpz_class>> a(r, std::vector<mpz_class>(r));
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) a[i][j] = sub[rr[i]][j];
            long det = std::labs(bareiss_det(a).get_si());
            if (det > 0) { M = det; break; }
        }
    }
    long mult = 0;
    std::vector<long> li(r, 0);
    double scale = std::max(1.0, to_eigen(eta).norm());
    while (true) {
        VecD t(r);
        for (int k = 0; k < r; ++k) t[k] = 2 * kPi * double(li[k]) / double(M);
        VecD x = point_at(t);
        double dist = 0;
        for (int i = 0; i < phase_dim(); ++i) {
            double dd = x[i] - eta[i];
            if (kind_ != ModelKind::LinearCotangent && i == 0) dd = std::remainder(dd, 2 * kPi);
            dist += dd * dd;
        }
        if (std::sqrt(dist) < 1e-9 * scale) ++mult;
        int k = 0;
        while (k < r && ++li[k] == M) li[k++] = 0;
        if (k == r) break;
    }
    return area / double(std::max(1L, mult));
}

XiMap xi_map(const SymplecticModel& m, const VecD& eta) {
    int d = m.g_dim();
    std::vector<Eigen::VectorXd> A;
    for (int j = 0; j < d; ++j) {
        VecD e(d, 0.0);
        e[j] = 1;
        A.push_back(to_eigen(m.fundamental_field(eta, e)));
    }
    Eigen::MatrixXd g = m.metric(eta);
    XiMap out;
    out.gram.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.gram(i, j) = A[i].dot(g * A[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.gram);
    double top = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<double> ev;
    for (int i = 0; i < d; ++i)
        if (es.eigenvalues()[i] > 1e-12 * std::max(1.0, top)) ev.push_back(es.eigenvalues()[i]);
    if (ev.empty()) throw std::domain_error("xi_map: trivial orbit");
    out.ortho = Eigen::MatrixXd::Zero(long(ev.size()), long(ev.size()));
    for (std::size_t i = 0; i < ev.size(); ++i) out.ortho(long(i), long(i)) = ev[i];
    return out;
}

XiMap xi_map_exact(const SymplecticModel& m, const std::vector<Rat>& eta) {
    if (m.kind() != ModelKind::LinearCotangent) throw std::invalid_argument("xi_map_exact: LinearCotangent only");
    VecD ed;
    for (const auto& r : eta) ed.push_back(r.to_double());
    XiMap out = xi_map(m, ed);
    int n = m.n(), d = m.g_dim();
    std::vector<std::vector<Rat>> A(d, std::vector<Rat>(2 * n, Rat(0)));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                A[j][i] += m.generators()[j][i][k] * eta[k];
                A[j][n + i] += m.generators()[j][i][k] * eta[n + k];
            }
    SymMat G(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Rat s(0);
            for (int k = 0; k < 2 * n; ++k) s += A[i][k] * A[j][k];
            G.set(i, j, s);
        }
    out.gram_exact = G;
    return out;
}

Eigen::MatrixXd lie_derivative_map(const SymplecticModel& m, const VecD& eta, const VecD& X) {
    VecD Xt = m.fundamental_field(eta, X);
    double nx = to_eigen(Xt).norm();
    if (nx > 1e-9 * std::max(1.0, to_eigen(eta).norm())) throw std::domain_error("lie_derivative_map: X is not in the isotropy algebra g_η");
    int d = m.g_dim(), D = m.phase_dim();
    XiMap xi = xi_map(m, eta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi.gram);
    std::vector<Eigen::VectorXd> E;  // g-vectors whose fields are orthonormal at η
    for (int i = 0; i < d; ++i)
        if (es.eigenvalues()[i] > 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
            E.push_back(es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()[i]));
    auto field = [&](const Eigen::VectorXd& Z, const VecD& x) { return to_eigen(m.fundamental_field(x, from_eigen(Z))); };
    auto jac = [&](const Eigen::VectorXd& Z) {
        Eigen::MatrixXd J(D, D);
        const double h = 1e-5;
        for (int k = 0; k < D; ++k) {
            VecD a = eta, b = eta;
            a[k] += h;
            b[k] -= h;
            J.col(k) = (field(Z, a) - field(Z, b)) / (2 * h);
        }
        return J;
    };
    Eigen::VectorXd Xv = to_eigen(X);
    Eigen::MatrixXd JX = jac(Xv);
    Eigen::MatrixXd g = m.metric(eta);
    int k = int(E.size());
    Eigen::MatrixXd L(k, k);
    for (int c = 0; c < k; ++c) {
        // [X̃, Ẽ] = DẼ·X̃ − DX̃·Ẽ
        Eigen::VectorXd br = jac(E[c]) * to_eigen(Xt) - JX * field(E[c], eta);
        for (int r = 0; r < k; ++r) L(r, c) = field(E[r], eta).dot(g * br);
    }
    return L;
}

namespace {

struct GL {
    std::vector<double> x, w;
};
GL gauss_legendre(int n, double a, double b) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GL g;
    for (int i = 0; i < n; ++i) {
        g.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * es.eigenvalues()[i]);
        g.w.push_back(0.5 * (b - a) * 2 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
    }
    return g;
}

bool is_block_pair(const SymplecticModel& m) {
    if (m.n() != 4 || m.g_dim() != 2) return false;
    const auto& G = m.generators();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            bool in0 = i < 2 && j < 2, in1 = i >= 2 && j >= 2;
            if (!in0 && !G[0][i][j].is_zero()) return false;
            if (!in1 && !G[1][i][j].is_zero()) return false;
        }
    return !G[0][0][1].is_zero() && !G[1][2][3].is_zero();
}

// Zero level of ⟨Gq, p⟩ on T*R^2 (G a nonzero multiple of the rotation): q = r u, p = s u.
std::vector<std::pair<std::array<double, 4>, double>> linrot_zero_level(const SamplerOptions& opt, std::mt19937& rng) {
    GL rho = gauss_legendre(opt.n_radial, 0.0, opt.rmax);
    GL psi = gauss_legendre(opt.n_angle, -kPi / 2, kPi / 2);
    std::uniform_real_distribution<double> U(0, 1);
    double off = U(rng);
    std::vector<std::pair<std::array<double, 4>, double>> out;
    for (int a = 0; a < opt.n_radial; ++a)
        for (int b = 0; b < opt.n_angle; ++b)
            for (int c = 0; c < opt.n_angle; ++c) {
                double t = 2 * kPi * (c + off) / opt.n_angle;
                double r = rho.x[a] * std::cos(psi.x[b]), s = rho.x[a] * std::sin(psi.x[b]);
                double ux = std::cos(t), uy = std::sin(t);
                double w = rho.x[a] * rho.x[a] * rho.w[a] * psi.w[b] * (2 * kPi / opt.n_angle);
                out.push_back({{r * ux, r * uy, s * ux, s * uy}, w});
            }
    return out;
}

}  // namespace

std::vector<StratumSample> stratum_sampler(const SymplecticModel& m, const VecD& level, const SamplerOptions& opt) {
    if (int(level.size()) != m.g_dim()) throw std::invalid_argument("stratum_sampler: level has wrong dimension");
    std::mt19937 rng(opt.seed);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<StratumSample> out;
    switch (m.kind()) {
        case ModelKind::Sphere: {
            double R = m.radius(), z = level[0];
            if (std::abs(z) >= R) throw std::domain_error("stratum_sampler: empty stratum");
            double len = 2 * kPi * std::sqrt(R * R - z * z);
            double off = U(rng);
            for (int k = 0; k < opt.n_angle; ++k) out.push_back({{2 * kPi * (k + off) / opt.n_angle, z}, len / opt.n_angle});
            return out;
        }
        case ModelKind::CotangentCircle: {
            double off = U(rng);
            for (int k = 0; k < opt.n_angle; ++k) out.push_back({{2 * kPi * (k + off) / opt.n_angle, level[0]}, 2 * kPi / opt.n_angle});
            return out;
        }
        default: break;
    }
    for (double l : level)
        if (l != 0) throw std::domain_error("stratum_sampler: only the zero level is parametrized for linear models");
    if (m.n() == 2 && m.g_dim() == 1) {
        for (const auto& [q, w] : linrot_zero_level(opt, rng)) out.push_back({{q[0], q[1], q[2], q[3]}, w});
        return out;
    }
    if (is_block_pair(m)) {
        auto A = linrot_zero_level(opt, rng);
        auto B = linrot_zero_level(opt, rng);
        if (double(A.size()) * double(B.size()) > 5e7)
            throw std::length_error("stratum_sampler: product grid too large, lower n_radial or n_angle");
        out.reserve(A.size() * B.size());
        for (const auto& [a, wa] : A)
            for (const auto& [b, wb] : B) out.push_back({{a[0], a[1], b[0], b[1], a[2], a[3], b[2], b[3]}, wa * wb});
        return out;
    }
    throw std::domain_error("stratum_sampler: no parametrization for this linear model");
}

double stratum_region_measure(const SymplecticModel& m, const VecD& level, const SamplerOptions& opt) {
    switch (m.kind()) {
        case ModelKind::Sphere: return 2 * kPi * std::sqrt(m.radius() * m.radius() - level[0] * level[0]);
        case ModelKind::CotangentCircle: return 2 * kPi;
        default: break;
    }
    double one = 2 * kPi * kPi * std::pow(opt.rmax, 3) / 3;
    return m.g_dim() == 1 ? one : one * one;
}

SymplecticModel model_from_json_string(const std::string& s) {
    json j;
    try {
        j = json::parse(s);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("model: malformed JSON: ") + e.what()});
    }
    if (j.contains("model") && j["model"].is_object()) j = j["model"];
    std::vector<std::string> p;
    if (j.contains("preset")) return SymplecticModel::preset(j["preset"].get<std::string>());
    std::string kind = j.value("kind", "");
    if (j.contains("roots") && !j["roots"].empty())
        p.push_back("roots: torus catalog models require an empty root list (d - dT = 2|roots|)");
    if (j.contains("bump")) {
        const auto& b = j["bump"];
        if (b.value("R", 1.0) <= 0) p.push_back("bump.R must be positive");
        if (b.value("order", 4) < 0) p.push_back("bump.order must be >= 0");
    }
    if (kind == "sphere") {
        double R = j.value("radius", 1.0);
        if (!(R > 0)) p.push_back("radius must be positive");
        if (!p.empty()) throw ConfigError(p);
        return SymplecticModel::sphere(R);
    }
    if (kind == "cotangent_circle" || kind == "circle") {
        if (!p.empty()) throw ConfigError(p);
        return SymplecticModel::cotangent_circle();
    }
    if (kind == "linear_cotangent") {
        if (!j.contains("n") || !j["n"].is_number_integer()) p.push_back("n: missing or not an integer");
        if (!j.contains("generators") || !j["generators"].is_array()) p.push_back("generators: missing or not a list");
        if (!p.empty()) throw ConfigError(p);
        int n = j["n"].get<int>();
        std::vector<RatMat> gens;
        for (std::size_t g = 0; g < j["generators"].size(); ++g) {
            const auto& G = j["generators"][g];
            RatMat M;
            try {
                for (const auto& row : G) {
                    std::vector<Rat> r;
                    for (const auto& x : row) r.push_back(json_rat(x));
                    M.push_back(r);
                }
            } catch (const std::exception& e) {
                p.push_back("generator " + std::to_string(g) + ": " + e.what());
            }
            gens.push_back(M);
        }
        if (!p.empty()) throw ConfigError(p);
        return SymplecticModel::linear_cotangent(n, gens);
    }
    p.push_back("kind: expected sphere, cotangent_circle or linear_cotangent, got '" + kind + "'");
    throw ConfigError(p);
}

Amplitude amplitude_from_json_string(const std::string& s, int phase_dim, int g_dim) {
    json j = json::parse(s);
    std::vector<std::string> p;
    Amplitude a;
    int nv = phase_dim + g_dim;
    a.poly = DPoly::constant(nv, j.value("scale", 1.0));
    if (j.contains("poly")) {
        DPoly P(nv);
        for (const auto& [k, v] : j["poly"].items()) {
            Exponent e;
            std::stringstream ss(k);
            std::string tok;
            while (std::getline(ss, tok, ',')) e.push_back(std::stoi(tok));
            if (int(e.size()) != nv) {
                p.push_back("amplitude.poly: exponent '" + k + "' must have " + std::to_string(nv) + " entries");
                continue;
            }
            P.add_term(e, v.get<double>());
        }
        a.poly = a.poly * P;
    }
    if (j.contains("cos2"))
        for (const auto& k : j["cos2"]) {
            int c = k.get<int>();
            if (c < 0 || c >= phase_dim) p.push_back("amplitude.cos2: coordinate out of range");
            a.cos2_coords.push_back(c);
        }
    a.gauss = j.value("gauss", 0.0);
    if (j.contains("bump")) {
        Bump b{j["bump"].value("R", 1.0), j["bump"].value("order", 4)};
        if (!(b.R > 0)) p.push_back("amplitude.bump.R must be positive");
        if (b.order < 0) p.push_back("amplitude.bump.order must be >= 0");
        a.eta_bump = b;
        if (j["bump"].contains("coords"))
            for (const auto& k : j["bump"]["coords"]) a.eta_bump_coords.push_back(k.get<int>());
        if (j["bump"].contains("center"))
            for (const auto& k : j["bump"]["center"]) a.eta_bump_center.push_back(k.get<double>());
    }
    if (j.contains("xbump")) {
        Bump b{j["xbump"].value("R", 1.0), j["xbump"].value("order", 4)};
        if (!(b.R > 0)) p.push_back("amplitude.xbump.R must be positive");
        a.x_bump = b;
    }
    if (!p.empty()) throw ConfigError(p);
    return a;
}

}  // namespace eqloc
