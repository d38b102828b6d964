#include "eqloc/resolution.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace eqloc {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInf = std::numeric_limits<double>::infinity();

double sinc(double t) {
    if (std::abs(t) < 1e-4) return 1 - t * t / 6 + t * t * t * t / 120;
    return std::sin(t) / t;
}

// 1 on [0, 0.3], 0 on [0.7, 1], C⁴ in between.
double smooth_step(double x) {
    if (x <= 0.3) return 1;
    if (x >= 0.7) return 0;
    double s = (x - 0.3) / 0.4;
    return 1 - s * s * s * s * s * (126 - 420 * s + 540 * s * s - 315 * s * s * s + 70 * s * s * s * s);
}

Eigen::VectorXd ev(const VecD& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size())); }
VecD vd(const Eigen::VectorXd& v) { return VecD(v.data(), v.data() + v.size()); }

std::vector<std::vector<long>> weights_of(const SymplecticModel& m, const std::vector<int>& which) {
    std::vector<std::vector<long>> W;
    for (int b : which) {
        std::vector<long> row;
        for (const auto& c : m.weight_blocks()[b].lambda.coeffs) row.push_back(c.num().get_si());
        W.push_back(row);
    }
    return W;
}

struct LatticeInfo {
    int rank = 0;
    long gcd = 1;
};

LatticeInfo lattice(const SymplecticModel& m, const std::vector<int>& S) {
    if (S.empty()) return {};
    auto W = weights_of(m, S);
    LatticeInfo L;
    L.rank = integer_rank(W);
    L.gcd = L.rank > 0 ? minors_gcd(W, L.rank) : 1;
    return L;
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> s(a.begin(), a.end());
    s.insert(b.begin(), b.end());
    return {s.begin(), s.end()};
}

bool same_lattice(const LatticeInfo& a, const LatticeInfo& b) { return a.rank == b.rank && a.gcd == b.gcd; }

// Orthonormal basis of ∩_{b∈S} ker λ_b in g.
Eigen::MatrixXd stabilizer_basis(const SymplecticModel& m, const std::vector<int>& S) {
    int d = m.g_dim();
    if (S.empty()) return Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd W(long(S.size()), d);
    for (std::size_t i = 0; i < S.size(); ++i)
        for (int j = 0; j < d; ++j) W(long(i), j) = m.weight_blocks()[S[i]].lambda.coeffs[j].to_double();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeFullV);
    int r = 0;
    for (long i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10) ++r;
    return svd.matrixV().rightCols(d - r);
}

// Real orthonormal basis (n × 2m) of a weight block.
Eigen::MatrixXd real_basis(const WeightBlock& b) {
    long n = b.basis.rows();
    Eigen::MatrixXd R(n, 2 * b.multiplicity);
    for (int k = 0; k < b.multiplicity; ++k) {
        R.col(2 * k) = std::sqrt(2.0) * b.basis.col(k).real();
        R.col(2 * k + 1) = std::sqrt(2.0) * b.basis.col(k).imag();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, R.cols());
    // keep orientation of the original columns
    for (long k = 0; k < R.cols(); ++k)
        if (Q.col(k).dot(R.col(k)) < 0) Q.col(k) *= -1;
    return Q;
}

Eigen::MatrixXd gen_matrix(const SymplecticModel& m, const Eigen::VectorXd& Y) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m.n(), m.n());
    for (int j = 0; j < m.g_dim(); ++j) G += Y[j] * m.generators_d()[j];
    return G;
}

std::string type_label(int dim, long order) {
    std::string s = dim == 0 ? (order == 1 ? "trivial" : "") : (dim == 1 ? "S1" : "T" + std::to_string(dim));
    if (order > 1) s += (s.empty() ? "" : "x") + std::string("Z") + std::to_string(order);
    return s;
}

VecD split_p(const BlowupChart& c, const VecD& x) { return VecD(x.end() - c.n_p, x.end()); }

// 4th-order central derivative of a vector function of the base.
std::vector<Eigen::VectorXd> d_vectors(const BlowupChart& c, const VecD& base, int j, double h = 1e-3) {
    auto at = [&](double s) {
        VecD b = base;
        b[j] += s;
        return c.vectors(b);
    };
    auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    std::vector<Eigen::VectorXd> out;
    for (std::size_t k = 0; k < p1.size(); ++k)
        out.push_back((-ev(p2[k]) + 8 * ev(p1[k]) - 8 * ev(m1[k]) + ev(m2[k])) / (12 * h));
    return out;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const VecD&)>& f, const VecD& x, double h) {
    long n = long(x.size());
    Eigen::MatrixXd H(n, n);
    auto at = [&](long i, double si, long j, double sj) {
        VecD y = x;
        y[i] += si;
        y[j] += sj;
        return f(y);
    };
    for (long i = 0; i < n; ++i)
        for (long j = i; j < n; ++j) {
            double v = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4 * h * h);
            H(i, j) = H(j, i) = v;
        }
    return H;
}

TransversalHessian restrict_hessian(const Eigen::MatrixXd& H, const Eigen::MatrixXd& frame) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
    Eigen::MatrixXd N = qr.householderQ() * Eigen::MatrixXd::Identity(frame.rows(), frame.cols());
    Eigen::VectorXd rdiag = qr.matrixQR().diagonal();
    if (rdiag.cwiseAbs().minCoeff() < 1e-10 * std::max(1.0, rdiag.cwiseAbs().maxCoeff()))
        throw std::runtime_error("transversal_hessian: normal frame is degenerate");
    Eigen::MatrixXd Hn = N.transpose() * H * N;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hn + Hn.transpose()));
    TransversalHessian t;
    t.normal_dim = int(frame.cols());
    t.det = 1;
    t.min_abs_eig = kInf;
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        double e = es.eigenvalues()[i];
        t.det *= e;
        t.signature += e > 0 ? 1 : -1;
        t.min_abs_eig = std::min(t.min_abs_eig, std::abs(e));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(H);
    double top = full.eigenvalues().cwiseAbs().maxCoeff();
    for (long i = 0; i < full.eigenvalues().size(); ++i)
        if (std::abs(full.eigenvalues()[i]) > 1e-6 * std::max(top, 1e-300)) ++t.rank;
    return t;
}

VecD random_point(const BlowupChart& c, std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0, 1);
    VecD u(c.u_lo.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double lo = std::isfinite(c.u_lo[i]) ? c.u_lo[i] : -2.0, hi = std::isfinite(c.u_hi[i]) ? c.u_hi[i] : 2.0;
        // stay off the coordinate singularities of tan
        double shrink = 0.98;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * shrink;
        u[i] = mid + half * (2 * U(rng) - 1);
    }
    double jac;
    VecD x = c.base_from_u(u, jac);
    for (int k = 0; k < c.n_xi + c.n_p; ++k) x.push_back(4 * U(rng) - 2);
    return x;
}

// |η_k| bounds implied by the amplitude (Gaussian factor or bump); inf if unbounded.
double radius_bound(const Amplitude& a, int first, int count) {
    double r = kInf;
    if (a.gauss > 0) r = std::sqrt(30.0 / a.gauss);
    if (a.eta_bump) {
        if (a.eta_bump_coords.empty()) {
            r = std::min(r, a.eta_bump->R);
        } else {
            double s = 0;
            bool all = true;
            for (int k = first; k < first + count; ++k) {
                auto it = std::find(a.eta_bump_coords.begin(), a.eta_bump_coords.end(), k);
                if (it == a.eta_bump_coords.end()) {
                    all = false;
                    break;
                }
                std::size_t i = std::size_t(it - a.eta_bump_coords.begin());
                double cc = i < a.eta_bump_center.size() ? a.eta_bump_center[i] : 0.0;
                s += std::pow(std::abs(cc) + a.eta_bump->R, 2);
            }
            if (all) r = std::min(r, std::sqrt(s));
        }
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------- stratification

Stratification stratify(const SymplecticModel& m) {
    if (m.kind() != ModelKind::LinearCotangent) throw std::invalid_argument("stratify: requires a linear model");
    int B = int(m.weight_blocks().size());
    Stratification s;
    s.kappa = m.group().kappa;
    std::vector<std::vector<int>> supports;
    std::vector<LatticeInfo> infos;
    for (int mask = 0; mask < (1 << B); ++mask) {
        std::vector<int> S;
        for (int b = 0; b < B; ++b)
            if (mask & (1 << b)) S.push_back(b);
        LatticeInfo L = lattice(m, S);
        int found = -1;
        for (std::size_t t = 0; t < supports.size(); ++t)
            if (same_lattice(infos[t], L) && same_lattice(lattice(m, set_union(supports[t], S)), L)) {
                found = int(t);
                break;
            }
        if (found < 0) {
            supports.push_back(S);
            infos.push_back(L);
        } else {
            supports[found] = set_union(supports[found], S);
        }
    }
    int T = int(supports.size());
    for (int t = 0; t < T; ++t) {
        IsotropyType it;
        it.support = supports[t];
        it.stab_dim = m.g_dim() - infos[t].rank;
        it.component_order = infos[t].gcd;
        it.stab_basis = stabilizer_basis(m, supports[t]);
        it.label = type_label(it.stab_dim, it.component_order);
        s.types.push_back(it);
    }
    // H_j ⊆ H_i iff the character lattice of i is contained in that of j.
    auto contained = [&](int i, int j) {
        return same_lattice(lattice(m, set_union(supports[i], supports[j])), infos[j]);
    };
    s.below.assign(T, {});
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < T; ++j)
            if (i != j && contained(i, j)) s.below[i].push_back(j);
    std::vector<int> all(B);
    for (int b = 0; b < B; ++b) all[b] = b;
    for (int t = 0; t < T; ++t)
        if (supports[t] == all) s.principal = t;
    // longest chain: types sorted by stabilizer size
    std::vector<int> order(T);
    for (int t = 0; t < T; ++t) order[t] = t;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return s.types[a].stab_dim != s.types[b].stab_dim ? s.types[a].stab_dim < s.types[b].stab_dim
                                                          : s.types[a].component_order < s.types[b].component_order;
    });
    std::vector<int> longest(T, 1);
    for (int a : order)
        for (int b : s.below[a]) longest[a] = std::max(longest[a], longest[b] + 1);
    s.Lambda = *std::max_element(longest.begin(), longest.end());

    auto is_cover = [&](int i, int j) {
        for (int k : s.below[i])
            if (k != j && std::find(s.below[k].begin(), s.below[k].end(), j) != s.below[k].end()) return false;
        return true;
    };
    int top = -1;
    for (int t = 0; t < T; ++t)
        if (supports[t].empty()) top = t;
    const auto& blocks = m.weight_blocks();
    auto codim = [&](const std::vector<int>& S) {
        int c = 0;
        for (int b = 0; b < B; ++b)
            if (std::find(S.begin(), S.end(), b) == S.end()) c += 2 * blocks[b].multiplicity;
        return c;
    };
    std::function<void(std::vector<int>&)> extend = [&](std::vector<int>& path) {
        bool grown = false;
        for (int j : s.below[path.back()]) {
            if (j == s.principal || !is_cover(path.back(), j)) continue;
            grown = true;
            path.push_back(j);
            extend(path);
            path.pop_back();
        }
        if (grown) return;
        IsotropyChain ch;
        int prev_e = m.g_dim(), dsum = 0;
        for (int t : path) {
            ChainLevel L;
            L.type = t;
            L.c = codim(supports[t]);
            L.e = s.types[t].stab_dim;
            L.d = prev_e - L.e;
            dsum += L.d;
            L.exponent = L.c + dsum - 1;
            L.kappa_ok = L.exponent >= s.kappa;
            prev_e = L.e;
            ch.levels.push_back(L);
        }
        s.chains.push_back(ch);
    };
    if (top >= 0 && top != s.principal) {
        std::vector<int> path{top};
        extend(path);
    }
    return s;
}

// ---------------------------------------------------------------- charts

double BlowupChart::divisor(const VecD& x) const {
    double t = 1;
    for (int i : tau_index) t *= x[i];
    return t;
}

double BlowupChart::psi_tot(const SymplecticModel& m, const VecD& x) const {
    VecD q, X;
    to_original(x, q, X);
    VecD eta = q;
    VecD p = split_p(*this, x);
    eta.insert(eta.end(), p.begin(), p.end());
    return m.momentum(eta, X);
}

VecD BlowupChart::grad_wk(const VecD& x) const {
    int n = dim();
    VecD g(n, 0.0);
    if (!vectors) {
        double h = 1e-4;
        for (int i = 0; i < n; ++i) {
            auto at = [&](double s) {
                VecD y = x;
                y[i] += s;
                return psi_wk(y);
            };
            g[i] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        }
        return g;
    }
    VecD base(x.begin(), x.begin() + n_base);
    auto p = ev(split_p(*this, x));
    auto V = vectors(base);
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(n_p);
    for (int k = 0; k < n_xi; ++k) {
        g[n_base + k] = ev(V[k]).dot(p);
        dp += x[n_base + k] * ev(V[k]);
    }
    for (int i = 0; i < n_p; ++i) g[n_base + n_xi + i] = dp[i];
    bool xi_zero = true;
    for (int k = 0; k < n_xi; ++k) xi_zero = xi_zero && x[n_base + k] == 0;
    if (!xi_zero)
        for (int j = 0; j < n_base; ++j) {
            auto dV = d_vectors(*this, base, j);
            double s = 0;
            for (int k = 0; k < n_xi; ++k) s += x[n_base + k] * dV[k].dot(p);
            g[j] = s;
        }
    return g;
}

namespace {

// N = 1: q = τ ṽ with ṽ on the unit sphere of the normal space (gnomonic chart ρ), X = β.
BlowupChart level_one_chart(const SymplecticModel& m, const Stratification& s, int chain, int rho,
                            const Eigen::MatrixXd& R) {
    int n = m.n(), d = m.g_dim(), c = n;
    const ChainLevel& L = s.chains[chain].levels[0];
    BlowupChart ch;
    ch.name = "chain" + std::to_string(chain) + "/theta" + std::to_string(rho);
    ch.chain = chain;
    ch.rho = {rho};
    ch.kappa = s.kappa;
    ch.n_base = c;
    ch.n_xi = d;
    ch.n_p = n;
    ch.coord_names.push_back("tau1");
    for (int r = 0; r + 1 < c; ++r) ch.coord_names.push_back("theta" + std::to_string(r + 1));
    for (int k = 0; k < d; ++k) ch.coord_names.push_back("beta" + std::to_string(k + 1));
    for (int k = 0; k < n; ++k) ch.coord_names.push_back("p" + std::to_string(k + 1));
    ch.tau_index = {0};
    ch.exponents = {L.exponent};
    ch.xi_kind.assign(d, 'B');
    ch.xi_level.assign(d, 0);
    auto direction = [R, rho, c](const VecD& base) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(c);
        w[rho] = 1;
        int r = 1;
        for (int k = 0; k < c; ++k)
            if (k != rho) w[k] = base[r++];
        return Eigen::VectorXd(R * w.normalized());
    };
    ch.to_original = [direction, n, d](const VecD& x, VecD& q, VecD& X) {
        VecD base(x.begin(), x.begin() + n);
        q = vd(x[0] * direction(base));
        X.assign(x.begin() + n, x.begin() + n + d);
    };
    std::vector<Eigen::MatrixXd> G = m.generators_d();
    ch.vectors = [direction, G](const VecD& base) {
        Eigen::VectorXd v = direction(base);
        std::vector<VecD> out;
        for (const auto& g : G) out.push_back(vd(g * v));
        return out;
    };
    ch.psi_wk = [direction, G, n, d](const VecD& x) {
        VecD base(x.begin(), x.begin() + n);
        Eigen::VectorXd v = direction(base);
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(x.data() + n + d, n);
        double s = 0;
        for (int k = 0; k < d; ++k) s += x[n + k] * (G[k] * v).dot(p);
        return s;
    };
    ch.jacobian = [c](const VecD& base) {
        double t2 = 0;
        for (int r = 1; r < c; ++r) t2 += base[r] * base[r];
        return std::pow(1 + t2, -0.5 * c);
    };
    ch.partition = [c](const VecD& base) {
        double t2 = 0;
        for (int r = 1; r < c; ++r) t2 += base[r] * base[r];
        return 1 / (1 + t2);
    };
    if (c == 2) {
        ch.base_from_u = [](const VecD& u, double& jac) {
            double t = std::tan(u[1]);
            jac = 1 + t * t;
            return VecD{u[0], t};
        };
        ch.u_lo = {-kInf, -kPi / 2};
        ch.u_hi = {kInf, kPi / 2};
        ch.u_breaks = {{0.0}, {}};
    } else {
        ch.base_from_u = [](const VecD& u, double& jac) {
            jac = 1;
            return u;
        };
        ch.integrable = false;  // sampling box only
        ch.u_lo.assign(c, -3.0);
        ch.u_hi.assign(c, 3.0);
        ch.u_lo[0] = -kInf;
        ch.u_hi[0] = kInf;
    }
    ch.multiplicity = 1;
    ch.preimages = [R, rho, c](const VecD& q) {
        Eigen::VectorXd y = R.transpose() * ev(q);
        if (y[rho] == 0) return std::vector<VecD>{};
        double tau = (y[rho] > 0 ? 1 : -1) * y.norm();
        VecD b{tau};
        for (int k = 0; k < c; ++k)
            if (k != rho) b.push_back(y[k] / y[rho]);
        return std::vector<VecD>{b};
    };
    return ch;
}

struct PairGeometry {
    Eigen::MatrixXd U, W;  // real bases of the surviving block (u) and the collapsing block (w)
    Eigen::MatrixXd A, B;  // bases of g_{x2}^⊥ and g_{x2}
    bool w_is_first = true;
};

// N = 2 for a pair of weight blocks: q = τ₁ (cos τ₂ u + sin τ₂ w), X = τ₂ α A + β B.
BlowupChart pair_theta_chart(const SymplecticModel& m, const Stratification& s, int chain, int rho,
                             const PairGeometry& P) {
    int n = m.n(), d = m.g_dim();
    int dA = int(P.A.cols()), dB = int(P.B.cols());
    const auto& lv = s.chains[chain].levels;
    BlowupChart ch;
    ch.name = "chain" + std::to_string(chain) + "/theta" + std::to_string(rho);
    ch.chain = chain;
    ch.rho = {0, rho};
    ch.kappa = s.kappa;
    ch.n_base = 4;
    ch.n_xi = dA + dB;
    ch.n_p = n;
    ch.coord_names = {"tau1", "x2", "tau2", "theta2"};
    for (int k = 0; k < dA; ++k) ch.coord_names.push_back("alpha2_" + std::to_string(k + 1));
    for (int k = 0; k < dB; ++k) ch.coord_names.push_back("beta2_" + std::to_string(k + 1));
    for (int k = 0; k < n; ++k) ch.coord_names.push_back("p" + std::to_string(k + 1));
    ch.tau_index = {0, 2};
    ch.exponents = {lv[0].exponent, lv[1].exponent};
    for (int k = 0; k < dA; ++k) {
        ch.xi_kind.push_back('A');
        ch.xi_level.push_back(1);
    }
    for (int k = 0; k < dB; ++k) {
        ch.xi_kind.push_back('B');
        ch.xi_level.push_back(1);
    }
    auto frame = [P, rho](const VecD& b, Eigen::VectorXd& u, Eigen::VectorXd& w) {
        u = P.U * Eigen::Vector2d(std::cos(b[1]), std::sin(b[1]));
        Eigen::Vector2d wt;
        wt[rho] = 1;
        wt[1 - rho] = b[3];
        w = P.W * wt.normalized();
    };
    ch.to_original = [frame, P, dA, dB](const VecD& x, VecD& q, VecD& X) {
        Eigen::VectorXd u, w;
        frame(x, u, w);
        q = vd(x[0] * (std::cos(x[2]) * u + std::sin(x[2]) * w));
        Eigen::VectorXd Xv = Eigen::VectorXd::Zero(P.A.rows());
        for (int k = 0; k < dA; ++k) Xv += x[2] * x[4 + k] * P.A.col(k);
        for (int k = 0; k < dB; ++k) Xv += x[4 + dA + k] * P.B.col(k);
        X = vd(Xv);
    };
    std::vector<Eigen::MatrixXd> GA, GB;
    for (int k = 0; k < dA; ++k) GA.push_back(gen_matrix(m, P.A.col(k)));
    for (int k = 0; k < dB; ++k) GB.push_back(gen_matrix(m, P.B.col(k)));
    ch.vectors = [frame, GA, GB](const VecD& b) {
        Eigen::VectorXd u, w;
        frame(b, u, w);
        Eigen::VectorXd m2 = std::cos(b[2]) * u + std::sin(b[2]) * w;
        std::vector<VecD> out;
        for (const auto& g : GA) out.push_back(vd(g * m2));
        for (const auto& g : GB) out.push_back(vd(sinc(b[2]) * (g * w)));
        return out;
    };
    int nxi = dA + dB;
    ch.psi_wk = [frame, GA, GB, n, nxi, dA](const VecD& x) {
        Eigen::VectorXd u, w;
        frame(x, u, w);
        Eigen::VectorXd m2 = std::cos(x[2]) * u + std::sin(x[2]) * w;
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(x.data() + 4 + nxi, n);
        double s = 0;
        for (std::size_t k = 0; k < GA.size(); ++k) s += x[4 + k] * (GA[k] * m2).dot(p);
        for (std::size_t k = 0; k < GB.size(); ++k) s += x[4 + dA + k] * sinc(x[2]) * (GB[k] * w).dot(p);
        return s;
    };
    (void)d;
    ch.jacobian = [](const VecD& b) { return std::cos(b[2]) * sinc(b[2]) / (1 + b[3] * b[3]); };
    bool first = P.w_is_first;
    ch.partition = [first](const VecD& b) {
        double s2 = std::sin(b[2]), c2 = std::cos(b[2]);
        double tube = first ? smooth_step(s2 * s2) : 1 - smooth_step(c2 * c2);
        return tube / (1 + b[3] * b[3]);
    };
    ch.base_from_u = [](const VecD& u, double& jac) {
        double t = std::tan(u[3]);
        jac = 1 + t * t;
        return VecD{u[0], u[1], u[2], t};
    };
    ch.u_lo = {-kInf, 0, -1, -kPi / 2};
    ch.u_hi = {kInf, 2 * kPi, 1, kPi / 2};
    {
        // edges of the smooth step in sin²τ₂ and cos²τ₂
        double a = std::asin(std::sqrt(0.3)), b = std::asin(std::sqrt(0.7));
        ch.u_breaks = {{0.0}, {}, {-b, -a, 0.0, a, b}, {}};
    }
    ch.multiplicity = 2;  // τ₁ ∈ R covers the sphere twice
    ch.preimages = [P, rho](const VecD& q) {
        std::vector<VecD> out;
        Eigen::VectorXd qv = ev(q);
        double r = qv.norm();
        if (r == 0) return out;
        for (double sg : {1.0, -1.0}) {
            Eigen::VectorXd m2 = qv / (sg * r);
            Eigen::Vector2d mu = P.U.transpose() * m2, ms = P.W.transpose() * m2;
            double sn = ms.norm();
            if (sn >= std::sin(1.0) || ms[rho] == 0) continue;
            double tau2 = (ms[rho] > 0 ? 1 : -1) * std::asin(sn);
            Eigen::Vector2d wt = ms / std::sin(tau2);
            double phi = std::atan2(mu[1], mu[0]);
            if (phi < 0) phi += 2 * kPi;
            out.push_back({sg * r, phi, tau2, wt[1 - rho] / wt[rho]});
        }
        return out;
    };
    return ch;
}

// α-chart of the second blow-up: the X-component α is the divisor, q = τ₁ exp_u(α W v).
BlowupChart pair_alpha_chart(const SymplecticModel& m, const Stratification& s, int chain, const PairGeometry& P) {
    int n = m.n();
    int dB = int(P.B.cols());
    const auto& lv = s.chains[chain].levels;
    BlowupChart ch;
    ch.name = "chain" + std::to_string(chain) + "/alpha";
    ch.chain = chain;
    ch.rho = {0, -1};
    ch.non_stationary = true;
    ch.kappa = s.kappa;
    ch.n_base = 5;
    ch.n_xi = dB;
    ch.n_p = n;
    ch.coord_names = {"tau1", "x2", "alpha2", "v1", "v2"};
    for (int k = 0; k < dB; ++k) ch.coord_names.push_back("beta2_" + std::to_string(k + 1));
    for (int k = 0; k < n; ++k) ch.coord_names.push_back("p" + std::to_string(k + 1));
    ch.tau_index = {0, 2};
    ch.exponents = {lv[0].exponent, lv[1].exponent};
    ch.xi_kind.assign(dB, 'B');
    ch.xi_level.assign(dB, 1);
    auto geo = [P](const VecD& b, Eigen::VectorXd& m2, Eigen::VectorXd& wv, double& sc) {
        Eigen::VectorXd u = P.U * Eigen::Vector2d(std::cos(b[1]), std::sin(b[1]));
        wv = P.W * Eigen::Vector2d(b[3], b[4]);
        double sl = std::abs(b[2]) * std::hypot(b[3], b[4]);
        sc = sinc(sl);
        m2 = std::cos(sl) * u + b[2] * sc * wv;
    };
    ch.to_original = [geo, P, dB](const VecD& x, VecD& q, VecD& X) {
        Eigen::VectorXd m2, wv;
        double sc;
        geo(x, m2, wv, sc);
        q = vd(x[0] * m2);
        Eigen::VectorXd Xv = x[2] * P.A.col(0);
        for (int k = 0; k < dB; ++k) Xv += x[5 + k] * P.B.col(k);
        X = vd(Xv);
    };
    Eigen::MatrixXd GA = gen_matrix(m, P.A.col(0));
    std::vector<Eigen::MatrixXd> GB;
    for (int k = 0; k < dB; ++k) GB.push_back(gen_matrix(m, P.B.col(k)));
    ch.psi_wk = [geo, GA, GB, n, dB](const VecD& x) {
        Eigen::VectorXd m2, wv;
        double sc;
        geo(x, m2, wv, sc);
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(x.data() + 5 + dB, n);
        double s = (GA * m2).dot(p);
        for (int k = 0; k < dB; ++k) s += x[5 + k] * sc * (GB[k] * wv).dot(p);
        return s;
    };
    ch.base_from_u = [](const VecD& u, double& jac) {
        jac = u[3];
        return VecD{u[0], u[1], u[2], u[3] * std::cos(u[4]), u[3] * std::sin(u[4])};
    };
    ch.u_lo = {-kInf, 0, -1, 0, 0};
    ch.u_hi = {kInf, 2 * kPi, 1, 1, 2 * kPi};
    ch.multiplicity = 2;
    ch.integrable = false;
    return ch;
}

}  // namespace

std::vector<BlowupChart> build_charts(const SymplecticModel& m, const Stratification& s) {
    std::vector<BlowupChart> out;
    if (s.chains.empty()) return out;
    const auto& blocks = m.weight_blocks();
    int nontriv = 0;
    for (const auto& b : blocks) nontriv += 2 * b.multiplicity;
    if (nontriv != m.n()) throw std::domain_error("build_charts: the action has a fixed subspace");
    for (const auto& ch : s.chains)
        if (ch.N() > 2) throw std::domain_error("build_charts: unsupported depth N = " + std::to_string(ch.N()));
    if (s.chains.size() == 1 && s.chains[0].N() == 1) {
        Eigen::MatrixXd R(m.n(), 0);
        for (const auto& b : blocks) {
            Eigen::MatrixXd Rb = real_basis(b);
            Eigen::MatrixXd T(m.n(), R.cols() + Rb.cols());
            T << R, Rb;
            R = T;
        }
        for (int rho = 0; rho < m.n(); ++rho) out.push_back(level_one_chart(m, s, 0, rho, R));
        return out;
    }
    bool pair = blocks.size() == 2 && blocks[0].multiplicity == 1 && blocks[1].multiplicity == 1 &&
                s.chains.size() == 2;
    for (const auto& ch : s.chains)
        pair = pair && ch.N() == 2 && s.types[ch.levels[1].type].support.size() == 1;
    if (!pair) throw std::domain_error("build_charts: unsupported chain geometry");
    for (int c = 0; c < 2; ++c) {
        int bu = s.types[s.chains[c].levels[1].type].support[0], bs = 1 - bu;
        PairGeometry P;
        P.U = real_basis(blocks[bu]);
        P.W = real_basis(blocks[bs]);
        P.w_is_first = bs == 0;
        P.B = stabilizer_basis(m, {bu});
        Eigen::VectorXd l(m.g_dim());
        for (int j = 0; j < m.g_dim(); ++j) l[j] = blocks[bu].lambda.coeffs[j].to_double();
        P.A = l.normalized();
        for (int rho = 0; rho < 2; ++rho) out.push_back(pair_theta_chart(m, s, c, rho, P));
        out.push_back(pair_alpha_chart(m, s, c, P));
    }
    return out;
}

std::vector<BlowupChart> build_charts(const SymplecticModel& m, const Stratification& s, int chain) {
    auto all = build_charts(m, s);
    std::vector<BlowupChart> out;
    for (auto& c : all)
        if (c.chain == chain) out.push_back(std::move(c));
    return out;
}

// ---------------------------------------------------------------- critical set

CritWitness crit_conditions(const BlowupChart& c, const VecD& x, double tol) {
    CritWitness w;
    w.point = x;
    VecD g = c.grad_wk(x);
    double s = 0;
    for (double v : g) s += v * v;
    w.grad_norm = std::sqrt(s);
    if (!c.vectors) return w;
    VecD base(x.begin(), x.begin() + c.n_base);
    auto V = c.vectors(base);
    auto p = ev(split_p(c, x));
    bool I = true, II = true, III = true;
    Eigen::VectorXd lamB = Eigen::VectorXd::Zero(c.n_p);
    for (int k = 0; k < c.n_xi; ++k) {
        double xk = x[c.n_base + k];
        double pair = ev(V[k]).dot(p);
        if (c.xi_kind[k] == 'A') {
            I = I && std::abs(xk) <= tol;
            II = II && std::abs(pair) <= tol;
        } else {
            lamB += xk * ev(V[k]);
            III = III && std::abs(pair) <= tol;
        }
    }
    w.I = I && lamB.norm() <= tol;
    w.II = II;
    w.III = III;
    return w;
}

VecD critical_point(const BlowupChart& c, const VecD& base, const VecD& p) {
    if (!c.vectors) throw std::invalid_argument("critical_point: chart has no critical points");
    auto V = c.vectors(base);
    Eigen::MatrixXd M(c.n_p, c.n_xi);
    for (int k = 0; k < c.n_xi; ++k) M.col(k) = ev(V[k]);
    Eigen::VectorXd pv = ev(p);
    Eigen::VectorXd proj = pv - M * (M.transpose() * M).ldlt().solve(M.transpose() * pv);
    proj -= M * (M.transpose() * M).ldlt().solve(M.transpose() * proj);
    VecD x = base;
    for (int k = 0; k < c.n_xi; ++k) x.push_back(0.0);
    for (int i = 0; i < c.n_p; ++i) x.push_back(proj[i]);
    return x;
}

TransversalHessian transversal_hessian(const BlowupChart& c, const VecD& x) {
    if (!c.vectors) throw std::runtime_error("transversal_hessian: normal frame undefined on a chart without critical points");
    Eigen::MatrixXd H = fd_hessian(c.psi_wk, x, 1e-4);
    int n = c.dim();
    VecD base(x.begin(), x.begin() + c.n_base);
    auto V = c.vectors(base);
    auto p = ev(split_p(c, x));
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, 2 * c.n_xi);
    for (int k = 0; k < c.n_xi; ++k) F(c.n_base + k, k) = 1;
    for (int j = 0; j < c.n_base; ++j) {
        auto dV = d_vectors(c, base, j);
        for (int k = 0; k < c.n_xi; ++k) F(j, c.n_xi + k) = dV[k].dot(p);
    }
    for (int k = 0; k < c.n_xi; ++k)
        for (int i = 0; i < c.n_p; ++i) F(c.n_base + c.n_xi + i, c.n_xi + k) = V[k][i];
    return restrict_hessian(H, F);
}

TransversalHessian regular_transversal_hessian(const SymplecticModel& m, const VecD& eta) {
    int pd = m.phase_dim(), d = m.g_dim();
    auto psi = [&](const VecD& z) {
        VecD e(z.begin(), z.begin() + pd), X(z.begin() + pd, z.end());
        return m.momentum(e, X);
    };
    VecD z = eta;
    for (int j = 0; j < d; ++j) z.push_back(0.0);
    Eigen::MatrixXd H = fd_hessian(psi, z, 1e-3);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(pd + d, 2 * d);
    double h = 1e-3;
    for (int i = 0; i < pd; ++i) {
        VecD a = eta, b = eta;
        a[i] += h;
        b[i] -= h;
        VecD Ja = m.momentum_components(a), Jb = m.momentum_components(b);
        for (int j = 0; j < d; ++j) F(i, j) = (Ja[j] - Jb[j]) / (2 * h);
    }
    for (int j = 0; j < d; ++j) F(pd + j, d + j) = 1;
    return restrict_hessian(H, F);
}

FactorizationCheck factorization_check(const SymplecticModel& m, const BlowupChart& c, int samples, unsigned seed) {
    std::mt19937 rng(seed);
    FactorizationCheck out;
    for (int i = 0; i < samples; ++i) {
        VecD x = random_point(c, rng);
        double tot = c.psi_tot(m, x), fac = c.divisor(x) * c.psi_wk(x);
        // relative to the Cauchy–Schwarz size |Xq||p| of ⟨Xq, p⟩
        VecD q, X;
        c.to_original(x, q, X);
        double size = (gen_matrix(m, ev(X)) * ev(q)).norm() * ev(split_p(c, x)).norm();
        double den = std::max({std::abs(tot), std::abs(fac), size, 1e-300});
        out.max_rel_err = std::max(out.max_rel_err, std::abs(tot - fac) / den);
        ++out.samples;
    }
    return out;
}

CritGridCheck crit_grid_check(const SymplecticModel& m, const BlowupChart& c, int points, unsigned seed, double tol) {
    if (!c.vectors) throw std::invalid_argument("crit_grid_check: chart has no critical points");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0, 1);
    CritGridCheck out;
    out.min_eig = kInf;
    int witnesses = 0;
    for (int i = 0; i < points; ++i) {
        VecD x0 = random_point(c, rng);
        VecD base(x0.begin(), x0.begin() + c.n_base);
        VecD x = critical_point(c, base, split_p(c, x0));
        bool on = i % 2 == 0;
        if (!on) {
            double delta = std::pow(10.0, -6 * U(rng));
            int k = int(U(rng) * c.n_xi) % c.n_xi;
            if ((i / 2) % 2 == 0) {
                x[c.n_base + k] = delta;
            } else {
                auto V = c.vectors(base);
                Eigen::VectorXd v = ev(V[k]).normalized();
                for (int j = 0; j < c.n_p; ++j) x[c.n_base + c.n_xi + j] += delta * v[j];
            }
        }
        CritWitness w = crit_conditions(c, x, tol);
        bool zero = w.grad_norm <= tol;
        if (zero != w.all()) ++out.mismatches;
        ++out.points;
        if (!on) continue;
        ++out.critical;
        if (witnesses++ % 25 != 0) continue;
        TransversalHessian t = transversal_hessian(c, x);
        if (t.rank != 2 * c.kappa || t.normal_dim != 2 * c.kappa) ++out.rank_failures;
        out.min_eig = std::min(out.min_eig, t.min_abs_eig);
        if (c.divisor(x) != 0) {
            double h = 1e-5, s = 0;
            for (int j = 0; j < c.dim(); ++j) {
                VecD a = x, b = x;
                a[j] += h;
                b[j] -= h;
                double g = (c.psi_tot(m, a) - c.psi_tot(m, b)) / (2 * h);
                s += g * g;
            }
            out.max_tot_grad = std::max(out.max_tot_grad, std::sqrt(s));
        }
    }
    return out;
}

UniformityProbe sigma_uniformity(const BlowupChart& c, const std::vector<double>& sigmas, int base_points,
                                 unsigned seed) {
    std::mt19937 rng(seed);
    UniformityProbe out;
    out.min_eig = kInf;
    out.min_ratio = kInf;
    out.max_ratio = 0;
    auto idx0 = std::find(sigmas.begin(), sigmas.end(), 0.0);
    auto idx5 = std::find(sigmas.begin(), sigmas.end(), 0.5);
    for (int b = 0; b < base_points; ++b) {
        VecD x0 = random_point(c, rng);
        std::vector<double> eigs;
        for (double sg : sigmas) {
            VecD base(x0.begin(), x0.begin() + c.n_base);
            for (int t : c.tau_index) base[t] = sg;
            VecD x = critical_point(c, base, split_p(c, x0));
            double e = transversal_hessian(c, x).min_abs_eig;
            eigs.push_back(e);
            out.min_eig = std::min(out.min_eig, e);
        }
        if (idx0 != sigmas.end() && idx5 != sigmas.end()) {
            double r = eigs[std::size_t(idx5 - sigmas.begin())] / eigs[std::size_t(idx0 - sigmas.begin())];
            out.min_ratio = std::min(out.min_ratio, r);
            out.max_ratio = std::max(out.max_ratio, r);
        }
    }
    return out;
}

double partition_defect(const SymplecticModel& m, const std::vector<BlowupChart>& charts, int samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> N(0, 1);
    double worst = 0;
    for (int i = 0; i < samples; ++i) {
        VecD q(m.n());
        for (double& v : q) v = N(rng);
        double s = 0;
        for (const auto& c : charts) {
            if (c.non_stationary || !c.preimages) continue;
            for (const auto& b : c.preimages(q)) s += c.partition(b) / c.multiplicity;
        }
        worst = std::max(worst, std::abs(s - 1));
    }
    return worst;
}

double alpha_chart_probe(const BlowupChart& c, int points, unsigned seed) {
    std::mt19937 rng(seed);
    double worst = kInf;
    for (int i = 0; i < points; ++i) {
        VecD x = random_point(c, rng);
        VecD g = c.grad_wk(x);
        double s = 0;
        for (int j = 0; j < c.n_p; ++j) s += g[c.n_base + c.n_xi + j] * g[c.n_base + c.n_xi + j];
        worst = std::min(worst, std::sqrt(s));
    }
    return worst;
}

// ---------------------------------------------------------------- leading coefficients

ResolvedLeading resolved_leading(const SymplecticModel& m, const std::vector<BlowupChart>& charts, const Amplitude& a,
                                 const ResolvedOptions& opt) {
    ResolvedLeading out;
    out.partition_defect = partition_defect(m, charts);
    if (out.partition_defect > 1e-12)
        throw std::runtime_error("resolved_leading: chart overlap weights not a partition of unity (defect " +
                                 std::to_string(out.partition_defect) + ")");
    for (const auto& c : charts)
        if (c.non_stationary) out.omitted.push_back(c.name);
    if (a.zero()) {
        out.per_chart.assign(charts.size(), 0.0);
        return out;
    }
    int n = m.n(), d = m.g_dim();
    double rq = radius_bound(a, 0, n), rp = radius_bound(a, n, n);
    if (!std::isfinite(rq) || !std::isfinite(rp))
        throw std::domain_error("resolved_leading: amplitude support is unbounded in η");
    struct ChartSum {
        double value = 0, error = 0;
        long evals = 0;
    };
    auto work = [&](const BlowupChart& c) -> ChartSum {
        if (c.non_stationary) return {};
        if (!c.integrable || !c.base_from_u)
            throw std::domain_error("resolved_leading: no integration coordinates for chart " + c.name);
        VecD lo = c.u_lo, hi = c.u_hi;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!std::isfinite(lo[i])) lo[i] = -rq;
            if (!std::isfinite(hi[i])) hi[i] = rq;
        }
        if (opt.tau_max > 0) {
            int t = c.tau_index.back();
            lo[t] = std::max(lo[t], -opt.tau_max);
            hi[t] = std::min(hi[t], opt.tau_max);
        }
        int K = c.n_xi, f = n - K;
        const auto& gl = gauss_legendre(opt.p_nodes);
        auto f_u = [&, K, f](const VecD& u) -> cplx {
            double jac;
            VecD base = c.base_from_u(u, jac);
            double w = jac * c.jacobian(base) * c.partition(base) / c.multiplicity;
            if (w == 0) return 0.0;
            for (std::size_t j = 0; j < c.tau_index.size(); ++j)
                w *= std::pow(std::abs(base[c.tau_index[j]]), c.exponents[j] - c.kappa);
            auto V = c.vectors(base);
            Eigen::MatrixXd M(n, K);
            for (int k = 0; k < K; ++k) M.col(k) = ev(V[k]);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
            Eigen::MatrixXd Q = qr.householderQ();
            double gram = std::abs(qr.matrixQR().diagonal().prod());
            VecD x = base;
            x.resize(c.dim(), 0.0);
            VecD q, X;
            c.to_original(x, q, X);
            X.assign(d, 0.0);
            VecD eta(2 * n);
            for (int i = 0; i < n; ++i) eta[i] = q[i];
            // tensor Gauss rule over Ann{V} ≅ R^f, |s_i| ≤ rp
            long total = 1;
            for (int i = 0; i < f; ++i) total *= opt.p_nodes;
            std::vector<int> idx(f, 0);
            // partial sums of the frame combination, one per fibre direction
            std::vector<VecD> part(f + 1, VecD(n, 0.0));
            std::vector<double> wpart(f + 1, 1.0);
            double s = 0;
            int from = f - 1;
            for (long t = 0; t < total; ++t) {
                for (int i = from; i >= 0; --i) {
                    double x = rp * gl.first[idx[i]];
                    for (int r = 0; r < n; ++r) part[i][r] = part[i + 1][r] + x * Q(r, K + i);
                    wpart[i] = wpart[i + 1] * rp * gl.second[idx[i]];
                }
                for (int r = 0; r < n; ++r) eta[n + r] = part[0][r];
                s += wpart[0] * a(eta, X);
                from = 0;
                for (int i = 0; i < f; ++i) {
                    if (++idx[i] < opt.p_nodes) break;
                    idx[i] = 0;
                    from = i + 1;
                }
                if (from >= f) from = f - 1;
            }
            return w * s / gram;
        };
        // sub-intervals per coordinate
        int D = int(lo.size());
        std::vector<std::vector<double>> cuts(D);
        for (int i = 0; i < D; ++i) {
            auto& cu = cuts[i];
            cu.push_back(lo[i]);
            bool is_tau = std::find(c.tau_index.begin(), c.tau_index.end(), i) != c.tau_index.end();
            if (i < int(c.u_breaks.size()))
                for (double v : c.u_breaks[i])
                    if (v > lo[i] && v < hi[i]) cu.push_back(v);
            if (is_tau && opt.tau_pieces > 1) {
                double r = std::max(std::abs(lo[i]), std::abs(hi[i]));
                for (int k = 1; k < opt.tau_pieces; ++k)
                    for (double v : {-r * k / opt.tau_pieces, r * k / opt.tau_pieces})
                        if (v > lo[i] && v < hi[i]) cu.push_back(v);
            }
            cu.push_back(hi[i]);
            std::sort(cu.begin(), cu.end());
            cu.erase(std::unique(cu.begin(), cu.end()), cu.end());
        }
        auto tensor = [&](int nodes, long& evals) {
            const auto& g = gauss_legendre(nodes);
            // 1-D composite rule per coordinate
            std::vector<VecD> X(D), W(D);
            for (int i = 0; i < D; ++i)
                for (std::size_t j = 0; j + 1 < cuts[i].size(); ++j) {
                    double c0 = 0.5 * (cuts[i][j] + cuts[i][j + 1]), h = 0.5 * (cuts[i][j + 1] - cuts[i][j]);
                    for (int k = 0; k < nodes; ++k) {
                        X[i].push_back(c0 + h * g.first[k]);
                        W[i].push_back(h * g.second[k]);
                    }
                }
            std::vector<std::size_t> idx(D, 0);
            std::vector<cplx> acc;
            VecD u(D);
            while (true) {
                double w = 1;
                for (int i = 0; i < D; ++i) {
                    u[i] = X[i][idx[i]];
                    w *= W[i][idx[i]];
                }
                acc.push_back(w * f_u(u));
                ++evals;
                int i = 0;
                for (; i < D; ++i) {
                    if (++idx[i] < X[i].size()) break;
                    idx[i] = 0;
                }
                if (i == D) break;
            }
            return pairwise_sum(acc).real();
        };
        // raise the node count until consecutive rules agree or the next rule exceeds the budget
        long boxes = 1;
        for (int i = 0; i < D; ++i) boxes *= long(cuts[i].size() - 1);
        auto cost = [&](int nodes) { return double(boxes) * std::pow(double(nodes), D); };
        long evals = 0;
        int nodes = std::max(3, opt.u_nodes);
        double prev = tensor(nodes - 1, evals), cur = tensor(nodes, evals);
        while (std::abs(cur - prev) > opt.tol * std::abs(cur) && evals + cost(nodes + 1) <= double(opt.max_evals)) {
            prev = cur;
            cur = tensor(++nodes, evals);
        }
        return {cur, std::abs(cur - prev), evals};
    };
    std::vector<ChartSum> res(charts.size());
    if (opt.threads > 1) {
        std::vector<std::future<ChartSum>> fut;
        for (const auto& c : charts) fut.push_back(std::async(std::launch::async, work, std::cref(c)));
        for (std::size_t i = 0; i < fut.size(); ++i) res[i] = fut[i].get();
    } else {
        for (std::size_t i = 0; i < charts.size(); ++i) res[i] = work(charts[i]);
    }
    std::vector<cplx> vals;
    for (const auto& r : res) {
        out.per_chart.push_back(r.value);
        vals.push_back(r.value);
        out.error += r.error;
        out.evaluations += r.evals;
    }
    out.value = pairwise_sum(vals).real();
    out.converged = out.error <= opt.tol * std::max(std::abs(out.value), 1e-300);
    return out;
}

DirectLeading direct_leading(const SymplecticModel& m, const Amplitude& a, const VecD& level, const SamplerOptions& opt) {
    if (m.group().kappa != m.g_dim())
        throw std::domain_error("direct_leading: the inner integral over g_η is only implemented for κ = d");
    DirectLeading out;
    VecD lv = level.empty() ? VecD(m.g_dim(), 0.0) : level;
    auto samples = stratum_sampler(m, lv, opt);
    out.samples = long(samples.size());
    if (a.zero()) return out;
    VecD X(m.g_dim(), 0.0);
    std::vector<cplx> terms;
    terms.reserve(samples.size());
    for (const auto& s : samples) {
        double av = a(s.eta, X);
        if (av == 0) continue;
        terms.push_back(s.weight * av / m.orbit_volume(s.eta));
    }
    out.value = m.group().volG / double(m.group().principalIsotropyOrder) * pairwise_sum(terms).real();
    return out;
}

OracleResult singular_oracle(const SymplecticModel& m, const Amplitude& a, double mu, const VecD& level,
                             const QuadOptions& opt) {
    if (!(mu > 0)) throw std::invalid_argument("singular_oracle: μ must be positive");
    int pd = m.phase_dim(), d = m.g_dim();
    VecD lv = level.empty() ? VecD(d, 0.0) : level;
    if (int(lv.size()) != d) throw std::invalid_argument("singular_oracle: level has wrong dimension");
    OracleResult out;
    if (a.zero()) {
        out.method = "zero";
        return out;
    }
    if (!a.x_bump) throw std::domain_error("singular_oracle: amplitude has no compact support in X");
    double RX = a.x_bump->R;
    bool eta_free = true;
    for (const auto& [e, c] : a.poly.terms())
        for (int i = 0; i < pd; ++i) eta_free = eta_free && e[i] == 0;
    auto level_of = [&](const VecD& X) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += lv[j] * X[j];
        return s;
    };
    if (m.kind() == ModelKind::LinearCotangent && a.gauss > 0 && a.cos2_coords.empty() && !a.eta_bump && eta_free) {
        // Gaussian in η: ∫ e^{−g|η|² + (i/μ)ηᵀKη} dη = π^n / Π_j (g − i k_j/μ)^{1/2}.
        out.method = "gaussian-eta";
        int n = m.n();
        double g = a.gauss;
        auto fX = [&, n, g](const VecD& X) -> cplx {
            VecD zero_eta(pd, 0.0);
            double base = a(zero_eta, X);
            if (base == 0) return 0.0;
            Eigen::MatrixXd A = gen_matrix(m, ev(X));
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
            K.topRightCorner(n, n) = 0.5 * A.transpose();
            K.bottomLeftCorner(n, n) = 0.5 * A;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
            cplx den = 1;
            for (long j = 0; j < 2 * n; ++j) den *= std::sqrt(cplx(g, -es.eigenvalues()[j] / mu));
            return base * std::pow(kPi, n) / den * std::exp(cplx(0, -level_of(X) / mu));
        };
        if (d == 1) {
            std::vector<double> br{0.0};
            for (double s = mu; s < RX; s *= 4) {
                br.push_back(s);
                br.push_back(-s);
            }
            std::sort(br.begin(), br.end());
            out.quad = integrate_1d([&](double x) { return fX({x}); }, -RX, RX, opt, br);
        } else {
            QuadOptions o = opt;
            o.init_cells = std::max(2, o.init_cells);
            out.quad = oscillatory_integral([](const VecD&) { return 0.0; }, fX, VecD(d, -RX), VecD(d, RX), 1.0, o);
        }
        return out;
    }
    auto [lo, hi] = support_box(m, a);
    if (pd == 2 && d == 1) {
        // X innermost: the phase (J(η) − ς)X is linear in X.
        out.method = "nested-filon";
        // a is a polynomial of known degree in X on [−RX, RX], so one Filon cell is exact
        int nodes = 2 * (a.x_bump->order + 1) + std::max(0, a.poly.degree_in(pd)) + 1;
        const auto& gx = gauss_legendre(nodes).first;
        auto G = [&, nodes](const VecD& eta) -> cplx {
            double k = m.momentum_components(eta)[0] - lv[0];
            auto W = filon_weights(nodes, k * RX / mu);
            cplx s = 0;
            for (int j = 0; j < nodes; ++j) s += W[j] * a(eta, {RX * gx[j]});
            return RX * s;
        };
        // G peaks in a band of width ~μ around J = ς; J is the second coordinate of both models
        std::vector<double> br{lo[1], hi[1]};
        for (double s = mu; s < hi[1] - lo[1]; s *= 4)
            for (double v : {lv[0] - s, lv[0] + s})
                if (v > lo[1] && v < hi[1]) br.push_back(v);
        if (lv[0] > lo[1] && lv[0] < hi[1]) br.push_back(lv[0]);
        std::sort(br.begin(), br.end());
        QuadOptions outer = opt;
        outer.init_cells = std::max(2, outer.init_cells);
        for (std::size_t i = 0; i + 1 < br.size(); ++i)
            out.quad += oscillatory_integral([](const VecD&) { return 0.0; }, G, {lo[0], br[i]}, {hi[0], br[i + 1]}, 1.0,
                                             outer);
        return out;
    }
    out.method = "direct";
    VecD blo = lo, bhi = hi;
    for (int j = 0; j < d; ++j) {
        blo.push_back(-RX);
        bhi.push_back(RX);
    }
    out.quad = oscillatory_integral(
        [&](const VecD& z) {
            VecD e(z.begin(), z.begin() + pd), X(z.begin() + pd, z.end());
            return m.momentum(e, X) - level_of(X);
        },
        [&](const VecD& z) {
            VecD e(z.begin(), z.begin() + pd), X(z.begin() + pd, z.end());
            return cplx(a(e, X));
        },
        blo, bhi, mu, opt);
    return out;
}

SweepReport singular_sweep(const SymplecticModel& m, const Amplitude& a, const std::vector<double>& mus,
                           const SweepOptions& opt) {
    SweepReport rep;
    rep.kappa = m.group().kappa;
    DirectLeading L0 = direct_leading(m, a, opt.level, opt.sampler);
    rep.L0 = L0.value;
    std::vector<BlowupChart> charts;
    double L_res = 0;
    if (m.kind() == ModelKind::LinearCotangent) {
        Stratification s = stratify(m);
        rep.Lambda = s.Lambda;
        for (const auto& c : s.chains) rep.N = std::max(rep.N, c.N());
        if (opt.tau_split && rep.N > 0) {
            try {
                charts = build_charts(m, s);
                L_res = resolved_leading(m, charts, a).value;
            } catch (const std::exception&) {
                charts.clear();
            }
        }
    }
    std::vector<std::pair<double, double>> fit;
    for (double mu : mus) {
        SweepRow row;
        row.mu = mu;
        OracleResult o = singular_oracle(m, a, mu, opt.level, opt.quad);
        row.I = o.quad.value;
        row.method = o.method;
        row.converged = o.quad.converged;
        double norm = std::pow(2 * kPi * mu, rep.kappa);
        row.ratio = row.I / norm;
        row.rel_err = rep.L0 != 0 ? std::abs(row.ratio - rep.L0) / std::abs(rep.L0) : std::abs(row.ratio);
        row.remainder = std::abs(row.I - norm * rep.L0);
        if (rep.N > 0) row.eps = std::pow(mu, 1.0 / rep.N);
        if (!charts.empty() && L_res != 0) {
            ResolvedOptions ro;
            ro.tau_max = row.eps;
            row.inner_share = resolved_leading(m, charts, a, ro).value / L_res;
        }
        rep.converged = rep.converged && row.converged;
        fit.push_back({mu, row.remainder});
        rep.rows.push_back(row);
    }
    if (fit.size() >= 3) rep.fit = order_fit(fit);
    return rep;
}

}  // namespace eqloc
