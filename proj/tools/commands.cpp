#include "cli.hpp"

#include "eqloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace eqloc::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Csv {
    std::ostringstream os;
    explicit Csv(const std::string& header) {
        os.precision(17);
        os << header << '\n';
    }
    template <class... T>
    void row(const T&... xs) {
        bool first = true;
        ((os << (first ? "" : ",") << xs, first = false), ...);
        os << '\n';
    }
};

QuadOptions quad_of(const RunConfig& c, double abs_tol = 1e-14) {
    QuadOptions q{abs_tol, c.tolerance};
    q.max_cells = c.max_cells;
    return q;
}

ojson fit_json(const OrderFit& f) {
    ojson j;
    j["exponent"] = f.exponent;
    j["logPower"] = f.logPower;
    j["c"] = f.c;
    j["exact"] = f.exact;
    return j;
}

Amplitude default_amplitude(const RunConfig& c) {
    if (c.amplitude) return *c.amplitude;
    const auto& m = c.model;
    Amplitude a = Amplitude::constant(m.phase_dim() + m.g_dim(), 1.0);
    switch (m.kind()) {
        case ModelKind::Sphere: break;
        case ModelKind::CotangentCircle:
            a.cos2_coords = {0};
            a.eta_bump = Bump{1.0, 4};
            a.eta_bump_coords = {1};
            break;
        case ModelKind::LinearCotangent: a.gauss = 1; break;
    }
    return a;
}

// ------------------------------------------------------------------ dh

Report cmd_dh(const RunConfig& c) {
    Report r;
    const auto& m = c.model;
    PiecewisePoly U = dh_measure(m, ClosedForm::one(m.g_dim()));
    r.results["piecewise"] = ojson::parse(to_json_string(U));
    r.results["has_atoms"] = U.has_atoms();
    double R = m.kind() == ModelKind::Sphere ? m.radius() : 3.0;
    VecD lo(m.g_dim(), -1.25 * R), hi(m.g_dim(), 1.25 * R);
    r.files.push_back({"dh_density.csv", to_csv(U, lo, hi, c.grid)});
    if (m.kind() != ModelKind::Sphere || m.g_dim() != 1) {
        r.notes.push_back("mass and Monte Carlo checks need the compact sphere model");
        return r;
    }
    double area = 4 * kPi * R * R;
    double mass = U.mass().real();
    r.results["mass"] = Report::num(mass, 1e-12 * area, "exact chamber integral");
    r.results["liouville_volume"] = Report::num(area, 0, "closed form 4πR²");
    r.check("mass_rel_err", std::abs(mass - area) / area, "<=", 1e-12);

    // Monte Carlo pushforward: uniform points on the sphere from normalized Gaussian vectors.
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> N01;
    std::vector<long> count(c.bins, 0);
    for (long i = 0; i < c.samples; ++i) {
        double a = N01(rng), b = N01(rng), z = N01(rng);
        double x = z / std::sqrt(a * a + b * b + z * z);
        int k = std::min(c.bins - 1, int((x + 1) / 2 * c.bins));
        ++count[k];
    }
    const auto& [gx, gw] = gauss_legendre(8);
    Csv csv("bin_lo,bin_hi,dh_mass,mc_mass,rel_err");
    double worst = 0;
    for (int k = 0; k < c.bins; ++k) {
        double a = -R + 2 * R * k / c.bins, b = -R + 2 * R * (k + 1) / c.bins;
        double exact = 0;
        for (int j = 0; j < 8; ++j) exact += 0.5 * (b - a) * gw[j] * U.density({0.5 * (a + b) + 0.5 * (b - a) * gx[j]}).real();
        double mc = area * double(count[k]) / double(c.samples);
        double rel = std::abs(mc - exact) / exact;
        worst = std::max(worst, rel);
        csv.row(a, b, exact, mc, rel);
    }
    r.results["mc_samples"] = c.samples;
    r.results["mc_max_bin_rel_err"] = Report::num(worst, 1e-2, "Monte Carlo pushforward of the area");
    r.check("mc_max_bin_rel_err", worst, "<=", 1e-2);
    r.files.push_back({"dh_bins.csv", csv.os.str()});
    return r;
}

// ------------------------------------------------------------------ localize

Report cmd_localize(const RunConfig& c) {
    Report r;
    const auto& m = c.model;
    auto rho = ClosedForm::one(m.g_dim());
    std::vector<VecD> Ys = c.Y;
    if (Ys.empty()) Ys = {{0.5}, {1.0}, {2.0}, {5.0}};
    Csv csv("Y,bv_re,bv_im,direct_re,direct_im,abs_err");
    ojson rows = ojson::array();
    double worst = 0;
    for (const auto& Y : Ys) {
        BVResult bv = bv_sum(m, rho, Y);
        if (!bv.applicable) {
            r.notes.push_back(bv.note);
            r.results["applicable"] = false;
            return r;
        }
        ojson row;
        row["Y"] = Y;
        row["bv_sum"] = Report::cnum(bv.value, 0, "localization sum");
        std::ostringstream ys;
        ys.precision(17);
        for (std::size_t i = 0; i < Y.size(); ++i) ys << (i ? ";" : "") << Y[i];
        if (m.compact()) {
            QuadResult q = bv_direct(m, rho, Y, quad_of(c));
            if (!q.converged) r.budget_exceeded = true;
            double err = std::abs(bv.value - q.value);
            worst = std::max(worst, err);
            row["direct"] = Report::cnum(q.value, q.error, "adaptive quadrature over the phase space");
            row["abs_err"] = err;
            csv.row(ys.str(), bv.value.real(), bv.value.imag(), q.value.real(), q.value.imag(), err);
        } else {
            csv.row(ys.str(), bv.value.real(), bv.value.imag(), "", "", "");
        }
        rows.push_back(row);
    }
    r.results["rows"] = rows;
    if (m.compact()) r.check("max_abs_err_vs_quadrature", worst, "<=", 1e-8);
    else r.notes.push_back("noncompact model: no quadrature oracle over the phase space");
    r.files.push_back({"localize.csv", csv.os.str()});
    return r;
}

// ------------------------------------------------------------------ residue

Report cmd_residue(const RunConfig& c) {
    Report r;
    const auto& m = c.model;
    int d = m.g_dim();
    auto rho = ClosedForm::one(d);
    double C = c.calibration.value("constant", 1.0);
    auto dirs = c.directions;
    if (dirs.empty()) {
        if (d != 1) throw ConfigError({"directions: required for groups of dimension > 1"});
        dirs = {{Rat(1)}, {Rat(-1)}};
    }
    ojson jk = ojson::array();
    std::optional<JKResult> first;
    bool all_equal = true, applicable = true;
    for (const auto& dir : dirs) {
        JKResult res = jk_residue(m, rho, dir);
        ojson e;
        std::vector<std::string> ds;
        for (const auto& x : dir) ds.push_back(x.str());
        e["direction"] = ds;
        e["applicable"] = res.applicable;
        if (!res.applicable) {
            applicable = false;
            e["note"] = res.note;
            jk.push_back(e);
            continue;
        }
        e["raw_exact"] = res.raw.value.re.str() + (res.raw.value.im.is_zero() ? "" : " + i*" + res.raw.value.im.str());
        e["raw_twopi_power"] = res.raw.twopi;
        e["raw"] = Report::cnum(res.raw.numeric(), 0, "exact ray residue");
        e["paired_calibrated"] = Report::num(C * res.paired, 0, "calibrated residue pairing");
        if (first) all_equal = all_equal && res.raw.value == first->raw.value && res.raw.twopi == first->raw.twopi;
        else first = res;
        jk.push_back(e);
    }
    r.results["jk_residue"] = jk;
    if (applicable) r.check("chamber_independence", all_equal ? 1 : 0, "==", 1);
    else r.notes.push_back("no fixed points: ray residues not applicable");

    // pairing identity: smeared limit = Kirwan stratum integral
    Amplitude a = default_amplitude(c);
    auto form = EquivariantForm::from_amplitude(m, a);
    SmearOptions so;
    if (!c.eps.empty()) so.eps = c.eps;
    so.level = c.level;
    so.quad = quad_of(c);
    SmearResult sm = smeared_limit(m, form, SmearingKernel(d), so);
    if (!sm.converged) r.budget_exceeded = true;
    KirwanResult kw = kirwan_integral(m, form, c.level, c.sampler);
    double gap = std::abs(sm.limit - kw.value) / std::abs(kw.value);
    r.results["smeared_limit"] = Report::num(sm.limit, sm.spread * std::abs(sm.limit), "Richardson in eps of smeared values");
    r.results["kirwan_integral"] = Report::num(kw.value, 0, "stratum sampler quadrature");
    r.results["pairing_rel_gap"] = gap;
    r.check("pairing_rel_gap", gap, "<=", 1e-2);
    if (applicable && first && m.compact() && !c.amplitude) {
        double g2 = std::abs(C * first->paired - sm.limit) / std::abs(sm.limit);
        r.results["residue_vs_smeared_rel_gap"] = g2;
        r.check("residue_vs_smeared_rel_gap", g2, "<=", 1e-2);
    }
    Csv csv("eps,re,im");
    for (std::size_t i = 0; i < sm.values.size(); ++i) csv.row(so.eps[i], sm.values[i].real(), sm.values[i].imag());
    r.files.push_back({"residue_smear.csv", csv.os.str()});
    return r;
}

// ------------------------------------------------------------------ spexpand

Report cmd_spexpand(const RunConfig& c) {
    Report r;
    std::vector<double> mus = c.mu.empty() ? std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3} : c.mu;
    std::vector<std::pair<double, double>> errs;
    Csv csv("mu,oracle_re,oracle_im,expansion_re,expansion_im,abs_err");
    double expected = 0;
    double worst_rel = 0;
    auto record = [&](double mu, cplx oracle, cplx expn) {
        double e = std::abs(oracle - expn);
        worst_rel = std::max(worst_rel, e / std::abs(oracle));
        errs.push_back({mu, e});
        csv.row(mu, oracle.real(), oracle.imag(), expn.real(), expn.imag(), e);
    };
    std::string target = c.target.empty() ? (c.raw.contains("model") ? "model" : "fresnel") : c.target;
    r.results["target"] = target;
    if (target == "fresnel") {
        double R = c.raw.value("bump_R", 20.0);
        int order = c.raw.value("bump_order", 4);
        CleanPhase ph = CleanPhase::quadratic_bump(R, order);
        SPExpansion e = sp_coefficients(ph, c.order);
        ojson q = ojson::array();
        for (auto v : e.Q) q.push_back(Report::cnum(v, 0, "stationary-phase coefficient"));
        r.results["Q"] = q;
        r.results["sigma"] = e.sigma;
        expected = 0.5 * e.l + e.N;
        for (double mu : mus) {
            QuadResult o = oscillatory_1d([](double s) { return s * s / 2; }, [&](double s) { return cplx(ph.amp({}, {s})); },
                                          -R, R, mu, quad_of(c, 1e-16));
            if (!o.converged) r.budget_exceeded = true;
            record(mu, o.value, e.evaluate(mu));
        }
    } else if (target == "model") {
        const auto& m = c.model;
        Amplitude a = default_amplitude(c);
        VecD Y = c.Y.empty() ? VecD(m.g_dim(), 1.0) : c.Y[0];
        AsymptoticL A = asymptotic_L(m, a, Y, c.order);
        if (!A.applicable) {
            r.notes.push_back(A.note);
            r.results["applicable"] = false;
            return r;
        }
        ojson comps = ojson::array();
        for (const auto& e : A.per_component) {
            ojson j;
            j["psi0"] = e.psi0;
            j["sigma"] = e.sigma;
            j["l"] = e.l;
            ojson q = ojson::array();
            for (auto v : e.Q) q.push_back(Report::cnum(v, 0, "stationary-phase coefficient"));
            j["Q"] = q;
            comps.push_back(j);
            expected = 0.5 * e.l + e.N;
        }
        r.results["components"] = comps;
        auto [lo, hi] = support_box(m, a);
        VecD X0(m.g_dim(), 0.0);
        for (double mu : mus) {
            RealFnN psi = [&](const VecD& eta) { return m.momentum(eta, A.direction); };
            FnN amp = [&](const VecD& eta) { return cplx(a(eta, X0) * m.liouville_density(eta)); };
            QuadResult o = oscillatory_integral(psi, amp, lo, hi, mu, quad_of(c));
            if (!o.converged) r.budget_exceeded = true;
            record(mu, o.value, A.evaluate(1 / mu));
        }
    } else {
        throw ConfigError({"target: spexpand expects \"fresnel\" or \"model\", got '" + target + "'"});
    }
    OrderFit f = order_fit_pure(errs);
    r.results["fit"] = fit_json(f);
    r.results["expected_exponent"] = expected;
    r.files.push_back({"spexpand.csv", csv.os.str()});
    // expansions that are exact up to the jet floor carry no order information
    if (worst_rel <= 1e-6) {
        r.notes.push_back("expansion matches the oracle to the finite-difference floor; order fit not checked");
        r.check("max_rel_err", worst_rel, "<=", 1e-6);
    } else {
        r.check("fit_exponent_dev", std::abs(f.exponent - expected), "<=", 0.15);
    }
    return r;
}

// ------------------------------------------------------------------ singular

Report cmd_singular(const RunConfig& c) {
    Report r;
    const auto& m = c.model;
    Amplitude a = default_amplitude(c);
    if (!a.x_bump) a.x_bump = Bump{1.0, 4};
    std::vector<double> mus =
        c.mu.empty() ? std::vector<double>{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4} : c.mu;
    SweepOptions so;
    so.level = c.level;
    so.quad = quad_of(c);
    so.sampler = c.sampler;
    SweepReport rep = singular_sweep(m, a, mus, so);
    if (!rep.converged) r.budget_exceeded = true;
    r.results["kappa"] = rep.kappa;
    r.results["Lambda"] = rep.Lambda;
    r.results["N"] = rep.N;
    r.results["L0"] = Report::num(rep.L0, 0, "direct_leading over Reg of the level set");
    r.results["fit"] = fit_json(rep.fit);
    Csv csv("mu,I_re,I_im,ratio_re,ratio_im,rel_err,remainder,eps,inner_share,method,converged");
    ojson rows = ojson::array();
    for (const auto& w : rep.rows) {
        csv.row(w.mu, w.I.real(), w.I.imag(), w.ratio.real(), w.ratio.imag(), w.rel_err, w.remainder, w.eps, w.inner_share,
                w.method, w.converged ? 1 : 0);
        ojson j;
        j["mu"] = w.mu;
        j["I"] = Report::cnum(w.I, 0, w.method);
        j["rel_err"] = w.rel_err;
        rows.push_back(j);
    }
    r.results["rows"] = rows;
    r.files.push_back({"singular.csv", csv.os.str()});
    // the row nearest μ = 10⁻³
    const SweepRow* near = nullptr;
    for (const auto& w : rep.rows)
        if (!near || std::abs(std::log(w.mu / 1e-3)) < std::abs(std::log(near->mu / 1e-3))) near = &w;
    if (near) {
        double thr = rep.Lambda > 1 ? 1e-2 : 1e-3;
        r.check("rel_err_at_mu_" + [&] {
            std::ostringstream os;
            os << near->mu;
            return os.str();
        }(), near->rel_err, "<=", thr);
    }
    if (rep.rows.size() >= 3) {
        r.check("fit_exponent_dev", std::abs(rep.fit.exponent - (rep.kappa + 1)), "<=", 0.2);
        r.check("fit_logPower", rep.fit.logPower, "<=", rep.Lambda - 1 + 0.2);
        if (rep.Lambda == 1) r.check("fit_logPower_lower", rep.fit.logPower, ">=", -0.2);
    }
    return r;
}

// ------------------------------------------------------------------ resolve-verify

Report cmd_resolve(const RunConfig& c) {
    Report r;
    const auto& m = c.model;
    if (m.kind() != ModelKind::LinearCotangent) throw ConfigError({"model: resolve-verify needs a linear_cotangent model"});
    Amplitude a = default_amplitude(c);
    if (!a.x_bump) a.x_bump = Bump{1.0, 4};
    Stratification s = stratify(m);
    auto charts = build_charts(m, s);
    unsigned seed = c.seed;

    double fact = 0;
    int witnesses = 0, mismatches = 0, rank_failures = 0, points = 0;
    double min_eig = std::numeric_limits<double>::infinity(), alpha_min = std::numeric_limits<double>::infinity();
    int codim = 0;
    ojson per = ojson::array();
    for (const auto& ch : charts) {
        ojson j;
        j["name"] = ch.name;
        auto f = factorization_check(m, ch, 1000, seed);
        fact = std::max(fact, f.max_rel_err);
        j["factorization_max_err"] = f.max_rel_err;
        if (ch.non_stationary) {
            double pr = alpha_chart_probe(ch, 2000, seed);
            alpha_min = std::min(alpha_min, pr);
            j["min_abs_dp_psi"] = pr;
        } else {
            auto g = crit_grid_check(m, ch, 10000, seed, 1e-9);
            points += g.points;
            witnesses += g.critical;
            mismatches += g.mismatches;
            rank_failures += g.rank_failures;
            auto u = sigma_uniformity(ch);
            min_eig = std::min(min_eig, u.min_eig);
            j["crit_points"] = g.points;
            j["crit_witnesses"] = g.critical;
            j["mismatches"] = g.mismatches;
            j["sigma_min_eig"] = u.min_eig;
            if (codim == 0) {
                VecD u0(ch.u_lo.size());
                for (std::size_t i = 0; i < u0.size(); ++i) {
                    double lo = std::isfinite(ch.u_lo[i]) ? ch.u_lo[i] : -1.0, hi = std::isfinite(ch.u_hi[i]) ? ch.u_hi[i] : 1.0;
                    u0[i] = lo + 0.37 * (hi - lo);
                }
                double jac;
                VecD base = ch.base_from_u(u0, jac);
                VecD p(ch.n_p);
                for (int i = 0; i < ch.n_p; ++i) p[i] = 0.3 - 0.2 * i;
                codim = transversal_hessian(ch, critical_point(ch, base, p)).normal_dim;
            }
        }
        per.push_back(j);
    }
    double pdef = partition_defect(m, charts, 200, seed);

    // transversal Hessian against det Ξ at regular points of the zero level, drawn from the stratum sampler
    auto samples = stratum_sampler(m, VecD(m.g_dim(), 0.0), c.sampler);
    std::mt19937 rng(seed);
    double hess_worst = 0;
    int hess_n = 0;
    for (int k = 0; k < 200 && hess_n < 20 && !samples.empty(); ++k) {
        const auto& eta = samples[rng() % samples.size()].eta;
        if (m.isotropy_dim(eta, 1e-9) != 0) continue;
        XiMap xi = xi_map(m, eta);
        double ref = std::abs(xi.det());
        if (ref < 1e-6) continue;
        double got = std::abs(regular_transversal_hessian(m, eta).det);
        hess_worst = std::max(hess_worst, std::abs(got - ref) / ref);
        ++hess_n;
    }

    ResolvedLeading rl = resolved_leading(m, charts, a);
    if (!rl.converged) r.notes.push_back("resolved_leading: consecutive rules differ by more than the tolerance");
    DirectLeading dl = direct_leading(m, a, c.level, c.sampler);
    double gap = std::abs(rl.value - dl.value) / std::abs(dl.value);

    r.results["factorization_max_err"] = fact;
    r.results["crit_witness_count"] = witnesses;
    r.results["min_transversal_eig"] = min_eig;
    r.results["codim"] = codim;
    r.results["L_resolved"] = Report::num(rl.value, rl.error, "tensor Gauss over the blow-up charts");
    r.results["L_direct"] = Report::num(dl.value, 1e-2 * std::abs(dl.value), "stratum sampler over Reg of the level set");
    r.results["rel_gap"] = gap;
    r.results["kappa"] = s.kappa;
    r.results["Lambda"] = s.Lambda;
    r.results["chains"] = int(s.chains.size());
    r.results["crit_grid_points"] = points;
    r.results["crit_mismatches"] = mismatches;
    r.results["partition_defect"] = pdef;
    r.results["omitted_charts"] = rl.omitted;
    r.results["regular_hessian_points"] = hess_n;
    r.results["regular_hessian_max_rel_err"] = hess_worst;
    r.results["charts"] = per;

    r.check("factorization_max_err", fact, "<=", 1e-12);
    r.check("crit_mismatches", mismatches, "==", 0);
    r.check("crit_rank_failures", rank_failures, "==", 0);
    r.check("min_transversal_eig", min_eig, ">=", 1e-3);
    if (std::isfinite(alpha_min)) r.check("alpha_chart_min_abs_dp_psi", alpha_min, ">", 0);
    r.check("partition_defect", pdef, "<=", 1e-12);
    r.check("regular_hessian_max_rel_err", hess_worst, "<=", 1e-8);
    r.check("rel_gap", gap, "<=", 1e-2);
    return r;
}

// ------------------------------------------------------------------ convergence

Report cmd_convergence(const RunConfig& c) {
    Report r;
    std::string target = c.target.empty() ? "fresnel" : c.target;
    r.results["target"] = target;
    std::vector<std::pair<double, double>> errs;
    if (target == "fresnel") {
        std::vector<double> mus = c.mu.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3} : c.mu;
        double R = c.raw.value("bump_R", 20.0);
        int order = c.raw.value("bump_order", 4);
        Csv csv("mu,re,im,ref_re,ref_im,abs_err,bound");
        double worst = 0;
        for (double mu : mus) {
            auto amp = [R, order](double s) {
                double u = s / R;
                return cplx(std::abs(u) >= 1 ? 0.0 : std::pow(1 - u * u, order + 1));
            };
            QuadResult q = oscillatory_1d([](double s) { return s * s / 2; }, amp, -R, R, mu, quad_of(c, 1e-16));
            if (!q.converged) r.budget_exceeded = true;
            cplx ref = std::sqrt(2 * kPi * mu) * std::polar(1.0, kPi / 4);
            double e = std::abs(q.value - ref), bound = 0.05 * std::pow(mu, 1.5);
            worst = std::max(worst, e / bound);
            errs.push_back({mu, e});
            csv.row(mu, q.value.real(), q.value.imag(), ref.real(), ref.imag(), e, bound);
        }
        OrderFit f = order_fit_pure(errs);
        r.results["fit"] = fit_json(f);
        r.results["max_err_over_bound"] = worst;
        r.check("max_err_over_bound", worst, "<=", 1.0);
        r.check("fit_exponent_dev", std::abs(f.exponent - 1.5), "<=", 0.1);
        r.files.push_back({"convergence.csv", csv.os.str()});
    } else if (target == "smeared") {
        const auto& m = c.model;
        Amplitude a = default_amplitude(c);
        SmearOptions so;
        so.eps = c.eps.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.004} : c.eps;
        so.level = c.level;
        so.quad = quad_of(c);
        SmearResult sm = smeared_limit(m, EquivariantForm::from_amplitude(m, a), SmearingKernel(m.g_dim()), so);
        if (!sm.converged) r.budget_exceeded = true;
        Csv csv("eps,re,im,abs_err");
        for (std::size_t i = 0; i < sm.values.size(); ++i) {
            double e = std::abs(sm.values[i] - sm.limit_c);
            errs.push_back({so.eps[i], e});
            csv.row(so.eps[i], sm.values[i].real(), sm.values[i].imag(), e);
        }
        OrderFit f = order_fit_pure(errs);
        r.results["limit"] = Report::num(sm.limit, sm.spread * std::abs(sm.limit), "Richardson in eps");
        r.results["fit"] = fit_json(f);
        r.files.push_back({"convergence.csv", csv.os.str()});
        if (f.exact) r.notes.push_back("smeared values independent of eps");
        else r.check("fit_exponent_dev", std::abs(f.exponent - 2.0), "<=", 0.3);
    } else {
        throw ConfigError({"target: convergence expects \"fresnel\" or \"smeared\", got '" + target + "'"});
    }
    return r;
}

}  // namespace

Report run_command(const RunConfig& c) {
    if (c.command == "dh") return cmd_dh(c);
    if (c.command == "localize") return cmd_localize(c);
    if (c.command == "residue") return cmd_residue(c);
    if (c.command == "spexpand") return cmd_spexpand(c);
    if (c.command == "singular") return cmd_singular(c);
    if (c.command == "resolve-verify") return cmd_resolve(c);
    if (c.command == "convergence") return cmd_convergence(c);
    throw ConfigError({"command: unknown '" + c.command + "'"});
}

}  // namespace eqloc::cli
