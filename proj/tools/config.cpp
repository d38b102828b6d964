#include "cli.hpp"

#include "eqloc/localization.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace eqloc::cli {

using nlohmann::json;

const std::vector<std::string> kCommands{"dh", "localize", "residue", "spexpand", "singular", "resolve-verify", "convergence"};

namespace {

bool known_command(const std::string& c) {
    for (const auto& k : kCommands)
        if (k == c) return true;
    return false;
}

// "a:b:steps", log-spaced from a to b inclusive.
std::vector<double> parse_sweep(const std::string& s, std::vector<std::string>& p) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string a, b, n;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n)) {
        p.push_back("mu_sweep: expected \"a:b:steps\"");
        return out;
    }
    try {
        double x = std::stod(a), y = std::stod(b);
        int k = std::stoi(n);
        if (!(x > 0) || !(y > 0) || k < 2) {
            p.push_back("mu_sweep: endpoints must be positive and steps >= 2");
            return out;
        }
        for (int i = 0; i < k; ++i) out.push_back(x * std::pow(y / x, double(i) / (k - 1)));
    } catch (const std::exception&) {
        p.push_back("mu_sweep: malformed number in \"" + s + "\"");
    }
    return out;
}

VecD parse_vec(const json& j, const std::string& field, std::vector<std::string>& p) {
    VecD v;
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) {
        p.push_back(field + ": expected a number or a list of numbers");
        return v;
    }
    for (const auto& x : j) {
        if (!x.is_number()) {
            p.push_back(field + ": entries must be numbers");
            return {};
        }
        v.push_back(x.get<double>());
    }
    return v;
}

template <class T>
T positive(const json& doc, const std::string& key, T def, std::vector<std::string>& p) {
    if (!doc.contains(key)) return def;
    const auto& v = doc[key];
    if (!v.is_number()) {
        p.push_back(key + ": expected a number");
        return def;
    }
    T x = v.get<T>();
    if (!(x > 0)) p.push_back(key + ": must be positive");
    return x;
}

}  // namespace

RunConfig parse_config(const json& doc, const Overrides& ov) {
    std::vector<std::string> p;
    RunConfig c;
    if (!doc.is_object()) throw ConfigError({"config: top level must be a JSON object"});
    c.raw = doc;
    c.command = doc.value("command", std::string());
    if (!ov.command.empty()) {
        if (!c.command.empty() && c.command != ov.command)
            p.push_back("command: config says '" + c.command + "' but '" + ov.command + "' was requested");
        c.command = ov.command;
    }
    if (c.command.empty()) p.push_back("command: missing (give a subcommand or a \"command\" field)");
    else if (!known_command(c.command)) p.push_back("command: unknown '" + c.command + "'");

    std::string target = doc.value("target", std::string());
    bool model_needed = !((c.command == "convergence" && target != "smeared") || (c.command == "spexpand" && (target == "fresnel" || (target.empty() && !doc.contains("model")))));
    if (doc.contains("model")) {
        c.model_desc = doc["model"];
        try {
            c.model = model_from_json_string(doc["model"].dump());
            c.model.group().validate();
        } catch (const ConfigError& e) {
            for (const auto& s : e.problems) p.push_back("model." + s);
        } catch (const std::exception& e) {
            p.push_back(std::string("model: ") + e.what());
        }
    } else if (model_needed) {
        p.push_back("model: missing");
    }
    if (doc.contains("amplitude") && p.empty()) {
        try {
            c.amplitude = amplitude_from_json_string(doc["amplitude"].dump(), c.model.phase_dim(), c.model.g_dim());
        } catch (const ConfigError& e) {
            for (const auto& s : e.problems) p.push_back(s);
        } catch (const std::exception& e) {
            p.push_back(std::string("amplitude: ") + e.what());
        }
    }

    c.seed = ov.seed ? *ov.seed : unsigned(positive<long>(doc, "seed", 1, p));
    c.tolerance = ov.tolerance ? *ov.tolerance : positive<double>(doc, "tolerance", 1e-10, p);
    if (ov.tolerance && !(c.tolerance > 0)) p.push_back("--tolerance: must be positive");
    json budget = doc.value("budget", json::object());
    c.max_cells = positive<long>(budget, "max_cells", 4000000, p);
    c.samples = positive<long>(budget, "samples", 1000000, p);
    c.bins = positive<int>(doc, "bins", 10, p);
    c.grid = positive<int>(doc, "grid", 201, p);
    c.order = positive<int>(doc, "order", 1, p);
    int d = c.model.g_dim();

    if (doc.contains("level")) c.level = parse_vec(doc["level"], "level", p);
    if (!c.level.empty() && int(c.level.size()) != d) p.push_back("level: needs " + std::to_string(d) + " entries");
    if (c.level.empty()) c.level.assign(d, 0.0);

    if (doc.contains("Y")) {
        if (!doc["Y"].is_array()) p.push_back("Y: expected a list");
        else
            for (const auto& y : doc["Y"]) {
                VecD v = parse_vec(y, "Y", p);
                if (int(v.size()) != d) p.push_back("Y: every entry needs " + std::to_string(d) + " components");
                c.Y.push_back(v);
            }
    }
    if (doc.contains("mu") && doc.contains("mu_sweep")) p.push_back("mu: give either mu or mu_sweep");
    if (doc.contains("mu")) c.mu = parse_vec(doc["mu"], "mu", p);
    if (doc.contains("mu_sweep")) {
        if (!doc["mu_sweep"].is_string()) p.push_back("mu_sweep: expected \"a:b:steps\"");
        else c.mu = parse_sweep(doc["mu_sweep"].get<std::string>(), p);
    }
    for (double m : c.mu)
        if (!(m > 0)) p.push_back("mu: every entry must be positive");
    if (doc.contains("eps")) c.eps = parse_vec(doc["eps"], "eps", p);
    for (double e : c.eps)
        if (!(e > 0)) p.push_back("eps: every entry must be positive");
    if (doc.contains("directions")) {
        for (const auto& dj : doc["directions"]) {
            std::vector<Rat> dir;
            json arr = dj.is_array() ? dj : json::array({dj});
            try {
                for (const auto& x : arr) {
                    if (x.is_string()) dir.push_back(Rat::parse(x.get<std::string>()));
                    else if (x.is_number_integer()) dir.push_back(Rat(x.get<long>()));
                    else throw std::invalid_argument("expected an integer or \"p/q\"");
                }
            } catch (const std::exception& e) {
                p.push_back(std::string("directions: ") + e.what());
            }
            if (int(dir.size()) != d) p.push_back("directions: every entry needs " + std::to_string(d) + " components");
            c.directions.push_back(dir);
        }
    }
    c.target = target;
    if (doc.contains("sampler")) {
        const auto& s = doc["sampler"];
        c.sampler.n_radial = positive<int>(s, "n_radial", c.sampler.n_radial, p);
        c.sampler.n_angle = positive<int>(s, "n_angle", c.sampler.n_angle, p);
        c.sampler.rmax = positive<double>(s, "rmax", c.sampler.rmax, p);
    } else if (d == 2) {
        // product grids of the block pair: each factor is rotation invariant
        c.sampler.n_radial = 16;
        c.sampler.n_angle = 6;
    }
    c.sampler.seed = c.seed;
    if (!p.empty()) throw ConfigError(p);
    return c;
}

json compute_calibration() {
    auto S = SymplecticModel::sphere();
    auto area = EquivariantForm::from_amplitude(S, Amplitude::constant(3, 1.0));
    SmearResult sm = smeared_limit(S, area, SmearingKernel(1));
    JKResult jk = jk_residue(S, ClosedForm::one(1), {Rat(1)});
    json j;
    j["convention"] = "u(Y) = int e^{i<xi,Y>} U(xi) dxi";
    j["identity"] = "sphere area: smeared limit = calibrated ray-residue pairing";
    j["smeared_limit"] = sm.limit;
    j["ray_residue_pairing"] = jk.paired;
    j["constant"] = sm.limit / jk.paired;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : j.dump()) h = (h ^ ch) * 1099511628211ull;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    j["id"] = buf;
    return j;
}

json builtin_calibration() {
    json j;
    j["convention"] = "u(Y) = int e^{i<xi,Y>} U(xi) dxi";
    j["constant"] = 1.0;
    j["id"] = "builtin";
    return j;
}

std::string inputs_hash(const RunConfig& c) {
    std::ostringstream os;
    os << c.command << '\n' << c.raw.dump() << '\n' << c.seed << '\n';
    os.precision(17);
    os << c.tolerance << '\n' << c.calibration.value("id", std::string("builtin"));
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : os.str()) h = (h ^ ch) * 1099511628211ull;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ojson Report::num(double v, double tol, const std::string& oracle) {
    ojson j;
    j["value"] = v;
    j["tolerance"] = tol;
    j["oracle"] = oracle;
    return j;
}

ojson Report::cnum(cplx v, double tol, const std::string& oracle) {
    ojson j;
    j["re"] = v.real();
    j["im"] = v.imag();
    j["tolerance"] = tol;
    j["oracle"] = oracle;
    return j;
}

void Report::check(const std::string& name, double value, const std::string& rel, double threshold) {
    Check c{name, value, threshold, rel, true};
    if (rel == "<=") c.pass = value <= threshold;
    else if (rel == ">=") c.pass = value >= threshold;
    else if (rel == "==") c.pass = value == threshold;
    else if (rel == ">") c.pass = value > threshold;
    checks.push_back(c);
}

bool Report::certified() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

ojson Report::to_json(const RunConfig& c, const std::string& hash) const {
    ojson j;
    j["command"] = c.command;
    j["inputs_hash"] = hash;
    j["seed"] = c.seed;
    j["tolerance"] = c.tolerance;
    j["calibration"] = ojson::parse(c.calibration.dump());
    j["config"] = ojson::parse(c.raw.dump());
    j["results"] = results;
    ojson cert;
    ojson list = ojson::array();
    for (const auto& k : checks) {
        ojson e;
        e["name"] = k.name;
        e["value"] = k.value;
        e["relation"] = k.relation;
        e["threshold"] = k.threshold;
        e["pass"] = k.pass;
        list.push_back(e);
    }
    cert["checks"] = list;
    cert["pass"] = certified();
    j["certificate"] = cert;
    j["budget_exceeded"] = budget_exceeded;
    ojson fl = ojson::array();
    for (const auto& [name, body] : files) fl.push_back(name);
    j["files"] = fl;
    if (!notes.empty()) j["notes"] = notes;
    return j;
}

}  // namespace eqloc::cli
