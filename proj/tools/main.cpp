#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace eqloc::cli;
using nlohmann::json;

namespace {

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream os(p, std::ios::binary);
    os << body;
    if (!os) throw std::runtime_error("cannot write " + p.string());
}

int config_failure(const std::vector<std::string>& problems) {
    std::cerr << "invalid configuration:\n";
    for (const auto& p : problems) std::cerr << "  " << p << '\n';
    return kConfigInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivariant localization and singular stationary phase"};
    app.fallthrough();
    std::string config_path, out_dir = "runs";
    std::optional<unsigned> seed;
    std::optional<double> tolerance;
    bool calibrate = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--tolerance", tolerance, "quadrature relative tolerance (overrides the config)");
    app.add_flag("--calibrate", calibrate, "recompute and persist the Fourier-constant calibration");
    for (const auto& c : kCommands) app.add_subcommand(c);
    app.require_subcommand(0, 1);
    CLI11_PARSE(app, argc, argv);

    std::string command;
    for (auto* s : app.get_subcommands()) command = s->get_name();

    try {
        fs::create_directories(out_dir);
        fs::path stamp = fs::path(out_dir) / "calibration.json";
        json calibration;
        if (calibrate) {
            calibration = compute_calibration();
            write_file(stamp, calibration.dump(2) + "\n");
            std::cout << "calibration " << calibration["id"].get<std::string>() << " written to " << stamp.string() << '\n';
            if (config_path.empty() && command.empty()) return kPass;
        } else if (fs::exists(stamp)) {
            std::ifstream is(stamp);
            calibration = json::parse(is);
        } else {
            calibration = builtin_calibration();
        }

        if (config_path.empty()) return config_failure({"--config: required"});
        json doc;
        {
            std::ifstream is(config_path);
            if (!is) return config_failure({"--config: cannot read '" + config_path + "'"});
            try {
                doc = json::parse(is);
            } catch (const json::parse_error& e) {
                return config_failure({std::string("--config: ") + e.what()});
            }
        }
        RunConfig cfg = parse_config(doc, Overrides{seed, tolerance, command});
        cfg.calibration = calibration;
        std::string hash = inputs_hash(cfg);
        fs::path run = fs::path(out_dir) / (cfg.command + "-" + hash);
        fs::create_directories(run);

        auto t0 = std::chrono::steady_clock::now();
        Report rep;
        try {
            rep = run_command(cfg);
        } catch (const std::length_error& e) {
            rep.budget_exceeded = true;
            rep.notes.push_back(std::string("budget: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        for (const auto& [name, body] : rep.files) write_file(run / name, body);
        write_file(run / "report.json", rep.to_json(cfg, hash).dump(2) + "\n");
        // wall time changes between runs, so it stays out of the report
        json timing;
        timing["seconds"] = secs;
        write_file(run / "timings.json", timing.dump(2) + "\n");

        std::cout << run.string() << '\n';
        for (const auto& c : rep.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << ' ' << c.relation << ' ' << c.threshold
                      << '\n';
        if (rep.budget_exceeded) {
            std::cout << "budget exceeded\n";
            return kBudgetExceeded;
        }
        return rep.certified() ? kPass : kCertificateFailure;
    } catch (const eqloc::ConfigError& e) {
        return config_failure(e.problems);
    } catch (const std::domain_error& e) {
        return config_failure({e.what()});
    } catch (const std::invalid_argument& e) {
        return config_failure({e.what()});
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
