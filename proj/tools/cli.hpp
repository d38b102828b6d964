#pragma once

#include "eqloc/resolution.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace eqloc::cli {

using ojson = nlohmann::ordered_json;

enum Exit { kPass = 0, kCertificateFailure = 2, kBudgetExceeded = 3, kConfigInvalid = 4 };

extern const std::vector<std::string> kCommands;

struct RunConfig {
    std::string command;
    nlohmann::json raw;  // the config document as read (echoed in the report)
    nlohmann::json model_desc;
    SymplecticModel model;
    std::optional<Amplitude> amplitude;
    unsigned seed = 1;
    double tolerance = 1e-10;  // quadrature relative tolerance
    long max_cells = 4000000;
    long samples = 1000000;
    int bins = 10;
    int grid = 201;
    int order = 1;
    VecD level;
    std::vector<VecD> Y;
    std::vector<double> mu;
    std::vector<double> eps;
    std::vector<std::vector<Rat>> directions;
    std::string target;  // spexpand / convergence: which integral
    SamplerOptions sampler;
    nlohmann::json calibration;  // stamp in effect
};

// Flags that override config fields.
struct Overrides {
    std::optional<unsigned> seed;
    std::optional<double> tolerance;
    std::string command;
};

// Throws ConfigError listing every invalid field.
RunConfig parse_config(const nlohmann::json& doc, const Overrides& ov);

// Fourier-constant calibration: the sphere area pairing, smeared limit against the ray residue.
nlohmann::json compute_calibration();
nlohmann::json builtin_calibration();

std::string inputs_hash(const RunConfig& c);

struct Check {
    std::string name;
    double value = 0;
    double threshold = 0;
    std::string relation;  // "<=", ">=", "==", "info"
    bool pass = true;
};

class Report {
public:
    ojson results = ojson::object();
    std::vector<Check> checks;
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
    bool budget_exceeded = false;
    std::vector<std::string> notes;

    // Numeric result with its tolerance and oracle tag.
    static ojson num(double v, double tol, const std::string& oracle);
    static ojson cnum(cplx v, double tol, const std::string& oracle);
    void check(const std::string& name, double value, const std::string& rel, double threshold);
    bool certified() const;
    ojson to_json(const RunConfig& c, const std::string& hash) const;
};

Report run_command(const RunConfig& c);

}  // namespace eqloc::cli
