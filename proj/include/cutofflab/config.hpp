#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cutofflab/fokker_planck.hpp"

// Experiment configuration: a YAML file, optional dotted-path overrides applied on
// top of it, and the validated, fully-defaulted result.
namespace cutofflab::config {

enum class ModelKind { OU, Potential };

// `route: auto` takes the closed-form path for quadratic potentials.
enum class Route { Auto, Grid };

struct ModelConfig {
    ModelKind kind = ModelKind::OU;
    // ou
    double theta = 1.0;
    std::size_t dimension = 1;
    // Either a scalar start (x0 * (1, ..., 1)) or one entry per coordinate.
    std::vector<double> start{1.0};
    // potential
    std::string potential = "quartic";  // ou | quartic | ou+quartic | polynomial
    double quartic = 1.0;               // c in theta x^2/2 + c x^4/4
    std::vector<double> coefficients;   // c_k of x^{2k}, k >= 1
    std::optional<double> R;            // chosen from the tail mass when absent
    std::size_t n = 2048;
    double delta = 0.05;
    double x0 = 1.0;
    Route route = Route::Auto;
};

struct SolverConfig {
    double dt_init = 1e-5;
    double dt_max = 1e-2;
    double growth = 1.05;
    int startup_implicit_steps = 4;
};

struct TimeGridConfig {
    double t_min = 0.01;
    double t_max = 10.0;
    std::size_t points = 200;

    // Geometric, strictly increasing.
    std::vector<double> times() const;
};

struct McConfig {
    std::size_t paths = 200000;
    double dt = 1e-3;
    double time = 0.6931471805599453;  // ln 2
    std::size_t cells_per_bin = 8;
    std::size_t bootstrap = 200;
    std::size_t varent_samples = 20000;
    double tv_budget = 0.03;
};

struct SweepConfig {
    std::string axis;  // dimension | theta | x0_scale | n | delta
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ModelConfig model;
    SolverConfig solver;
    TimeGridConfig time_grid;
    std::vector<double> epsilons{0.05, 0.1, 0.25};
    std::uint64_t seed = 1;
    std::filesystem::path outputs = "out";
    // Empty means every applicable check.
    std::vector<std::string> checks;
    unsigned workers = 1;
    McConfig mc;
    SweepConfig sweep;

    // Throws ConfigError (without line information) on a violated invariant.
    void validate() const;
    // Canonical JSON of every field; the config hash is taken over its dump.
    nlohmann::ordered_json to_json() const;
    std::uint64_t hash() const;
    // Potential for the grid route, with kappa as documented on Potential1D.
    fp::Potential1D make_potential() const;
    // true when run() takes the closed-form route.
    bool analytic() const;
};

// Every check name the runner knows about.
const std::vector<std::string>& check_names();

// Every dotted key accepted in a file or an override.
const std::vector<std::string>& schema_keys();

// `key=value`, where value is YAML (so `epsilons=[0.1,0.2]` works).
struct Override {
    std::string key;
    std::string value;
};
Override parse_override(std::string_view text);

// Parses YAML text, applies overrides, fills defaults and validates. Errors carry
// the zero-based line of the offending node when it has one.
ExperimentConfig parse(std::string_view yaml, const std::vector<Override>& overrides = {});
ExperimentConfig load(const std::filesystem::path& path,
                      const std::vector<Override>& overrides = {});

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace cutofflab::config
