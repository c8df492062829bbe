#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutofflab/config.hpp"
#include "cutofflab/mixing_bounds.hpp"

// Experiment runner: builds the model a config describes, samples its profile,
// runs the applicable bound checks and writes
//   curves/profile.csv    t,tv,ent,varent,dent_dt
//   reports/bounds.json   check reports, skipped checks, mixing times
//   reports/cutoff.csv    one row per epsilon
//   manifest.json         config hash, artifacts, stage timings, summary
// Everything except manifest.json is a deterministic function of the config.
namespace cutofflab::experiments {

inline constexpr const char* kToolVersion = "0.1.0";

// Pass tolerances for the checks.
inline constexpr double kAnalyticTolerance = 1e-6;
inline constexpr double kAnalyticStrictTolerance = 1e-10;  // lemma3*, reverse_pinsker
inline constexpr double kGridTolerance = 1e-3;

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    bool ok = true;
    std::string error;
};

struct SkippedCheck {
    std::string check;
    std::string reason;
};

// Grid mixing times at start widths delta and delta/2. The reported times are the
// Richardson extrapolation (4 t(delta/2) - t(delta)) / 3 of the two, which
// removes the O(delta^2) bias of the mollified start.
struct GridTimes {
    double epsilon = 0.0;
    double t_early_delta = 0.0;
    double t_late_delta = 0.0;
    double t_early_half = 0.0;
    double t_late_half = 0.0;
    bool extrapolated = false;
};

struct RunResult {
    MixingProfile profile;
    std::vector<bounds::MixingTimesReport> times;  // one per epsilon; may be shorter on a grid
    std::vector<GridTimes> grid_times;
    std::vector<bounds::BoundReport> reports;
    std::vector<SkippedCheck> skipped;
    std::vector<StageRecord> stages;
    std::vector<std::filesystem::path> artifacts;  // relative to the output directory
    std::filesystem::path output_dir;
    std::uint64_t config_hash = 0;

    std::size_t failed_checks() const;
    bool stage_failed() const;
    // true iff every executed check passed and no stage errored.
    bool ok() const;
};

// Runs every stage, recording (not throwing) module errors. Throws only when
// the output directory cannot be written.
RunResult run(const config::ExperimentConfig& config);

// bounds.json payload for a result.
nlohmann::ordered_json bounds_json(const RunResult& result);

struct SweepEntry {
    double value = 0.0;
    config::ExperimentConfig config;
    RunResult result;
    std::string error;  // set when the run could not even start
};

struct SweepResult {
    std::string axis;
    std::vector<SweepEntry> entries;
    nlohmann::ordered_json verdict;
    std::filesystem::path output_dir;
    bool ok() const;
};

// Applies an axis value to a copy of `base`, writing into `<outputs>/<axis>=<value>`.
config::ExperimentConfig sweep_point(const config::ExperimentConfig& base,
                                     const std::string& axis, double value);

// Independent runs per value on up to `base.workers` threads, plus
// `<outputs>/sweep/cutoff.csv` and `<outputs>/sweep/verdict.json`.
SweepResult sweep(const config::ExperimentConfig& base, const std::string& axis,
                  const std::vector<double>& values);

// Slope of the least-squares line through (log x_i, y_i).
double log_fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cutofflab::experiments
