#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cutofflab/profile.hpp"

// Bound engine: the entropy/varentropy inequalities and the mixing-window
// estimates for non-negatively curved diffusions, plus helpers that evaluate
// each of them along a sampled profile and report the worst margin.
namespace cutofflab::bounds {

enum class TimesMethod { ClosedFormBisection, ProfileInterpolation };
const char* to_string(TimesMethod m);

struct MixingTimesReport {
    double epsilon = 0.0;
    double t_early = 0.0;  // t_mix(1 - epsilon)
    double t_late = 0.0;   // t_mix(epsilon)
    double window = 0.0;   // t_late - t_early
    TimesMethod method = TimesMethod::ClosedFormBisection;
    std::string start;  // label of the initial state, for worst-case aggregation

    static MixingTimesReport make(double epsilon, double t_early, double t_late,
                                  TimesMethod method, std::string start = {});
};

struct BoundReport {
    std::string label;
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

    static BoundReport make(std::string label, double measured, double bound, double tolerance);
    nlohmann::ordered_json to_json() const;
    static BoundReport from_json(const nlohmann::json& j);
};

// Entropy upper bound (1 + sqrt(varent)) / (1 - tv). Throws for tv >= 1.
double reverse_pinsker(double varent, double tv);

// Time-propagated spectral estimate: t_mix(epsilon) <= t + (1 + Ent(X_t)) / (lambda epsilon).
double gap_mixing_bound(double ent_at_t, double t, double lambda, double epsilon);

// m(t) = dEnt/dt + Varent / (2t); nonpositive for non-negatively curved
// diffusions started from a point.
std::vector<double> lemma3_margins(const MixingProfile& profile);

// m(t) = dEnt/dt + kappa Varent; nonpositive under CD(kappa, inf). Throws if kappa == 0.
std::vector<double> lemma3_positive_margins(const MixingProfile& profile);

enum class Curvature { Nonnegative, Positive };

// Entropy ceiling after t0 = t_mix(1 - epsilon):
//   Nonnegative: 1/eps + 2 / (eps^2 log(t / t0))
//   Positive:    1/eps + 1 / (eps^2 kappa (t - t0))
double integrated_entropy_bound(double epsilon, double t0, double t, Curvature flavor,
                                double kappa = 0.0);

// 3 / (lambda eps^3) + 3 sqrt(t_early / (lambda eps^3))
double theorem1_window_bound(double lambda, double epsilon, double t_early);

// 3 / (kappa eps^2)
double theorem2_window_bound(double kappa, double epsilon);

// First crossings of 1 - epsilon and epsilon by linear interpolation of the
// sampled TV curve, after checking that the samples are non-increasing.
MixingTimesReport mixing_times_from_profile(const MixingProfile& profile, double epsilon);

double product_condition_stat(double lambda, double t_mix_value);

// t_early / t_late per report, in (0, 1].
std::vector<double> cutoff_ratio(std::span<const MixingTimesReport> reports);

// Entrywise maximum of t_early and t_late over a set of starts sharing epsilon.
MixingTimesReport worst_case_over_starts(std::span<const MixingTimesReport> reports);

// --- Checks along a profile. Each returns the sampled time with the smallest margin.

BoundReport check_reverse_pinsker(const MixingProfile& profile, double tolerance);
BoundReport check_lemma3(const MixingProfile& profile, double tolerance);
BoundReport check_lemma3_positive(const MixingProfile& profile, double tolerance);
BoundReport check_gap_mixing(const MixingProfile& profile, const MixingTimesReport& times,
                             double tolerance);
BoundReport check_integrated_entropy(const MixingProfile& profile, const MixingTimesReport& times,
                                     Curvature flavor, double tolerance);
BoundReport check_theorem1(const MixingTimesReport& times, double lambda, double tolerance);
BoundReport check_theorem2(const MixingTimesReport& times, double kappa, double tolerance);

}  // namespace cutofflab::bounds
