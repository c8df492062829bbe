#include "cutofflab/mixing_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "cutofflab/errors.hpp"

namespace cutofflab {

std::vector<double> MixingProfile::tv_curve() const {
    std::vector<double> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back(t.tv);
    return out;
}

std::vector<double> MixingProfile::ent_curve() const {
    std::vector<double> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back(t.ent);
    return out;
}

void MixingProfile::validate() const {
    if (triples.size() != times.size()) throw InvalidArgument("profile: triples/times size mismatch");
    if (!dent_dt.empty() && dent_dt.size() != times.size()) {
        throw InvalidArgument("profile: dent_dt/times size mismatch");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw InvalidArgument("profile: times must be > 0");
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw InvalidArgument("profile: times must be strictly increasing");
        }
    }
    if (!(lambda > 0.0)) throw InvalidArgument("profile: lambda must be > 0");
    if (!(kappa >= 0.0)) throw InvalidArgument("profile: kappa must be >= 0");
}

}  // namespace cutofflab

namespace cutofflab::bounds {

namespace {

void require_epsilon(double epsilon, double upper) {
    if (!(epsilon > 0.0 && epsilon < upper)) {
        throw InvalidArgument("epsilon = " + std::to_string(epsilon) + " outside (0, " +
                              std::to_string(upper) + ")");
    }
}

// The window and entropy formulas stay finite at epsilon = 1/2.
void require_formula_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) {
        throw InvalidArgument("epsilon = " + std::to_string(epsilon) + " outside (0, 0.5]");
    }
}

struct Worst {
    std::optional<std::size_t> index;
    double measured = 0.0;
    double bound = 0.0;

    void offer(std::size_t i, double m, double b) {
        if (!index || b - m < bound - measured) {
            index = i;
            measured = m;
            bound = b;
        }
    }
};

BoundReport finish(std::string label, const Worst& worst, const MixingProfile& profile,
                   double tolerance) {
    if (!worst.index) throw BracketError(label + ": no sampled time to evaluate");
    auto report = BoundReport::make(std::move(label), worst.measured, worst.bound, tolerance);
    report.provenance["source"] = to_string(profile.source);
    report.provenance["resolution"] = profile.resolution;
    report.provenance["t_worst"] = profile.times[*worst.index];
    report.provenance["samples"] = profile.size();
    return report;
}

std::string with_epsilon(const std::string& name, double epsilon) {
    std::ostringstream s;
    s << name << "[eps=" << epsilon << "]";
    return s.str();
}

}  // namespace

const char* to_string(TimesMethod m) {
    return m == TimesMethod::ClosedFormBisection ? "closed-form-bisection" : "profile-interpolation";
}

MixingTimesReport MixingTimesReport::make(double epsilon, double t_early, double t_late,
                                          TimesMethod method, std::string start) {
    if (!(t_early <= t_late)) {
        throw InvalidArgument("mixing times: t_mix(1-eps) exceeds t_mix(eps)");
    }
    return {epsilon, t_early, t_late, t_late - t_early, method, std::move(start)};
}

BoundReport BoundReport::make(std::string label, double measured, double bound, double tolerance) {
    BoundReport r;
    r.label = std::move(label);
    r.measured = measured;
    r.bound = bound;
    r.margin = bound - measured;
    r.tolerance = tolerance;
    r.passed = r.margin >= -tolerance;
    return r;
}

nlohmann::ordered_json BoundReport::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["measured"] = measured;
    j["bound"] = bound;
    j["margin"] = margin;
    j["tolerance"] = tolerance;
    j["passed"] = passed;
    j["provenance"] = provenance;
    return j;
}

BoundReport BoundReport::from_json(const nlohmann::json& j) {
    BoundReport r;
    r.label = j.at("label").get<std::string>();
    r.measured = j.at("measured").get<double>();
    r.bound = j.at("bound").get<double>();
    r.margin = j.at("margin").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.passed = j.at("passed").get<bool>();
    if (j.contains("provenance")) r.provenance = j.at("provenance");
    return r;
}

double reverse_pinsker(double varent, double tv) {
    if (!(varent >= 0.0)) throw InvalidArgument("reverse_pinsker: varent must be >= 0");
    if (!(tv >= 0.0)) throw InvalidArgument("reverse_pinsker: tv must be >= 0");
    if (!(tv < 1.0)) throw InvalidArgument("reverse_pinsker: vacuous for tv >= 1");
    return (1.0 + std::sqrt(varent)) / (1.0 - tv);
}

double gap_mixing_bound(double ent_at_t, double t, double lambda, double epsilon) {
    if (!(lambda > 0.0)) throw InvalidArgument("gap_mixing_bound: lambda must be > 0");
    require_epsilon(epsilon, 1.0);
    if (!(ent_at_t >= 0.0) || !(t >= 0.0)) {
        throw InvalidArgument("gap_mixing_bound: entropy and time must be >= 0");
    }
    return t + (1.0 + ent_at_t) / (lambda * epsilon);
}

std::vector<double> lemma3_margins(const MixingProfile& profile) {
    if (profile.dent_dt.size() != profile.size()) {
        throw InvalidArgument("lemma3_margins: profile has no dEnt/dt data");
    }
    std::vector<double> out(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out[i] = profile.dent_dt[i] + profile.triples[i].varent / (2.0 * profile.times[i]);
    }
    return out;
}

std::vector<double> lemma3_positive_margins(const MixingProfile& profile) {
    if (!(profile.kappa > 0.0)) {
        throw InvalidArgument("lemma3_positive_margins: requires kappa > 0");
    }
    if (profile.dent_dt.size() != profile.size()) {
        throw InvalidArgument("lemma3_positive_margins: profile has no dEnt/dt data");
    }
    std::vector<double> out(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out[i] = profile.dent_dt[i] + profile.kappa * profile.triples[i].varent;
    }
    return out;
}

double integrated_entropy_bound(double epsilon, double t0, double t, Curvature flavor,
                                double kappa) {
    require_formula_epsilon(epsilon);
    if (!(t0 > 0.0)) throw InvalidArgument("integrated_entropy_bound: t0 must be > 0");
    if (!(t > t0)) throw InvalidArgument("integrated_entropy_bound: requires t > t0");
    const double e2 = epsilon * epsilon;
    if (flavor == Curvature::Nonnegative) {
        return 1.0 / epsilon + 2.0 / (e2 * std::log(t / t0));
    }
    if (!(kappa > 0.0)) throw InvalidArgument("integrated_entropy_bound: kappa must be > 0");
    return 1.0 / epsilon + 1.0 / (e2 * kappa * (t - t0));
}

double theorem1_window_bound(double lambda, double epsilon, double t_early) {
    if (!(lambda > 0.0)) throw InvalidArgument("theorem1_window_bound: lambda must be > 0");
    require_formula_epsilon(epsilon);
    if (!(t_early >= 0.0)) throw InvalidArgument("theorem1_window_bound: t_early must be >= 0");
    const double scale = lambda * epsilon * epsilon * epsilon;
    return 3.0 / scale + 3.0 * std::sqrt(t_early / scale);
}

double theorem2_window_bound(double kappa, double epsilon) {
    if (!(kappa > 0.0)) throw InvalidArgument("theorem2_window_bound: kappa must be > 0");
    require_formula_epsilon(epsilon);
    return 3.0 / (kappa * epsilon * epsilon);
}

MixingTimesReport mixing_times_from_profile(const MixingProfile& profile, double epsilon) {
    require_epsilon(epsilon, 0.5);
    const auto tv = profile.tv_curve();
    if (tv.size() < 2) throw BracketError("mixing_times_from_profile: need at least two samples");
    for (std::size_t i = 1; i < tv.size(); ++i) {
        if (tv[i] > tv[i - 1] + 1e-9) {
            throw MonotonicityError("mixing_times_from_profile: TV increases at t = " +
                                    std::to_string(profile.times[i]));
        }
    }
    auto crossing = [&](double level) {
        if (tv.front() <= level) {
            throw BracketError("mixing_times_from_profile: TV is already below " +
                               std::to_string(level) +
                               " at the first sample; extend the time grid toward 0");
        }
        for (std::size_t i = 1; i < tv.size(); ++i) {
            if (tv[i] <= level) {
                const double t0 = profile.times[i - 1];
                const double t1 = profile.times[i];
                const double frac = (tv[i - 1] - level) / (tv[i - 1] - tv[i]);
                return t0 + frac * (t1 - t0);
            }
        }
        throw BracketError("mixing_times_from_profile: TV never reaches " + std::to_string(level) +
                           "; extend the time grid");
    };
    const double early = crossing(1.0 - epsilon);
    const double late = crossing(epsilon);
    return MixingTimesReport::make(epsilon, early, late, TimesMethod::ProfileInterpolation);
}

double product_condition_stat(double lambda, double t_mix_value) {
    if (!(lambda > 0.0) || !(t_mix_value > 0.0)) {
        throw InvalidArgument("product_condition_stat: arguments must be > 0");
    }
    return lambda * t_mix_value;
}

std::vector<double> cutoff_ratio(std::span<const MixingTimesReport> reports) {
    if (reports.empty()) throw InvalidArgument("cutoff_ratio: empty report list");
    std::vector<double> out;
    for (const auto& r : reports) {
        if (!(r.t_late > 0.0)) throw InvalidArgument("cutoff_ratio: t_mix(eps) must be > 0");
        out.push_back(r.t_early / r.t_late);
    }
    return out;
}

MixingTimesReport worst_case_over_starts(std::span<const MixingTimesReport> reports) {
    if (reports.empty()) throw InvalidArgument("worst_case_over_starts: empty start set");
    MixingTimesReport out = reports.front();
    for (const auto& r : reports) {
        if (r.epsilon != out.epsilon) {
            throw InvalidArgument("worst_case_over_starts: reports mix epsilon values");
        }
        out.t_early = std::max(out.t_early, r.t_early);
        out.t_late = std::max(out.t_late, r.t_late);
    }
    out.window = out.t_late - out.t_early;
    out.start = reports.size() == 1 ? reports.front().start : "worst-case";
    return out;
}

BoundReport check_reverse_pinsker(const MixingProfile& profile, double tolerance) {
    Worst worst;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const auto& tr = profile.triples[i];
        if (tr.tv >= 1.0) continue;
        worst.offer(i, tr.ent, reverse_pinsker(tr.varent, tr.tv));
    }
    return finish("reverse_pinsker", worst, profile, tolerance);
}

BoundReport check_lemma3(const MixingProfile& profile, double tolerance) {
    const auto margins = lemma3_margins(profile);
    Worst worst;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        worst.offer(i, profile.dent_dt[i], profile.dent_dt[i] - margins[i]);
    }
    return finish("lemma3", worst, profile, tolerance);
}

BoundReport check_lemma3_positive(const MixingProfile& profile, double tolerance) {
    const auto margins = lemma3_positive_margins(profile);
    Worst worst;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        worst.offer(i, profile.dent_dt[i], profile.dent_dt[i] - margins[i]);
    }
    auto r = finish("lemma3_positive", worst, profile, tolerance);
    r.provenance["kappa"] = profile.kappa;
    return r;
}

BoundReport check_gap_mixing(const MixingProfile& profile, const MixingTimesReport& times,
                             double tolerance) {
    Worst worst;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        worst.offer(i, times.t_late,
                    gap_mixing_bound(profile.triples[i].ent, profile.times[i], profile.lambda,
                                     times.epsilon));
    }
    auto r = finish(with_epsilon("gap_mixing", times.epsilon), worst, profile, tolerance);
    r.provenance["lambda"] = profile.lambda;
    r.provenance["times_method"] = to_string(times.method);
    return r;
}

BoundReport check_integrated_entropy(const MixingProfile& profile, const MixingTimesReport& times,
                                     Curvature flavor, double tolerance) {
    Worst worst;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double t = profile.times[i];
        if (!(t > times.t_early)) continue;
        worst.offer(i, profile.triples[i].ent,
                    integrated_entropy_bound(times.epsilon, times.t_early, t, flavor,
                                             profile.kappa));
    }
    const char* name = flavor == Curvature::Nonnegative ? "integrated_entropy"
                                                        : "integrated_entropy_positive";
    auto r = finish(with_epsilon(name, times.epsilon), worst, profile, tolerance);
    r.provenance["t0"] = times.t_early;
    return r;
}

BoundReport check_theorem1(const MixingTimesReport& times, double lambda, double tolerance) {
    auto r = BoundReport::make(with_epsilon("theorem1_window", times.epsilon), times.window,
                               theorem1_window_bound(lambda, times.epsilon, times.t_early),
                               tolerance);
    r.provenance["lambda"] = lambda;
    r.provenance["t_early"] = times.t_early;
    r.provenance["t_late"] = times.t_late;
    r.provenance["times_method"] = to_string(times.method);
    return r;
}

BoundReport check_theorem2(const MixingTimesReport& times, double kappa, double tolerance) {
    auto r = BoundReport::make(with_epsilon("theorem2_window", times.epsilon), times.window,
                               theorem2_window_bound(kappa, times.epsilon), tolerance);
    r.provenance["kappa"] = kappa;
    r.provenance["t_early"] = times.t_early;
    r.provenance["t_late"] = times.t_late;
    r.provenance["times_method"] = to_string(times.method);
    return r;
}

}  // namespace cutofflab::bounds
