#include "cutofflab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "cutofflab/errors.hpp"
#include "cutofflab/fokker_planck.hpp"
#include "cutofflab/gaussian_ou.hpp"
#include "cutofflab/io.hpp"
#include "cutofflab/mc_oracle.hpp"

namespace cutofflab::experiments {

namespace {

using Clock = std::chrono::steady_clock;
using config::ExperimentConfig;

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Times one stage; an exception marks the stage failed and is swallowed.
bool stage(RunResult& result, const std::string& name, const std::function<void()>& body) {
    StageRecord rec{name, 0.0, true, {}};
    const auto t0 = Clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    result.stages.push_back(rec);
    return rec.ok;
}

bool wanted(const ExperimentConfig& c, const std::string& check) {
    return c.checks.empty() || std::find(c.checks.begin(), c.checks.end(), check) != c.checks.end();
}

// Model state shared by the stages of one run.
struct Built {
    std::optional<ou::OUModel> ou;
    std::optional<fp::WeightedGrid> grid;
    std::vector<double> f0;
    fp::SpectralReport spectral;
    std::optional<fp::DensityCurve> curve;
    std::optional<MixingProfile> half;  // profile from a start of width delta / 2
};

fp::EvolveOptions evolve_options(const ExperimentConfig& c) {
    fp::EvolveOptions o;
    o.dt_init = c.solver.dt_init;
    o.dt_max = c.solver.dt_max;
    o.growth = c.solver.growth;
    o.startup_implicit_steps = c.solver.startup_implicit_steps;
    return o;
}

ou::OUModel make_ou(const ExperimentConfig& c) {
    const auto& m = c.model;
    if (m.kind == config::ModelKind::Potential) return ou::OUModel::uniform_start(m.theta, 1, m.x0);
    if (m.start.size() == 1) return ou::OUModel::uniform_start(m.theta, m.dimension, m.start[0]);
    return ou::OUModel(m.theta, m.start);
}

std::string profile_csv(const MixingProfile& p) {
    std::string out = "t,tv,ent,varent,dent_dt\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (double v : {p.times[i], p.triples[i].tv, p.triples[i].ent, p.triples[i].varent}) {
            out += io::format_double(v);
            out += ',';
        }
        out += io::format_double(p.dent_dt[i]);
        out += '\n';
    }
    return out;
}

std::string cutoff_csv(const RunResult& r) {
    std::string out = "epsilon,t_early,t_late,window,ratio,lambda_t_late,method\n";
    for (const auto& t : r.times) {
        for (double v : {t.epsilon, t.t_early, t.t_late, t.window, t.t_early / t.t_late,
                         bounds::product_condition_stat(r.profile.lambda, t.t_late)}) {
            out += io::format_double(v);
            out += ',';
        }
        out += bounds::to_string(t.method);
        out += '\n';
    }
    return out;
}

// Leaves `r` untouched when the thresholds are not bracketed by the time grid;
// run_checks then reports the dependent checks as skipped.
void grid_mixing_times(const Built& built, double eps, RunResult& r) {
    GridTimes g;
    g.epsilon = eps;
    try {
        const auto full = bounds::mixing_times_from_profile(r.profile, eps);
        g.t_early_delta = full.t_early;
        g.t_late_delta = full.t_late;
        if (built.half) {
            const auto half = bounds::mixing_times_from_profile(*built.half, eps);
            g.t_early_half = half.t_early;
            g.t_late_half = half.t_late;
            g.extrapolated = true;
        }
    } catch (const BracketError&) {
        return;
    }
    double early = g.t_early_delta;
    double late = g.t_late_delta;
    if (g.extrapolated) {
        early = std::max(0.0, (4.0 * g.t_early_half - g.t_early_delta) / 3.0);
        late = (4.0 * g.t_late_half - g.t_late_delta) / 3.0;
    }
    r.times.push_back(bounds::MixingTimesReport::make(eps, early, late,
                                                      bounds::TimesMethod::ProfileInterpolation));
    r.grid_times.push_back(g);
}

void run_checks(const ExperimentConfig& c, const Built& built, RunResult& r) {
    const bool analytic = built.ou.has_value() && !built.grid.has_value();
    const double tol = analytic ? kAnalyticTolerance : kGridTolerance;
    const double strict = analytic ? kAnalyticStrictTolerance : kGridTolerance;
    const auto& p = r.profile;
    const bool positive = p.kappa > 0.0;
    std::vector<std::string> errors;

    auto skip = [&](const std::string& check, const std::string& reason) {
        if (wanted(c, check)) r.skipped.push_back({check, reason});
    };
    auto attempt = [&](const std::string& check, const std::function<void()>& body) {
        if (!wanted(c, check)) return;
        try {
            body();
        } catch (const BracketError& e) {
            r.skipped.push_back({check, e.what()});
        } catch (const std::exception& e) {
            errors.push_back(check + ": " + e.what());
        }
    };

    attempt("reverse_pinsker", [&] { r.reports.push_back(bounds::check_reverse_pinsker(p, strict)); });
    attempt("lemma3", [&] { r.reports.push_back(bounds::check_lemma3(p, strict)); });
    if (!analytic) {
        // Sensitivity of the 1/(2t) term to where the mollified start sits in time.
        const double offset = c.model.delta * c.model.delta;
        attempt("lemma3", [&] {
            const auto shifted = fp::profile(*built.curve, p.lambda, p.kappa, offset);
            auto rep = bounds::check_lemma3(shifted, strict);
            std::ostringstream label;
            label << "lemma3[t_offset=" << offset << "]";
            rep.label = label.str();
            rep.provenance["t_offset"] = offset;
            r.reports.push_back(rep);
        });
    }
    if (positive) {
        attempt("lemma3_positive",
                [&] { r.reports.push_back(bounds::check_lemma3_positive(p, strict)); });
    } else {
        skip("lemma3_positive", "curvature is not positive");
    }

    std::vector<double> bracketed;
    for (const auto& t : r.times) bracketed.push_back(t.epsilon);
    for (double eps : c.epsilons) {
        if (std::find(bracketed.begin(), bracketed.end(), eps) != bracketed.end()) continue;
        const std::string why = "mixing times for eps=" + io::format_double(eps) +
                                " are not bracketed by the time grid";
        for (const char* check : {"gap_mixing", "integrated_entropy", "integrated_entropy_positive",
                                  "theorem1", "theorem2"}) {
            skip(check, why);
        }
    }
    for (const auto& t : r.times) {
        attempt("gap_mixing", [&] { r.reports.push_back(bounds::check_gap_mixing(p, t, tol)); });
        attempt("integrated_entropy", [&] {
            r.reports.push_back(
                bounds::check_integrated_entropy(p, t, bounds::Curvature::Nonnegative, tol));
        });
        if (positive) {
            attempt("integrated_entropy_positive", [&] {
                r.reports.push_back(
                    bounds::check_integrated_entropy(p, t, bounds::Curvature::Positive, tol));
            });
        }
        attempt("theorem1",
                [&] { r.reports.push_back(bounds::check_theorem1(t, p.lambda, tol)); });
        if (positive) {
            attempt("theorem2",
                    [&] { r.reports.push_back(bounds::check_theorem2(t, p.kappa, tol)); });
        }
    }
    if (!positive) {
        skip("integrated_entropy_positive", "curvature is not positive");
        skip("theorem2", "curvature is not positive");
    }

    if (analytic) {
        skip("spectral_gap", "the closed-form gap is exact");
        skip("mc_histogram", "needs a grid density");
    } else {
        attempt("spectral_gap", [&] {
            // lambda >= kappa; `measured` is the curvature, `bound` the computed gap.
            auto rep = bounds::BoundReport::make("spectral_gap", p.kappa, p.lambda, kGridTolerance);
            rep.provenance["source"] = to_string(p.source);
            rep.provenance["resolution"] = p.resolution;
            rep.provenance["eigen_residual"] = built.spectral.eigen_residual;
            rep.provenance["kappa_numerical"] = built.grid->potential().kappa_numerical;
            r.reports.push_back(rep);
        });
        skip("mc_varentropy", "needs a Gaussian law");
    }

    if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
        throw Error(all);
    }
}

void run_mc(const ExperimentConfig& c, const Built& built, RunResult& r) {
    if (built.grid) {
        if (!wanted(c, "mc_histogram")) return;
        const auto& grid = *built.grid;
        const double t = c.mc.time;
        const std::vector<double> at{t};
        const auto curve = fp::evolve(grid, built.f0, at, evolve_options(c));
        const auto sde = mc::SdeConfig::langevin(grid.potential(), c.model.x0, t, c.mc.dt,
                                                 c.mc.paths, c.seed);
        const auto samples = mc::euler_maruyama(sde, c.workers);
        mc::HistogramOptions opts;
        opts.cells_per_bin = c.mc.cells_per_bin;
        opts.bootstrap_replicates = c.mc.bootstrap;
        opts.seed = c.seed ^ 0x9e3779b97f4a7c15ull;
        const auto est = mc::histogram_tv(samples, grid, curve.values.back(), opts);
        auto rep = bounds::BoundReport::make("mc_histogram", est.value, c.mc.tv_budget, 0.0);
        rep.provenance["t"] = t;
        rep.provenance["paths"] = c.mc.paths;
        rep.provenance["dt"] = sde.dt;
        rep.provenance["cells_per_bin"] = c.mc.cells_per_bin;
        rep.provenance["std_error"] = est.std_error;
        r.reports.push_back(rep);
        return;
    }
    if (!wanted(c, "mc_varentropy")) return;
    const auto& model = *built.ou;
    const auto& p = r.profile;
    // Worst of three sampled times, measured in standard errors.
    std::optional<bounds::BoundReport> worst;
    for (int q = 1; q <= 3; ++q) {
        const std::size_t i = p.size() * static_cast<std::size_t>(q) / 4;
        const auto law = ou::law_at(model, p.times[i]);
        const auto est = mc::mc_varentropy(law, model.stationary(), c.mc.varent_samples,
                                           c.seed + static_cast<std::uint64_t>(q));
        const double diff = std::abs(est.value - p.triples[i].varent);
        auto rep = bounds::BoundReport::make("mc_varentropy", diff, 3.0 * est.std_error, 0.0);
        rep.provenance["t"] = p.times[i];
        rep.provenance["closed_form"] = p.triples[i].varent;
        rep.provenance["estimate"] = est.value;
        rep.provenance["std_error"] = est.std_error;
        rep.provenance["samples"] = est.samples;
        if (!worst || rep.margin < worst->margin) worst = rep;
    }
    r.reports.push_back(*worst);
}

nlohmann::ordered_json manifest_json(const ExperimentConfig& c, const RunResult& r,
                                     const std::string& started) {
    nlohmann::ordered_json j;
    j["tool"] = "cutofflab";
    j["version"] = kToolVersion;
    j["config_hash"] = hex64(r.config_hash);
    j["config"] = c.to_json();
    j["started_at"] = started;
    auto& stages = j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : r.stages) {
        nlohmann::ordered_json e{{"name", s.name}, {"seconds", s.seconds}, {"ok", s.ok}};
        if (!s.ok) e["error"] = s.error;
        stages.push_back(e);
    }
    auto& artifacts = j["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : r.artifacts) artifacts.push_back(a.generic_string());
    artifacts.push_back("manifest.json");
    const std::size_t failed = r.failed_checks();
    j["summary"] = {{"checks", r.reports.size()},
                    {"passed", r.reports.size() - failed},
                    {"failed", failed},
                    {"skipped", r.skipped.size()},
                    {"stage_errors", static_cast<std::size_t>(std::count_if(
                                         r.stages.begin(), r.stages.end(),
                                         [](const StageRecord& s) { return !s.ok; }))},
                    {"ok", r.ok()}};
    return j;
}

}  // namespace

std::size_t RunResult::failed_checks() const {
    return static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(),
                                                  [](const auto& r) { return !r.passed; }));
}

bool RunResult::stage_failed() const {
    return std::any_of(stages.begin(), stages.end(), [](const auto& s) { return !s.ok; });
}

bool RunResult::ok() const { return failed_checks() == 0 && !stage_failed(); }

nlohmann::ordered_json bounds_json(const RunResult& r) {
    nlohmann::ordered_json j;
    j["source"] = to_string(r.profile.source);
    j["resolution"] = r.profile.resolution;
    j["lambda"] = r.profile.lambda;
    j["kappa"] = r.profile.kappa;
    auto& checks = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& rep : r.reports) checks.push_back(rep.to_json());
    auto& skipped = j["skipped"] = nlohmann::ordered_json::array();
    for (const auto& s : r.skipped) skipped.push_back({{"check", s.check}, {"reason", s.reason}});
    auto& times = j["mixing_times"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const auto& t = r.times[i];
        nlohmann::ordered_json e{{"epsilon", t.epsilon},
                                 {"t_early", t.t_early},
                                 {"t_late", t.t_late},
                                 {"window", t.window},
                                 {"method", bounds::to_string(t.method)}};
        if (i < r.grid_times.size()) {
            const auto& g = r.grid_times[i];
            e["extrapolated"] = g.extrapolated;
            e["t_early_delta"] = g.t_early_delta;
            e["t_late_delta"] = g.t_late_delta;
            if (g.extrapolated) {
                e["t_early_half_delta"] = g.t_early_half;
                e["t_late_half_delta"] = g.t_late_half;
            }
        }
        times.push_back(e);
    }
    const std::size_t failed = r.failed_checks();
    j["summary"] = {{"checks", r.reports.size()},
                    {"passed", r.reports.size() - failed},
                    {"failed", failed},
                    {"skipped", r.skipped.size()}};
    return j;
}

RunResult run(const ExperimentConfig& c) {
    c.validate();
    RunResult r;
    r.output_dir = c.outputs;
    r.config_hash = c.hash();
    const std::string started = utc_timestamp();
    Built built;
    const auto times = c.time_grid.times();

    bool ok = stage(r, "model", [&] {
        if (c.analytic()) {
            built.ou = make_ou(c);
            return;
        }
        const auto pot = c.make_potential();
        const double R = c.model.R.value_or(fp::choose_radius(pot));
        built.grid = fp::build_grid(pot, R, c.model.n);
        built.spectral = fp::spectral_gap_numeric(*built.grid);
        built.f0 = fp::dirac_approx(*built.grid, c.model.x0, c.model.delta);
    });

    if (ok) {
        ok = stage(r, "profile", [&] {
            if (built.ou) {
                r.profile = ou::profile(*built.ou, times);
            } else {
                const auto curve = fp::evolve(*built.grid, built.f0, times, evolve_options(c));
                built.curve = curve;
                r.profile = fp::profile(curve, built.spectral.lambda,
                                        built.grid->potential().kappa);
            }
            r.profile.validate();
        });
    }

    if (ok) {
        stage(r, "mixing_times", [&] {
            if (built.grid) {
                // Second start width for the extrapolation; an under-resolved bump
                // leaves the delta-only times in place.
                try {
                    const auto f_half =
                        fp::dirac_approx(*built.grid, c.model.x0, 0.5 * c.model.delta);
                    const auto curve = fp::evolve(*built.grid, f_half, times, evolve_options(c));
                    built.half = fp::profile(curve, r.profile.lambda, r.profile.kappa);
                } catch (const InvalidArgument&) {
                    built.half.reset();
                }
            }
            for (double eps : c.epsilons) {
                if (built.ou) {
                    const double early = ou::mixing_time(*built.ou, 1.0 - eps);
                    const double late = ou::mixing_time(*built.ou, eps);
                    r.times.push_back(bounds::MixingTimesReport::make(
                        eps, early, late, bounds::TimesMethod::ClosedFormBisection));
                } else {
                    grid_mixing_times(built, eps, r);
                }
            }
        });
        stage(r, "checks", [&] { run_checks(c, built, r); });
        stage(r, "monte_carlo", [&] { run_mc(c, built, r); });
    }

    // Writing is not a recorded stage: a run whose outputs cannot be written throws.
    const auto& out = c.outputs;
    const auto t0 = Clock::now();
    if (ok) {
        io::write_file_atomic(out / "curves" / "profile.csv", profile_csv(r.profile));
        r.artifacts.emplace_back("curves/profile.csv");
    }
    io::write_file_atomic(out / "reports" / "bounds.json", bounds_json(r).dump(2) + "\n");
    r.artifacts.emplace_back("reports/bounds.json");
    io::write_file_atomic(out / "reports" / "cutoff.csv", cutoff_csv(r));
    r.artifacts.emplace_back("reports/cutoff.csv");
    r.stages.push_back(
        {"write", std::chrono::duration<double>(Clock::now() - t0).count(), true, {}});
    io::write_file_atomic(out / "manifest.json", manifest_json(c, r, started).dump(2) + "\n");
    r.artifacts.emplace_back("manifest.json");
    return r;
}

bool SweepResult::ok() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const SweepEntry& e) { return e.error.empty() && e.result.ok(); });
}

ExperimentConfig sweep_point(const ExperimentConfig& base, const std::string& axis, double value) {
    ExperimentConfig c = base;
    c.sweep = {};
    c.outputs = base.outputs / (axis + "=" + io::format_double(value));
    auto& m = c.model;
    const bool ou_model = m.kind == config::ModelKind::OU;
    auto integer = [&](const char* what) {
        if (!(value >= 1.0 && std::floor(value) == value)) {
            throw ConfigError(std::string("sweep: ") + what + " values must be positive integers");
        }
        return static_cast<std::size_t>(value);
    };
    if (axis == "dimension") {
        if (!ou_model) throw ConfigError("sweep: the dimension axis needs model type 'ou'");
        m.dimension = integer("dimension");
        if (m.start.size() != 1) throw ConfigError("sweep: dimension axis needs a scalar start");
    } else if (axis == "theta") {
        m.theta = value;
    } else if (axis == "x0_scale") {
        if (ou_model) {
            for (double& s : m.start) s *= value;
        } else {
            m.x0 *= value;
        }
    } else if (axis == "n") {
        if (ou_model) throw ConfigError("sweep: the n axis needs model type 'potential'");
        m.n = integer("n");
    } else if (axis == "delta") {
        if (ou_model) throw ConfigError("sweep: the delta axis needs model type 'potential'");
        m.delta = value;
    } else {
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    }
    c.validate();
    return c;
}

double log_fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("log_fit_slope: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        sx += lx;
        sy += y[i];
        sxx += lx * lx;
        sxy += lx * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<double>& values) {
    base.validate();
    if (values.empty()) throw ConfigError("sweep: no values");
    SweepResult s;
    s.axis = axis;
    s.output_dir = base.outputs / "sweep";
    s.entries.resize(values.size());
    const unsigned workers =
        std::max(1u, std::min<unsigned>(base.workers, static_cast<unsigned>(values.size())));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            auto& e = s.entries[i];
            e.value = values[i];
            try {
                e.config = sweep_point(base, axis, values[i]);
                // Threads go to entries; a single-worker sweep leaves them to the MC stage.
                if (workers > 1) e.config.workers = 1;
                e.result = run(e.config);
            } catch (const std::exception& ex) {
                e.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    // Combined cutoff table and verdict.
    std::string csv = "axis,value,epsilon,t_early,t_late,ratio,lambda_t_mix,status\n";
    nlohmann::ordered_json v;
    v["axis"] = axis;
    v["values"] = values;
    auto& gaps = v["gaps"] = nlohmann::ordered_json::array();
    for (const auto& e : s.entries) {
        const bool failed = !e.error.empty() || e.result.stage_failed();
        for (double eps : base.epsilons) {
            const auto it = std::find_if(e.result.times.begin(), e.result.times.end(),
                                         [&](const auto& t) { return t.epsilon == eps; });
            csv += axis + "," + io::format_double(e.value) + "," + io::format_double(eps) + ",";
            if (failed || it == e.result.times.end()) {
                csv += ",,,,";
                csv += failed ? "error\n" : "unbracketed\n";
                gaps.push_back({{"value", e.value}, {"epsilon", eps},
                                {"reason", failed ? (e.error.empty() ? "stage error" : e.error)
                                                  : "mixing times not bracketed"}});
                continue;
            }
            for (double x : {it->t_early, it->t_late, it->t_early / it->t_late,
                             bounds::product_condition_stat(e.result.profile.lambda, it->t_late)}) {
                csv += io::format_double(x);
                csv += ',';
            }
            csv += e.result.ok() ? "ok\n" : "check-failed\n";
        }
    }

    bool monotone = true;
    auto& per_eps = v["per_epsilon"] = nlohmann::ordered_json::array();
    for (double eps : base.epsilons) {
        std::vector<double> xs, ratio, product;
        for (const auto& e : s.entries) {
            const auto it = std::find_if(e.result.times.begin(), e.result.times.end(),
                                         [&](const auto& t) { return t.epsilon == eps; });
            if (!e.error.empty() || it == e.result.times.end()) continue;
            xs.push_back(e.value);
            ratio.push_back(it->t_early / it->t_late);
            product.push_back(bounds::product_condition_stat(e.result.profile.lambda, it->t_late));
        }
        auto increasing = [](const std::vector<double>& a) {
            for (std::size_t i = 1; i < a.size(); ++i) {
                if (!(a[i] > a[i - 1])) return false;
            }
            return true;
        };
        nlohmann::ordered_json row;
        row["epsilon"] = eps;
        row["ratio"] = ratio;
        row["ratio_increasing"] = increasing(ratio);
        row["lambda_t_mix"] = product;
        row["lambda_t_mix_increasing"] = increasing(product);
        if (axis == "dimension" && xs.size() >= 2) row["lambda_t_mix_log_slope"] = log_fit_slope(xs, product);
        monotone = monotone && increasing(ratio);
        per_eps.push_back(row);
    }
    v["ratio_increasing"] = monotone;

    nlohmann::ordered_json max_margin = nlohmann::ordered_json::array();
    nlohmann::ordered_json mean_margin = nlohmann::ordered_json::array();
    for (const auto& e : s.entries) {
        if (!e.error.empty() || e.result.profile.size() == 0) {
            max_margin.push_back(nullptr);
            mean_margin.push_back(nullptr);
            continue;
        }
        const auto m = bounds::lemma3_margins(e.result.profile);
        double sum = 0.0;
        for (double x : m) sum += x;
        max_margin.push_back(*std::max_element(m.begin(), m.end()));
        mean_margin.push_back(sum / static_cast<double>(m.size()));
    }
    v["lemma3_max_margin"] = max_margin;
    v["lemma3_mean_margin"] = mean_margin;
    if (axis == "n") {
        // Under refinement every sampled margin should move down (1e-12 slack).
        bool pointwise = true;
        bool mean_down = true;
        for (std::size_t i = 1; i < s.entries.size(); ++i) {
            const auto& a = s.entries[i - 1];
            const auto& b = s.entries[i];
            if (!a.error.empty() || !b.error.empty() || a.result.profile.size() == 0 ||
                a.result.profile.times != b.result.profile.times) {
                pointwise = mean_down = false;
                break;
            }
            const auto ma = bounds::lemma3_margins(a.result.profile);
            const auto mb = bounds::lemma3_margins(b.result.profile);
            for (std::size_t k = 0; k < ma.size(); ++k) pointwise = pointwise && mb[k] <= ma[k] + 1e-12;
            mean_down = mean_down && mean_margin[i].get<double>() < mean_margin[i - 1].get<double>();
        }
        v["lemma3_margins_nonincreasing"] = pointwise;
        v["lemma3_mean_margin_decreasing"] = mean_down;
    }
    v["runs_ok"] = s.ok();
    s.verdict = v;

    io::write_file_atomic(s.output_dir / "cutoff.csv", csv);
    io::write_file_atomic(s.output_dir / "verdict.json", v.dump(2) + "\n");
    return s;
}

}  // namespace cutofflab::experiments
