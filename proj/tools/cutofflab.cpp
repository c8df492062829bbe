// cutofflab: run, sweep, validate and summarize mixing-bound experiments.
//
//   cutofflab run --config configs/ou_reference.yaml --out out/ou
//   cutofflab sweep --config configs/ou_dimension_sweep.yaml --workers 4
//   cutofflab validate --config my.yaml --set epsilons=[0.1,0.2]
//   cutofflab summarize out/ou/reports/bounds.json
//
// Exit codes: 0 success, 1 a check failed or a stage errored, 2 usage or config error.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cutofflab/config.hpp"
#include "cutofflab/errors.hpp"
#include "cutofflab/experiments.hpp"
#include "cutofflab/io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cutofflab;

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2 };

enum class Verbosity { Quiet, Normal, Verbose };

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    unsigned workers = 0;
    std::string out;
    bool quiet = false;
    bool verbose = false;
    std::string axis;
    std::vector<double> values;
    std::string bounds_path;

    Verbosity verbosity() const {
        if (quiet) return Verbosity::Quiet;
        return verbose ? Verbosity::Verbose : Verbosity::Normal;
    }
};

unsigned env_workers() {
    const char* v = std::getenv("CUTOFFLAB_WORKERS");
    if (!v || !*v) return 0;
    try {
        const long n = std::stol(v);
        return n > 0 ? static_cast<unsigned>(n) : 0;
    } catch (...) {
        return 0;
    }
}

config::ExperimentConfig load_config(const Options& o) {
    std::vector<config::Override> overrides;
    for (const auto& s : o.overrides) overrides.push_back(config::parse_override(s));
    auto c = config::load(o.config_path, overrides);
    if (!o.out.empty()) c.outputs = o.out;
    if (o.workers > 0) {
        c.workers = o.workers;
    } else if (const unsigned w = env_workers(); w > 0) {
        c.workers = w;
    }
    return c;
}

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

// Aligned table of a bounds.json payload; returns the number of failed rows.
std::size_t print_table(const nlohmann::json& bounds, std::ostream& os) {
    std::vector<std::vector<std::string>> rows{
        {"", "status", "check", "measured", "bound", "margin", "tolerance"}};
    std::size_t failed = 0;
    for (const auto& j : bounds.at("checks")) {
        const auto r = bounds::BoundReport::from_json(j);
        if (!r.passed) ++failed;
        rows.push_back({r.passed ? "" : ">>", r.passed ? "PASS" : "FAIL", r.label, num(r.measured),
                        num(r.bound), num(r.margin), num(r.tolerance)});
    }
    std::vector<std::size_t> width(rows[0].size(), 0);
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    }
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            // Text columns left-aligned, numbers right-aligned.
            if (k < 3) {
                os << std::left << std::setw(static_cast<int>(width[k])) << row[k];
            } else {
                os << std::right << std::setw(static_cast<int>(width[k])) << row[k];
            }
            os << (k + 1 < row.size() ? "  " : "\n");
        }
    }
    if (bounds.contains("skipped")) {
        for (const auto& s : bounds.at("skipped")) {
            os << "    SKIP  " << s.at("check").get<std::string>() << ": "
               << s.at("reason").get<std::string>() << "\n";
        }
    }
    os << failed << " of " << bounds.at("checks").size() << " checks failed\n";
    return failed;
}

void print_stages(const experiments::RunResult& r, std::ostream& os) {
    for (const auto& s : r.stages) {
        os << "  stage " << std::left << std::setw(14) << s.name << std::right << std::fixed
           << std::setprecision(3) << s.seconds << " s" << (s.ok ? "" : "  ERROR: " + s.error)
           << "\n";
        os.unsetf(std::ios::fixed);
    }
}

int report_run(const experiments::RunResult& r, Verbosity v) {
    if (v != Verbosity::Quiet) {
        print_table(experiments::bounds_json(r), std::cout);
        std::cout << "outputs: " << r.output_dir.string() << "\n";
    }
    if (v == Verbosity::Verbose) print_stages(r, std::cout);
    for (const auto& s : r.stages) {
        if (!s.ok) std::cerr << "stage " << s.name << " failed: " << s.error << "\n";
    }
    return r.ok() ? kOk : kCheckFailed;
}

int cmd_run(const Options& o) {
    const auto c = load_config(o);
    return report_run(experiments::run(c), o.verbosity());
}

int cmd_sweep(const Options& o) {
    const auto c = load_config(o);
    const std::string axis = o.axis.empty() ? c.sweep.axis : o.axis;
    const auto values = o.values.empty() ? c.sweep.values : o.values;
    if (axis.empty() || values.empty()) {
        throw ConfigError("sweep needs an axis and values (--axis/--values or a sweep section)");
    }
    const auto s = experiments::sweep(c, axis, values);
    const auto v = o.verbosity();
    for (const auto& e : s.entries) {
        if (!e.error.empty()) {
            std::cerr << axis << "=" << io::format_double(e.value) << " failed: " << e.error << "\n";
            continue;
        }
        if (v != Verbosity::Quiet) {
            std::cout << axis << "=" << io::format_double(e.value) << ": "
                      << (e.result.ok() ? "ok" : "FAILED") << " ("
                      << e.result.reports.size() - e.result.failed_checks() << "/"
                      << e.result.reports.size() << " checks passed)\n";
        }
        if (v == Verbosity::Verbose) print_stages(e.result, std::cout);
    }
    if (v != Verbosity::Quiet) {
        std::cout << "ratio increasing: " << (s.verdict.at("ratio_increasing").get<bool>() ? "yes" : "no")
                  << "\ncombined report: " << (s.output_dir / "cutoff.csv").string() << "\n";
    }
    return s.ok() ? kOk : kCheckFailed;
}

int cmd_validate(const Options& o) {
    const auto c = load_config(o);
    if (o.verbosity() != Verbosity::Quiet) {
        std::cout << "ok: " << c.name << " (config hash " << std::hex << c.hash() << std::dec
                  << ", " << (c.analytic() ? "closed-form" : "grid") << " route)\n";
    }
    if (o.verbosity() == Verbosity::Verbose) std::cout << c.to_json().dump(2) << "\n";
    return kOk;
}

int cmd_summarize(const Options& o) {
    fs::path p = o.bounds_path;
    if (fs::is_directory(p)) p = p / "reports" / "bounds.json";
    nlohmann::json bounds;
    try {
        bounds = nlohmann::json::parse(io::read_file(p));
        const std::size_t failed = print_table(bounds, std::cout);
        return failed == 0 ? kOk : kCheckFailed;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "cutofflab: " << p.string() << " is not a bounds report: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy, varentropy and mixing-window bounds for Langevin diffusions"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_flag("-q,--quiet", o.quiet, "Only print errors");
    app.add_flag("-v,--verbose", o.verbose, "Also print stage timings");

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "Experiment config (YAML)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--set", o.overrides, "Override a config key, e.g. model.theta=2")
            ->allow_extra_args(false);
    };
    auto add_exec = [&](CLI::App* sub) {
        sub->add_option("-w,--workers", o.workers,
                        "Worker threads (default: $CUTOFFLAB_WORKERS, then the config)")
            ->check(CLI::PositiveNumber);
        sub->add_option("-o,--out", o.out, "Output directory (overrides `outputs`)");
    };

    auto* run = app.add_subcommand("run", "Run one experiment");
    add_config(run);
    add_exec(run);
    auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a parameter");
    add_config(sweep);
    add_exec(sweep);
    sweep->add_option("--axis", o.axis, "dimension, theta, x0_scale, n or delta");
    sweep->add_option("--values", o.values, "Comma-separated values")->delimiter(',');
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    add_config(validate);
    auto* summarize = app.add_subcommand("summarize", "Print a bounds report as a table");
    summarize->add_option("report", o.bounds_path, "bounds.json or a run output directory")
        ->required()
        ->check(CLI::ExistingPath);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string what = e.what();
        if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
            what = std::string("unknown subcommand '") + argv[1] + "'";
        }
        std::cerr << "cutofflab: " << what << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (*run) return cmd_run(o);
        if (*sweep) return cmd_sweep(o);
        if (*validate) return cmd_validate(o);
        return cmd_summarize(o);
    } catch (const ConfigError& e) {
        std::cerr << "cutofflab: config error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "cutofflab: " << e.what() << "\n";
        return kCheckFailed;
    }
}
