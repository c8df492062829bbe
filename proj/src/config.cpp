#include "cutofflab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include <yaml-cpp/yaml.h>

#include "cutofflab/errors.hpp"
#include "cutofflab/io.hpp"

namespace cutofflab::config {

namespace {

const std::vector<std::string> kSections{"model", "solver", "time_grid", "mc", "sweep"};

using Fail = std::function<void(const std::string& key, const std::string& message)>;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_all(const ExperimentConfig& c, const Fail& fail) {
    const auto& m = c.model;
    if (!finite_positive(m.theta)) fail("model.theta", "must be a positive number");
    if (m.kind == ModelKind::OU) {
        if (m.dimension < 1) fail("model.dimension", "must be >= 1");
        if (m.start.size() != 1 && m.start.size() != m.dimension) {
            fail("model.start", "needs one entry or `dimension` entries");
        }
        for (double v : m.start) {
            if (!std::isfinite(v)) fail("model.start", "entries must be finite");
        }
    } else {
        static const std::set<std::string> names{"ou", "quartic", "ou+quartic", "polynomial"};
        if (!names.count(m.potential)) {
            fail("model.potential", "unknown potential '" + m.potential +
                                        "' (expected ou, quartic, ou+quartic or polynomial)");
        }
        if (m.potential == "polynomial" && m.coefficients.empty()) {
            fail("model.coefficients", "polynomial potential needs coefficients");
        }
        if (m.potential != "polynomial" && !m.coefficients.empty()) {
            fail("model.coefficients", "only used by the polynomial potential");
        }
        for (double v : m.coefficients) {
            if (!std::isfinite(v)) fail("model.coefficients", "entries must be finite");
        }
        if (!(std::isfinite(m.quartic) && m.quartic >= 0.0)) {
            fail("model.quartic", "must be >= 0");
        }
        if (m.R && !finite_positive(*m.R)) fail("model.R", "must be > 0");
        if (m.n < 16) fail("model.n", "must be >= 16");
        if (!finite_positive(m.delta)) fail("model.delta", "must be > 0");
        if (!std::isfinite(m.x0)) fail("model.x0", "must be finite");
    }

    const auto& s = c.solver;
    if (!finite_positive(s.dt_init)) fail("solver.dt_init", "must be > 0");
    if (!finite_positive(s.dt_max) || s.dt_max < s.dt_init) {
        fail("solver.dt_max", "must be >= solver.dt_init");
    }
    if (!(std::isfinite(s.growth) && s.growth >= 1.0)) fail("solver.growth", "must be >= 1");
    if (s.startup_implicit_steps < 0) fail("solver.startup_implicit_steps", "must be >= 0");

    const auto& g = c.time_grid;
    if (!finite_positive(g.t_min)) fail("time_grid.t_min", "must be > 0");
    if (!(std::isfinite(g.t_max) && g.t_max > g.t_min)) {
        fail("time_grid.t_max", "must exceed time_grid.t_min");
    }
    if (g.points < 2) fail("time_grid.points", "must be >= 2");

    if (c.epsilons.empty()) fail("epsilons", "at least one epsilon is required");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        const double e = c.epsilons[i];
        if (!(e > 0.0 && e < 0.5)) {
            fail("epsilons." + std::to_string(i),
                 "epsilon " + io::format_double(e) + " is outside (0, 1/2)");
        }
    }
    const auto& known = check_names();
    for (std::size_t i = 0; i < c.checks.size(); ++i) {
        if (std::find(known.begin(), known.end(), c.checks[i]) == known.end()) {
            fail("checks." + std::to_string(i), "unknown check '" + c.checks[i] + "'");
        }
    }
    if (c.workers < 1) fail("workers", "must be >= 1");
    if (c.outputs.empty()) fail("outputs", "must be a directory path");

    if (c.mc.paths < 1) fail("mc.paths", "must be >= 1");
    if (!finite_positive(c.mc.dt)) fail("mc.dt", "must be > 0");
    if (!finite_positive(c.mc.time)) fail("mc.time", "must be > 0");
    if (c.mc.cells_per_bin < 1) fail("mc.cells_per_bin", "must be >= 1");
    if (c.mc.varent_samples < 1000) fail("mc.varent_samples", "must be >= 1000");
    if (!(c.mc.tv_budget > 0.0 && c.mc.tv_budget <= 1.0)) {
        fail("mc.tv_budget", "must be in (0, 1]");
    }

    if (!c.sweep.axis.empty()) {
        static const std::set<std::string> axes{"dimension", "theta", "x0_scale", "n", "delta"};
        if (!axes.count(c.sweep.axis)) {
            fail("sweep.axis", "unknown axis '" + c.sweep.axis +
                                   "' (expected dimension, theta, x0_scale, n or delta)");
        }
        if (c.sweep.values.empty()) fail("sweep.values", "needs at least one value");
    }
}

// Reads typed values out of the YAML tree. Errors point at the node's line,
// except for values injected by overrides, which have no line of their own.
class Reader {
public:
    Reader(YAML::Node root, std::set<std::string> overridden)
        : root_(std::move(root)), overridden_(std::move(overridden)) {}

    YAML::Node find(const std::string& key) const {
        // Const access throughout: the non-const operator[] would insert missing keys.
        const YAML::Node* cur = &root_;
        YAML::Node holder;
        std::size_t pos = 0;
        while (true) {
            const auto dot = key.find('.', pos);
            const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
            YAML::Node next;
            if (cur->IsSequence()) {
                const bool numeric =
                    !part.empty() && std::all_of(part.begin(), part.end(), [](unsigned char ch) {
                        return std::isdigit(ch) != 0;
                    });
                if (!numeric) return YAML::Node(YAML::NodeType::Undefined);
                const auto idx = std::stoul(part);
                if (idx >= cur->size()) return YAML::Node(YAML::NodeType::Undefined);
                next.reset((*cur)[idx]);
            } else if (cur->IsMap()) {
                const YAML::Node child = (*cur)[part];
                if (!child) return YAML::Node(YAML::NodeType::Undefined);
                next.reset(child);
            } else {
                return YAML::Node(YAML::NodeType::Undefined);
            }
            holder.reset(next);
            cur = &holder;
            if (dot == std::string::npos) break;
            pos = dot + 1;
        }
        return holder;
    }

    // true when `key` or one of its parents was set by an override.
    bool overridden(const std::string& key) const {
        for (std::string k = key;; k = k.substr(0, k.rfind('.'))) {
            if (overridden_.count(k)) return true;
            if (k.find('.') == std::string::npos) return false;
        }
    }

    int line_of(const std::string& key) const {
        if (overridden(key)) return -1;
        for (std::string k = key;; k = k.substr(0, k.rfind('.'))) {
            const YAML::Node n = find(k);
            if (n && !n.Mark().is_null()) return n.Mark().line;
            if (k.find('.') == std::string::npos) break;
        }
        return -1;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const std::string prefix = overridden(key) ? "override " + key : key;
        throw ConfigError(prefix + ": " + message, line_of(key));
    }

    template <class T>
    void get(const std::string& key, T& out) const {
        const YAML::Node n = find(key);
        if (!n || n.IsNull()) return;
        try {
            out = convert<T>(n);
        } catch (const YAML::Exception&) {
            fail(key, std::string("expected ") + expected<T>());
        }
    }

    void get_list(const std::string& key, std::vector<double>& out, bool allow_scalar) const {
        const YAML::Node n = find(key);
        if (!n || n.IsNull()) return;
        try {
            if (n.IsScalar() && allow_scalar) {
                out = {n.as<double>()};
            } else if (n.IsSequence()) {
                out = n.as<std::vector<double>>();
            } else {
                fail(key, "expected a list of numbers");
            }
        } catch (const YAML::Exception&) {
            fail(key, "expected a list of numbers");
        }
    }

    void get_strings(const std::string& key, std::vector<std::string>& out) const {
        const YAML::Node n = find(key);
        if (!n || n.IsNull()) return;
        if (!n.IsSequence()) fail(key, "expected a list of names");
        try {
            out = n.as<std::vector<std::string>>();
        } catch (const YAML::Exception&) {
            fail(key, "expected a list of names");
        }
    }

    // Counts arrive as YAML integers; negative values are rejected here rather than
    // wrapping around.
    template <class T>
    void get_count(const std::string& key, T& out) const {
        long long v = 0;
        const YAML::Node n = find(key);
        if (!n || n.IsNull()) return;
        try {
            v = n.as<long long>();
        } catch (const YAML::Exception&) {
            fail(key, "expected an integer");
        }
        if (v < 0) fail(key, "must be >= 0");
        out = static_cast<T>(v);
    }

private:
    template <class T>
    static T convert(const YAML::Node& n) {
        if constexpr (std::is_same_v<T, double>) {
            const double v = n.as<double>();
            return v;
        } else {
            return n.as<T>();
        }
    }
    template <class T>
    static const char* expected() {
        if constexpr (std::is_same_v<T, double>) return "a number";
        if constexpr (std::is_same_v<T, std::string>) return "a string";
        return "a value of the right type";
    }

    YAML::Node root_;
    std::set<std::string> overridden_;
};

// Rejects keys outside the schema, recursing into the known sections.
void check_keys(const YAML::Node& map, const std::string& prefix) {
    const auto& keys = schema_keys();
    for (const auto& kv : map) {
        const std::string name = kv.first.as<std::string>();
        const std::string path = prefix.empty() ? name : prefix + "." + name;
        const bool section =
            prefix.empty() && std::find(kSections.begin(), kSections.end(), name) != kSections.end();
        if (section) {
            if (kv.second.IsNull()) continue;
            if (!kv.second.IsMap()) {
                throw ConfigError(path + ": expected a mapping", kv.second.Mark().line);
            }
            check_keys(kv.second, path);
            continue;
        }
        if (std::find(keys.begin(), keys.end(), path) == keys.end()) {
            throw ConfigError("unknown key '" + path + "'", kv.first.Mark().line);
        }
    }
}

void apply_override(YAML::Node& root, const Override& o) {
    const auto& keys = schema_keys();
    if (std::find(keys.begin(), keys.end(), o.key) == keys.end()) {
        throw ConfigError("override: unknown key '" + o.key + "'");
    }
    YAML::Node value;
    try {
        value = YAML::Load(o.value);
    } catch (const YAML::Exception& e) {
        throw ConfigError("override " + o.key + ": cannot parse value '" + o.value + "'");
    }
    const auto dot = o.key.find('.');
    if (dot == std::string::npos) {
        root[o.key] = value;
        return;
    }
    const std::string section = o.key.substr(0, dot);
    const std::string leaf = o.key.substr(dot + 1);
    if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
    YAML::Node sec = root[section];
    sec[leaf] = value;
}

}  // namespace

std::vector<double> TimeGridConfig::times() const {
    std::vector<double> t(points);
    const double ratio = std::log(t_max / t_min);
    for (std::size_t i = 0; i < points; ++i) {
        t[i] = t_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    t.front() = t_min;
    t.back() = t_max;
    return t;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{
        "reverse_pinsker",  "lemma3",   "lemma3_positive", "gap_mixing",
        "integrated_entropy", "integrated_entropy_positive", "theorem1", "theorem2",
        "spectral_gap",     "mc_varentropy", "mc_histogram"};
    return names;
}

const std::vector<std::string>& schema_keys() {
    static const std::vector<std::string> keys{
        "name",
        "model.type", "model.theta", "model.dimension", "model.start", "model.potential",
        "model.quartic", "model.coefficients", "model.R", "model.n", "model.delta", "model.x0",
        "model.route",
        "solver.dt_init", "solver.dt_max", "solver.growth", "solver.startup_implicit_steps",
        "time_grid.t_min", "time_grid.t_max", "time_grid.points",
        "epsilons", "seed", "outputs", "checks", "workers",
        "mc.paths", "mc.dt", "mc.time", "mc.cells_per_bin", "mc.bootstrap",
        "mc.varent_samples", "mc.tv_budget",
        "sweep.axis", "sweep.values"};
    return keys;
}

Override parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(text) + "' is not of the form key=value");
    }
    return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

void ExperimentConfig::validate() const {
    check_all(*this, [](const std::string& key, const std::string& message) {
        throw ConfigError(key + ": " + message);
    });
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    auto& m = j["model"];
    if (model.kind == ModelKind::OU) {
        m["type"] = "ou";
        m["theta"] = model.theta;
        m["dimension"] = model.dimension;
        m["start"] = model.start;
    } else {
        m["type"] = "potential";
        m["potential"] = model.potential;
        m["theta"] = model.theta;
        m["quartic"] = model.quartic;
        m["coefficients"] = model.coefficients;
        m["R"] = model.R ? nlohmann::ordered_json(*model.R) : nlohmann::ordered_json(nullptr);
        m["n"] = model.n;
        m["delta"] = model.delta;
        m["x0"] = model.x0;
        m["route"] = model.route == Route::Auto ? "auto" : "grid";
    }
    j["solver"] = {{"dt_init", solver.dt_init},
                   {"dt_max", solver.dt_max},
                   {"growth", solver.growth},
                   {"startup_implicit_steps", solver.startup_implicit_steps}};
    j["time_grid"] = {
        {"t_min", time_grid.t_min}, {"t_max", time_grid.t_max}, {"points", time_grid.points}};
    j["epsilons"] = epsilons;
    j["seed"] = seed;
    j["outputs"] = outputs.generic_string();
    j["checks"] = checks;
    j["workers"] = workers;
    j["mc"] = {{"paths", mc.paths},
               {"dt", mc.dt},
               {"time", mc.time},
               {"cells_per_bin", mc.cells_per_bin},
               {"bootstrap", mc.bootstrap},
               {"varent_samples", mc.varent_samples},
               {"tv_budget", mc.tv_budget}};
    if (!sweep.axis.empty()) j["sweep"] = {{"axis", sweep.axis}, {"values", sweep.values}};
    return j;
}

std::uint64_t ExperimentConfig::hash() const {
    // Where the results land and how many threads compute them do not change them.
    auto j = to_json();
    j.erase("outputs");
    j.erase("workers");
    return fnv1a(j.dump());
}

bool ExperimentConfig::analytic() const {
    return model.kind == ModelKind::OU || (model.potential == "ou" && model.route == Route::Auto);
}

fp::Potential1D ExperimentConfig::make_potential() const {
    const auto& m = model;
    if (m.potential == "ou") return fp::Potential1D::quadratic(m.theta);
    if (m.potential == "quartic") return fp::Potential1D::quartic();
    std::vector<double> even =
        m.potential == "ou+quartic" ? std::vector<double>{0.5 * m.theta, 0.25 * m.quartic}
                                    : m.coefficients;
    auto p = fp::Potential1D::even_polynomial(even, m.R.value_or(1.0));
    if (!m.R) p = fp::Potential1D::even_polynomial(even, fp::choose_radius(p));
    if (m.potential == "ou+quartic") {
        // U'' = theta + 3 c x^2 >= theta.
        p.name = "ou+quartic";
        p.kappa = m.theta;
        p.kappa_numerical = false;
    }
    return p;
}

ExperimentConfig parse(std::string_view yaml, const std::vector<Override>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.is_null() ? -1 : e.mark.line);
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("top level must be a mapping", root.Mark().line);
    check_keys(root, "");

    std::set<std::string> overridden;
    for (const auto& o : overrides) {
        apply_override(root, o);
        overridden.insert(o.key);
    }

    const Reader r(root, overridden);
    ExperimentConfig c;
    r.get("name", c.name);

    std::string type = "ou";
    r.get("model.type", type);
    if (type == "ou") {
        c.model.kind = ModelKind::OU;
    } else if (type == "potential") {
        c.model.kind = ModelKind::Potential;
    } else {
        r.fail("model.type", "expected 'ou' or 'potential', got '" + type + "'");
    }
    auto& m = c.model;
    r.get("model.theta", m.theta);
    r.get_count("model.dimension", m.dimension);
    r.get_list("model.start", m.start, true);
    r.get("model.potential", m.potential);
    r.get("model.quartic", m.quartic);
    r.get_list("model.coefficients", m.coefficients, false);
    if (const YAML::Node n = r.find("model.R"); n && !n.IsNull()) {
        if (n.IsScalar() && n.Scalar() == "auto") {
            m.R.reset();
        } else {
            double v = 0.0;
            r.get("model.R", v);
            m.R = v;
        }
    }
    r.get_count("model.n", m.n);
    r.get("model.delta", m.delta);
    r.get("model.x0", m.x0);
    std::string route = "auto";
    r.get("model.route", route);
    if (route == "auto") {
        m.route = Route::Auto;
    } else if (route == "grid") {
        m.route = Route::Grid;
    } else {
        r.fail("model.route", "expected 'auto' or 'grid', got '" + route + "'");
    }
    if (m.kind == ModelKind::OU) {
        for (const char* key : {"model.potential", "model.quartic", "model.coefficients",
                                "model.R", "model.n", "model.delta", "model.x0", "model.route"}) {
            if (r.find(key)) r.fail(key, "not used by model type 'ou'");
        }
    } else if (r.find("model.dimension") || r.find("model.start")) {
        r.fail(r.find("model.dimension") ? "model.dimension" : "model.start",
               "not used by model type 'potential' (1-D; use model.x0)");
    }

    r.get("solver.dt_init", c.solver.dt_init);
    r.get("solver.dt_max", c.solver.dt_max);
    r.get("solver.growth", c.solver.growth);
    r.get_count("solver.startup_implicit_steps", c.solver.startup_implicit_steps);

    r.get("time_grid.t_min", c.time_grid.t_min);
    r.get("time_grid.t_max", c.time_grid.t_max);
    r.get_count("time_grid.points", c.time_grid.points);

    r.get_list("epsilons", c.epsilons, true);
    r.get_count("seed", c.seed);
    std::string outputs = c.outputs.string();
    r.get("outputs", outputs);
    c.outputs = outputs;
    r.get_strings("checks", c.checks);
    r.get_count("workers", c.workers);

    r.get_count("mc.paths", c.mc.paths);
    r.get("mc.dt", c.mc.dt);
    r.get("mc.time", c.mc.time);
    r.get_count("mc.cells_per_bin", c.mc.cells_per_bin);
    r.get_count("mc.bootstrap", c.mc.bootstrap);
    r.get_count("mc.varent_samples", c.mc.varent_samples);
    r.get("mc.tv_budget", c.mc.tv_budget);

    r.get("sweep.axis", c.sweep.axis);
    r.get_list("sweep.values", c.sweep.values, true);

    check_all(c, [&r](const std::string& key, const std::string& message) { r.fail(key, message); });
    return c;
}

ExperimentConfig load(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config '" + path.string() + "': " + e.what());
    }
    return parse(text, overrides);
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace cutofflab::config
