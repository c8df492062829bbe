#include <doctest.h>

#include <cmath>
#include <string>

#include "cutofflab/config.hpp"
#include "cutofflab/errors.hpp"

using namespace cutofflab;
using config::parse;

namespace {

const char* kOu = R"(name: t
model:
  type: ou
  theta: 2.0
  dimension: 3
  start: [1.0, 0.0, -1.0]
epsilons: [0.1, 0.25]
seed: 5
)";

// Zero-based line of the error, or -2 when parse succeeded.
int error_line(const std::string& yaml, const std::vector<config::Override>& o = {}) {
    try {
        parse(yaml, o);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -2;
}

std::string error_text(const std::string& yaml, const std::vector<config::Override>& o = {}) {
    try {
        parse(yaml, o);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("OU config with defaults") {
    const auto c = parse(kOu);
    CHECK(c.name == "t");
    CHECK(c.model.kind == config::ModelKind::OU);
    CHECK(c.model.theta == 2.0);
    CHECK(c.model.dimension == 3);
    CHECK(c.model.start == std::vector<double>{1.0, 0.0, -1.0});
    CHECK(c.epsilons == std::vector<double>{0.1, 0.25});
    CHECK(c.seed == 5);
    CHECK(c.time_grid.points == 200);
    CHECK(c.analytic());
    const auto t = c.time_grid.times();
    CHECK(t.size() == 200);
    CHECK(t.front() == doctest::Approx(0.01));
    CHECK(t.back() == doctest::Approx(10.0));
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
}

TEST_CASE("potential configs and routes") {
    const auto q = parse("model:\n  type: potential\n  potential: quartic\n  x0: 2\n");
    CHECK_FALSE(q.analytic());
    const auto p = q.make_potential();
    CHECK(p.kappa == 1.0);
    CHECK_FALSE(p.kappa_numerical);

    const auto ou = parse("model:\n  type: potential\n  potential: ou\n  theta: 3\n");
    CHECK(ou.analytic());
    const auto grid = parse("model:\n  type: potential\n  potential: ou\n  route: grid\n");
    CHECK_FALSE(grid.analytic());

    const auto mix = parse("model:\n  type: potential\n  potential: ou+quartic\n  theta: 2\n  quartic: 0.5\n");
    const auto pm = mix.make_potential();
    CHECK(pm.kappa == 2.0);
    CHECK(pm.value(1.0) == doctest::Approx(1.0 + 0.125));

    const auto poly = parse("model:\n  type: potential\n  potential: polynomial\n  coefficients: [0.5, 0.0, 0.1]\n");
    const auto pp = poly.make_potential();
    CHECK(pp.kappa_numerical);
    CHECK(pp.kappa == doctest::Approx(1.0));
}

TEST_CASE("epsilon outside (0, 1/2) is rejected with its line") {
    const std::string yaml = "model:\n  type: ou\nepsilons: [0.1, 0.7]\n";
    CHECK(error_line(yaml) == 2);
    CHECK(error_text(yaml).find("line 3") != std::string::npos);
    CHECK(error_text(yaml).find("0.7") != std::string::npos);
    CHECK(error_line("epsilons: [0.5]\n") == 0);
    CHECK(error_line("epsilons: [0.0]\n") == 0);
}

TEST_CASE("unknown keys and bad values report the offending line") {
    CHECK(error_line("model:\n  type: ou\n  thetta: 1\n") == 2);
    CHECK(error_text("model:\n  type: ou\n  thetta: 1\n").find("thetta") != std::string::npos);
    CHECK(error_line("name: x\nseed: -3\n") == 1);
    CHECK(error_line("model:\n  type: ou\n  theta: abc\n") == 2);
    CHECK(error_line("model:\n  type: ou\n  theta: -1\n") == 2);
    CHECK(error_line("model:\n  type: banana\n") == 1);
    CHECK(error_line("time_grid:\n  t_min: 2\n  t_max: 1\n") >= 0);
    CHECK(error_line("model:\n  type: ou\n  n: 512\n") == 2);
    CHECK(error_line("model:\n  type: potential\n  dimension: 2\n") == 2);
    CHECK(error_line("checks: [lemma3, nonsense]\n") == 0);
    CHECK(error_line("model: [1, 2\n") >= 0);
}

TEST_CASE("overrides: applied before validation, keys checked against the schema") {
    const auto c = parse(kOu, {config::parse_override("model.theta=0.5"),
                               config::parse_override("epsilons=[0.05]")});
    CHECK(c.model.theta == 0.5);
    CHECK(c.epsilons == std::vector<double>{0.05});

    const auto o = config::parse_override("model.start=[1, 4, -1]");
    CHECK(o.key == "model.start");
    CHECK(o.value == "[1, 4, -1]");
    CHECK(parse(kOu, {o}).model.start == std::vector<double>{1.0, 4.0, -1.0});

    CHECK_THROWS_AS(config::parse_override("no-equals"), ConfigError);
    CHECK_THROWS_AS(config::parse_override("=3"), ConfigError);
    const std::string bad = error_text(kOu, {config::parse_override("model.nope=1")});
    CHECK(bad.find("model.nope") != std::string::npos);
    // Override errors are not tied to a file line.
    CHECK(error_line(kOu, {config::parse_override("epsilons=[0.9]")}) == -1);
}

TEST_CASE("hash: stable, sensitive to the science, blind to outputs and workers") {
    const auto a = parse(kOu);
    CHECK(a.hash() == parse(kOu).hash());
    CHECK(a.hash() != parse(kOu, {config::parse_override("seed=6")}).hash());
    CHECK(a.hash() == parse(kOu, {config::parse_override("outputs=elsewhere")}).hash());
    CHECK(a.hash() == parse(kOu, {config::parse_override("workers=4")}).hash());
    CHECK(config::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(config::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("to_json carries every section and round-trips through YAML") {
    const auto a = parse(kOu);
    const auto j = a.to_json();
    for (const char* k : {"name", "model", "solver", "time_grid", "epsilons", "seed", "checks", "mc"}) {
        CHECK(j.contains(k));
    }
    // JSON is valid YAML.
    CHECK(parse(j.dump()).hash() == a.hash());
}

TEST_CASE("schema and check names") {
    const auto& keys = config::schema_keys();
    CHECK(std::find(keys.begin(), keys.end(), "model.theta") != keys.end());
    CHECK(std::find(keys.begin(), keys.end(), "mc.cells_per_bin") != keys.end());
    const auto& checks = config::check_names();
    CHECK(std::find(checks.begin(), checks.end(), "lemma3") != checks.end());
    CHECK(std::find(checks.begin(), checks.end(), "theorem2") != checks.end());
}

TEST_CASE("load reads a file and reports a missing one") {
    CHECK_THROWS_AS(config::load("/nonexistent/cfg.yaml"), ConfigError);
    const auto c = config::load(std::string(CUTOFFLAB_SOURCE_DIR) + "/configs/ou_reference.yaml");
    CHECK(c.name == "ou-reference");
    CHECK(c.seed == 20240601);
}

}  // TEST_SUITE
