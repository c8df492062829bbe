#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cutofflab/errors.hpp"
#include "cutofflab/fokker_planck.hpp"
#include "cutofflab/gaussian_ou.hpp"
#include "cutofflab/mc_oracle.hpp"

using namespace cutofflab;

namespace {

struct Moments {
    double mean, var;
};

Moments moments(const mc::SampleMatrix& s, std::size_t coord = 0) {
    double m = 0.0;
    for (std::size_t p = 0; p < s.paths; ++p) m += s.row(p)[coord];
    m /= static_cast<double>(s.paths);
    double v = 0.0;
    for (std::size_t p = 0; p < s.paths; ++p) v += (s.row(p)[coord] - m) * (s.row(p)[coord] - m);
    return {m, v / static_cast<double>(s.paths - 1)};
}

mc::SdeConfig brownian(double horizon, std::size_t paths) {
    mc::SdeConfig c;
    c.drift = [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    c.dimension = 2;
    c.x0 = {0.0, 0.0};
    c.dt = horizon / 50.0;
    c.steps = 50;
    c.paths = paths;
    c.seed = 123;
    return c;
}

}  // namespace

TEST_SUITE("mc_oracle") {

TEST_CASE("Brownian motion: variance 2t per coordinate") {
    const auto s = mc::euler_maruyama(brownian(1.5, 100000));
    CHECK(s.paths == 100000);
    CHECK(s.dimension == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto m = moments(s, k);
        const double se_var = 3.0 * std::sqrt(2.0 / 100000.0);
        CHECK(std::abs(m.mean) < 3.0 * std::sqrt(3.0 / 100000.0));
        CHECK(std::abs(m.var - 3.0) < 3.0 * se_var);
    }
}

TEST_CASE("OU moments at t = ln 2") {
    const auto c = mc::SdeConfig::ou(1.0, {1.0}, std::log(2.0), 1e-3, 250000, 2024);
    CHECK(c.horizon() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(c.dt <= 1e-3);
    const auto s = mc::euler_maruyama(c, 4);
    const auto m = moments(s);
    const double se_mean = std::sqrt(m.var / static_cast<double>(s.paths));
    CHECK(std::abs(m.mean - 0.5) < 3.0 * se_mean);
    // Euler-Maruyama variance bias is O(dt).
    CHECK(std::abs(m.var - 0.75) < 3.0 * 0.75 * std::sqrt(2.0 / s.paths) + 2e-3);
}

TEST_CASE("euler_maruyama is deterministic and independent of the worker count") {
    const auto c = mc::SdeConfig::ou(0.7, {1.0, -1.0, 2.0}, 0.5, 1e-2, 3001, 99);
    const auto a = mc::euler_maruyama(c, 1);
    CHECK(a == mc::euler_maruyama(c, 1));
    CHECK(a == mc::euler_maruyama(c, 3));
    CHECK(a == mc::euler_maruyama(c, 8));
    auto other = c;
    other.seed = 100;
    CHECK_FALSE(a == mc::euler_maruyama(other, 1));
}

TEST_CASE("euler_maruyama reports a blow-up with its step") {
    mc::SdeConfig c;
    c.drift = [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0] * x[0]; };
    c.x0 = {10.0};
    c.dt = 0.1;
    c.steps = 100;
    c.paths = 4;
    try {
        mc::euler_maruyama(c);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
    c.x0 = {};
    CHECK_THROWS_AS(mc::euler_maruyama(c), InvalidArgument);
}

TEST_CASE("varentropy estimator: stationary, Gaussian pair and CLT scaling") {
    const ou::GaussianLaw q({0.0}, 1.0);
    const auto zero = mc::mc_varentropy(q, q, 10000, 1);
    CHECK(std::abs(zero.value) <= 3.0 * zero.std_error + 1e-15);

    const ou::GaussianLaw p({0.5}, 0.75);
    const auto est = mc::mc_varentropy(p, q, 10000000, 7);
    CHECK(est.samples == 10000000);
    CHECK(std::abs(est.value - 0.21875) < 3.0 * est.std_error);

    const auto small = mc::mc_varentropy(p, q, 200000, 3);
    const auto big = mc::mc_varentropy(p, q, 400000, 3);
    CHECK(small.std_error / big.std_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));

    CHECK_THROWS_AS(mc::mc_varentropy(p, q, 999, 1), InvalidArgument);
    CHECK_THROWS_AS(mc::mc_varentropy(ou::GaussianLaw({0.0, 0.0}, 1.0), q, 1000, 1),
                    InvalidArgument);
}

TEST_CASE("entropy estimator agrees with the closed form") {
    const ou::GaussianLaw q({0.0, 0.0, 0.0}, 1.0);
    const ou::GaussianLaw p({0.5, -0.5, 0.2}, 0.6);
    const auto est = mc::mc_entropy(p, q, 1000000, 5);
    CHECK(std::abs(est.value - ou::gaussian_ent(p, q)) < 3.0 * est.std_error);
}

TEST_CASE("histogram_tv: stationary samples against f = 1") {
    const auto grid = fp::build_grid(fp::Potential1D::quadratic(1.0), 8.0, 2048);
    // From the origin the law at t = 5 is stationary to within e^{-10}.
    const auto s = mc::euler_maruyama(mc::SdeConfig::ou(1.0, {0.0}, 5.0, 2e-2, 200000, 4), 4);
    const std::vector<double> one(grid.size(), 1.0);
    mc::HistogramOptions opt;
    opt.cells_per_bin = 8;
    const auto h = mc::histogram_tv(s, grid, one, opt);
    // Noise floor ~ sqrt(bins / samples) / 2 plus O(dt) bias of the scheme.
    CHECK(h.value < 0.03);
    CHECK(h.std_error > 0.0);
    CHECK(h.samples == 200000);
}

TEST_CASE("histogram_tv: shifted law against f = 1 tracks gaussian_tv") {
    const auto grid = fp::build_grid(fp::Potential1D::quadratic(1.0), 8.0, 2048);
    const auto s = mc::euler_maruyama(mc::SdeConfig::ou(1.0, {2.0}, 0.5, 2e-3, 200000, 8), 4);
    const std::vector<double> one(grid.size(), 1.0);
    mc::HistogramOptions opt;
    opt.cells_per_bin = 8;
    const auto h = mc::histogram_tv(s, grid, one, opt);
    const auto law = ou::law_at(ou::OUModel::uniform_start(1.0, 1, 2.0), 0.5);
    CHECK(std::abs(h.value - ou::gaussian_tv(law, ou::GaussianLaw({0.0}, 1.0))) < 0.03);
}

TEST_CASE("histogram_tv counts samples outside the grid and rejects bad input") {
    const auto grid = fp::build_grid(fp::Potential1D::quadratic(1.0), 8.0, 64);
    const std::vector<double> one(grid.size(), 1.0);
    mc::SampleMatrix far{4, 1, {20.0, 20.0, -30.0, 25.0}};
    CHECK(mc::histogram_tv(far, grid, one).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(mc::histogram_tv(mc::SampleMatrix{}, grid, one), InvalidArgument);
    mc::SampleMatrix two_d{1, 2, {0.0, 0.0}};
    CHECK_THROWS_AS(mc::histogram_tv(two_d, grid, one), InvalidArgument);
}

TEST_CASE("sample export") {
    const auto s = mc::euler_maruyama(mc::SdeConfig::ou(1.0, {1.0, 2.0}, 0.1, 0.05, 3, 1));
    const auto path = std::filesystem::temp_directory_path() / "cutofflab_samples.csv";
    mc::write_samples_csv(s, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "path_id,coord_index,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
