#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cutofflab/errors.hpp"
#include "cutofflab/gaussian_ou.hpp"
#include "oracles.hpp"

using namespace cutofflab;
using ou::GaussianLaw;
using ou::OUModel;

namespace {

GaussianLaw law1(double m, double v) { return GaussianLaw({m}, v); }

GaussianLaw iso(std::size_t d, double m, double v) {
    return GaussianLaw(std::vector<double>(d, m), v);
}

}  // namespace

TEST_SUITE("gaussian_ou") {

TEST_CASE("law_at follows the linear SDE moments") {
    const auto a = ou::law_at(OUModel::uniform_start(1.0, 1, 1.0), std::log(2.0));
    CHECK(a.mean()[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(a.variance() == doctest::Approx(0.75).epsilon(1e-15));

    const auto b = ou::law_at(OUModel::uniform_start(1.0, 1, 0.0), 50.0);
    CHECK(std::abs(b.mean()[0]) < 1e-15);
    CHECK(b.variance() == doctest::Approx(1.0).epsilon(1e-15));

    const auto c = ou::law_at(OUModel(2.0, {1.0, 1.0, 1.0}), 1.0);
    REQUIRE(c.dimension() == 3);
    for (double m : c.mean()) CHECK(m == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(c.variance() == doctest::Approx((1.0 - std::exp(-4.0)) / 2.0).epsilon(1e-15));
}

TEST_CASE("law_at rejects degenerate and non-finite times") {
    const auto m = OUModel::uniform_start(1.0, 2, 1.0);
    CHECK_THROWS_AS(ou::law_at(m, 0.0), DegenerateStartError);
    CHECK_THROWS_AS(ou::law_at(m, -1.0), DegenerateStartError);
    CHECK_THROWS_AS(ou::law_at(m, std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
    CHECK_THROWS_AS(ou::law_at(m, std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST_CASE("models and laws validate their parameters") {
    CHECK_THROWS_AS(GaussianLaw({0.0}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(GaussianLaw({}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(OUModel(0.0, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(OUModel(1.0, {}), InvalidArgument);
    const auto m = OUModel::uniform_start(2.0, 4, 1.0);
    CHECK(m.spectral_gap() == 2.0);
    CHECK(m.curvature() == 2.0);
    CHECK(m.stationary().variance() == 0.5);
    CHECK(m.start_norm_squared() == 4.0);
}

TEST_CASE("entropy: closed form against quadrature") {
    CHECK(ou::gaussian_ent(law1(0.0, 1.0), law1(0.0, 1.0)) == 0.0);
    const double e = ou::gaussian_ent(law1(0.5, 0.75), law1(0.0, 1.0));
    CHECK(e == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));
    CHECK(std::abs(e - oracle::ent_quadrature({0.5, 0.75, 0.0, 1.0})) < 1e-10);
    CHECK(std::abs(e - 0.143841036) < 1e-9);
    // Tensorization: the d = 3 product is three independent copies.
    CHECK(ou::gaussian_ent(iso(3, 0.5, 0.75), iso(3, 0.0, 1.0)) ==
          doctest::Approx(3.0 * e).epsilon(1e-14));
}

TEST_CASE("entropy: d = 3 against Monte Carlo") {
    // Mean offset 0.5 along each axis equals offset sqrt(0.75) along one axis.
    const auto mc2 = oracle::information_mc(3, std::sqrt(0.75), 0.75, 1.0, 400000, 7);
    const double e = ou::gaussian_ent(iso(3, 0.5, 0.75), iso(3, 0.0, 1.0));
    CHECK(std::abs(mc2.mean - e) < 3.0 * mc2.se_mean);
    CHECK(std::abs(e - 0.431523) < 1e-6);
}

TEST_CASE("varentropy: closed form against quadrature and Monte Carlo") {
    CHECK(ou::gaussian_varent(law1(0.0, 1.0), law1(0.0, 1.0)) == 0.0);
    const double v = ou::gaussian_varent(law1(0.5, 0.75), law1(0.0, 1.0));
    CHECK(v == doctest::Approx(0.21875).epsilon(1e-14));
    CHECK(std::abs(v - oracle::varent_quadrature({0.5, 0.75, 0.0, 1.0})) < 1e-9);
    const auto mc = oracle::information_mc(1, 0.5, 0.75, 1.0, 2000000, 2024);
    CHECK(std::abs(mc.variance - v) < 3.0 * mc.se_variance);

    const double v2 = ou::gaussian_varent(iso(2, 0.5, 0.75), iso(2, 0.0, 1.0));
    CHECK(v2 == doctest::Approx(0.4375).epsilon(1e-14));
    const auto mc2 = oracle::information_mc(2, std::sqrt(0.5), 0.75, 1.0, 1000000, 5);
    CHECK(std::abs(mc2.variance - v2) < 3.0 * mc2.se_variance);
}

TEST_CASE("entropy and varentropy reject mismatched dimensions") {
    CHECK_THROWS_AS(ou::gaussian_ent(iso(2, 0.0, 1.0), iso(3, 0.0, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(ou::gaussian_varent(iso(2, 0.0, 1.0), iso(3, 0.0, 1.0)), InvalidArgument);
    CHECK_THROWS_AS(ou::gaussian_tv(iso(2, 0.0, 1.0), iso(3, 0.0, 1.0)), InvalidArgument);
}

TEST_CASE("total variation: closed forms and 1-D quadrature") {
    CHECK(ou::gaussian_tv(law1(0.0, 1.0), law1(0.0, 1.0)) == 0.0);
    const double eq = ou::gaussian_tv(law1(0.5, 1.0), law1(0.0, 1.0));
    const double phi = 0.5 * std::erfc(-0.25 / std::sqrt(2.0));
    CHECK(std::abs(eq - (2.0 * phi - 1.0)) < 1e-14);
    CHECK(std::abs(eq - 0.197413) < 1e-6);
    CHECK(std::abs(eq - oracle::tv_quadrature({0.5, 1.0, 0.0, 1.0})) < 1e-10);

    const double uneq = ou::gaussian_tv(law1(0.5, 0.75), law1(0.0, 1.0));
    CHECK(std::abs(uneq - oracle::tv_quadrature({0.5, 0.75, 0.0, 1.0})) < 1e-10);
    CHECK(std::abs(uneq - 0.218309325224) < 1e-11);

    // Nearly singular with respect to the stationary law.
    const double conc = ou::gaussian_tv(law1(0.0, 1e-8), law1(0.0, 1.0));
    CHECK(conc > 0.9996);
    CHECK(conc <= 1.0);
}

TEST_CASE("total variation: d >= 2 against the noncentral chi-square oracle") {
    std::mt19937_64 gen(314159);
    std::uniform_real_distribution<double> offset(-2.0, 2.0), ratio(0.2, 5.0);
    for (std::size_t d : {2u, 3u, 5u, 16u, 64u, 256u, 1024u, 4096u}) {
        for (int k = 0; k < 4; ++k) {
            const double m = offset(gen) / std::sqrt(static_cast<double>(d)) * 3.0;
            const double s2 = ratio(gen);
            const auto p = iso(d, m, s2);
            const auto q = iso(d, 0.0, 1.0);
            const double want = oracle::tv_ncx2(static_cast<double>(d), d * m * m, s2, 1.0);
            CAPTURE(d);
            CAPTURE(s2);
            CHECK(std::abs(ou::gaussian_tv(p, q) - want) < 1e-9);
        }
    }
}

TEST_CASE("total variation reports quadrature failure with its error estimate") {
    try {
        ou::gaussian_tv(iso(3, 0.3, 0.6), iso(3, 0.0, 1.0), 1e-300);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.error_estimate() > 1e-300);
    }
}

TEST_CASE("profile from the origin is the centred variance curve") {
    const auto model = OUModel::uniform_start(1.0, 1, 0.0);
    std::vector<double> times;
    for (int i = 0; i < 40; ++i) times.push_back(0.01 * std::pow(1.2, i));
    const auto p = ou::profile(model, times);
    REQUIRE(p.size() == times.size());
    CHECK(p.lambda == 1.0);
    CHECK(p.kappa == 1.0);
    CHECK(p.source == ProfileSource::AnalyticOU);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = 1.0 - std::exp(-2.0 * times[i]);
        CHECK(p.triples[i].tv == doctest::Approx(ou::gaussian_tv(law1(0.0, v), law1(0.0, 1.0))));
        if (i > 0) {
            CHECK(p.triples[i].tv <= p.triples[i - 1].tv);
            CHECK(p.triples[i].ent <= p.triples[i - 1].ent);
        }
    }
    // Stationary-start surrogate at a large time.
    const auto late = ou::distances(ou::law_at(model, 40.0), model.stationary());
    CHECK(late.tv < 1e-12);
    CHECK(late.ent < 1e-12);
    CHECK(late.varent < 1e-12);
}

TEST_CASE("profile rejects a non-increasing or non-positive time grid") {
    const auto model = OUModel::uniform_start(1.0, 1, 1.0);
    const std::vector<double> bad{0.1, 0.1, 0.2};
    CHECK_THROWS_AS(ou::profile(model, bad), InvalidArgument);
    const std::vector<double> zero{0.0, 0.1};
    CHECK_THROWS_AS(ou::profile(model, zero), InvalidArgument);
}

TEST_CASE("dEnt/dt matches a finite difference of the entropy") {
    const auto model = OUModel(0.7, {1.0, -2.0, 0.5});
    for (double t : {0.05, 0.3, 1.0, 4.0}) {
        const double h = 1e-5 * t;
        const double fd = (ou::gaussian_ent(ou::law_at(model, t + h), model.stationary()) -
                           ou::gaussian_ent(ou::law_at(model, t - h), model.stationary())) /
                          (2.0 * h);
        CHECK(ou::dent_dt(model, t) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("high-dimensional cutoff shape around log(d)/2") {
    const auto model = OUModel::uniform_start(1.0, 4096, 1.0);
    const double centre = 0.5 * std::log(4096.0);
    const auto early = ou::distances(ou::law_at(model, centre - 2.0), model.stationary());
    const auto late = ou::distances(ou::law_at(model, centre + 4.0), model.stationary());
    CHECK(early.tv > 0.99);
    CHECK(late.tv < 0.01);
}

TEST_CASE("mixing time: pinned root and limits") {
    // Frozen after agreement with the noncentral chi-square oracle to 1e-13.
    const auto m5 = OUModel::uniform_start(1.0, 1, 5.0);
    const double t = ou::mixing_time(m5, 0.25);
    CHECK(std::abs(t - 2.0641196271362) < 1e-10);
    const double tv_at = ou::gaussian_tv(ou::law_at(m5, t), m5.stationary());
    CHECK(std::abs(tv_at - 0.25) < 1e-8);
    const double orc = oracle::bisect_time([](double s) { return oracle::ou_tv(1, 1, 5, s); }, 0.25,
                                           1e-6, 8.0);
    CHECK(std::abs(t - orc) < 1e-10);

    const auto m0 = OUModel::uniform_start(1.0, 1, 0.0);
    const double a = ou::mixing_time(m0, 0.99);
    const double b = ou::mixing_time(m0, 0.999);
    CHECK(b < a);
    CHECK(b < 1e-5);

    CHECK_THROWS_AS(ou::mixing_time(m0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(ou::mixing_time(m0, 1.0), InvalidArgument);
}

TEST_CASE("mixing time: time rescaling under theta") {
    // X^theta_t = X^1_{theta t} / sqrt(theta) when x0 sqrt(theta) is held fixed.
    const double base = ou::mixing_time(OUModel::uniform_start(1.0, 3, 2.0), 0.1);
    for (double theta : {0.5, 2.0, 4.0}) {
        const double t = ou::mixing_time(OUModel::uniform_start(theta, 3, 2.0 / std::sqrt(theta)), 0.1);
        CHECK(t * theta == doctest::Approx(base).epsilon(1e-9));
    }
}

}  // TEST_SUITE
