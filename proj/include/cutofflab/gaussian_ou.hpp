#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cutofflab/profile.hpp"

// Closed-form analytics for the Ornstein-Uhlenbeck diffusion
//   dX = -theta X dt + sqrt(2) dB,   U(x) = theta |x|^2 / 2,
// in any dimension. Everything tensorizes over coordinates, so the laws involved
// are isotropic Gaussians described by a mean vector and one scalar variance.
namespace cutofflab::ou {

class GaussianLaw {
public:
    GaussianLaw(std::vector<double> mean, double variance);

    std::size_t dimension() const noexcept { return mean_.size(); }
    const std::vector<double>& mean() const noexcept { return mean_; }
    double variance() const noexcept { return variance_; }

private:
    std::vector<double> mean_;
    double variance_;
};

class OUModel {
public:
    OUModel(double theta, std::vector<double> start);
    // Start at x0 * (1, ..., 1) in dimension d.
    static OUModel uniform_start(double theta, std::size_t dimension, double x0);

    double theta() const noexcept { return theta_; }
    std::size_t dimension() const noexcept { return start_.size(); }
    const std::vector<double>& start() const noexcept { return start_; }
    double start_norm_squared() const noexcept { return start_norm2_; }

    double spectral_gap() const noexcept { return theta_; }
    double curvature() const noexcept { return theta_; }
    GaussianLaw stationary() const;

private:
    double theta_;
    std::vector<double> start_;
    double start_norm2_;
};

// Law of X_t given X_0 = start. Throws DegenerateStartError for t <= 0.
GaussianLaw law_at(const OUModel& model, double t);

// Relative entropy Ent = KL(p || stationary), in nats.
double gaussian_ent(const GaussianLaw& p, const GaussianLaw& stationary);

// Varentropy Var[log f(X)], X ~ p, f = dp/dstationary.
double gaussian_varent(const GaussianLaw& p, const GaussianLaw& stationary);

// Total variation. Absolute quadrature tolerance defaults to 1e-9; throws
// QuadratureError if the estimated error exceeds it.
double gaussian_tv(const GaussianLaw& p, const GaussianLaw& stationary,
                   double tolerance = 1e-9);

DistanceTriple distances(const GaussianLaw& p, const GaussianLaw& stationary);

// Analytic d/dt Ent(X_t) along the OU flow.
double dent_dt(const OUModel& model, double t);

MixingProfile profile(const OUModel& model, std::span<const double> time_grid);

// inf{t : TV(t) <= epsilon}, by bracket expansion and bisection. The TV curve
// is checked to be non-increasing on 64 samples of the final bracket.
double mixing_time(const OUModel& model, double epsilon,
                   std::optional<double> bracket_hint = std::nullopt);

}  // namespace cutofflab::ou
