#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cutofflab/profile.hpp"

// Finite-volume solver for the density f_t = d Law(X_t) / d mu of a 1-D Langevin
// diffusion dX = -U'(X) dt + sqrt(2) dB on [-R, R] with reflecting ends, where
// mu(dx) is proportional to exp(-U(x)) dx. The generator
//   L f = f'' - U' f' = e^{U} (e^{-U} f')'
// is discretized in divergence form so that it stays self-adjoint in the
// discrete weighted inner product and conserves mass exactly.
namespace cutofflab::fp {

struct Potential1D {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> second_derivative;
    double kappa = 0.0;
    // true when kappa was estimated from U'' on a grid rather than known exactly.
    bool kappa_numerical = false;
    // Coefficients of U in powers x^0, x^1, ...; empty for non-polynomial U.
    std::vector<double> polynomial;

    // U = theta x^2 / 2, kappa = theta.
    static Potential1D quadratic(double theta = 1.0);
    // U = x^2/2 + x^4/4, kappa = 1.
    static Potential1D quartic();
    // U = sum_k c_k x^{2k} for k = 1, 2, ...; kappa = min U'' sampled on [-R, R].
    static Potential1D even_polynomial(std::vector<double> even_coefficients, double R);
};

class WeightedGrid {
public:
    std::size_t size() const noexcept { return nodes_.size(); }
    double radius() const noexcept { return radius_; }
    double spacing() const noexcept { return dx_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    // w_i, summing to one.
    const std::vector<double>& weights() const noexcept { return weights_; }
    // Normalized mu-density at the nodes, so w_i = density_i * dx (halved at the ends).
    const std::vector<double>& density() const noexcept { return density_; }
    // a_{i+1/2} for i = 0..n-2, in the same normalization as the weights.
    const std::vector<double>& conductances() const noexcept { return conductances_; }
    double truncated_mass() const noexcept { return truncated_mass_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    const Potential1D& potential() const noexcept { return potential_; }

    double mass(std::span<const double> f) const;

private:
    friend WeightedGrid build_grid(const Potential1D&, double, std::size_t);

    Potential1D potential_;
    double radius_ = 0.0;
    double dx_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> density_;
    std::vector<double> conductances_;
    double truncated_mass_ = 0.0;
    std::vector<std::string> warnings_;
};

// Truncated tail mass above 1e-10 is recorded as a warning, above 1e-6 it is an error.
WeightedGrid build_grid(const Potential1D& potential, double R, std::size_t n);

// Smallest R (on a 0.25 lattice) whose stationary tail mass is below `tail_mass`.
double choose_radius(const Potential1D& potential, double tail_mass = 1e-12);

// Tridiagonal operator: (A f)_i = lower_i f_{i-1} + diag_i f_i + upper_i f_{i+1}.
// lower_0 and upper_{n-1} are zero.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::vector<double> apply(std::span<const double> f) const;
};

Tridiagonal discretize_generator(const WeightedGrid& grid);

// <f, g>_w = sum_i w_i f_i g_i
double weighted_inner(const WeightedGrid& grid, std::span<const double> f,
                      std::span<const double> g);

struct SpectralReport {
    double lambda = 0.0;
    double eigen_residual = 0.0;
};

SpectralReport spectral_gap_numeric(const WeightedGrid& grid);

// Gaussian bump of width delta at x0, as a density with respect to mu.
std::vector<double> dirac_approx(const WeightedGrid& grid, double x0, double delta);

struct EvolveOptions {
    double dt_init = 1e-5;
    double growth = 1.05;
    double dt_max = 1e-2;
    // Leading implicit-Euler steps that damp the grid-scale content of a rough start.
    int startup_implicit_steps = 4;
};

struct DensityCurve {
    WeightedGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    EvolveOptions options;
};

// Crank-Nicolson with geometric step growth. Stores f at each of `output_times`
// (non-decreasing, >= 0; t = 0 stores f0).
DensityCurve evolve(const WeightedGrid& grid, std::span<const double> f0,
                    std::span<const double> output_times, const EvolveOptions& options = {});

// Same stepping, storing every step up to t_end.
DensityCurve evolve(const WeightedGrid& grid, std::span<const double> f0, double t_end,
                    double dt_init);

// One theta-scheme step (theta = 1/2 is Crank-Nicolson). Exposed for convergence tests.
std::vector<double> step(const WeightedGrid& grid, const Tridiagonal& generator,
                         std::span<const double> f, double dt, double theta = 0.5);

DistanceTriple functionals(const WeightedGrid& grid, std::span<const double> f);

// Discrete Dirichlet form E(f, log f) = -d/dt Ent under the semi-discrete flow.
double entropy_dissipation(const WeightedGrid& grid, std::span<const double> f);

// Profile over the stored slices with t > 0. `time_offset` shifts the elapsed
// time that is reported (the mollified start sits at t = 0).
MixingProfile profile(const DensityCurve& curve, double lambda, double kappa,
                      double time_offset = 0.0);

// Long-format CSV, header `t,x,f`.
void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path);

// Row-major float64 dump (one row per stored time) plus a JSON sidecar at
// `path` + ".json" with fields: format, dtype, byte_order, layout, rows, cols,
// times, grid{x_min,x_max,n,dx,truncated_mass}, potential{name,kappa,
// kappa_numerical,polynomial}, solver{scheme,dt_init,growth,dt_max,
// startup_implicit_steps}, tolerances{mass,clip}.
void write_density_binary(const DensityCurve& curve, const std::filesystem::path& path);

inline constexpr double kMassTolerance = 1e-8;
inline constexpr double kClipTolerance = 1e-12;

}  // namespace cutofflab::fp
