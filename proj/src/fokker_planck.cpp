#include "cutofflab/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <lapacke.h>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "cutofflab/errors.hpp"
#include "cutofflab/io.hpp"

namespace cutofflab::fp {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> out;
    for (std::size_t k = 1; k < c.size(); ++k) out.push_back(static_cast<double>(k) * c[k]);
    return out;
}

Potential1D from_polynomial(std::string name, std::vector<double> coeffs, double kappa,
                            bool numerical) {
    auto d1 = poly_derivative(coeffs);
    auto d2 = poly_derivative(d1);
    Potential1D p;
    p.name = std::move(name);
    p.value = [coeffs](double x) { return poly_eval(coeffs, x); };
    p.derivative = [d1](double x) { return poly_eval(d1, x); };
    p.second_derivative = [d2](double x) { return poly_eval(d2, x); };
    p.kappa = kappa;
    p.kappa_numerical = numerical;
    p.polynomial = std::move(coeffs);
    return p;
}

// Mass of exp(-(U - shift)) on [R, inf) and (-inf, -R].
double tail_integral(const Potential1D& potential, double R, double shift) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto right = [&](double x) { return std::exp(-(potential.value(x) - shift)); };
    auto left = [&](double x) { return std::exp(-(potential.value(-x) - shift)); };
    double err = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    return integrator.integrate(right, R, inf, 1e-10, &err) +
           integrator.integrate(left, R, inf, 1e-10, &err);
}

double normalizer(const Potential1D& potential, double R, double shift) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto integrand = [&](double x) { return std::exp(-(potential.value(x) - shift)); };
    return GK::integrate(integrand, -R, R, 15, 1e-12) + tail_integral(potential, R, shift);
}

// Thomas algorithm for a diagonally dominant tridiagonal system.
void solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag,
                       const std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw SolverError("tridiagonal solve: zero pivot");
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw SolverError("tridiagonal solve: zero pivot");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

void clip_and_check(const WeightedGrid& grid, std::vector<double>& f) {
    bool clipped = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i])) throw SolverError("evolve: non-finite density");
        if (f[i] < 0.0) {
            if (f[i] < -kClipTolerance) {
                throw SolverError("evolve: density undershoot " + std::to_string(f[i]) +
                                  " at x = " + std::to_string(grid.nodes()[i]));
            }
            f[i] = 0.0;
            clipped = true;
        }
    }
    if (clipped) {
        const double m = grid.mass(f);
        for (double& v : f) v /= m;
    }
}

}  // namespace

Potential1D Potential1D::quadratic(double theta) {
    if (!(theta > 0.0)) throw InvalidArgument("quadratic potential: theta must be > 0");
    return from_polynomial("ou", {0.0, 0.0, 0.5 * theta}, theta, false);
}

Potential1D Potential1D::quartic() {
    return from_polynomial("quartic", {0.0, 0.0, 0.5, 0.0, 0.25}, 1.0, false);
}

Potential1D Potential1D::even_polynomial(std::vector<double> even_coefficients, double R) {
    if (even_coefficients.empty()) throw InvalidArgument("even_polynomial: no coefficients");
    std::vector<double> coeffs(2 * even_coefficients.size() + 1, 0.0);
    for (std::size_t k = 0; k < even_coefficients.size(); ++k) {
        coeffs[2 * (k + 1)] = even_coefficients[k];
    }
    auto p = from_polynomial("polynomial", std::move(coeffs), 0.0, true);
    // U'' of an even polynomial is even; its minimum on [-R, R] is sampled on [0, R].
    constexpr int kSamples = 4097;
    double kappa = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kSamples; ++i) {
        kappa = std::min(kappa, p.second_derivative(R * i / (kSamples - 1)));
    }
    // A negative value is kept so that build_grid rejects the potential.
    p.kappa = kappa;
    return p;
}

double WeightedGrid::mass(std::span<const double> f) const {
    if (f.size() != size()) throw InvalidArgument("density size does not match grid");
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m += weights_[i] * f[i];
    return m;
}

WeightedGrid build_grid(const Potential1D& potential, double R, std::size_t n) {
    if (n < 16) throw InvalidArgument("build_grid: n must be >= 16");
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("build_grid: R must be > 0");
    if (!potential.value || !potential.derivative || !potential.second_derivative) {
        throw InvalidArgument("build_grid: potential is incomplete");
    }
    if (potential.kappa < 0.0) {
        throw ConvexityError("build_grid: curvature bound kappa is negative", 0, 0.0);
    }

    WeightedGrid g;
    g.potential_ = potential;
    g.radius_ = R;
    g.dx_ = 2.0 * R / static_cast<double>(n - 1);
    g.nodes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.nodes_[i] = -R + g.dx_ * static_cast<double>(i);
    g.nodes_.back() = R;

    const double slack = 1e-12 * (1.0 + potential.kappa);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.nodes_[i];
        const double curvature = potential.second_derivative(x);
        if (!(curvature >= potential.kappa - slack)) {
            std::ostringstream msg;
            msg << "build_grid: convexity certificate fails at node " << i << " (x = " << x
                << "): U'' = " << curvature << " < kappa = " << potential.kappa;
            throw ConvexityError(msg.str(), i, x);
        }
        u[i] = potential.value(x);
        if (!std::isfinite(u[i])) throw InvalidArgument("build_grid: U is not finite on the grid");
    }
    const double shift = *std::min_element(u.begin(), u.end());

    double total = 0.0;
    g.weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double end_factor = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        g.weights_[i] = std::exp(-(u[i] - shift)) * g.dx_ * end_factor;
        total += g.weights_[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw InvalidArgument("build_grid: exp(-U) cannot be normalized on the grid");
    }
    g.density_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(g.weights_[i] > 0.0)) {
            std::ostringstream msg;
            msg << "build_grid: exp(-U) underflows at node " << i << " (x = " << g.nodes_[i]
                << "); R is too large for this potential, see choose_radius";
            throw InvalidArgument(msg.str());
        }
        g.weights_[i] /= total;
        g.density_[i] = std::exp(-(u[i] - shift)) / total;
    }
    g.conductances_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double mid = 0.5 * (g.nodes_[i] + g.nodes_[i + 1]);
        g.conductances_[i] = std::exp(-(potential.value(mid) - shift)) * g.dx_ / total;
    }

    const double z = normalizer(potential, R, shift);
    g.truncated_mass_ = tail_integral(potential, R, shift) / z;
    if (g.truncated_mass_ > 1e-6) {
        throw InvalidArgument("build_grid: stationary mass outside [-R, R] is " +
                              std::to_string(g.truncated_mass_) + " (> 1e-6)");
    }
    if (g.truncated_mass_ > 1e-10) {
        g.warnings_.push_back("truncated stationary mass " + std::to_string(g.truncated_mass_) +
                              " exceeds 1e-10");
    }
    return g;
}

double choose_radius(const Potential1D& potential, double tail_mass) {
    const double shift = potential.value(0.0);
    for (double R = 0.5; R <= 200.0; R += 0.25) {
        const double z = normalizer(potential, R, shift);
        if (tail_integral(potential, R, shift) / z < tail_mass) return R;
    }
    throw InvalidArgument("choose_radius: tail mass target not reached for R <= 200");
}

std::vector<double> Tridiagonal::apply(std::span<const double> f) const {
    const std::size_t n = diag.size();
    if (f.size() != n) throw InvalidArgument("Tridiagonal::apply: size mismatch");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * f[i];
        if (i > 0) v += lower[i] * f[i - 1];
        if (i + 1 < n) v += upper[i] * f[i + 1];
        out[i] = v;
    }
    return out;
}

Tridiagonal discretize_generator(const WeightedGrid& grid) {
    const std::size_t n = grid.size();
    const double dx2 = grid.spacing() * grid.spacing();
    const auto& w = grid.weights();
    const auto& a = grid.conductances();
    Tridiagonal op{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                   std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? a[i - 1] : 0.0;
        const double right = i + 1 < n ? a[i] : 0.0;
        const double scale = 1.0 / (w[i] * dx2);
        op.lower[i] = left * scale;
        op.upper[i] = right * scale;
        op.diag[i] = -(left + right) * scale;
    }
    return op;
}

double weighted_inner(const WeightedGrid& grid, std::span<const double> f,
                      std::span<const double> g) {
    if (f.size() != grid.size() || g.size() != grid.size()) {
        throw InvalidArgument("weighted_inner: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += grid.weights()[i] * f[i] * g[i];
    return acc;
}

SpectralReport spectral_gap_numeric(const WeightedGrid& grid) {
    // -L is similar to the symmetric S = D^{1/2} (-L) D^{-1/2}, D = diag(w).
    const std::size_t n = grid.size();
    const double dx2 = grid.spacing() * grid.spacing();
    const auto& w = grid.weights();
    const auto& a = grid.conductances();
    std::vector<double> diag(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? a[i - 1] : 0.0;
        const double right = i + 1 < n ? a[i] : 0.0;
        diag[i] = (left + right) / (w[i] * dx2);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -a[i] / (std::sqrt(w[i] * w[i + 1]) * dx2);

    std::vector<double> d = diag, e = off;
    e.push_back(0.0);
    lapack_int found = 0;
    std::vector<double> eigenvalue(n), vec(n);
    std::vector<lapack_int> support(2);
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', static_cast<lapack_int>(n),
                                           d.data(), e.data(), 0.0, 0.0, 2, 2, 0.0, &found,
                                           eigenvalue.data(), vec.data(), static_cast<lapack_int>(n),
                                           support.data());
    if (info != 0 || found != 1) {
        throw SolverError("spectral_gap_numeric: eigensolver failed (info = " +
                          std::to_string(info) + ")");
    }
    const double lambda = eigenvalue[0];

    double norm2 = 0.0;
    double resid2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sv = diag[i] * vec[i];
        if (i > 0) sv += off[i - 1] * vec[i - 1];
        if (i + 1 < n) sv += off[i] * vec[i + 1];
        const double r = sv - lambda * vec[i];
        resid2 += r * r;
        norm2 += vec[i] * vec[i];
    }
    SpectralReport report{lambda, std::sqrt(resid2 / norm2)};
    if (!(report.lambda > 0.0)) throw SolverError("spectral_gap_numeric: nonpositive gap");
    return report;
}

std::vector<double> dirac_approx(const WeightedGrid& grid, double x0, double delta) {
    const double R = grid.radius();
    if (!(delta >= 2.0 * grid.spacing())) {
        throw InvalidArgument("dirac_approx: delta must be at least two grid spacings");
    }
    if (!(x0 > -R + 4.0 * delta && x0 < R - 4.0 * delta)) {
        throw InvalidArgument("dirac_approx: bump too close to the boundary");
    }
    const std::size_t n = grid.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (grid.nodes()[i] - x0) / delta;
        const double bump = std::exp(-0.5 * z * z) / (delta * std::sqrt(2.0 * M_PI));
        f[i] = bump / grid.density()[i];
    }
    const double m = grid.mass(f);
    for (double& v : f) v /= m;
    return f;
}

std::vector<double> step(const WeightedGrid& grid, const Tridiagonal& generator,
                         std::span<const double> f, double dt, double theta) {
    const std::size_t n = grid.size();
    std::vector<double> rhs(f.begin(), f.end());
    if (theta < 1.0) {
        const auto lf = generator.apply(f);
        for (std::size_t i = 0; i < n; ++i) rhs[i] += (1.0 - theta) * dt * lf[i];
    }
    std::vector<double> lower(n), diag(n), upper(n);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = -theta * dt * generator.lower[i];
        diag[i] = 1.0 - theta * dt * generator.diag[i];
        upper[i] = -theta * dt * generator.upper[i];
    }
    solve_tridiagonal(lower, std::move(diag), upper, rhs);
    return rhs;
}

DensityCurve evolve(const WeightedGrid& grid, std::span<const double> f0,
                    std::span<const double> output_times, const EvolveOptions& options) {
    if (f0.size() != grid.size()) throw InvalidArgument("evolve: density size does not match grid");
    if (!(options.dt_init > 0.0) || !(options.dt_max >= options.dt_init) ||
        !(options.growth >= 1.0)) {
        throw InvalidArgument("evolve: bad time-step options");
    }
    for (double v : f0) {
        if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("evolve: f0 must be nonnegative");
    }
    if (std::abs(grid.mass(f0) - 1.0) > kMassTolerance) {
        throw InvalidArgument("evolve: f0 must have unit mass");
    }
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (!(output_times[i] >= 0.0) || (i > 0 && output_times[i] < output_times[i - 1])) {
            throw InvalidArgument("evolve: output times must be non-decreasing and >= 0");
        }
    }

    DensityCurve curve{grid, {}, {}, options};
    const Tridiagonal generator = discretize_generator(grid);
    std::vector<double> f(f0.begin(), f0.end());
    double t = 0.0;
    double dt = options.dt_init;
    int steps_taken = 0;
    double mass = grid.mass(f);
    for (double target : output_times) {
        while (t < target) {
            const bool full = dt < target - t;
            const double h = full ? dt : target - t;
            const double theta = steps_taken < options.startup_implicit_steps ? 1.0 : 0.5;
            f = step(grid, generator, f, h, theta);
            clip_and_check(grid, f);
            const double new_mass = grid.mass(f);
            if (std::abs(new_mass - mass) > kMassTolerance) {
                throw SolverError("evolve: mass drift " + std::to_string(new_mass - mass) +
                                  " in one step");
            }
            mass = new_mass;
            t = full ? t + h : target;
            ++steps_taken;
            if (full) dt = std::min(dt * options.growth, options.dt_max);
        }
        curve.times.push_back(target);
        curve.values.push_back(f);
    }
    return curve;
}

DensityCurve evolve(const WeightedGrid& grid, std::span<const double> f0, double t_end,
                    double dt_init) {
    if (!(t_end > 0.0)) throw InvalidArgument("evolve: t_end must be > 0");
    EvolveOptions options;
    options.dt_init = dt_init;
    options.dt_max = std::max(options.dt_max, dt_init);
    // Replay the step sequence to get the natural output times.
    std::vector<double> times{0.0};
    double t = 0.0;
    double dt = dt_init;
    while (t < t_end) {
        t = std::min(t + dt, t_end);
        times.push_back(t);
        dt = std::min(dt * options.growth, options.dt_max);
    }
    return evolve(grid, f0, times, options);
}

DistanceTriple functionals(const WeightedGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw InvalidArgument("functionals: size mismatch");
    const auto& w = grid.weights();
    double tv = 0.0;
    double ent = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < -kClipTolerance) throw InvalidArgument("functionals: negative density");
        const double v = std::max(0.0, f[i]);
        tv += w[i] * std::abs(v - 1.0);
        if (v > 0.0) ent += w[i] * v * std::log(v);
    }
    double varent = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = std::max(0.0, f[i]);
        if (v > 0.0) {
            const double c = std::log(v) - ent;
            varent += w[i] * v * c * c;
        }
    }
    return {std::min(1.0, 0.5 * tv), std::max(0.0, ent), varent};
}

double entropy_dissipation(const WeightedGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw InvalidArgument("entropy_dissipation: size mismatch");
    const auto& w = grid.weights();
    const auto& a = grid.conductances();
    constexpr double kNegligibleWeight = 1e-14;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0) && w[i] > kNegligibleWeight) {
            throw InvalidArgument("entropy_dissipation: nonpositive density at x = " +
                                  std::to_string(grid.nodes()[i]));
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        if (!(f[i] > 0.0) || !(f[i + 1] > 0.0)) continue;
        acc += a[i] * (f[i + 1] - f[i]) * (std::log(f[i + 1]) - std::log(f[i]));
    }
    return acc / (grid.spacing() * grid.spacing());
}

MixingProfile profile(const DensityCurve& curve, double lambda, double kappa, double time_offset) {
    MixingProfile out;
    out.source = ProfileSource::FokkerPlanck;
    out.lambda = lambda;
    out.kappa = kappa;
    std::ostringstream res;
    res << "n=" << curve.grid.size() << ",R=" << curve.grid.radius()
        << ",dt_init=" << curve.options.dt_init << ",dt_max=" << curve.options.dt_max;
    if (time_offset != 0.0) res << ",t_offset=" << time_offset;
    out.resolution = res.str();
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        const double t = curve.times[k] + time_offset;
        if (!(t > 0.0)) continue;
        if (!out.times.empty() && !(t > out.times.back())) continue;
        out.times.push_back(t);
        out.triples.push_back(functionals(curve.grid, curve.values[k]));
        out.dent_dt.push_back(-entropy_dissipation(curve.grid, curve.values[k]));
    }
    return out;
}

void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path) {
    std::string out = "t,x,f\n";
    for (std::size_t k = 0; k < curve.times.size(); ++k) {
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            out += io::format_double(curve.times[k]);
            out += ',';
            out += io::format_double(curve.grid.nodes()[i]);
            out += ',';
            out += io::format_double(curve.values[k][i]);
            out += '\n';
        }
    }
    io::write_file_atomic(path, out);
}

void write_density_binary(const DensityCurve& curve, const std::filesystem::path& path) {
    std::string payload;
    payload.reserve(curve.times.size() * curve.grid.size() * sizeof(double));
    for (const auto& row : curve.values) {
        payload.append(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
    }
    io::write_file_atomic(path, payload);

    const auto& pot = curve.grid.potential();
    nlohmann::ordered_json sidecar;
    sidecar["format"] = "cutofflab-density-v1";
    sidecar["dtype"] = "float64";
    sidecar["byte_order"] = "little";
    sidecar["layout"] = "row-major";
    sidecar["rows"] = curve.times.size();
    sidecar["cols"] = curve.grid.size();
    sidecar["times"] = curve.times;
    sidecar["grid"] = {{"x_min", -curve.grid.radius()},
                       {"x_max", curve.grid.radius()},
                       {"n", curve.grid.size()},
                       {"dx", curve.grid.spacing()},
                       {"truncated_mass", curve.grid.truncated_mass()}};
    sidecar["potential"] = {{"name", pot.name},
                            {"kappa", pot.kappa},
                            {"kappa_numerical", pot.kappa_numerical},
                            {"polynomial", pot.polynomial}};
    sidecar["solver"] = {{"scheme", "crank-nicolson"},
                         {"dt_init", curve.options.dt_init},
                         {"growth", curve.options.growth},
                         {"dt_max", curve.options.dt_max},
                         {"startup_implicit_steps", curve.options.startup_implicit_steps}};
    sidecar["tolerances"] = {{"mass", kMassTolerance}, {"clip", kClipTolerance}};
    io::write_file_atomic(path.string() + ".json", sidecar.dump(2) + "\n");
}

}  // namespace cutofflab::fp
