#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "cutofflab/fokker_planck.hpp"
#include "cutofflab/gaussian_ou.hpp"

// Monte Carlo cross-checks, kept independent of the closed forms and of the grid
// solver. Every output is a pure function of its inputs and the seed.
namespace cutofflab::mc {

using Drift = std::function<void(std::span<const double> x, std::span<double> out)>;

struct SdeConfig {
    Drift drift;  // -grad U
    std::size_t dimension = 1;
    std::vector<double> x0;
    double dt = 1e-3;
    std::size_t steps = 1;
    std::size_t paths = 1;
    std::uint64_t seed = 0;

    double horizon() const noexcept { return dt * static_cast<double>(steps); }
    void validate() const;

    // Steps of size <= dt_max landing exactly on `horizon`.
    static SdeConfig ou(double theta, std::vector<double> x0, double horizon, double dt_max,
                        std::size_t paths, std::uint64_t seed);
    static SdeConfig langevin(const fp::Potential1D& potential, double x0, double horizon,
                              double dt_max, std::size_t paths, std::uint64_t seed);
};

// Terminal states, row-major (paths x dimension).
struct SampleMatrix {
    std::size_t paths = 0;
    std::size_t dimension = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t p) const {
        return {values.data() + p * dimension, dimension};
    }
    bool operator==(const SampleMatrix&) const = default;
};

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

// X_{k+1} = X_k + drift(X_k) dt + sqrt(2 dt) Z_k. Path p draws its increments
// from the substream (seed, p), so the result does not depend on `workers`.
SampleMatrix euler_maruyama(const SdeConfig& config, unsigned workers = 1);

// Var[log f(X)] for X ~ p, f = dp/dstationary, with a jackknife standard error.
EstimateWithError mc_varentropy(const ou::GaussianLaw& p, const ou::GaussianLaw& stationary,
                                std::size_t samples, std::uint64_t seed);
// E[log f(X)], standard error from the sample variance.
EstimateWithError mc_entropy(const ou::GaussianLaw& p, const ou::GaussianLaw& stationary,
                             std::size_t samples, std::uint64_t seed);

struct HistogramOptions {
    // Consecutive grid cells merged into one bin. Wider bins lower the
    // sampling-noise floor (~ sqrt(bins / samples)) at the price of resolution.
    std::size_t cells_per_bin = 1;
    std::size_t bootstrap_replicates = 200;
    std::uint64_t seed = 0x5eed;
};

// 1/2 sum_bins |empirical mass - sum w_i f_i|, with samples outside [-R, R]
// counted toward the distance. Bias is O(bin width + samples^{-1/2}) upward from
// sampling noise; the standard error is a bootstrap over the samples.
EstimateWithError histogram_tv(const SampleMatrix& samples, const fp::WeightedGrid& grid,
                               std::span<const double> f, const HistogramOptions& options = {});

// Debug export, header `path_id,coord_index,value`.
void write_samples_csv(const SampleMatrix& samples, const std::filesystem::path& path);

}  // namespace cutofflab::mc
