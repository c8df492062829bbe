#include "cutofflab/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cutofflab/errors.hpp"
#include "cutofflab/io.hpp"
#include "cutofflab/rng.hpp"

namespace cutofflab::mc {

namespace {

std::size_t steps_for(double horizon, double dt_max) {
    if (!(horizon > 0.0) || !(dt_max > 0.0)) {
        throw InvalidArgument("SdeConfig: horizon and dt must be positive");
    }
    return static_cast<std::size_t>(std::ceil(horizon / dt_max - 1e-9));
}

// Normals 0, 1, 2, ... of one stream, in order.
class NormalSequence {
public:
    explicit NormalSequence(const rng::NormalStream& stream) : stream_(stream) {}

    void fill(std::span<double> z) {
        for (double& v : z) {
            if (have_spare_) {
                v = spare_;
                have_spare_ = false;
            } else {
                const auto [a, b] = stream_.pair(next_pair_++);
                v = a;
                spare_ = b;
                have_spare_ = true;
            }
        }
    }

private:
    rng::NormalStream stream_;
    std::uint64_t next_pair_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void simulate_block(const SdeConfig& config, std::size_t begin, std::size_t end,
                    std::vector<double>& out) {
    const std::size_t d = config.dimension;
    const double noise = std::sqrt(2.0 * config.dt);
    std::vector<double> x(d), drift(d), z(d);
    for (std::size_t p = begin; p < end; ++p) {
        NormalSequence normals(rng::NormalStream(config.seed, p));
        std::copy(config.x0.begin(), config.x0.end(), x.begin());
        for (std::size_t k = 0; k < config.steps; ++k) {
            config.drift(x, drift);
            normals.fill(z);
            for (std::size_t i = 0; i < d; ++i) {
                x[i] += drift[i] * config.dt + noise * z[i];
                if (!std::isfinite(x[i])) {
                    throw SolverError("euler_maruyama: non-finite state at step " +
                                      std::to_string(k) + " of path " + std::to_string(p));
                }
            }
        }
        std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(p * d));
    }
}

// log f(x) for f = dp/dq, both isotropic Gaussians.
double log_density_ratio(const ou::GaussianLaw& p, const ou::GaussianLaw& q,
                         std::span<const double> x) {
    const double d = static_cast<double>(p.dimension());
    double dp = 0.0;
    double dq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] - p.mean()[i];
        const double b = x[i] - q.mean()[i];
        dp += a * a;
        dq += b * b;
    }
    return -0.5 * d * std::log(p.variance() / q.variance()) - dp / (2.0 * p.variance()) +
           dq / (2.0 * q.variance());
}

std::vector<double> information_samples(const ou::GaussianLaw& p, const ou::GaussianLaw& q,
                                        std::size_t samples, std::uint64_t seed) {
    if (p.dimension() != q.dimension()) throw InvalidArgument("dimension mismatch");
    const std::size_t d = p.dimension();
    const double s = std::sqrt(p.variance());
    std::vector<double> x(d), out(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        NormalSequence(rng::NormalStream(seed, k)).fill(x);
        for (std::size_t i = 0; i < d; ++i) x[i] = p.mean()[i] + s * x[i];
        out[k] = log_density_ratio(p, q, x);
    }
    return out;
}

}  // namespace

void SdeConfig::validate() const {
    if (!drift) throw InvalidArgument("SdeConfig: missing drift");
    if (dimension < 1 || x0.size() != dimension) {
        throw InvalidArgument("SdeConfig: x0 must have `dimension` entries");
    }
    if (!(dt > 0.0) || steps < 1 || paths < 1) {
        throw InvalidArgument("SdeConfig: need dt > 0, steps >= 1, paths >= 1");
    }
}

SdeConfig SdeConfig::ou(double theta, std::vector<double> x0, double horizon, double dt_max,
                        std::size_t paths, std::uint64_t seed) {
    SdeConfig c;
    c.dimension = x0.size();
    c.x0 = std::move(x0);
    c.drift = [theta](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -theta * x[i];
    };
    c.steps = steps_for(horizon, dt_max);
    c.dt = horizon / static_cast<double>(c.steps);
    c.paths = paths;
    c.seed = seed;
    return c;
}

SdeConfig SdeConfig::langevin(const fp::Potential1D& potential, double x0, double horizon,
                              double dt_max, std::size_t paths, std::uint64_t seed) {
    SdeConfig c;
    c.dimension = 1;
    c.x0 = {x0};
    auto grad = potential.derivative;
    c.drift = [grad](std::span<const double> x, std::span<double> out) { out[0] = -grad(x[0]); };
    c.steps = steps_for(horizon, dt_max);
    c.dt = horizon / static_cast<double>(c.steps);
    c.paths = paths;
    c.seed = seed;
    return c;
}

SampleMatrix euler_maruyama(const SdeConfig& config, unsigned workers) {
    config.validate();
    SampleMatrix result{config.paths, config.dimension,
                        std::vector<double>(config.paths * config.dimension)};
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.paths)));
    if (workers == 1) {
        simulate_block(config, 0, config.paths, result.values);
        return result;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (config.paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(config.paths, w * chunk);
        const std::size_t end = std::min(config.paths, begin + chunk);
        threads.emplace_back([&, w, begin, end] {
            try {
                simulate_block(config, begin, end, result.values);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return result;
}

EstimateWithError mc_varentropy(const ou::GaussianLaw& p, const ou::GaussianLaw& stationary,
                                std::size_t samples, std::uint64_t seed) {
    if (samples < 1000) throw InvalidArgument("mc_varentropy: need at least 1000 samples");
    auto y = information_samples(p, stationary, samples, seed);
    const double n = static_cast<double>(samples);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double s1 = 0.0;
    double s2 = 0.0;
    for (double& v : y) {
        v -= mean;
        s1 += v;
        s2 += v * v;
    }
    const double variance = (s2 - s1 * s1 / n) / (n - 1.0);

    // Jackknife over leave-one-out variances.
    double jk_mean = 0.0;
    for (double v : y) {
        const double m = (s1 - v) / (n - 1.0);
        jk_mean += (s2 - v * v - (n - 1.0) * m * m) / (n - 2.0);
    }
    jk_mean /= n;
    double jk_ss = 0.0;
    for (double v : y) {
        const double m = (s1 - v) / (n - 1.0);
        const double diff = (s2 - v * v - (n - 1.0) * m * m) / (n - 2.0) - jk_mean;
        jk_ss += diff * diff;
    }
    return {variance, std::sqrt((n - 1.0) / n * jk_ss), samples};
}

EstimateWithError mc_entropy(const ou::GaussianLaw& p, const ou::GaussianLaw& stationary,
                             std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw InvalidArgument("mc_entropy: need at least 2 samples");
    const auto y = information_samples(p, stationary, samples, seed);
    const double n = static_cast<double>(samples);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n), samples};
}

EstimateWithError histogram_tv(const SampleMatrix& samples, const fp::WeightedGrid& grid,
                               std::span<const double> f, const HistogramOptions& options) {
    if (samples.paths == 0) throw InvalidArgument("histogram_tv: empty sample set");
    if (samples.dimension != 1) throw InvalidArgument("histogram_tv: samples must be 1-D");
    if (f.size() != grid.size()) throw InvalidArgument("histogram_tv: density size mismatch");
    if (options.cells_per_bin < 1) throw InvalidArgument("histogram_tv: cells_per_bin >= 1");

    const std::size_t cells = grid.size();
    const std::size_t bins = (cells + options.cells_per_bin - 1) / options.cells_per_bin;
    std::vector<double> expected(bins, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        expected[i / options.cells_per_bin] += grid.weights()[i] * f[i];
    }

    // Bin index per sample; `bins` marks out-of-range.
    const double R = grid.radius();
    const double dx = grid.spacing();
    std::vector<std::size_t> bin_of(samples.paths);
    for (std::size_t p = 0; p < samples.paths; ++p) {
        const double x = samples.values[p];
        if (!(x >= -R && x <= R)) {
            bin_of[p] = bins;
            continue;
        }
        const auto cell = std::min(cells - 1, static_cast<std::size_t>((x + R) / dx + 0.5));
        bin_of[p] = cell / options.cells_per_bin;
    }

    const double n = static_cast<double>(samples.paths);
    auto distance = [&](const std::vector<double>& counts) {
        double acc = counts[bins] / n;
        for (std::size_t b = 0; b < bins; ++b) acc += std::abs(counts[b] / n - expected[b]);
        return 0.5 * acc;
    };

    std::vector<double> counts(bins + 1, 0.0);
    for (std::size_t b : bin_of) counts[b] += 1.0;
    const double value = distance(counts);

    double mean = 0.0;
    double sq = 0.0;
    const std::size_t reps = options.bootstrap_replicates;
    for (std::size_t r = 0; r < reps; ++r) {
        std::fill(counts.begin(), counts.end(), 0.0);
        const rng::Philox4x32::Key key{static_cast<std::uint32_t>(options.seed),
                                       static_cast<std::uint32_t>(options.seed >> 32)};
        for (std::size_t k = 0; k < samples.paths; k += 2) {
            const auto out = rng::Philox4x32::generate(
                {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                 static_cast<std::uint32_t>(r), 0x6b6f6f74u},
                key);
            for (std::size_t j = 0; j < 2 && k + j < samples.paths; ++j) {
                const double u = rng::uniform_open(out[2 * j], out[2 * j + 1]);
                const auto idx = std::min(samples.paths - 1, static_cast<std::size_t>(u * n));
                counts[bin_of[idx]] += 1.0;
            }
        }
        const double v = distance(counts);
        mean += v;
        sq += v * v;
    }
    double se = 0.0;
    if (reps > 1) {
        mean /= static_cast<double>(reps);
        se = std::sqrt(std::max(0.0, (sq - static_cast<double>(reps) * mean * mean) /
                                         static_cast<double>(reps - 1)));
    }
    return {value, se, samples.paths};
}

void write_samples_csv(const SampleMatrix& samples, const std::filesystem::path& path) {
    std::string out = "path_id,coord_index,value\n";
    for (std::size_t p = 0; p < samples.paths; ++p) {
        for (std::size_t i = 0; i < samples.dimension; ++i) {
            out += std::to_string(p);
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += io::format_double(samples.values[p * samples.dimension + i]);
            out += '\n';
        }
    }
    io::write_file_atomic(path, out);
}

}  // namespace cutofflab::mc
