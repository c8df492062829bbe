#include "cutofflab/gaussian_ou.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numbers>
#include <string>


#include "cutofflab/errors.hpp"
#include "cutofflab/quadrature.hpp"

namespace cutofflab::ou {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void require_compatible(const GaussianLaw& p, const GaussianLaw& q) {
    if (p.dimension() != q.dimension()) {
        throw InvalidArgument("dimension mismatch: " + std::to_string(p.dimension()) +
                              " vs " + std::to_string(q.dimension()));
    }
}

double offset_norm_squared(const GaussianLaw& p, const GaussianLaw& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.dimension(); ++i) {
        const double diff = p.mean()[i] - q.mean()[i];
        acc += diff * diff;
    }
    return acc;
}

// Real roots of c2 u^2 + c1 u + c0 = 0, cancellation-free.
std::vector<double> quadratic_roots(double c2, double c1, double c0) {
    std::vector<double> roots;
    if (c2 == 0.0) {
        if (c1 != 0.0) roots.push_back(-c0 / c1);
        return roots;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return roots;
    const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    if (q != 0.0) {
        roots.push_back(q / c2);
        roots.push_back(c0 / q);
    } else {
        roots.push_back(0.0);
    }
    return roots;
}

// P(a < Z < b) for standard normal Z, without cancellation in either tail.
double normal_interval(double a, double b) {
    if (!(b > a)) return 0.0;
    if (a >= 0.0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
    return 1.0 - 0.5 * std::erfc(-a / kSqrt2) - 0.5 * std::erfc(b / kSqrt2);
}

}  // namespace

GaussianLaw::GaussianLaw(std::vector<double> mean, double variance)
    : mean_(std::move(mean)), variance_(variance) {
    if (mean_.empty()) throw InvalidArgument("GaussianLaw: dimension must be >= 1");
    if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
        throw InvalidArgument("GaussianLaw: variance must be positive and finite");
    }
    for (double m : mean_) {
        if (!std::isfinite(m)) throw InvalidArgument("GaussianLaw: non-finite mean");
    }
}

OUModel::OUModel(double theta, std::vector<double> start)
    : theta_(theta), start_(std::move(start)), start_norm2_(0.0) {
    if (!(theta_ > 0.0) || !std::isfinite(theta_)) {
        throw InvalidArgument("OUModel: theta must be positive and finite");
    }
    if (start_.empty()) throw InvalidArgument("OUModel: dimension must be >= 1");
    for (double x : start_) {
        if (!std::isfinite(x)) throw InvalidArgument("OUModel: non-finite start");
        start_norm2_ += x * x;
    }
}

OUModel OUModel::uniform_start(double theta, std::size_t dimension, double x0) {
    return OUModel(theta, std::vector<double>(dimension, x0));
}

GaussianLaw OUModel::stationary() const {
    return GaussianLaw(std::vector<double>(dimension(), 0.0), 1.0 / theta_);
}

GaussianLaw law_at(const OUModel& model, double t) {
    if (!std::isfinite(t)) throw InvalidArgument("law_at: non-finite time");
    if (t <= 0.0) {
        throw DegenerateStartError("law_at: t must be > 0, the law at t = 0 is a point mass");
    }
    const double decay = std::exp(-model.theta() * t);
    std::vector<double> mean = model.start();
    for (double& m : mean) m *= decay;
    const double variance = -std::expm1(-2.0 * model.theta() * t) / model.theta();
    return GaussianLaw(std::move(mean), variance);
}

double gaussian_ent(const GaussianLaw& p, const GaussianLaw& stationary) {
    require_compatible(p, stationary);
    const double sigma2 = stationary.variance();
    const double excess = (p.variance() - sigma2) / sigma2;  // r - 1
    const double d = static_cast<double>(p.dimension());
    const double per_coord = 0.5 * (excess - std::log1p(excess));
    return std::max(0.0, d * per_coord + offset_norm_squared(p, stationary) / (2.0 * sigma2));
}

double gaussian_varent(const GaussianLaw& p, const GaussianLaw& stationary) {
    require_compatible(p, stationary);
    const double sigma2 = stationary.variance();
    const double excess = (p.variance() - sigma2) / sigma2;
    const double d = static_cast<double>(p.dimension());
    return d * 0.5 * excess * excess +
           offset_norm_squared(p, stationary) * p.variance() / (sigma2 * sigma2);
}

double gaussian_tv(const GaussianLaw& p, const GaussianLaw& stationary, double tolerance) {
    require_compatible(p, stationary);
    const double s2 = p.variance();
    const double sigma2 = stationary.variance();
    const double s = std::sqrt(s2);
    const double sigma = std::sqrt(sigma2);
    const double offset = std::sqrt(offset_norm_squared(p, stationary));
    const std::size_t d = p.dimension();

    const double excess = (s2 - sigma2) / sigma2;
    if (std::abs(excess) < 1e-14) {
        return std::erf(offset / (2.0 * kSqrt2 * sigma));
    }

    // Coordinates: u along the mean offset (stationary centred at 0, p at
    // `offset`) and rho, the radius orthogonal to it. Then
    //   log p - log q = g(u) - a rho^2,   g(u) = c2 u^2 + c1 u + c0,
    // and the event {p > q} is, for each rho, an interval in u (a > 0) or the
    // complement of one (a < 0), whose probabilities are normal CDF differences.
    const double a = 0.5 * (1.0 / s2 - 1.0 / sigma2);
    const double c2 = -a;
    const double c1 = offset / s2;
    const double c0 = -0.5 * static_cast<double>(d) * std::log1p(excess) -
                      offset * offset / (2.0 * s2);

    // Returns (P_p, P_q) of {u : g(u) > a rho^2}.
    auto slice = [&](double rho) -> std::pair<double, double> {
        const auto roots = quadratic_roots(c2, c1, c0 - a * rho * rho);
        if (roots.size() < 2) {
            return a > 0.0 ? std::pair{0.0, 0.0} : std::pair{1.0, 1.0};
        }
        const double lo = std::min(roots[0], roots[1]);
        const double hi = std::max(roots[0], roots[1]);
        const double inside_p = normal_interval((lo - offset) / s, (hi - offset) / s);
        const double inside_q = normal_interval(lo / sigma, hi / sigma);
        return a > 0.0 ? std::pair{inside_p, inside_q} : std::pair{1.0 - inside_p, 1.0 - inside_q};
    };

    if (d == 1) {
        const auto [prob_p, prob_q] = slice(0.0);
        return std::clamp(prob_p - prob_q, 0.0, 1.0);
    }

    // Outer integral over rho against the chi densities of the two laws.
    const double dof = static_cast<double>(d - 1);
    const double log_norm = std::log(2.0) - std::lgamma(0.5 * dof);
    auto chi_density = [&](double rho, double scale2) {
        if (rho <= 0.0) return dof == 1.0 ? std::exp(log_norm - 0.5 * std::log(2.0 * scale2)) : 0.0;
        return std::exp(log_norm + (dof - 1.0) * std::log(rho) - rho * rho / (2.0 * scale2) -
                        0.5 * dof * std::log(2.0 * scale2));
    };
    auto integrand = [&](double rho) {
        const auto [prob_p, prob_q] = slice(rho);
        return std::max(0.0, chi_density(rho, s2) * prob_p - chi_density(rho, sigma2) * prob_q);
    };

    // The chi_k law of scale sd has its mode near sd * sqrt(k - 1) and spread ~ sd / sqrt(2).
    constexpr double kWide = 15.0;
    const double centre = std::sqrt(std::max(dof - 1.0, 0.0));
    const double hi = std::max(s, sigma) * (centre + kWide);
    std::vector<double> cuts{0.0, hi};
    for (double sd : {s, sigma}) {
        for (double k : {-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0}) cuts.push_back(sd * (centre + k));
    }
    // Beyond rho* the u-slice changes shape (empty interval / whole line).
    const double disc0 = c1 * c1 - 4.0 * c2 * c0;
    const double rho_star2 = disc0 / (4.0 * a * a);
    if (rho_star2 > 0.0) cuts.push_back(std::sqrt(rho_star2));
    std::erase_if(cuts, [&](double c) { return !(c >= 0.0 && c <= hi); });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto result = quad::integrate(integrand, cuts, 0.1 * tolerance);
    const double total = result.value;
    const double total_error = result.error;
    if (!(total_error <= tolerance)) {
        throw QuadratureError("gaussian_tv: quadrature error estimate " +
                                  std::to_string(total_error) + " exceeds tolerance",
                              total_error);
    }
    return std::clamp(total, 0.0, 1.0);
}

DistanceTriple distances(const GaussianLaw& p, const GaussianLaw& stationary) {
    return {gaussian_tv(p, stationary), gaussian_ent(p, stationary),
            gaussian_varent(p, stationary)};
}

double dent_dt(const OUModel& model, double t) {
    if (!(t > 0.0)) throw DegenerateStartError("dent_dt: t must be > 0");
    const double theta = model.theta();
    const double q = std::exp(-2.0 * theta * t);
    const double one_minus_q = -std::expm1(-2.0 * theta * t);
    const double d = static_cast<double>(model.dimension());
    return -d * theta * q * q / one_minus_q - theta * theta * model.start_norm_squared() * q;
}

MixingProfile profile(const OUModel& model, std::span<const double> time_grid) {
    MixingProfile out;
    out.source = ProfileSource::AnalyticOU;
    out.lambda = model.spectral_gap();
    out.kappa = model.curvature();
    out.resolution = "closed-form,d=" + std::to_string(model.dimension());
    const GaussianLaw stationary = model.stationary();
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        const double t = time_grid[i];
        if (!(t > 0.0)) throw DegenerateStartError("profile: time grid entries must be > 0");
        if (i > 0 && !(t > time_grid[i - 1])) {
            throw InvalidArgument("profile: time grid must be strictly increasing");
        }
        out.times.push_back(t);
        out.triples.push_back(distances(law_at(model, t), stationary));
        out.dent_dt.push_back(dent_dt(model, t));
    }
    return out;
}

double mixing_time(const OUModel& model, double epsilon, std::optional<double> bracket_hint) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidArgument("mixing_time: epsilon must lie in (0, 1)");
    }
    const GaussianLaw stationary = model.stationary();
    auto tv = [&](double t) { return gaussian_tv(law_at(model, t), stationary); };

    double hi = bracket_hint.value_or(1.0 / model.theta());
    if (!(hi > 0.0) || !std::isfinite(hi)) throw InvalidArgument("mixing_time: bad bracket hint");
    int guard = 0;
    while (tv(hi) > epsilon) {
        hi *= 2.0;
        if (++guard > 200) throw BracketError("mixing_time: TV never falls below epsilon");
    }
    double lo = 0.5 * hi;
    const double floor = 1e-14 / model.theta();
    while (tv(lo) <= epsilon) {
        hi = lo;
        lo *= 0.5;
        if (lo < floor) return hi;  // epsilon above the TV of every resolvable time
    }

    constexpr int kMonotoneSamples = 64;
    double previous = tv(lo);
    for (int k = 1; k < kMonotoneSamples; ++k) {
        const double t = lo + (hi - lo) * k / (kMonotoneSamples - 1);
        const double current = tv(t);
        if (current > previous + 1e-9) {
            throw MonotonicityError("mixing_time: TV increases near t = " + std::to_string(t));
        }
        previous = current;
    }

    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (tv(mid) > epsilon) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

}  // namespace cutofflab::ou
