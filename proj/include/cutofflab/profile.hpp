#pragma once

#include <string>
#include <vector>

namespace cutofflab {

// Distance of a law to the invariant measure, measured three ways.
// tv in [0,1], ent in nats, varent in nats^2.
struct DistanceTriple {
    double tv = 0.0;
    double ent = 0.0;
    double varent = 0.0;
};

enum class ProfileSource { AnalyticOU, FokkerPlanck };

inline const char* to_string(ProfileSource s) {
    return s == ProfileSource::AnalyticOU ? "analytic-ou" : "fokker-planck";
}

// Sampled curve t -> (TV, Ent, Varent, dEnt/dt) of one diffusion, together with
// the spectral gap and curvature it is checked against.
struct MixingProfile {
    std::vector<double> times;
    std::vector<DistanceTriple> triples;
    std::vector<double> dent_dt;
    double lambda = 0.0;
    double kappa = 0.0;
    ProfileSource source = ProfileSource::AnalyticOU;
    // Free-form resolution description, e.g. "d=16" or "n=2048,R=8,delta=0.05".
    std::string resolution;

    std::size_t size() const noexcept { return times.size(); }
    std::vector<double> tv_curve() const;
    std::vector<double> ent_curve() const;

    // Throws InvalidArgument when the structural invariants fail.
    void validate() const;
};

}  // namespace cutofflab
