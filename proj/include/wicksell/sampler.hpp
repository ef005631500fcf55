#ifndef WICKSELL_SAMPLER_HPP_
#define WICKSELL_SAMPLER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wicksell/dist_models.hpp"
#include "wicksell/rng.hpp"

namespace wicksell {

/// Sorted observed squared circle radii Z_1 <= ... <= Z_n.
struct SampleSet {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string provenance;  // "simulated:<model>" or "ingested:<path>"

    std::size_t size() const { return values.size(); }
};

/// Makes a SampleSet out of externally supplied observations (sorts and
/// validates nonnegativity).
SampleSet ingest_sample(std::vector<double> values, std::string provenance);

/// Simulates the observation mechanism: size-biased sphere selection
/// followed by a uniform planar section, Z = (1 - U^2) X^b.
///
/// Stateless apart from construction-time tables: distinct RngStreams may
/// drive the same sampler from different threads concurrently; a single
/// stream must not be shared across threads.
class ForwardSampler {
public:
    explicit ForwardSampler(ObservationModel obs);

    const ObservationModel& observation_model() const { return obs_; }

    /// Squared sphere radius X ~ F (inverse-cdf draw).
    double sample_sphere(RngStream& rng) const;
    /// Squared radius of a sphere actually cut, dF^b = sqrt(x) dF / m0.
    double sample_biased(RngStream& rng) const;
    /// Observed squared circle radius Z = (1 - U^2) X^b.
    double sample_observation(RngStream& rng) const;
    /// n observations, sorted; deterministic given (seed, stream).
    SampleSet sample_dataset(std::size_t n, std::uint64_t seed,
                             std::uint64_t stream = 0) const;

    /// Size-biased cdf F^b(x) = integral_0^x sqrt(y) dF(y) / m0.
    double biased_cdf(double x) const;

private:
    double biased_quantile(double p) const;

    struct FlatBiasedPiece {
        double lo = 0.0, hi = 0.0, density = 0.0;
        double raw_before = 0.0, raw_after = 0.0;  // unnormalized F^b at the edges
    };

    ObservationModel obs_;
    // Monotone inverse-cdf table for kinds without a closed-form inverse
    // (2^12 knots), refined by bisection against the exact F^b. Atomic kinds
    // use cumulative biased weights; uniform01 and flat mixtures invert in
    // closed form.
    std::vector<double> knot_x_, knot_p_;
    std::vector<double> atom_x_, atom_cum_;
    std::vector<FlatBiasedPiece> flat_pieces_;
    bool atomic_ = false;
};

/// Independent cross-validation route: inverse-cdf draws from the cdf of g
/// built by cumulative quadrature on a 2^12-knot table.
class InverseCdfSampler {
public:
    explicit InverseCdfSampler(const ObservationModel& obs);

    double sample(RngStream& rng) const;

    const std::vector<double>& grid() const { return z_; }
    const std::vector<double>& cdf() const { return p_; }

private:
    std::vector<double> z_, p_;
};

}  // namespace wicksell

#endif  // WICKSELL_SAMPLER_HPP_
