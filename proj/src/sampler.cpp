#include "wicksell/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wicksell/quadrature.hpp"
#include "wicksell/stats.hpp"

namespace wicksell {
namespace {

constexpr int kTableKnots = 4096;  // 2^12

}  // namespace

SampleSet ingest_sample(std::vector<double> values, std::string provenance) {
    if (values.empty()) throw std::invalid_argument("sample: no observations");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("sample: observations must be finite and nonnegative");
    std::sort(values.begin(), values.end());
    SampleSet s;
    s.values = std::move(values);
    s.provenance = std::move(provenance);
    return s;
}

ForwardSampler::ForwardSampler(ObservationModel obs) : obs_(std::move(obs)) {
    const CdfModel& m = obs_.model();
    if (m.kind() == CdfModel::Kind::kPointMass ||
        m.kind() == CdfModel::Kind::kDiscreteExample) {
        atomic_ = true;
        double cum = 0.0;
        for (const auto& [loc, mass] : m.atoms()) {
            if (loc <= 0.0) continue;  // zero-radius spheres are never cut
            cum += mass * std::sqrt(loc) / obs_.m0();
            atom_x_.push_back(loc);
            atom_cum_.push_back(cum);
        }
        // Truncation of the discrete table leaves cum within ~1e-6 of 1;
        // renormalize so the last entry is exact.
        if (atom_cum_.empty()) throw std::invalid_argument("sampler: no usable atoms");
        const double total = atom_cum_.back();
        for (double& c : atom_cum_) c /= total;
        return;
    }
    if (m.kind() == CdfModel::Kind::kUniform01) return;  // closed-form inverse
    if (m.kind() == CdfModel::Kind::kFlatMixture) {
        // Piecewise closed-form inverse: cache per-piece biased masses.
        const auto breaks = m.density_breakpoints();
        for (std::size_t j = 0; j + 1 < breaks.size(); j += 2) {
            FlatBiasedPiece piece;
            piece.lo = breaks[j];
            piece.hi = breaks[j + 1];
            piece.density = m.density(0.5 * (piece.lo + piece.hi));
            piece.raw_before = m.biased_integral(piece.lo);
            piece.raw_after = m.biased_integral(piece.hi);
            flat_pieces_.push_back(piece);
        }
        return;
    }
    // Remaining continuous kinds: F^b table on 2^12 knots over the support.
    double lo = 0.0;
    const double hi = obs_.model().support_upper();
    knot_x_.resize(kTableKnots + 1);
    knot_p_.resize(kTableKnots + 1);
    for (int i = 0; i <= kTableKnots; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / kTableKnots;
        knot_x_[i] = x;
        knot_p_[i] = biased_cdf(x);
    }
    knot_p_.front() = 0.0;
    knot_p_.back() = 1.0;
    for (int i = 1; i <= kTableKnots; ++i)
        knot_p_[i] = std::max(knot_p_[i], knot_p_[i - 1]);
}

double ForwardSampler::biased_cdf(double x) const {
    return std::clamp(obs_.model().biased_integral(x) / obs_.m0(), 0.0, 1.0);
}

double ForwardSampler::sample_sphere(RngStream& rng) const {
    return obs_.model().quantile(rng.next_double());
}

double ForwardSampler::biased_quantile(double p) const {
    if (atomic_) {
        const auto it = std::lower_bound(atom_cum_.begin(), atom_cum_.end(), p);
        const std::size_t j = std::min<std::size_t>(it - atom_cum_.begin(),
                                                    atom_x_.size() - 1);
        return atom_x_[j];
    }
    if (obs_.model().kind() == CdfModel::Kind::kUniform01)
        return std::pow(p, 2.0 / 3.0);  // F^b(x) = x^(3/2)
    if (!flat_pieces_.empty()) {
        const double raw = p * obs_.m0();
        for (const auto& piece : flat_pieces_) {
            if (raw <= piece.raw_after || &piece == &flat_pieces_.back()) {
                if (piece.density <= 0.0) return piece.hi;
                // Invert raw_before + d * (2/3)(x^{3/2} - lo^{3/2}) = raw.
                const double t = std::pow(piece.lo, 1.5) +
                                 1.5 * (raw - piece.raw_before) / piece.density;
                return std::clamp(std::pow(std::max(t, 0.0), 2.0 / 3.0), piece.lo, piece.hi);
            }
        }
    }
    const auto it = std::lower_bound(knot_p_.begin(), knot_p_.end(), p);
    std::size_t j = it - knot_p_.begin();
    if (j == 0) return knot_x_.front();
    if (j > static_cast<std::size_t>(kTableKnots)) return knot_x_.back();
    double lo = knot_x_[j - 1], hi = knot_x_[j];
    // Refine by bisection against the exact F^b.
    const double scale = std::max(1.0, knot_x_.back());
    for (int it2 = 0; it2 < 200 && (hi - lo) > 1e-12 * scale; ++it2) {
        const double mid = 0.5 * (lo + hi);
        (biased_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ForwardSampler::sample_biased(RngStream& rng) const {
    return biased_quantile(rng.next_double());
}

double ForwardSampler::sample_observation(RngStream& rng) const {
    const double xb = sample_biased(rng);
    const double u = rng.next_double();
    return (1.0 - u * u) * xb;
}

SampleSet ForwardSampler::sample_dataset(std::size_t n, std::uint64_t seed,
                                         std::uint64_t stream) const {
    if (n == 0) throw std::invalid_argument("sample_dataset: n must be >= 1");
    RngStream rng(seed, stream);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = sample_observation(rng);
    std::sort(z.begin(), z.end());
    SampleSet s;
    s.values = std::move(z);
    s.seed = seed;
    s.provenance = "simulated:" + obs_.model().describe();
    return s;
}

// ---------------------------------------------------------------------------
// Route B: inverse cdf of g
// ---------------------------------------------------------------------------

InverseCdfSampler::InverseCdfSampler(const ObservationModel& obs) {
    const double zu = obs.z_upper();
    const CdfModel& m = obs.model();
    z_.resize(kTableKnots + 1);
    p_.resize(kTableKnots + 1);
    for (int i = 0; i <= kTableKnots; ++i)
        z_[i] = zu * static_cast<double>(i) / kTableKnots;

    if (m.has_atoms() && m.kind() != CdfModel::Kind::kHolderPoint) {
        // Closed form: G(z) = sum_j w_j^b (1 - sqrt((1 - z/x_j)+)). Collapse
        // far-tail atoms of the discrete example into their accumulation
        // point; the displacement is below t_4096 and immaterial here.
        std::vector<std::pair<double, double>> wts;  // (location, biased weight)
        const auto& atoms = m.atoms();
        const std::size_t cap = 4096;
        double lump_w = 0.0;
        double lump_loc = 0.0;
        if (atoms.size() > 2 * cap + 1) {
            const std::size_t mid = atoms.size() / 2;
            lump_loc = atoms[mid].first;
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                const auto& [loc, mass] = atoms[j];
                if (loc <= 0.0) continue;
                const double w = mass * std::sqrt(loc) / obs.m0();
                if (j + cap < mid || j > mid + cap)
                    wts.push_back({loc, w});
                else
                    lump_w += w;
            }
            wts.push_back({lump_loc, lump_w});
        } else {
            for (const auto& [loc, mass] : atoms)
                if (loc > 0.0) wts.push_back({loc, mass * std::sqrt(loc) / obs.m0()});
        }
        for (int i = 0; i <= kTableKnots; ++i) {
            const double z = z_[i];
            double s = 0.0;
            for (const auto& [loc, w] : wts) {
                const double r = 1.0 - z / loc;
                s += w * (1.0 - (r > 0.0 ? std::sqrt(r) : 0.0));
            }
            p_[i] = s;
        }
    } else {
        // Cumulative quadrature of g cell by cell.
        std::vector<double> breaks = m.density_breakpoints();
        double acc = 0.0;
        p_[0] = 0.0;
        for (int i = 1; i <= kTableKnots; ++i) {
            std::vector<double> local;
            for (double b : breaks)
                if (b > z_[i - 1] && b < z_[i]) local.push_back(b);
            acc += integrate_split([&](double z) { return obs.g(z); }, z_[i - 1], z_[i], local,
                                   1e-9, 1e-13);
            p_[i] = acc;
        }
        if (std::fabs(p_.back() - 1.0) > 1e-6)
            throw std::runtime_error("inverse-cdf sampler: g does not integrate to 1 (got " +
                                     std::to_string(p_.back()) + ")");
    }
    // Enforce monotonicity and exact endpoints.
    for (int i = 1; i <= kTableKnots; ++i) p_[i] = std::max(p_[i], p_[i - 1]);
    const double total = p_.back();
    for (double& v : p_) v /= total;
    p_.front() = 0.0;
    p_.back() = 1.0;
}

double InverseCdfSampler::sample(RngStream& rng) const {
    const double u = rng.next_double();
    const auto it = std::lower_bound(p_.begin(), p_.end(), u);
    std::size_t j = it - p_.begin();
    if (j == 0) return z_.front();
    const double p0 = p_[j - 1], p1 = p_[j];
    if (p1 <= p0) return z_[j];
    const double w = (u - p0) / (p1 - p0);
    return z_[j - 1] + w * (z_[j] - z_[j - 1]);
}

}  // namespace wicksell
