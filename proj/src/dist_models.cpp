#include "wicksell/dist_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "wicksell/quadrature.hpp"
#include "wicksell/stats.hpp"

namespace wicksell {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZeta2 = kPi * kPi / 6.0;
// Per-side atom mass factor of the discrete example: mass(x0 +- t_i) = kC/i^2.
constexpr double kC = 3.0 / (kPi * kPi);
// Truncation of the discrete example's atom table; everything past it is
// handled by Euler-Maclaurin tails.
constexpr std::int64_t kDiscreteTableN = 200000;

// sum_{j>M} j^-2 by Euler-Maclaurin, accurate to O(M^-7).
double zeta2_tail(double m) {
    const double im = 1.0 / m;
    const double im2 = im * im;
    return im - 0.5 * im2 + im * im2 / 6.0 - im * im2 * im2 / 30.0;
}

struct Uniform01Data {};

struct GammaData {
    double shape = 1.0;
    double rate = 1.0;
    double upper = 1.0;  // (1 - 1e-15)-quantile
};

struct FlatData {
    std::vector<FlatPiece> pieces;   // sorted, disjoint
    std::vector<double> cum_before;  // mass strictly below pieces[j].lo
    double upper = 0.0;
};

struct HolderData {
    double x0 = 0.0, gamma = 1.0, k = 1.0, base = 0.0;
    double support_lo = 0.0;  // max(x0 - (base/k)^(1/gamma), 0)
    double hi = 0.0;          // x0 + ((1-base)/k)^(1/gamma)
    double atom0 = 0.0;       // mass at exactly 0 when base > k*x0^gamma
    double s_left = 0.0;      // mass of the continuous left branch divided by k
};

struct DiscreteData {
    double x0 = 0.0, gamma = 0.75;
    std::shared_ptr<const std::vector<double>> prefix;  // prefix[i] = sum_{j<=i} j^-2
};

struct PointData {
    double at = 0.0;
};

double t_of(double gamma, double i) { return std::pow(i, -1.0 / gamma); }

// sum_{j<=m} j^-2 for any m >= 0 (table up to kDiscreteTableN, tail beyond).
double partial_zeta2(const DiscreteData& d, double m) {
    if (m <= 0.0) return 0.0;
    const auto& pf = *d.prefix;
    if (m < static_cast<double>(pf.size()))
        return pf[static_cast<std::size_t>(m)];
    return kZeta2 - zeta2_tail(m);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("model spec: bad number for " + what + ": '" + s + "'");
    }
}

}  // namespace

struct CdfModel::Impl {
    std::variant<Uniform01Data, GammaData, FlatData, HolderData, DiscreteData, PointData> data;
    std::vector<std::pair<double, double>> atoms;  // sorted by location
};

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

CdfModel CdfModel::uniform01() {
    auto impl = std::make_shared<Impl>();
    impl->data = Uniform01Data{};
    return CdfModel(Kind::kUniform01, impl);
}

CdfModel CdfModel::gamma_model(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("gamma model: shape and rate must be positive");
    GammaData g;
    g.shape = shape;
    g.rate = rate;
    double hi = shape / rate + 1.0;
    while (gamma_p(shape, rate * hi) < 1.0 - 1e-15) hi *= 1.5;
    g.upper = hi;
    auto impl = std::make_shared<Impl>();
    impl->data = g;
    return CdfModel(Kind::kGamma, impl);
}

CdfModel CdfModel::flat_mixture(std::vector<FlatPiece> pieces) {
    if (pieces.empty()) throw std::invalid_argument("flat mixture: no pieces");
    std::sort(pieces.begin(), pieces.end(),
              [](const FlatPiece& a, const FlatPiece& b) { return a.lo < b.lo; });
    double mass = 0.0;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        const auto& p = pieces[j];
        if (!(p.hi > p.lo) || p.lo < 0.0 || p.density < 0.0)
            throw std::invalid_argument("flat mixture: invalid piece");
        if (j > 0 && p.lo < pieces[j - 1].hi)
            throw std::invalid_argument("flat mixture: overlapping pieces");
        mass += p.density * (p.hi - p.lo);
    }
    if (std::fabs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("flat mixture: total mass must be 1, got " +
                                    std::to_string(mass));
    FlatData f;
    f.pieces = std::move(pieces);
    f.cum_before.resize(f.pieces.size());
    double c = 0.0;
    for (std::size_t j = 0; j < f.pieces.size(); ++j) {
        f.cum_before[j] = c;
        c += f.pieces[j].density * (f.pieces[j].hi - f.pieces[j].lo);
    }
    f.upper = f.pieces.back().hi;
    auto impl = std::make_shared<Impl>();
    impl->data = std::move(f);
    return CdfModel(Kind::kFlatMixture, impl);
}

CdfModel CdfModel::flat_default() {
    return flat_mixture({{0.5, 2.0, 0.4}, {3.0, 4.0, 0.4}});
}

CdfModel CdfModel::holder_point(double x0, double gamma, double k, double base) {
    if (!(x0 > 0.0)) throw std::invalid_argument("holder model: x0 must be positive");
    if (!(gamma > 0.5)) throw std::invalid_argument("holder model: gamma must exceed 1/2");
    if (!(k > 0.0)) throw std::invalid_argument("holder model: K must be positive");
    if (base < 0.0 || base > 1.0)
        throw std::invalid_argument("holder model: base level must lie in [0,1]");
    HolderData h;
    h.x0 = x0;
    h.gamma = gamma;
    h.k = k;
    h.base = base;
    const double reach_left = std::pow(base / k, 1.0 / gamma);
    h.support_lo = std::max(x0 - reach_left, 0.0);
    h.hi = x0 + std::pow((1.0 - base) / k, 1.0 / gamma);
    h.atom0 = std::max(0.0, base - k * std::pow(x0, gamma));
    h.s_left = std::min(base / k, std::pow(x0, gamma));
    auto impl = std::make_shared<Impl>();
    impl->data = h;
    if (h.atom0 > 0.0) impl->atoms.push_back({0.0, h.atom0});
    return CdfModel(Kind::kHolderPoint, impl);
}

CdfModel CdfModel::discrete_example(double x0, double gamma) {
    if (!(gamma > 0.5))
        throw std::invalid_argument("discrete example: gamma must exceed 1/2");
    if (!(x0 >= 1.0))
        throw std::invalid_argument(
            "discrete example: x0 must be >= 1 so the support stays nonnegative");
    DiscreteData d;
    d.x0 = x0;
    d.gamma = gamma;
    auto prefix = std::make_shared<std::vector<double>>(kDiscreteTableN + 1, 0.0);
    long double acc = 0.0L;
    for (std::int64_t i = 1; i <= kDiscreteTableN; ++i) {
        acc += 1.0L / (static_cast<long double>(i) * static_cast<long double>(i));
        (*prefix)[static_cast<std::size_t>(i)] = static_cast<double>(acc);
    }
    d.prefix = prefix;
    auto impl = std::make_shared<Impl>();
    // Truncated atom table, ascending by location. The residual mass of both
    // branches is lumped at the accumulation point x0.
    impl->atoms.reserve(2 * kDiscreteTableN + 1);
    for (std::int64_t i = 1; i <= kDiscreteTableN; ++i) {
        const double fi = static_cast<double>(i);
        impl->atoms.push_back({x0 - t_of(gamma, fi), kC / (fi * fi)});
    }
    impl->atoms.push_back({x0, 2.0 * kC * zeta2_tail(static_cast<double>(kDiscreteTableN))});
    for (std::int64_t i = kDiscreteTableN; i >= 1; --i) {
        const double fi = static_cast<double>(i);
        impl->atoms.push_back({x0 + t_of(gamma, fi), kC / (fi * fi)});
    }
    impl->data = std::move(d);
    return CdfModel(Kind::kDiscreteExample, impl);
}

CdfModel CdfModel::point_mass(double at) {
    if (!(at > 0.0)) throw std::invalid_argument("point mass: location must be positive");
    PointData p;
    p.at = at;
    auto impl = std::make_shared<Impl>();
    impl->data = p;
    impl->atoms.push_back({at, 1.0});
    return CdfModel(Kind::kPointMass, impl);
}

// ---------------------------------------------------------------------------
// Spec-string parsing
// ---------------------------------------------------------------------------

CdfModel CdfModel::parse(const std::string& spec) {
    if (spec == "uniform01") return uniform01();
    if (spec.rfind("gamma:", 0) == 0) {
        const std::string rest = spec.substr(6);
        if (rest.find('=') != std::string::npos) {
            double shape = 0.0, rate = 0.0, scale = 0.0;
            bool have_scale = false, have_rate = false, have_shape = false;
            for (const auto& kv : split_on(rest, ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("model spec: expected key=value in '" + kv + "'");
                const std::string key = kv.substr(0, eq);
                const double v = parse_num(kv.substr(eq + 1), key);
                if (key == "shape") {
                    shape = v;
                    have_shape = true;
                } else if (key == "rate") {
                    rate = v;
                    have_rate = true;
                } else if (key == "scale") {
                    scale = v;
                    have_scale = true;
                } else {
                    throw std::invalid_argument("model spec: unknown gamma key '" + key + "'");
                }
            }
            if (!have_shape) throw std::invalid_argument("model spec: gamma needs shape=");
            if (have_scale == have_rate)
                throw std::invalid_argument(
                    "model spec: gamma needs exactly one of rate=, scale=");
            return gamma_model(shape, have_scale ? 1.0 / scale : rate);
        }
        const auto parts = split_on(rest, ':');
        if (parts.size() != 2)
            throw std::invalid_argument("model spec: expected gamma:<shape>:<rate>");
        return gamma_model(parse_num(parts[0], "shape"), parse_num(parts[1], "rate"));
    }
    if (spec == "flat:default") return flat_default();
    if (spec.rfind("flat:", 0) == 0) {
        std::vector<FlatPiece> pieces;
        for (const auto& ps : split_on(spec.substr(5), ';')) {
            const auto nums = split_on(ps, ',');
            if (nums.size() != 3)
                throw std::invalid_argument("model spec: flat piece needs <a>,<b>,<d>");
            pieces.push_back({parse_num(nums[0], "piece lo"), parse_num(nums[1], "piece hi"),
                              parse_num(nums[2], "piece density")});
        }
        return flat_mixture(std::move(pieces));
    }
    if (spec.rfind("holder:", 0) == 0 || spec.rfind("discrete:", 0) == 0) {
        const bool is_holder = spec[0] == 'h';
        double x0 = 0.0, gamma = 0.0, k = 0.0, base = 0.0;
        bool have_x0 = false, have_gamma = false, have_k = false, have_base = false;
        const std::string rest = spec.substr(spec.find(':') + 1);
        for (const auto& kv : split_on(rest, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("model spec: expected key=value in '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            const double v = parse_num(kv.substr(eq + 1), key);
            if (key == "x0") {
                x0 = v;
                have_x0 = true;
            } else if (key == "gamma") {
                gamma = v;
                have_gamma = true;
            } else if (key == "K") {
                k = v;
                have_k = true;
            } else if (key == "base") {
                base = v;
                have_base = true;
            } else {
                throw std::invalid_argument("model spec: unknown key '" + key + "'");
            }
        }
        if (!have_x0 || !have_gamma)
            throw std::invalid_argument("model spec: need x0= and gamma=");
        if (is_holder) {
            if (!have_k || !have_base)
                throw std::invalid_argument("model spec: holder needs K= and base=");
            return holder_point(x0, gamma, k, base);
        }
        if (have_k || have_base)
            throw std::invalid_argument("model spec: discrete takes only x0= and gamma=");
        return discrete_example(x0, gamma);
    }
    throw std::invalid_argument("model spec: unrecognized '" + spec + "'");
}

std::string CdfModel::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::kUniform01:
            return "uniform01";
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            os << "gamma:" << g.shape << ":" << g.rate;
            return os.str();
        }
        case Kind::kFlatMixture: {
            const auto& f = std::get<FlatData>(impl_->data);
            os << "flat:";
            for (std::size_t j = 0; j < f.pieces.size(); ++j) {
                if (j) os << ";";
                os << f.pieces[j].lo << "," << f.pieces[j].hi << "," << f.pieces[j].density;
            }
            return os.str();
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            os << "holder:x0=" << h.x0 << ",gamma=" << h.gamma << ",K=" << h.k
               << ",base=" << h.base;
            return os.str();
        }
        case Kind::kDiscreteExample: {
            const auto& d = std::get<DiscreteData>(impl_->data);
            os << "discrete:x0=" << d.x0 << ",gamma=" << d.gamma;
            return os.str();
        }
        case Kind::kPointMass: {
            os << "point:" << std::get<PointData>(impl_->data).at;
            return os.str();
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// cdf / quantile / support
// ---------------------------------------------------------------------------

double CdfModel::cdf(double u) const {
    if (u < 0.0) return 0.0;
    switch (kind_) {
        case Kind::kUniform01:
            return std::clamp(u, 0.0, 1.0);
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            return u == 0.0 ? 0.0 : gamma_p(g.shape, g.rate * u);
        }
        case Kind::kFlatMixture: {
            const auto& f = std::get<FlatData>(impl_->data);
            for (std::size_t j = 0; j < f.pieces.size(); ++j) {
                const auto& p = f.pieces[j];
                if (u < p.lo) return f.cum_before[j];
                if (u <= p.hi) return f.cum_before[j] + p.density * (u - p.lo);
            }
            return 1.0;
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            const double d = u - h.x0;
            const double raw =
                h.base + (d >= 0.0 ? h.k * std::pow(d, h.gamma) : -h.k * std::pow(-d, h.gamma));
            return std::clamp(raw, 0.0, 1.0);
        }
        case Kind::kDiscreteExample: {
            // Index thresholds carry a relative guard so that queries exactly
            // at an atom include its mass (right-continuity) despite the
            // pow() round trip.
            const auto& d = std::get<DiscreteData>(impl_->data);
            if (u < d.x0) {
                const double gap = d.x0 - u;
                if (gap > 1.0) return 0.0;  // t_1 = 1 is the farthest left atom
                const double q = std::pow(gap, -d.gamma);
                const double m = std::floor(q * (1.0 + 1e-12));
                return kC * partial_zeta2(d, m);
            }
            const double gap = u - d.x0;
            if (gap >= 1.0) return 1.0;
            if (gap <= 0.0) return 0.5;  // exactly at the accumulation point
            const double q = std::pow(gap, -d.gamma);
            const double mprime = std::ceil(q * (1.0 - 1e-12)) - 1.0;
            return 1.0 - kC * partial_zeta2(d, mprime);
        }
        case Kind::kPointMass:
            return u >= std::get<PointData>(impl_->data).at ? 1.0 : 0.0;
    }
    return 0.0;
}

double CdfModel::support_upper() const {
    switch (kind_) {
        case Kind::kUniform01:
            return 1.0;
        case Kind::kGamma:
            return std::get<GammaData>(impl_->data).upper;
        case Kind::kFlatMixture:
            return std::get<FlatData>(impl_->data).upper;
        case Kind::kHolderPoint:
            return std::get<HolderData>(impl_->data).hi;
        case Kind::kDiscreteExample:
            return std::get<DiscreteData>(impl_->data).x0 + 1.0;
        case Kind::kPointMass:
            return std::get<PointData>(impl_->data).at;
    }
    return 0.0;
}

bool CdfModel::has_atoms() const { return !impl_->atoms.empty(); }

const std::vector<std::pair<double, double>>& CdfModel::atoms() const { return impl_->atoms; }

double CdfModel::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p must lie in [0,1]");
    switch (kind_) {
        case Kind::kUniform01:
            return p;
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            if (p <= 0.0) return 0.0;
            if (p >= 1.0) return g.upper;
            double lo = 0.0, hi = g.upper;
            while (gamma_p(g.shape, g.rate * hi) < p) hi *= 1.5;
            for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (gamma_p(g.shape, g.rate * mid) < p ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case Kind::kFlatMixture: {
            const auto& f = std::get<FlatData>(impl_->data);
            for (std::size_t j = 0; j < f.pieces.size(); ++j) {
                const auto& pc = f.pieces[j];
                if (p <= f.cum_before[j])
                    return j == 0 ? pc.lo : f.pieces[j - 1].hi;
                const double mass = pc.density * (pc.hi - pc.lo);
                if (p <= f.cum_before[j] + mass || j + 1 == f.pieces.size()) {
                    if (pc.density <= 0.0) return pc.hi;
                    return std::min(pc.hi, pc.lo + (p - f.cum_before[j]) / pc.density);
                }
            }
            return f.upper;
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            if (p <= h.atom0) return 0.0;
            if (p >= 1.0) return h.hi;
            const double d = p - h.base;
            const double u = h.x0 + (d >= 0.0 ? std::pow(d / h.k, 1.0 / h.gamma)
                                              : -std::pow(-d / h.k, 1.0 / h.gamma));
            return std::clamp(u, 0.0, h.hi);
        }
        case Kind::kDiscreteExample: {
            const auto& d = std::get<DiscreteData>(impl_->data);
            const auto& pf = *d.prefix;
            if (p <= 0.0) return d.x0 - 1.0;
            if (p < 0.5) {
                // Smallest left-branch index i with kC * S(i) >= p.
                const double target = p / kC;
                if (pf.back() >= target) {
                    const auto it = std::lower_bound(pf.begin() + 1, pf.end(), target);
                    return d.x0 - t_of(d.gamma, static_cast<double>(it - pf.begin()));
                }
                const double tau = kZeta2 - target;  // need tail(i) <= tau
                double i = std::max(static_cast<double>(kDiscreteTableN) + 1.0,
                                    std::floor(1.0 / tau) - 2.0);
                while (zeta2_tail(i) > tau && i < 1e15) i += std::max(1.0, i * 1e-6);
                return d.x0 - t_of(d.gamma, std::floor(i));
            }
            // Right branch: quantile = x0 + t_i for the largest i with
            // S(i-1) <= (1-p)/kC; the positions shrink toward x0 as i grows.
            const double target = (1.0 - p) / kC;
            if (target <= 0.0) return d.x0 + 1.0;  // p == 1
            if (target >= kZeta2) return d.x0;
            if (pf.back() > target) {
                const auto it = std::upper_bound(pf.begin(), pf.end(), target);
                const double im1 = static_cast<double>(it - pf.begin()) - 1.0;
                return d.x0 + t_of(d.gamma, im1 + 1.0);
            }
            const double tau = kZeta2 - target;  // need tail(i-1) >= tau, largest such i
            double i = std::max(static_cast<double>(kDiscreteTableN) + 1.0,
                                std::floor(1.0 / tau) - 2.0);
            while (zeta2_tail(i) >= tau && i < 1e15) i += std::max(1.0, i * 1e-6);
            return d.x0 + t_of(d.gamma, std::max(1.0, i));
        }
        case Kind::kPointMass:
            return std::get<PointData>(impl_->data).at;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// density and dF-integration
// ---------------------------------------------------------------------------

double CdfModel::density(double u) const {
    switch (kind_) {
        case Kind::kUniform01:
            return (u > 0.0 && u < 1.0) ? 1.0 : 0.0;
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            if (u <= 0.0) return 0.0;
            return std::exp(g.shape * std::log(g.rate) + (g.shape - 1.0) * std::log(u) -
                            g.rate * u - std::lgamma(g.shape));
        }
        case Kind::kFlatMixture: {
            for (const auto& p : std::get<FlatData>(impl_->data).pieces)
                if (u >= p.lo && u < p.hi) return p.density;
            return 0.0;
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            if (u <= h.support_lo || u >= h.hi) return 0.0;
            return h.k * h.gamma * std::pow(std::fabs(u - h.x0), h.gamma - 1.0);
        }
        case Kind::kDiscreteExample:
        case Kind::kPointMass:
            return 0.0;
    }
    return 0.0;
}

std::vector<double> CdfModel::density_breakpoints() const {
    switch (kind_) {
        case Kind::kUniform01:
            return {0.0, 1.0};
        case Kind::kGamma:
            return {0.0};
        case Kind::kFlatMixture: {
            std::vector<double> b;
            for (const auto& p : std::get<FlatData>(impl_->data).pieces) {
                b.push_back(p.lo);
                b.push_back(p.hi);
            }
            return b;
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            return {h.support_lo, h.x0, h.hi};
        }
        case Kind::kDiscreteExample:
        case Kind::kPointMass:
            return {};
    }
    return {};
}

double CdfModel::integrate_dF(const std::function<double(double)>& f, double rel_tol) const {
    switch (kind_) {
        case Kind::kUniform01:
            return integrate(f, 0.0, 1.0, rel_tol);
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            return integrate([&](double x) { return f(x) * density(x); }, 0.0, g.upper,
                             rel_tol);
        }
        case Kind::kFlatMixture: {
            double s = 0.0;
            for (const auto& p : std::get<FlatData>(impl_->data).pieces)
                s += p.density * integrate(f, p.lo, p.hi, rel_tol);
            return s;
        }
        case Kind::kHolderPoint: {
            // Substituting s = |u - x0|^gamma turns each branch of dF into
            // k * ds with a smooth integrand.
            const auto& h = std::get<HolderData>(impl_->data);
            double s = h.atom0 > 0.0 ? h.atom0 * f(0.0) : 0.0;
            const double inv_g = 1.0 / h.gamma;
            if (h.s_left > 0.0)
                s += h.k * integrate([&](double t) { return f(h.x0 - std::pow(t, inv_g)); },
                                     0.0, h.s_left, rel_tol);
            const double s_right = (1.0 - h.base) / h.k;
            if (s_right > 0.0)
                s += h.k * integrate([&](double t) { return f(h.x0 + std::pow(t, inv_g)); },
                                     0.0, s_right, rel_tol);
            return s;
        }
        case Kind::kDiscreteExample: {
            const auto& d = std::get<DiscreteData>(impl_->data);
            long double s = 0.0L;
            for (std::int64_t i = kDiscreteTableN; i >= 1; --i) {
                const double fi = static_cast<double>(i);
                const double ti = t_of(d.gamma, fi);
                s += static_cast<long double>((kC / (fi * fi)) *
                                              (f(d.x0 + ti) + f(d.x0 - ti)));
            }
            // Atoms beyond the table: midpoint Euler-Maclaurin, substituting w = 1/i.
            const double wmax = 1.0 / (static_cast<double>(kDiscreteTableN) + 0.5);
            const double inv_g = 1.0 / d.gamma;
            const double tail = kC * integrate(
                                         [&](double w) {
                                             const double t = std::pow(w, inv_g);
                                             return f(d.x0 + t) + f(d.x0 - t);
                                         },
                                         0.0, wmax, 1e-10, 1e-16);
            return static_cast<double>(s) + tail;
        }
        case Kind::kPointMass:
            return f(std::get<PointData>(impl_->data).at);
    }
    return 0.0;
}

double CdfModel::moment_sqrt() const {
    switch (kind_) {
        case Kind::kUniform01:
            return 2.0 / 3.0;
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            return std::exp(std::lgamma(g.shape + 0.5) - std::lgamma(g.shape)) /
                   std::sqrt(g.rate);
        }
        case Kind::kFlatMixture: {
            double s = 0.0;
            for (const auto& p : std::get<FlatData>(impl_->data).pieces)
                s += p.density * (2.0 / 3.0) * (std::pow(p.hi, 1.5) - std::pow(p.lo, 1.5));
            return s;
        }
        case Kind::kPointMass:
            return std::sqrt(std::get<PointData>(impl_->data).at);
        default:
            return integrate_dF([](double y) { return std::sqrt(std::max(y, 0.0)); }, 1e-12);
    }
}

double CdfModel::moment_three_halves() const {
    switch (kind_) {
        case Kind::kUniform01:
            return 0.4;
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            return std::exp(std::lgamma(g.shape + 1.5) - std::lgamma(g.shape)) /
                   std::pow(g.rate, 1.5);
        }
        case Kind::kFlatMixture: {
            double s = 0.0;
            for (const auto& p : std::get<FlatData>(impl_->data).pieces)
                s += p.density * 0.4 * (std::pow(p.hi, 2.5) - std::pow(p.lo, 2.5));
            return s;
        }
        case Kind::kPointMass:
            return std::pow(std::get<PointData>(impl_->data).at, 1.5);
        default:
            return integrate_dF([](double y) { return std::pow(std::max(y, 0.0), 1.5); },
                                1e-11);
    }
}

double CdfModel::biased_integral(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::kUniform01:
            return x >= 1.0 ? 2.0 / 3.0 : (2.0 / 3.0) * std::pow(x, 1.5);
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            const double m0 =
                std::exp(std::lgamma(g.shape + 0.5) - std::lgamma(g.shape)) / std::sqrt(g.rate);
            return m0 * gamma_p(g.shape + 0.5, g.rate * x);
        }
        case Kind::kFlatMixture: {
            double s = 0.0;
            for (const auto& p : std::get<FlatData>(impl_->data).pieces) {
                if (x <= p.lo) break;
                const double top = std::min(x, p.hi);
                s += p.density * (2.0 / 3.0) * (std::pow(top, 1.5) - std::pow(p.lo, 1.5));
            }
            return s;
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            const double inv_g = 1.0 / h.gamma;
            double s = 0.0;
            // Left branch: u = x0 - t^(1/gamma), u <= x corresponds to t >= (x0-x)^gamma.
            if (h.s_left > 0.0) {
                const double from =
                    x < h.x0 ? std::min(std::pow(h.x0 - x, h.gamma), h.s_left) : 0.0;
                if (from < h.s_left)
                    s += h.k * integrate(
                                   [&](double t) {
                                       return std::sqrt(std::max(h.x0 - std::pow(t, inv_g), 0.0));
                                   },
                                   from, h.s_left, 1e-11, 1e-15);
            }
            if (x > h.x0) {
                const double s_right = (1.0 - h.base) / h.k;
                const double to = std::min(std::pow(x - h.x0, h.gamma), s_right);
                if (to > 0.0)
                    s += h.k * integrate(
                                   [&](double t) { return std::sqrt(h.x0 + std::pow(t, inv_g)); },
                                   0.0, to, 1e-11, 1e-15);
            }
            return s;
        }
        case Kind::kDiscreteExample:
        case Kind::kPointMass: {
            double s = 0.0;
            for (const auto& [loc, mass] : impl_->atoms) {
                if (loc > x) break;
                if (loc > 0.0) s += mass * std::sqrt(loc);
            }
            return s;
        }
    }
    return 0.0;
}

double CdfModel::integral_cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::kUniform01:
            return x <= 1.0 ? 0.5 * x * x : x - 0.5;
        case Kind::kGamma: {
            const auto& g = std::get<GammaData>(impl_->data);
            return x * gamma_p(g.shape, g.rate * x) -
                   (g.shape / g.rate) * gamma_p(g.shape + 1.0, g.rate * x);
        }
        case Kind::kFlatMixture: {
            const auto& f = std::get<FlatData>(impl_->data);
            double s = 0.0;
            double prev_hi = 0.0;
            for (std::size_t j = 0; j < f.pieces.size(); ++j) {
                const auto& p = f.pieces[j];
                s += f.cum_before[j] * (std::min(x, p.lo) - std::min(x, prev_hi));
                if (x <= p.lo) return s;
                const double w = std::min(x, p.hi) - p.lo;
                s += f.cum_before[j] * w + 0.5 * p.density * w * w;
                if (x <= p.hi) return s;
                prev_hi = p.hi;
            }
            return s + (x - f.upper);
        }
        case Kind::kHolderPoint: {
            const auto& h = std::get<HolderData>(impl_->data);
            const double top = std::min(x, h.hi);
            double s = 0.0;
            if (top > 0.0)
                s = integrate_split([&](double u) { return cdf(u); }, 0.0, top,
                                    {h.support_lo, h.x0}, 1e-11, 1e-15);
            if (x > h.hi) s += x - h.hi;
            return s;
        }
        case Kind::kDiscreteExample: {
            const auto& d = std::get<DiscreteData>(impl_->data);
            long double s = 0.0L;
            for (std::int64_t i = 1; i <= kDiscreteTableN; ++i) {
                const double fi = static_cast<double>(i);
                const double ti = t_of(d.gamma, fi);
                const double right = std::max(0.0, x - d.x0 - ti);
                const double left = std::max(0.0, x - d.x0 + ti);
                if (right == 0.0 && left == 0.0) break;  // t_i shrinking: stays zero
                s += static_cast<long double>((kC / (fi * fi)) * (right + left));
            }
            const double tn = t_of(d.gamma, static_cast<double>(kDiscreteTableN));
            if (x >= d.x0 + tn) {
                s += static_cast<long double>(
                    2.0 * kC * zeta2_tail(static_cast<double>(kDiscreteTableN)) * (x - d.x0));
            } else if (x > d.x0 - tn) {
                const double wmax = 1.0 / (static_cast<double>(kDiscreteTableN) + 0.5);
                const double inv_g = 1.0 / d.gamma;
                s += static_cast<long double>(kC * integrate(
                                                       [&](double w) {
                                                           const double t = std::pow(w, inv_g);
                                                           return std::max(0.0, x - d.x0 - t) +
                                                                  std::max(0.0, x - d.x0 + t);
                                                       },
                                                       0.0, wmax, 1e-9, 1e-16));
            }
            return static_cast<double>(s);
        }
        case Kind::kPointMass:
            return std::max(0.0, x - std::get<PointData>(impl_->data).at);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Local modulus H_x
// ---------------------------------------------------------------------------

namespace {

double h_smooth_atomic(const std::vector<std::pair<double, double>>& atoms, double x,
                       double delta) {
    double s = 0.0;
    if (delta > 0.0) {
        for (const auto& [loc, mass] : atoms)
            if (loc > x && loc <= x + delta) s += mass * (1.0 - (loc - x) / delta);
        return s;
    }
    const double ad = -delta;
    for (const auto& [loc, mass] : atoms)
        if (loc > x - ad && loc <= x) s += mass * (1.0 - (x - loc) / ad);
    return -s;
}

// Exact H for the discrete example, via index ranges and Euler-Maclaurin
// tails rather than the truncated atom table.
double h_smooth_discrete(const DiscreteData& d, double x, double delta) {
    const double sign = delta > 0.0 ? 1.0 : -1.0;
    const double lo = std::min(x, x + delta);
    const double hi = std::max(x, x + delta);
    const double ad = std::fabs(delta);
    const auto weight = [&](double q) {
        if (sign > 0.0) return (q > x && q <= x + delta) ? 1.0 - (q - x) / ad : 0.0;
        return (q > x - ad && q <= x) ? 1.0 - (x - q) / ad : 0.0;
    };
    double total = 0.0;
    for (const double b : {+1.0, -1.0}) {
        double tlo, thi;  // t-range of branch positions inside [lo, hi]
        if (b > 0.0) {
            tlo = lo - d.x0;
            thi = hi - d.x0;
        } else {
            tlo = d.x0 - hi;
            thi = d.x0 - lo;
        }
        thi = std::min(thi, 1.0);
        tlo = std::max(tlo, 0.0);
        if (thi <= 0.0 || thi <= tlo) continue;
        const double i_lo = std::max(1.0, std::ceil(std::pow(thi, -d.gamma) - 1e-12));
        const double i_hi = tlo > 0.0 ? std::pow(tlo, -d.gamma) : 1e18;
        if (i_hi < i_lo) continue;
        const double cap = i_lo + 2e6;
        double i = i_lo;
        long double s = 0.0L;
        for (; i <= std::min(i_hi, cap); i += 1.0) {
            const double q = d.x0 + b * t_of(d.gamma, i);
            s += static_cast<long double>(weight(q) / (i * i));
        }
        if (i_hi > cap) {
            const double from = i - 0.5;
            const double to = std::min(i_hi, 1e18);
            const double inv_g = 1.0 / d.gamma;
            s += static_cast<long double>(
                integrate([&](double w) { return weight(d.x0 + b * std::pow(w, inv_g)); },
                          to >= 1e17 ? 0.0 : 1.0 / to, 1.0 / from, 1e-9, 1e-18));
        }
        total += sign * kC * static_cast<double>(s);
    }
    return total;
}

}  // namespace

double CdfModel::h_smooth(double x, double delta) const {
    if (delta == 0.0) throw std::invalid_argument("h_smooth: delta must be nonzero");
    switch (kind_) {
        case Kind::kPointMass:
            return h_smooth_atomic(impl_->atoms, x, delta);
        case Kind::kDiscreteExample:
            return h_smooth_discrete(std::get<DiscreteData>(impl_->data), x, delta);
        default: {
            const double fx = cdf(x);
            std::vector<double> ubreaks;
            for (double b : density_breakpoints()) {
                const double u = (b - x) / delta;
                if (u > 0.0 && u < 1.0) ubreaks.push_back(u);
            }
            return integrate_split([&](double u) { return cdf(x + u * delta) - fx; }, 0.0, 1.0,
                                   ubreaks, 1e-11, 1e-15);
        }
    }
}

// ---------------------------------------------------------------------------
// ObservationModel
// ---------------------------------------------------------------------------

ObservationModel::ObservationModel(CdfModel model) : model_(std::move(model)) {
    m0_ = model_.moment_sqrt();
    if (!(m0_ > 0.0) || !std::isfinite(m0_))
        throw std::invalid_argument("observation model: m0 must be positive and finite");
    const double m32 = model_.moment_three_halves();
    if (!std::isfinite(m32))
        throw std::invalid_argument("observation model: 3/2-moment must be finite");
    z_upper_ = model_.support_upper();
}

namespace {

// g for the discrete example: direct atom sums over both branches plus
// analytic tails; endpoint square-root singularities inside the tail are
// removed by an s^2 substitution.
double g_discrete(const DiscreteData& d, double z, double m0) {
    long double s = 0.0L;
    for (std::int64_t i = 1; i <= kDiscreteTableN; ++i) {
        const double fi = static_cast<double>(i);
        const double ti = t_of(d.gamma, fi);
        const double w = kC / (fi * fi);
        const double right = d.x0 + ti;
        const double left = d.x0 - ti;
        if (right > z) s += static_cast<long double>(w / std::sqrt(right - z));
        if (left > z) s += static_cast<long double>(w / std::sqrt(left - z));
    }
    const double tn = t_of(d.gamma, static_cast<double>(kDiscreteTableN));
    const double wmax = 1.0 / (static_cast<double>(kDiscreteTableN) + 0.5);
    const double inv_g = 1.0 / d.gamma;
    double tail = 0.0;
    if (z < d.x0 - tn) {
        tail = kC * integrate(
                        [&](double w) {
                            const double t = std::pow(w, inv_g);
                            return 1.0 / std::sqrt(d.x0 + t - z) +
                                   1.0 / std::sqrt(d.x0 - t - z);
                        },
                        0.0, wmax, 1e-8, 1e-14);
    } else if (z < d.x0 + tn) {
        const double dr = z - d.x0;
        const double w_from = dr > 0.0 ? std::pow(dr, d.gamma) : 0.0;
        if (w_from < wmax) {
            tail += kC * integrate(
                             [&](double sv) {
                                 const double w = w_from + sv * sv;
                                 const double t = std::pow(w, inv_g);
                                 return 2.0 * sv / std::sqrt(d.x0 + t - z);
                             },
                             0.0, std::sqrt(wmax - w_from), 1e-8, 1e-14);
        }
        const double dl = d.x0 - z;
        if (dl > 0.0) {
            const double w_to = std::min(std::pow(dl, d.gamma), wmax);
            if (w_to > 0.0) {
                tail += kC * integrate(
                                 [&](double sv) {
                                     const double w = w_to - sv * sv;
                                     const double t = std::pow(w, inv_g);
                                     return 2.0 * sv / std::sqrt(d.x0 - t - z);
                                 },
                                 0.0, std::sqrt(w_to), 1e-8, 1e-14);
            }
        }
    }
    return (static_cast<double>(s) + tail) / (2.0 * m0);
}

}  // namespace

double ObservationModel::g(double z) const {
    if (z < 0.0) throw std::domain_error("g: z must be nonnegative");
    switch (model_.kind()) {
        case CdfModel::Kind::kUniform01:
            return z >= 1.0 ? 0.0 : 1.5 * std::sqrt(1.0 - z);
        case CdfModel::Kind::kFlatMixture: {
            // The inner Abel integral over a constant-density piece is closed-form.
            double s = 0.0;
            for (const auto& p : std::get<FlatData>(model_.impl_->data).pieces) {
                if (z >= p.hi) continue;
                const double a = std::max(p.lo, z);
                s += p.density * (std::sqrt(p.hi - z) - std::sqrt(a - z));
            }
            return s / m0_;
        }
        case CdfModel::Kind::kPointMass: {
            const double a = std::get<PointData>(model_.impl_->data).at;
            if (z >= a) return 0.0;
            return 0.5 / (m0_ * std::sqrt(a - z));
        }
        case CdfModel::Kind::kGamma:
        case CdfModel::Kind::kHolderPoint: {
            // t = sqrt(x - z) removes the endpoint singularity of Eq-type
            // Abel integrals: g = (1/m0) int_0^T dens(z + t^2) dt.
            const double t_max = std::sqrt(std::max(z_upper_ - z, 0.0));
            double val = 0.0;
            if (t_max > 0.0) {
                std::vector<double> breaks;
                for (double b : model_.density_breakpoints())
                    if (b > z) breaks.push_back(std::sqrt(b - z));
                val = integrate_split([&](double t) { return model_.density(z + t * t); }, 0.0,
                                      t_max, breaks, 1e-10, 1e-14) /
                      m0_;
            }
            for (const auto& [loc, mass] : model_.atoms())
                if (loc > z) val += mass / (2.0 * m0_ * std::sqrt(loc - z));
            return val;
        }
        case CdfModel::Kind::kDiscreteExample:
            return g_discrete(std::get<DiscreteData>(model_.impl_->data), z, m0_);
    }
    return 0.0;
}

double ObservationModel::v_exact(double x) const {
    return kPi * (1.0 - model_.cdf(x)) / (2.0 * m0_);
}

double ObservationModel::u_exact(double x) const {
    if (x <= 0.0) return 0.0;
    return kPi * (x - model_.integral_cdf(x)) / (2.0 * m0_);
}

double ObservationModel::v_by_quadrature(double x, double rel_tol) const {
    const double t_max = std::sqrt(std::max(z_upper_ - x, 0.0));
    if (t_max <= 0.0) return 0.0;
    std::vector<double> breaks;
    for (double b : model_.density_breakpoints())
        if (b > x) breaks.push_back(std::sqrt(b - x));
    return 2.0 * integrate_split([&](double t) { return g(x + t * t); }, 0.0, t_max, breaks,
                                 rel_tol, 1e-12);
}

double ObservationModel::expect_z(const std::function<double(double)>& f,
                                  const std::vector<double>& kinks, double rel_tol) const {
    if (model_.has_atoms()) {
        // Z | X^b = x ~ (1 - U^2) x: integrate the conditional expectation
        // against the size-biased atom weights.
        double s = 0.0;
        for (const auto& [loc, mass] : model_.atoms()) {
            if (loc <= 0.0) continue;
            const double wb = mass * std::sqrt(loc) / m0_;
            std::vector<double> ubreaks;
            for (double kk : kinks)
                if (kk > 0.0 && kk < loc) ubreaks.push_back(std::sqrt(1.0 - kk / loc));
            s += wb * integrate_split([&](double u) { return f((1.0 - u * u) * loc); }, 0.0,
                                      1.0, ubreaks, rel_tol, 1e-14);
        }
        if (model_.kind() == CdfModel::Kind::kHolderPoint)
            s += expect_z_continuous(f, kinks, rel_tol);
        return s;
    }
    return expect_z_continuous(f, kinks, rel_tol);
}

double ObservationModel::expect_z_continuous(const std::function<double(double)>& f,
                                             const std::vector<double>& kinks,
                                             double rel_tol) const {
    std::vector<double> breaks = model_.density_breakpoints();
    breaks.insert(breaks.end(), kinks.begin(), kinks.end());
    return integrate_split([&](double z) { return f(z) * g(z); }, 0.0, z_upper_, breaks,
                           rel_tol, 1e-13);
}

}  // namespace wicksell
