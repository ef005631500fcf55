#include "wicksell/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wicksell {

double ConcaveMajorant::slope_at(double x) const {
    if (slopes.empty()) return 0.0;
    if (x >= knots.back()) return 0.0;
    if (x < knots.front()) return slopes.front();
    // Last knot <= x.
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t seg = static_cast<std::size_t>(it - knots.begin()) - 1;
    return slopes[std::min(seg, slopes.size() - 1)];
}

double ConcaveMajorant::value_at(double x) const {
    if (knots.empty()) return 0.0;
    if (x <= knots.front()) return values.front();
    if (x >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t seg = static_cast<std::size_t>(it - knots.begin()) - 1;
    return values[seg] + slopes[seg] * (x - knots[seg]);
}

ConcaveMajorant concave_majorant_of(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("concave majorant: bad point set");
    std::vector<std::size_t> hull;
    hull.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        // Pop while the middle vertex lies on or below the chord, i.e. the
        // incoming slope is >= the previous one.
        while (hull.size() >= 2) {
            const std::size_t b = hull[hull.size() - 1];
            const std::size_t a = hull[hull.size() - 2];
            const double lhs = (ys[i] - ys[b]) * (xs[b] - xs[a]);
            const double rhs = (ys[b] - ys[a]) * (xs[i] - xs[b]);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    ConcaveMajorant m;
    m.knots.reserve(hull.size());
    m.values.reserve(hull.size());
    for (std::size_t idx : hull) {
        m.knots.push_back(xs[idx]);
        m.values.push_back(ys[idx]);
    }
    m.slopes.resize(m.knots.size() > 0 ? m.knots.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < m.knots.size(); ++i)
        m.slopes[i] = (m.values[i + 1] - m.values[i]) / (m.knots[i + 1] - m.knots[i]);
    return m;
}

double v_n(const SampleSet& sample, double x) {
    const auto& z = sample.values;
    if (z.empty()) throw std::invalid_argument("v_n: empty sample");
    auto it = std::lower_bound(z.begin(), z.end(), x);
    if (it != z.end() && *it == x) return std::numeric_limits<double>::infinity();
    long double s = 0.0L;
    for (; it != z.end(); ++it) s += 1.0L / std::sqrt(static_cast<long double>(*it - x));
    return static_cast<double>(s) / static_cast<double>(z.size());
}

double u_n(const SampleSet& sample, double x) {
    const auto& z = sample.values;
    if (z.empty()) throw std::invalid_argument("u_n: empty sample");
    if (x <= 0.0) return 0.0;
    long double s = 0.0L;
    for (double zi : z) {
        s += std::sqrt(static_cast<long double>(zi));
        if (zi > x) s -= std::sqrt(static_cast<long double>(zi - x));
    }
    return 2.0 * static_cast<double>(s) / static_cast<double>(z.size());
}

namespace detail {

void tail_sqrt_sums_exact(std::span<const double> z, std::span<const double> w,
                          std::span<double> out) {
    const std::size_t m = z.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double zk = z[k];
        double s = 0.0;
        const double* zi = z.data() + k + 1;
        const double* wi = w.data() + k + 1;
        const std::size_t cnt = m - k - 1;
        for (std::size_t j = 0; j < cnt; ++j) s += wi[j] * std::sqrt(zi[j] - zk);
        out[k] = s;
    }
}

namespace {

constexpr int kCheb = 24;
constexpr double kTheta = 1.0;
constexpr std::size_t kLeaf = 48;
constexpr std::size_t kMinFar = 8;
constexpr std::size_t kFastCutover = 2048;

struct Ctx {
    const double* z;
    const double* w;
    double* out;
};

void direct_cross(const Ctx& c, std::size_t tl, std::size_t th, std::size_t sl,
                  std::size_t sh) {
    for (std::size_t k = tl; k < th; ++k) {
        const double zk = c.z[k];
        double s = 0.0;
        for (std::size_t i = sl; i < sh; ++i) s += c.w[i] * std::sqrt(c.z[i] - zk);
        c.out[k] += s;
    }
}

// Far-field: interpolate f(x) = sum_{i in S} w_i sqrt(z_i - x) on the target
// interval through Chebyshev-Lobatto nodes; the nearest singularity sits at
// least one interval-width away, so kCheb nodes give ~1e-15 relative error.
void cheb_cross(const Ctx& c, std::size_t tl, std::size_t th, std::size_t sl,
                std::size_t sh) {
    const double a = c.z[tl];
    const double b = c.z[th - 1];
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double node[kCheb];
    double fval[kCheb];
    for (int q = 0; q < kCheb; ++q) {
        node[q] = mid + half * std::cos(3.14159265358979323846 * q / (kCheb - 1));
        double s = 0.0;
        for (std::size_t i = sl; i < sh; ++i) s += c.w[i] * std::sqrt(c.z[i] - node[q]);
        fval[q] = s;
    }
    for (std::size_t k = tl; k < th; ++k) {
        const double x = c.z[k];
        double num = 0.0, den = 0.0;
        bool exact = false;
        for (int q = 0; q < kCheb; ++q) {
            const double dx = x - node[q];
            if (dx == 0.0) {
                c.out[k] += fval[q];
                exact = true;
                break;
            }
            double wq = (q % 2 == 0) ? 1.0 : -1.0;
            if (q == 0 || q == kCheb - 1) wq *= 0.5;
            const double t = wq / dx;
            num += t * fval[q];
            den += t;
        }
        if (!exact) c.out[k] += num / den;
    }
}

void cross(const Ctx& c, std::size_t tl, std::size_t th, std::size_t sl, std::size_t sh) {
    if (tl >= th || sl >= sh) return;
    const double gap = c.z[sl] - c.z[th - 1];
    const double wt = c.z[th - 1] - c.z[tl];
    const double ws = c.z[sh - 1] - c.z[sl];
    if (th - tl >= kMinFar && sh - sl >= kMinFar && gap >= kTheta * std::max(wt, ws)) {
        cheb_cross(c, tl, th, sl, sh);
        return;
    }
    if ((th - tl) + (sh - sl) <= 2 * kLeaf) {
        direct_cross(c, tl, th, sl, sh);
        return;
    }
    if (th - tl >= sh - sl) {
        const std::size_t m = tl + (th - tl) / 2;
        cross(c, tl, m, sl, sh);
        cross(c, m, th, sl, sh);
    } else {
        const std::size_t m = sl + (sh - sl) / 2;
        cross(c, tl, th, sl, m);
        cross(c, tl, th, m, sh);
    }
}

void solve(const Ctx& c, std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) {
        for (std::size_t k = lo; k < hi; ++k) {
            const double zk = c.z[k];
            double s = 0.0;
            for (std::size_t i = k + 1; i < hi; ++i) s += c.w[i] * std::sqrt(c.z[i] - zk);
            c.out[k] += s;
        }
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    solve(c, lo, mid);
    solve(c, mid, hi);
    cross(c, lo, mid, mid, hi);
}

}  // namespace

void tail_sqrt_sums(std::span<const double> z, std::span<const double> w,
                    std::span<double> out) {
    const std::size_t m = z.size();
    if (m <= kFastCutover) {
        tail_sqrt_sums_exact(z, w, out);
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    Ctx c{z.data(), w.data(), out.data()};
    solve(c, 0, m);
}

}  // namespace detail

ConcaveMajorant lcm(const SampleSet& sample) {
    const auto& z = sample.values;
    if (z.empty()) throw std::invalid_argument("lcm: empty sample");
    // Collapse ties; the hull sees each distinct value once with its weight.
    std::vector<double> uz, uw;
    uz.reserve(z.size());
    uw.reserve(z.size());
    for (double v : z) {
        if (!uz.empty() && v == uz.back())
            uw.back() += 1.0;
        else {
            uz.push_back(v);
            uw.push_back(1.0);
        }
    }
    const std::size_t m = uz.size();
    std::vector<double> tails(m);
    detail::tail_sqrt_sums(uz, uw, tails);
    long double sqrt_total = 0.0L;
    for (std::size_t j = 0; j < m; ++j)
        sqrt_total += static_cast<long double>(uw[j]) * std::sqrt(uz[j]);
    const double n = static_cast<double>(z.size());

    std::vector<double> xs, ys;
    xs.reserve(m + 1);
    ys.reserve(m + 1);
    if (uz.front() > 0.0) {
        xs.push_back(0.0);
        ys.push_back(0.0);
    }
    for (std::size_t j = 0; j < m; ++j) {
        xs.push_back(uz[j]);
        ys.push_back(2.0 * (static_cast<double>(sqrt_total) - tails[j]) / n);
    }
    if (xs.size() == 1) {
        // Every observation is zero: U_n is identically 0.
        ConcaveMajorant deg;
        deg.knots = {0.0};
        deg.values = {0.0};
        return deg;
    }
    if (xs.front() == 0.0) ys.front() = 0.0;  // U_n(0) = 0 exactly
    return concave_majorant_of(xs, ys);
}

double v_hat(const ConcaveMajorant& majorant, double x) { return majorant.slope_at(x); }

double f_hat(const ConcaveMajorant& majorant, double x) {
    if (majorant.slopes.empty() || !(majorant.slopes.front() > 0.0))
        throw std::invalid_argument("f_hat: V_hat(0) vanishes (all observations zero)");
    if (x < 0.0) return 0.0;
    return 1.0 - majorant.slope_at(x) / majorant.slopes.front();
}

double f_hat(const SampleSet& sample, double x) { return f_hat(lcm(sample), x); }

double f_naive(const SampleSet& sample, double x) {
    const double v0 = v_n(sample, 0.0);
    if (std::isinf(v0))
        throw std::invalid_argument("f_naive: some observation is exactly zero");
    if (!(v0 > 0.0)) throw std::invalid_argument("f_naive: V_n(0) vanishes");
    const double vx = v_n(sample, x);
    if (std::isinf(vx))
        throw std::invalid_argument("f_naive: x coincides with an observation");
    return 1.0 - vx / v0;
}

double argmax_t(const SampleSet& sample, double a, double grid_step) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("argmax_t: grid resolution must be positive");
    const double zmax = sample.values.back();
    std::vector<double> cand;
    cand.push_back(0.0);
    for (double t = grid_step; t < zmax + grid_step; t += grid_step) cand.push_back(t);
    for (double zi : sample.values) {
        cand.push_back(zi);
        cand.push_back(std::max(0.0, zi - 1e-4 * grid_step));
        cand.push_back(zi + 1e-4 * grid_step);
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    double best = -std::numeric_limits<double>::infinity();
    for (double t : cand) best = std::max(best, u_n(sample, t) - a * t);
    const double tol = 1e-12 * std::max(1.0, std::fabs(best));
    for (double t : cand)
        if (u_n(sample, t) - a * t >= best - tol) return t;
    return 0.0;
}

}  // namespace wicksell
