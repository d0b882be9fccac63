#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "biphoton/errors.hpp"

namespace biphoton::numerics {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inf = std::numeric_limits<double>::infinity();

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_subdivisions = 200;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: require rel_tol > 0, "
                                        "abs_tol >= 0, max_subdivisions >= 1");
    }
};

/// Axis-aligned rectangle; bounds may be +-infinity.
struct Rect {
    double x_lo, x_hi, y_lo, y_hi;

    void validate() const {
        if (!(x_lo < x_hi) || !(y_lo < y_hi))
            throw std::invalid_argument("Rect: require x_lo < x_hi and y_lo < y_hi");
    }
};

inline double erf(double x) { return std::erf(x); }

inline double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * pi));
}

/// Standard normal CDF, accurate in both tails.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Sum in fixed pairwise (tree) order. The result depends only on the element
/// order, not on how callers split work across threads.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 32) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

namespace detail {

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
// Values as tabulated in QUADPACK's dqk15.
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct PanelResult {
    double value;
    double error;
};

/// One Gauss-Kronrod 7-15 panel on [a, b] with QUADPACK's error estimate.
template <typename F>
PanelResult gk15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    double fv1[7], fv2[7];
    const double fc = f(center);
    double resg = kWg[3] * fc;
    double resk = kWgk[7] * fc;
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double dx = hlgth * kXgk[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        const double fsum = fv1[j] + fv2[j];
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] *
                  (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * hlgth;
    resabs *= std::abs(hlgth);
    resasc *= std::abs(hlgth);
    double abserr = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0)
        abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / eps50)
        abserr = std::max(abserr, eps50 * resabs);
    return {result, abserr};
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

/// Adaptive bisection driver over a finite interval.
template <typename F>
double adaptive(F&& f, double lo, double hi, const QuadratureSpec& spec) {
    std::vector<Segment> heap;
    heap.reserve(64);
    {
        const PanelResult p = gk15(f, lo, hi);
        heap.push_back({lo, hi, p.value, p.error});
    }
    int subdivisions = 0;
    for (;;) {
        double total = 0.0, err = 0.0;
        for (const Segment& s : heap) {
            total += s.value;
            err += s.error;
        }
        if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
            return total;
        if (subdivisions >= spec.max_subdivisions)
            throw non_convergence_error(
                "integrate_1d: subdivision budget exhausted before tolerance");

        std::pop_heap(heap.begin(), heap.end());
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        const PanelResult left = gk15(f, worst.a, mid);
        const PanelResult right = gk15(f, mid, worst.b);
        heap.push_back({worst.a, mid, left.value, left.error});
        std::push_heap(heap.begin(), heap.end());
        heap.push_back({mid, worst.b, right.value, right.error});
        std::push_heap(heap.begin(), heap.end());
        ++subdivisions;
    }
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over (lo, hi). Improper bounds are
/// mapped to a finite interval with the rational substitutions x = t/(1-t^2)
/// (doubly infinite) and x = a + t/(1-t) (half infinite).
template <typename F>
double integrate_1d(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(lo < hi))
        throw std::invalid_argument("integrate_1d: require lo < hi");

    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (!lo_inf && !hi_inf)
        return detail::adaptive(f, lo, hi, spec);

    if (lo_inf && hi_inf) {
        auto g = [&f](double t) {
            const double om = 1.0 - t * t;
            const double fx = f(t / om);
            if (fx == 0.0) return 0.0;
            return fx * (1.0 + t * t) / (om * om);
        };
        return detail::adaptive(g, -1.0, 1.0, spec);
    }
    if (hi_inf) {
        auto g = [&f, lo](double t) {
            const double om = 1.0 - t;
            const double fx = f(lo + t / om);
            if (fx == 0.0) return 0.0;
            return fx / (om * om);
        };
        return detail::adaptive(g, 0.0, 1.0, spec);
    }
    auto g = [&f, hi](double t) {
        const double om = 1.0 - t;
        const double fx = f(hi - t / om);
        if (fx == 0.0) return 0.0;
        return fx / (om * om);
    };
    return detail::adaptive(g, 0.0, 1.0, spec);
}

/// P[(X, Y) in rect] for a bivariate normal with means (mu1, mu2), standard
/// deviations (s1, s2) and correlation rho, computed as a 1D quadrature of
/// the conditional-normal CDF: integral over x of pdf(x) * [Phi(hi) - Phi(lo)]
/// with Y | X = x ~ N(mu2 + rho s2 (x - mu1)/s1, s2^2 (1 - rho^2)).
inline double bvn_rect_prob(double mu1, double mu2, double s1, double s2,
                            double rho, const Rect& rect,
                            const QuadratureSpec& spec = {}) {
    rect.validate();
    if (!(s1 > 0.0) || !(s2 > 0.0))
        throw std::domain_error("bvn_rect_prob: require s1, s2 > 0");
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("bvn_rect_prob: require |rho| < 1");

    const double cond_sd = s2 * std::sqrt((1.0 - rho) * (1.0 + rho));
    const double slope = rho * s2 / s1;

    auto integrand = [&](double x) {
        const double cm = mu2 + slope * (x - mu1);
        const double upper =
            std::isinf(rect.y_hi) ? 1.0 : normal_cdf((rect.y_hi - cm) / cond_sd);
        const double lower =
            std::isinf(rect.y_lo) ? 0.0 : normal_cdf((rect.y_lo - cm) / cond_sd);
        return normal_pdf(x, mu1, s1) * (upper - lower);
    };

    // The x-marginal carries no mass beyond ~12 standard deviations
    // (< 2e-32), so the integration range is truncated there.
    const double lo = std::max(rect.x_lo, mu1 - 12.0 * s1);
    const double hi = std::min(rect.x_hi, mu1 + 12.0 * s1);
    if (!(lo < hi)) return 0.0;

    return std::clamp(integrate_1d(integrand, lo, hi, spec), 0.0, 1.0);
}

} // namespace biphoton::numerics
