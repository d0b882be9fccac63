#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biphoton/errors.hpp"
#include "biphoton/model.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

/// Split-detector outcome: both photons left, one on each side, both right.
enum class SplitOutcome { MinusTwo, Zero, PlusTwo };

/// N equal-width pixels spanning [-extent/2, extent/2), no gaps.
struct PixelDetector {
    int n_pixels;
    double extent;

    void validate() const {
        if (n_pixels < 2 || !(extent > 0.0))
            throw std::invalid_argument(
                "PixelDetector: require n_pixels >= 2 and extent > 0");
    }

    double pixel_width() const { return extent / n_pixels; }
    /// Left edge of pixel i (1-based).
    double left_edge(int i) const { return -0.5 * extent + (i - 1) * pixel_width(); }
};

/// Ordered coincidence bin (i <= j, 1-based), or Miss when either photon
/// lands outside the detector.
struct CoincidenceBin {
    int i = 0;
    int j = 0;
    bool miss = false;

    static CoincidenceBin make_miss() { return {0, 0, true}; }
    bool operator==(const CoincidenceBin&) const = default;
};

struct Outcome {
    std::string label;
    double probability;
    double d_derivative;
};

/// Discrete outcome table with d-derivatives. Probabilities sum to one and
/// derivatives to zero (a Miss outcome absorbs mass outside finite
/// detectors, so the table is always a complete outcome set).
struct OutcomeDistribution {
    std::vector<Outcome> outcomes;
    /// Set when a linearized table was requested outside its d << epsilon
    /// validity regime.
    bool approximation_warning = false;

    void validate() const {
        double psum = 0.0, dsum = 0.0;
        for (const Outcome& o : outcomes) {
            if (!(o.probability >= 0.0))
                throw std::logic_error("OutcomeDistribution: negative probability at " +
                                       o.label);
            psum += o.probability;
            dsum += o.d_derivative;
        }
        if (std::abs(psum - 1.0) > 1e-9)
            throw std::logic_error("OutcomeDistribution: probabilities sum to " +
                                   std::to_string(psum));
        if (std::abs(dsum) > 1e-7)
            throw std::logic_error("OutcomeDistribution: derivatives sum to " +
                                   std::to_string(dsum));
    }

    const Outcome& at(const std::string& label) const {
        for (const Outcome& o : outcomes)
            if (o.label == label) return o;
        throw std::out_of_range("OutcomeDistribution: no outcome " + label);
    }
};

/// Half-plane convention: x = 0 counts as the right half.
inline SplitOutcome classify_split(const PhotonPair& p) {
    const bool r1 = p.x1 >= 0.0;
    const bool r2 = p.x2 >= 0.0;
    if (r1 && r2) return SplitOutcome::PlusTwo;
    if (!r1 && !r2) return SplitOutcome::MinusTwo;
    return SplitOutcome::Zero;
}

/// Outcome-table label of a coincidence bin ("i:j", or "miss").
inline std::string coincidence_label(const CoincidenceBin& bin) {
    if (bin.miss) return "miss";
    return std::to_string(bin.i) + ":" + std::to_string(bin.j);
}

inline CoincidenceBin classify_pixels(const PhotonPair& p, const PixelDetector& det) {
    det.validate();
    const double half = 0.5 * det.extent;
    auto pixel_of = [&](double x) -> int {
        if (x < -half || x >= half) return 0; // outside
        const int idx = 1 + static_cast<int>(std::floor((x + half) / det.pixel_width()));
        return std::min(std::max(idx, 1), det.n_pixels);
    };
    const int p1 = pixel_of(p.x1);
    const int p2 = pixel_of(p.x2);
    if (p1 == 0 || p2 == 0) return CoincidenceBin::make_miss();
    return {std::min(p1, p2), std::max(p1, p2), false};
}

namespace detail {

/// d-derivative of a probability table by central differences with one
/// Richardson step. Step size h = max(1e-4 sigma, 1e-3 |d|): the quadrature
/// noise floor is near machine precision, so this h keeps noise/h around
/// 1e-11 while the O(h^4) truncation term stays below 1e-12 for these
/// Gaussian-smooth tables.
template <typename TableFn>
std::vector<double> table_d_derivative(TableFn&& probs_at, double d, double sigma) {
    const double h = std::max(1e-4 * sigma, 1e-3 * std::abs(d));
    const std::vector<double> pp = probs_at(d + h);
    const std::vector<double> pm = probs_at(d - h);
    const std::vector<double> pp2 = probs_at(d + 0.5 * h);
    const std::vector<double> pm2 = probs_at(d - 0.5 * h);
    std::vector<double> deriv(pp.size());
    for (std::size_t k = 0; k < pp.size(); ++k) {
        const double d1 = (pp[k] - pm[k]) / (2.0 * h);
        const double d2 = (pp2[k] - pm2[k]) / h;
        deriv[k] = (4.0 * d2 - d1) / 3.0;
    }
    return deriv;
}

/// (P(-2), P(+2)) from the bivariate-normal representation of the pair:
/// means (d, d), common sd sqrt(sigma^2+eps^2)/2, correlation xi.
inline std::pair<double, double> split_tail_probs(const BiphotonModel& m, double d,
                                                  const numerics::QuadratureSpec& spec) {
    const double s = 0.5 * std::hypot(m.sigma, m.epsilon);
    const double xi = correlation_coefficient(m);
    const numerics::Rect neg{-numerics::inf, 0.0, -numerics::inf, 0.0};
    const numerics::Rect pos{0.0, numerics::inf, 0.0, numerics::inf};
    const double p_minus = numerics::bvn_rect_prob(d, d, s, s, xi, neg, spec);
    const double p_plus = numerics::bvn_rect_prob(d, d, s, s, xi, pos, spec);
    return {p_minus, p_plus};
}

} // namespace detail

/// Exact split-detection table {P(-2), P(0), P(+2)} by quadrature, with
/// finite-difference d-derivatives.
inline OutcomeDistribution split_probabilities_exact(
    const BiphotonModel& m, const numerics::QuadratureSpec& spec = {}) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error(
            "split_probabilities_exact: use split_probabilities_delta for epsilon = 0");

    auto probs_at = [&](double d) -> std::vector<double> {
        const auto [pm, pp] = detail::split_tail_probs(m, d, spec);
        return {pm, 1.0 - pm - pp, pp};
    };
    const std::vector<double> p = probs_at(m.d);
    std::vector<double> dp = detail::table_d_derivative(probs_at, m.d, m.sigma);
    dp[1] = -(dp[0] + dp[2]); // complete outcome set: derivatives sum to zero

    OutcomeDistribution dist{{{"-2", p[0], dp[0]},
                              {"0", p[1], dp[1]},
                              {"+2", p[2], dp[2]}}};
    dist.validate();
    return dist;
}

/// First-order outcome table, valid for d << epsilon:
/// P(+-2) = 1/4 + arctan(eps/2sigma - sigma/2eps)/(2 pi) +- d beta with
/// beta = sqrt(2/(pi (sigma^2+eps^2))); derivatives are exact (+-beta, 0).
inline OutcomeDistribution split_probabilities_linearized(const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error(
            "split_probabilities_linearized: use split_probabilities_delta for epsilon = 0");

    const double s2 = m.sigma * m.sigma + m.epsilon * m.epsilon;
    const double base =
        0.25 + std::atan(m.epsilon / (2.0 * m.sigma) - m.sigma / (2.0 * m.epsilon)) /
                   (2.0 * numerics::pi);
    const double beta = std::sqrt(2.0 / (numerics::pi * s2));

    const double p_plus = base + m.d * beta;
    const double p_minus = base - m.d * beta;
    if (p_plus < 0.0 || p_minus < 0.0 || p_plus + p_minus > 1.0)
        throw std::domain_error(
            "split_probabilities_linearized: |d| too large, table not a distribution");

    OutcomeDistribution dist{{{"-2", p_minus, -beta},
                              {"0", 1.0 - p_plus - p_minus, 0.0},
                              {"+2", p_plus, beta}}};
    dist.approximation_warning = std::abs(m.d) >= m.epsilon;
    dist.validate();
    return dist;
}

/// Closed-form table in the delta-correlated limit (epsilon = 0): for d >= 0,
/// P(+2) = erf(sqrt(2) d / sigma), P(-2) = 0; mirrored for d < 0. The nonzero
/// branch has exact derivative sign(d) independent:
/// dP/dd = 2 sqrt(2) / (sigma sqrt(pi)) exp(-2 d^2 / sigma^2).
inline OutcomeDistribution split_probabilities_delta(double sigma, double d) {
    if (!(sigma > 0.0))
        throw std::domain_error("split_probabilities_delta: require sigma > 0");
    const double p = numerics::erf(std::sqrt(2.0) * std::abs(d) / sigma);
    const double slope = 2.0 * std::sqrt(2.0) / (sigma * std::sqrt(numerics::pi)) *
                         std::exp(-2.0 * d * d / (sigma * sigma));

    OutcomeDistribution dist;
    if (d >= 0.0)
        dist.outcomes = {{"-2", 0.0, 0.0}, {"0", 1.0 - p, -slope}, {"+2", p, slope}};
    else
        dist.outcomes = {{"-2", p, -slope}, {"0", 1.0 - p, slope}, {"+2", 0.0, 0.0}};
    dist.validate();
    return dist;
}

/// Full coincidence table P_ij (1 <= i <= j <= N) for an N-pixel detector,
/// plus a Miss outcome for mass outside the extent. Off-diagonal bins double
/// the single-rectangle probability (the density is symmetric under photon
/// exchange). Derivatives by central finite differences.
inline OutcomeDistribution pixel_probabilities(
    const BiphotonModel& m, const PixelDetector& det,
    const numerics::QuadratureSpec& spec = {}) {
    m.validate();
    det.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("pixel_probabilities: epsilon = 0 not supported");

    const double s = 0.5 * std::hypot(m.sigma, m.epsilon);
    const double xi = correlation_coefficient(m);
    const int n = det.n_pixels;

    auto probs_at = [&](double d) -> std::vector<double> {
        std::vector<double> p;
        p.reserve(static_cast<std::size_t>(n) * (n + 1) / 2 + 1);
        double covered = 0.0;
        for (int i = 1; i <= n; ++i) {
            for (int j = i; j <= n; ++j) {
                const numerics::Rect r{det.left_edge(i), det.left_edge(i + 1),
                                       det.left_edge(j), det.left_edge(j + 1)};
                double pij = numerics::bvn_rect_prob(d, d, s, s, xi, r, spec);
                if (j != i) pij *= 2.0;
                p.push_back(pij);
                covered += pij;
            }
        }
        p.push_back(std::max(0.0, 1.0 - covered)); // Miss
        return p;
    };

    const std::vector<double> p = probs_at(m.d);
    std::vector<double> dp = detail::table_d_derivative(probs_at, m.d, m.sigma);
    double dsum = 0.0;
    for (std::size_t k = 0; k + 1 < dp.size(); ++k) dsum += dp[k];
    dp.back() = -dsum;

    OutcomeDistribution dist;
    dist.outcomes.reserve(p.size());
    std::size_t k = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j, ++k)
            dist.outcomes.push_back({coincidence_label({i, j, false}), p[k], dp[k]});
    dist.outcomes.push_back({"miss", p.back(), dp.back()});
    dist.validate();
    return dist;
}

/// Expansion coefficients of the success probability P(+2|d) = alpha + beta d.
struct AlphaBeta {
    double alpha;
    double beta;
};

/// Matches the linearized split table for epsilon > 0; in the delta limit
/// alpha = 0 and beta is the slope of erf(sqrt(2) d / sigma) at d = 0.
inline AlphaBeta alpha_beta_linearization(const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        return {0.0, 2.0 * std::sqrt(2.0) / (m.sigma * std::sqrt(numerics::pi))};
    const double xi = correlation_coefficient(m);
    const double s2 = m.sigma * m.sigma + m.epsilon * m.epsilon;
    return {0.25 + std::asin(xi) / (2.0 * numerics::pi),
            std::sqrt(2.0 / (numerics::pi * s2))};
}

} // namespace biphoton
