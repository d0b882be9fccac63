#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "biphoton/detection.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/model.hpp"
#include "biphoton/numerics.hpp"

namespace biphoton {

enum class FisherSource { analytic, quadrature, discrete, quantum };

struct FisherReport {
    double value = 0.0; // information per event unless n_events was folded in
    FisherSource source = FisherSource::analytic;
    std::optional<BiphotonModel> model;
    /// Set when an outcome has P = 0 but dP/dd != 0; the information then
    /// grows without bound as that outcome's probability vanishes.
    bool divergent = false;
    /// Sum of (dP/dd)^2 over zero-probability outcomes: the coefficient of
    /// the leading 1/P contribution near the singular configuration.
    double singular_weight = 0.0;
};

struct EstimateResult {
    double estimate = 0.0;
    double variance = 0.0; // variance of `estimate` (already divided by events)
    double crb = 0.0;      // Cramer-Rao bound 1/(nu * I)
    std::int64_t n_events = 0;

    static constexpr double kEfficiencyTol = 0.05;
    bool efficient() const { return variance <= crb * (1.0 + kEfficiencyTol); }
};

/// Continuous-resolution information per pair: 4 / eps^2 (no sigma, no d).
inline FisherReport fisher_continuous(const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("fisher_continuous: infinite for epsilon = 0");
    return {4.0 / (m.epsilon * m.epsilon), FisherSource::analytic, m};
}

/// Information of one photon's marginal: 4 / (eps^2 + sigma^2). Bounded even
/// as epsilon -> 0.
inline FisherReport fisher_marginal(const BiphotonModel& m) {
    m.validate();
    return {4.0 / (m.epsilon * m.epsilon + m.sigma * m.sigma),
            FisherSource::analytic, m};
}

/// Split-detection information in the d << epsilon regime:
/// 16 / ((eps^2+sigma^2) (pi + 2 arctan(eps/2sigma - sigma/2eps))).
inline FisherReport fisher_split(const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("fisher_split: diverges for epsilon = 0");
    const double s2 = m.sigma * m.sigma + m.epsilon * m.epsilon;
    const double t = std::atan(m.epsilon / (2.0 * m.sigma) - m.sigma / (2.0 * m.epsilon));
    return {16.0 / (s2 * (numerics::pi + 2.0 * t)), FisherSource::analytic, m};
}

enum class Scheme { continuous, split };

/// Information gain over uncorrelated pairs in the same mode:
/// sigma^2/eps^2 (continuous) or pi / (pi + 2 arcsin xi) (split).
inline double fisher_ratio(const BiphotonModel& m, Scheme scheme) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("fisher_ratio: unbounded for epsilon = 0");
    if (scheme == Scheme::continuous) {
        const double r = m.sigma / m.epsilon;
        return r * r;
    }
    const double xi = correlation_coefficient(m);
    return numerics::pi / (numerics::pi + 2.0 * std::asin(xi));
}

/// Multinomial information sum_k (dP_k)^2 / P_k, times n_events.
/// Outcomes with P = 0 and dP = 0 contribute nothing; P = 0 with dP != 0
/// marks the report divergent and accumulates singular_weight instead.
inline FisherReport fisher_discrete(const OutcomeDistribution& dist,
                                    std::int64_t n_events) {
    if (n_events < 1)
        throw std::domain_error("fisher_discrete: require n_events >= 1");
    // Derivative magnitudes below the finite-difference noise floor are
    // treated as exact zeros.
    constexpr double kDerivFloor = 1e-7;

    FisherReport report;
    report.source = FisherSource::discrete;
    double per_event = 0.0;
    for (const Outcome& o : dist.outcomes) {
        if (o.probability > 0.0) {
            per_event += o.d_derivative * o.d_derivative / o.probability;
        } else if (std::abs(o.d_derivative) > kDerivFloor) {
            report.divergent = true;
            report.singular_weight += o.d_derivative * o.d_derivative;
        }
    }
    report.value = per_event * static_cast<double>(n_events);
    if (report.divergent)
        report.value = std::numeric_limits<double>::infinity();
    return report;
}

/// Bernoulli information for success probability alpha + beta d:
/// beta^2 nu / ((alpha + beta d)(1 - alpha - beta d)).
inline FisherReport fisher_alpha_beta(double alpha, double beta, double d,
                                      std::int64_t nu) {
    const double q = alpha + beta * d;
    if (!(q >= 0.0) || !(q < 1.0))
        throw std::domain_error("fisher_alpha_beta: require 0 <= alpha + beta d < 1");
    if (nu < 1) throw std::domain_error("fisher_alpha_beta: require nu >= 1");
    FisherReport report;
    report.source = FisherSource::analytic;
    if (q == 0.0) {
        report.divergent = true;
        report.singular_weight = beta * beta * static_cast<double>(nu);
        report.value = std::numeric_limits<double>::infinity();
        return report;
    }
    report.value = beta * beta * static_cast<double>(nu) / (q * (1.0 - q));
    return report;
}

/// Quadrature pieces of the quantum Fisher information evaluated on the real
/// amplitude sqrt(p): in sum/difference coordinates the amplitude factorizes
/// and d/dd acts on the Gaussian sum factor alone.
struct QfiTerms {
    double norm;     // <psi|psi>, should integrate to 1
    double overlap;  // <psi|d_d psi>, zero for a real normalized amplitude
    double grad_sq;  // <d_d psi|d_d psi>
};

inline QfiTerms qfi_terms(const BiphotonModel& m,
                          const numerics::QuadratureSpec& spec = {}) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("qfi_terms: epsilon = 0 has no square-integrable amplitude");

    const double e2 = m.epsilon * m.epsilon;
    const double d2 = 2.0 * m.d;
    // |psi|^2 = (1/(pi sigma eps)) f(u) g(v) with measure du dv / 2.
    auto f = [&](double u) {
        const double t = u - d2;
        return std::exp(-t * t / (2.0 * e2));
    };
    auto g = [&](double v) { return std::exp(-v * v / (2.0 * m.sigma * m.sigma)); };
    const double inf = numerics::inf;
    const double gv = numerics::integrate_1d(g, -inf, inf, spec);
    const double f0 = numerics::integrate_1d(f, -inf, inf, spec);
    const double f1 = numerics::integrate_1d(
        [&](double u) { return f(u) * (u - d2); }, -inf, inf, spec);
    const double f2 = numerics::integrate_1d(
        [&](double u) { return f(u) * (u - d2) * (u - d2); }, -inf, inf, spec);

    const double norm_const = 0.5 / (numerics::pi * m.sigma * m.epsilon);
    return {norm_const * gv * f0,
            norm_const * gv * f1 / e2,
            norm_const * gv * f2 / (e2 * e2)};
}

/// I_Q = 4 (<d_d psi|d_d psi> - |<psi|d_d psi>|^2) by quadrature. Equals the
/// continuous classical information 4/eps^2: the amplitude carries no
/// d-dependent phase, so the bound is saturated by position measurement.
inline FisherReport qfi_numeric(const BiphotonModel& m,
                                const numerics::QuadratureSpec& spec = {}) {
    const QfiTerms t = qfi_terms(m, spec);
    return {4.0 * (t.grad_sq - t.overlap * t.overlap), FisherSource::quantum, m};
}

/// Minimum resolvable displacement from the Cramer-Rao bound: 1/sqrt(nu I).
inline double crb_dmin(double fisher_per_event, std::int64_t nu) {
    if (!(fisher_per_event > 0.0) || nu < 1)
        throw std::domain_error("crb_dmin: require fisher_per_event > 0 and nu >= 1");
    return 1.0 / std::sqrt(static_cast<double>(nu) * fisher_per_event);
}

/// Signal-to-noise ratio d sqrt(I) for total information I.
inline double snr(double d, double fisher_total) {
    if (!(fisher_total >= 0.0))
        throw std::domain_error("snr: require fisher_total >= 0");
    if (d == 0.0) return 0.0;
    return d * std::sqrt(fisher_total);
}

/// Minimum resolvable displacement of the alpha/beta Bernoulli model at
/// SNR 1 (nu >> 1 assumed):
/// (1 - 2 alpha + sqrt((1-2 alpha)^2 + 4 alpha (1-alpha) nu)) / (2 beta nu).
/// Scales as 1/nu while alpha nu << 1 and as 1/sqrt(nu) beyond.
inline double dmin_alpha_beta(double alpha, double beta, std::int64_t nu) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::domain_error("dmin_alpha_beta: require 0 <= alpha < 1");
    if (!(beta > 0.0)) throw std::domain_error("dmin_alpha_beta: require beta > 0");
    if (nu < 1) throw std::domain_error("dmin_alpha_beta: require nu >= 1");
    const double n = static_cast<double>(nu);
    const double om = 1.0 - 2.0 * alpha;
    return (om + std::sqrt(om * om + 4.0 * alpha * (1.0 - alpha) * n)) /
           (2.0 * beta * n);
}

namespace detail {

inline double split_scale(const BiphotonModel& m) {
    return std::sqrt(numerics::pi *
                     (m.sigma * m.sigma + m.epsilon * m.epsilon) / 8.0);
}

} // namespace detail

/// Average of the per-pair midpoints (x1 + x2)/2; efficient with
/// per-event variance eps^2/4.
inline EstimateResult estimate_mean(std::span<const PhotonPair> pairs,
                                    const BiphotonModel& m) {
    m.validate();
    if (pairs.empty()) throw empty_input_error("estimate_mean: no pairs");
    const auto n = static_cast<std::int64_t>(pairs.size());

    std::vector<double> mid(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k)
        mid[k] = 0.5 * (pairs[k].x1 + pairs[k].x2);
    const double mean = numerics::pairwise_sum(mid) / static_cast<double>(n);

    double s2 = 0.0;
    if (n > 1) {
        std::vector<double> sq(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double r = mid[k] - mean;
            sq[k] = r * r;
        }
        s2 = numerics::pairwise_sum(sq) / static_cast<double>(n - 1);
    }
    const double crb = m.epsilon * m.epsilon / (4.0 * static_cast<double>(n));
    return {mean, s2 / static_cast<double>(n), crb, n};
}

struct SplitCounts {
    std::int64_t minus_two = 0;
    std::int64_t zero = 0;
    std::int64_t plus_two = 0;

    std::int64_t total() const { return minus_two + zero + plus_two; }

    void tally(SplitOutcome o) {
        switch (o) {
        case SplitOutcome::MinusTwo: ++minus_two; break;
        case SplitOutcome::Zero: ++zero; break;
        case SplitOutcome::PlusTwo: ++plus_two; break;
        }
    }
};

/// Scaled count-difference estimator
/// d_hat = sqrt(pi (sigma^2+eps^2)/8) (n_+2 - n_-2)/nu, efficient against the
/// split-detection information.
inline EstimateResult estimate_split(const SplitCounts& counts,
                                     const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("estimate_split: epsilon = 0 not supported");
    const std::int64_t n = counts.total();
    if (n < 1) throw empty_input_error("estimate_split: no events");

    const double c = detail::split_scale(m);
    const double nd = static_cast<double>(n);
    const double estimate =
        c * static_cast<double>(counts.plus_two - counts.minus_two) / nd;
    // Unbiased sample variance of the per-event values in {-c, 0, +c}.
    double s2 = 0.0;
    if (n > 1) {
        const double sum_sq =
            c * c * static_cast<double>(counts.plus_two + counts.minus_two);
        s2 = (sum_sq - nd * estimate * estimate) / (nd - 1.0);
    }
    return {estimate, s2 / nd, 1.0 / (nd * fisher_split(m).value), n};
}

/// Maximum-likelihood estimate from one photon's split counts:
/// d_hat = sqrt(pi (sigma^2+eps^2)/8) (n_+ - n_-)/(n_+ + n_-).
/// Variance by the delta method on the observed success fraction.
inline EstimateResult estimate_marginal_mle(std::int64_t n_plus, std::int64_t n_minus,
                                            const BiphotonModel& m) {
    m.validate();
    if (n_plus < 0 || n_minus < 0)
        throw std::domain_error("estimate_marginal_mle: negative counts");
    const std::int64_t n = n_plus + n_minus;
    if (n < 1) throw empty_input_error("estimate_marginal_mle: no events");

    const double c = detail::split_scale(m);
    const double nd = static_cast<double>(n);
    const double p_hat = static_cast<double>(n_plus) / nd;
    const double estimate = c * (2.0 * p_hat - 1.0);
    const double variance = 4.0 * c * c * p_hat * (1.0 - p_hat) / nd;
    const double marginal_info =
        8.0 / (numerics::pi * (m.sigma * m.sigma + m.epsilon * m.epsilon));
    return {estimate, variance, 1.0 / (nd * marginal_info), n};
}

/// Coincidence counts over the four two-photon sign patterns; first index is
/// photon 1, second photon 2.
struct CoincidenceCounts {
    std::int64_t pp = 0;
    std::int64_t pm = 0;
    std::int64_t mp = 0;
    std::int64_t mm = 0;

    std::int64_t total() const { return pp + pm + mp + mm; }
};

/// Weighted average of the two marginal MLEs, w1 d1 + w2 d2 with w1 + w2 = 1.
/// The reported variance is the closed-form prediction
/// pi (sigma^2+eps^2)/(8N) [1 - 2 w1 w2 (1 - (2/pi) arcsin xi)], minimized at
/// w1 = w2 = 1/2 where it meets the split-detection bound.
inline EstimateResult averaged_marginal_estimator(const CoincidenceCounts& counts,
                                                  const BiphotonModel& m,
                                                  double w1, double w2) {
    m.validate();
    if (std::abs(w1 + w2 - 1.0) > 1e-12)
        throw weight_error("averaged_marginal_estimator: require w1 + w2 = 1");
    const std::int64_t n = counts.total();
    if (n < 1) throw empty_input_error("averaged_marginal_estimator: no events");

    const double c = detail::split_scale(m);
    const double nd = static_cast<double>(n);
    const double d1 =
        c * static_cast<double>(counts.pp + counts.pm - counts.mp - counts.mm) / nd;
    const double d2 =
        c * static_cast<double>(counts.pp + counts.mp - counts.pm - counts.mm) / nd;

    const double xi = correlation_coefficient(m);
    const double variance =
        c * c / nd *
        (1.0 - 2.0 * w1 * w2 * (1.0 - 2.0 / numerics::pi * std::asin(xi)));
    const double crb =
        m.epsilon == 0.0 ? 0.0 : 1.0 / (nd * fisher_split(m).value);
    return {w1 * d1 + w2 * d2, variance, crb, n};
}

/// Cov(d1_hat, d2_hat) of the two marginal MLEs over n_events pairs:
/// (sigma^2 + eps^2) arcsin(xi) / (4 N).
inline double covariance_marginal_estimators(const BiphotonModel& m,
                                             std::int64_t n_events) {
    m.validate();
    if (n_events < 1)
        throw std::domain_error("covariance_marginal_estimators: require n_events >= 1");
    const double xi = correlation_coefficient(m);
    return (m.sigma * m.sigma + m.epsilon * m.epsilon) * std::asin(xi) /
           (4.0 * static_cast<double>(n_events));
}

} // namespace biphoton
