#pragma once

#include <cmath>
#include <stdexcept>

#include "biphoton/errors.hpp"
#include "biphoton/numerics.hpp"
#include "biphoton/rng.hpp"

namespace biphoton {

/// Joint transverse-position model of one biphoton pair.
///
/// sigma sets the spread of the position difference x1 - x2, epsilon the
/// spread of the position sum x1 + x2 around 2d, and d is the displacement
/// being estimated. epsilon = 0 selects the delta-correlated limit; densities
/// are undefined there and the closed-form delta APIs take over.
struct BiphotonModel {
    double sigma = 1.0;
    double epsilon = 1.0;
    double d = 0.0;

    void validate() const {
        if (!(sigma > 0.0))
            throw std::domain_error("BiphotonModel: require sigma > 0");
        if (!(epsilon >= 0.0))
            throw std::domain_error("BiphotonModel: require epsilon >= 0");
        if (!std::isfinite(d))
            throw std::domain_error("BiphotonModel: require finite d");
    }

    BiphotonModel with_d(double new_d) const { return {sigma, epsilon, new_d}; }
};

struct PhotonPair {
    double x1;
    double x2;
};

/// Independent-Gaussian view of the pair in sum/difference coordinates
/// u = x1 + x2, v = x1 - x2. Reconstruction x1 = (u+v)/2, x2 = (u-v)/2
/// carries Jacobian 1/2.
struct SumDiffDecomposition {
    double u_mean;
    double u_std;
    double v_mean;
    double v_std;

    static SumDiffDecomposition from(const BiphotonModel& m) {
        m.validate();
        return {2.0 * m.d, m.epsilon, 0.0, m.sigma};
    }
};

/// Joint density p(x1, x2 | d). Undefined for epsilon = 0.
inline double joint_pdf(const BiphotonModel& m, double x1, double x2) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error("joint_pdf: epsilon = 0 has no density; use "
                                "the delta-limit detection APIs");
    const double u = x1 + x2;
    const double v = x1 - x2;
    return 2.0 * numerics::normal_pdf(u, 2.0 * m.d, m.epsilon) *
           numerics::normal_pdf(v, 0.0, m.sigma);
}

/// Single-photon marginal: normal with mean d and variance (eps^2+sigma^2)/4.
inline double marginal_pdf(const BiphotonModel& m, double x) {
    m.validate();
    const double sd = 0.5 * std::hypot(m.epsilon, m.sigma);
    return numerics::normal_pdf(x, m.d, sd);
}

/// Pearson correlation of (x1, x2): (eps^2 - sigma^2) / (eps^2 + sigma^2).
/// Negative (anticorrelated) for epsilon < sigma.
inline double correlation_coefficient(const BiphotonModel& m) {
    m.validate();
    const double e2 = m.epsilon * m.epsilon;
    const double s2 = m.sigma * m.sigma;
    return (e2 - s2) / (e2 + s2);
}

/// Draw one coincidence event. Consumes exactly two normal variates
/// (u first, then v) so sequences stay aligned across parameter values;
/// epsilon = 0 gives u = 2d deterministically.
inline PhotonPair sample_pair(const BiphotonModel& m, RandomStream& rng) {
    m.validate();
    const double u = 2.0 * m.d + m.epsilon * rng.next_normal();
    const double v = m.sigma * rng.next_normal();
    return {0.5 * (u + v), 0.5 * (u - v)};
}

/// Physical floor on epsilon from the pair-creation birth zone:
/// sqrt(9 w lambda_p / (10 pi)) for crystal width w and pump wavelength
/// lambda_p (any consistent length unit).
inline double epsilon_min(double crystal_width, double pump_wavelength) {
    if (!(crystal_width >= 0.0) || !(pump_wavelength > 0.0))
        throw std::domain_error("epsilon_min: require w >= 0 and lambda_p > 0");
    return std::sqrt(9.0 * crystal_width * pump_wavelength / (10.0 * numerics::pi));
}

/// Number of independent uncorrelated photons needed to match the precision
/// of nu biphoton pairs: 2 nu sigma^2 / eps^2 (real-valued; round up).
inline double classical_resource_equivalent(double nu, const BiphotonModel& m) {
    m.validate();
    if (m.epsilon == 0.0)
        throw delta_limit_error(
            "classical_resource_equivalent: unbounded for epsilon = 0");
    const double r = m.sigma / m.epsilon;
    return 2.0 * nu * r * r;
}

} // namespace biphoton
