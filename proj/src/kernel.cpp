// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/kernel.hpp"

#include <string>

#include "curldrift/error.hpp"
#include "curldrift/quadrature.hpp"

namespace curldrift
{

void DynamicsSpec::validate() const
{
    if (!std::isfinite(exponent))
        throw ConfigError("dynamics exponent must be finite", "exponent");
    if (family == Family::power && exponent < 0)
        throw ConfigError("power dynamics need s >= 0, got " + std::to_string(exponent),
                          "exponent");
    if (family == Family::log_modified && !(exponent > 0))
        throw ConfigError("log-modified dynamics need gamma > 0, got "
                              + std::to_string(exponent),
                          "exponent");
}

Eigen::Matrix2d spectral_density(Eigen::Vector2d const& p, SpectralKernel const& kernel)
{
    double const pp = p.squaredNorm();
    if (pp == 0)
        throw ConfigError("spectral density is undefined at p = 0");
    Eigen::Vector2d const q = perp(p);
    return (inv_two_pi_sq * mollifier_hat(p, kernel) / pp) * (q * q.transpose());
}

double mollifier_radial_moment(int order, SpectralKernel const& kernel)
{
    double const rc = kernel.cutoff_radius;
    auto f = [&](double r) { return std::pow(r, order + 1) * mollifier_hat_radial(r, kernel); };
    return 2 * std::numbers::pi * integrate(f, 0.0, rc, {1e-14, 1e-13}).value;
}

double mollifier_mass(SpectralKernel const& kernel)
{
    return mollifier_radial_moment(0, kernel);
}

CovarianceResult covariance_quadrature(double t,
                                       Eigen::Vector2d const& x,
                                       DynamicsSpec const& dyn,
                                       SpectralKernel const& kernel,
                                       double abs_tol)
{
    if (!(t >= 0))
        throw ConfigError("covariance time must be nonnegative");
    if (!x.allFinite())
        throw ConfigError("covariance offset must be finite");
    dyn.validate();

    double const xnorm = x.norm();
    // Entry-wise angular integrands; index 0 -> (1,1), 1 -> (1,2), 2 -> (2,2)
    auto angular = [&](double r, int entry) {
        double const a = r * xnorm;
        int const n = 48 + 4 * static_cast<int>(std::ceil(a));
        return periodic_trapezoid(
            [&](double th) {
                double const c = std::cos(th);
                double const s = std::sin(th);
                double const phase = std::cos(r * (x(0) * c + x(1) * s));
                switch (entry)
                {
                    case 0:
                        return phase * s * s;
                    case 1:
                        return -phase * s * c;
                    default:
                        return phase * c * c;
                }
            },
            n);
    };

    double const rc = kernel.cutoff_radius;
    QuadOptions opt;
    opt.abs_tol = abs_tol / 3;
    opt.rel_tol = 0;

    CovarianceResult out;
    out.abs_error = 0;
    for (int entry = 0; entry < 3; ++entry)
    {
        auto radial = [&](double r) {
            if (r == 0)
                return 0.0;
            double const weight = inv_two_pi_sq * r * mollifier_hat_radial(r, kernel)
                                  * std::exp(-dynamics_rate_radial(r, dyn) * t);
            if (weight == 0)
                return 0.0;
            return weight * angular(r, entry);
        };
        auto res = integrate(radial, 0.0, rc, opt);
        out.abs_error += res.abs_error;
        int const i = entry == 2 ? 1 : 0;
        int const j = entry == 0 ? 0 : 1;
        out.value(i, j) = res.value;
        out.value(j, i) = res.value;
    }
    return out;
}

}  // namespace curldrift
