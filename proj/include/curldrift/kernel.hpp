// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace curldrift
{

enum class BumpProfile
{
    smooth_bump,  //!< sqrt of the transform is exp(1 - 1/(1 - r^2)) on r < 1
    unit_disk,    //!< indicator of the unit disk
};

struct SpectralKernel
{
    BumpProfile profile = BumpProfile::smooth_bump;
    double cutoff_radius = 1.0;
};

struct DynamicsSpec
{
    enum class Family
    {
        power,
        log_modified,
    };

    Family family = Family::power;
    //! s for the power family, gamma for the log-modified family
    double exponent = 1.0;

    static DynamicsSpec power(double s) { return {Family::power, s}; }
    static DynamicsSpec log_modified(double gamma)
    {
        return {Family::log_modified, gamma};
    }

    //! Throws ConfigError when the exponent is outside the family's range
    void validate() const;
};

inline constexpr double inv_two_pi_sq = 1.0 / (4 * std::numbers::pi * std::numbers::pi);

//---------------------------------------------------------------------------//
// Radial profiles

template<class T>
T mollifier_hat_radial(T r, SpectralKernel const& kernel = {})
{
    using std::exp;
    T const rho = r / T(kernel.cutoff_radius);
    if (!(rho < T(1)))
        return T(0);
    if (kernel.profile == BumpProfile::unit_disk)
        return T(1);
    T const rr = rho * rho;
    return exp(T(2) - T(2) / (T(1) - rr));
}

//! log(e + r^-2) without overflow for tiny r
template<class T>
T log_e_plus_inv_sq(T r)
{
    using std::log;
    using std::log1p;
    constexpr T e = std::numbers::e_v<T>;
    if (r < T(1e-3))
        return T(-2) * log(r) + log1p(e * r * r);
    return log(e + T(1) / (r * r));
}

template<class T>
T dynamics_rate_radial(T r, DynamicsSpec const& dyn)
{
    using std::pow;
    if (dyn.family == DynamicsSpec::Family::power)
    {
        if (dyn.exponent == 0)
            return T(1);
        if (r == T(0))
            return T(0);
        if (dyn.exponent == 1)
            return r * r;
        return pow(r, T(2 * dyn.exponent));
    }
    if (r == T(0))
        return T(0);
    return r * r * pow(log_e_plus_inv_sq(r), T(dyn.exponent));
}

//---------------------------------------------------------------------------//
// Vector forms

template<class Derived>
typename Derived::Scalar
mollifier_hat(Eigen::MatrixBase<Derived> const& p, SpectralKernel const& kernel = {})
{
    return mollifier_hat_radial(p.norm(), kernel);
}

template<class Derived>
typename Derived::Scalar
dynamics_rate(Eigen::MatrixBase<Derived> const& p, DynamicsSpec const& dyn)
{
    return dynamics_rate_radial(p.norm(), dyn);
}

//! Rotated wavevector (p2, -p1)
template<class Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> perp(Eigen::MatrixBase<Derived> const& p)
{
    return {p(1), -p(0)};
}

//! Spectral density matrix of the drift field at wavevector p != 0
Eigen::Matrix2d spectral_density(Eigen::Vector2d const& p, SpectralKernel const& kernel = {});

//! Integral of the mollifier transform over the plane
double mollifier_mass(SpectralKernel const& kernel = {});

//! Integral of |p|^order times the transform over the plane
double mollifier_radial_moment(int order, SpectralKernel const& kernel = {});

struct CovarianceResult
{
    Eigen::Matrix2d value;
    double abs_error;
};

/*!
 * Space-time covariance E[w_0(0) w_t(x)^T] of the stationary field.
 *
 * Polar quadrature: adaptive Gauss-Kronrod in |p| and a periodic
 * trapezoid rule in the angle, whose node count grows with |p||x| so the
 * angular rule stays spectrally accurate.
 */
CovarianceResult covariance_quadrature(double t,
                                       Eigen::Vector2d const& x,
                                       DynamicsSpec const& dyn,
                                       SpectralKernel const& kernel = {},
                                       double abs_tol = 1e-10);

}  // namespace curldrift
