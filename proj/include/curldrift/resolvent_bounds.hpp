// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "curldrift/kernel.hpp"

namespace curldrift
{

struct BoundParams
{
    double epsilon = 0.5;
    double k1 = 4.0;
    double k2 = 4.0;

    void validate() const;
};

//---------------------------------------------------------------------------//
// Truncation scalars

//! z + log(1 + 1/x), x > 0
double truncation_log(double x, double z);

//! Truncated exponential series sum_{j<=k} (log(L)/2)^j / j!
double truncation_lb(int k, double x, double z);

//! L / lb
double truncation_ub(int k, double x, double z);

//! Same as the above, taking the already evaluated L value
double series_lb_from_log(int k, double log_value);
double series_ub_from_log(int k, double log_value);

//! Level shift K1 (n + k)^(2 + 2 eps)
double level_shift(int k, int n, BoundParams const& params);

//! Level factor K2 sqrt(level_shift)
double level_factor(int k, int n, BoundParams const& params);

//! Alternating operator constants c_1 ... c_kmax (index 0 holds c_1)
std::vector<double> c_sequence(int k_max, double epsilon);

//---------------------------------------------------------------------------//
// First- and second-level resolvent quadratic forms

//! int_0^1 r dr / (lambda + r^2 + m(r))
double simplified_level1(double lambda, DynamicsSpec const& dyn);

//! Upper first-level form of the drift observable; decreasing in lambda
double level1_upper(double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel = {});

struct FormValue
{
    double value;
    double abs_error;
};

//! Diagonal multiplier of the second-level operator on the first chaos at |p|
FormValue h2_diag(double pmag,
                  double lambda,
                  DynamicsSpec const& dyn,
                  SpectralKernel const& kernel = {},
                  double rel_tol = 1e-10);

//! Schur-type multiplier bounding the off-diagonal part at |p|
FormValue h2_off_bound(double pmag,
                       double lambda,
                       DynamicsSpec const& dyn,
                       SpectralKernel const& kernel = {},
                       double rel_tol = 1e-10);

struct BracketResult
{
    double lambda = 0;
    //! Diffusivity-scale bracket: (4 / lambda^2) times the quadratic forms
    double lower = 0;
    double upper = 0;
    double lower_error = 0;
    double upper_error = 0;
    //! Quadratic-form values before scaling
    double lower_form = 0;
    double upper_form = 0;
};

BracketResult bracket(double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel = {});

//---------------------------------------------------------------------------//
// Superdiffusive envelope

struct Envelope
{
    int level = 0;
    double log_value = 0;  //!< L(lambda, 0)
    double lower_env = 0;
    double upper_env = 0;
};

//! Truncation level floor(log L(lambda, 0) / 2), clamped at zero
int envelope_level(double log_value);

//! Envelope at lambda in (0, 1)
Envelope envelope(double lambda, BoundParams const& params = {});

//! Envelope parameterized by log(lambda) < 0, for lambda below DBL_MIN
Envelope envelope_from_log_lambda(double log_lambda, BoundParams const& params = {});

//! sqrt(L(lambda,0)) / lb(k(lambda), lambda, 0)
double poisson_clt_ratio(double lambda);

//---------------------------------------------------------------------------//
// Log-modified dynamics

//! int_0^1 r dr / (lambda + r^2 + r^2 (log(e + r^-2))^gamma)
double gamma_level1(double lambda, double gamma);

//! (log(e + 1/x))^(1 - gamma)
double gamma_primitive(double x, double gamma);

struct ExponentFit
{
    double slope;
    double std_error;
    double intercept;
};

//! Ordinary least-squares line y = intercept + slope x
ExponentFit fit_line(std::span<double const> xs, std::span<double const> ys);

struct EnvelopeSlopes
{
    //! log(upper_env / sqrt(L)) against log L
    ExponentFit upper;
    //! log(lower_env / sqrt(L)) against log L; NaN when lower_env vanishes
    ExponentFit lower;
};

//! Envelope slopes on log-spaced lambdas in [lambda_min, lambda_max]
EnvelopeSlopes envelope_slopes(double lambda_min, double lambda_max, int n_points,
                               BoundParams const& params = {});

//! Least squares of log v against log|log lambda|
ExponentFit fit_log_exponent(std::span<std::pair<double, double> const> samples);

}  // namespace curldrift
