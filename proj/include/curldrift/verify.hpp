// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "curldrift/kernel.hpp"

namespace curldrift
{

//---------------------------------------------------------------------------//
// Truncation-function identities

struct IdentityCheck
{
    double lhs = 0;
    double rhs = 0;
    double abs_err = 0;
};

struct InequalityCheck
{
    double lhs = 0;
    double rhs = 0;
    double slack = 0;
    bool holds = true;
};

/*!
 * int_a^b dx / ((x^2 + x) ub(k, x, z)) against 2 (lb(k+1, a, z) - lb(k+1, b, z)).
 */
IdentityCheck check_log_integral_identity(double a, double b, double z, int k);

//! int_a^b dx / ((x^2 + x) lb(k, x, z)) <= 2 (ub(k, a, z) - ub(k, b, z)) + slack
InequalityCheck check_log_integral_inequality(double a, double b, double z, int k,
                                              double slack = 1e-10);

struct TruncationDerivatives
{
    double log_value;
    double lb;
    double ub;
};

//! Closed-form x-derivatives of L, lb_k and ub_k
TruncationDerivatives truncation_derivatives(int k, double x, double z);

struct DerivativeCheck
{
    double rel_err_log = 0;
    double rel_err_lb = 0;
    double rel_err_ub = 0;
    double max_rel_err = 0;
    //! L, lb and ub increase with z (forward differences)
    bool increasing_in_z = true;
};

//! Closed forms against central differences with step h x
DerivativeCheck check_truncation_derivatives(double x, double z, int k, double h = 1e-6);

/*!
 * Swapping 1/rho for 1/(rho + rho^2) in int_{lambda + |p|^2}^1 drho / (rho lb_k)
 * costs at most ub_k(lambda + |p|^2, z) / z.
 */
InequalityCheck check_weight_swap(double lambda, double pmag, double z, int k,
                                  double slack = 1e-10);

//! -f / x <= f' < 0 for f = ub_k and, when k >= 1, f = lb_k
bool check_decay_condition(double x, double z, int k);

//! The ordering 1 <= lb <= sqrt(L), sqrt(z) <= sqrt(L) <= ub <= L
bool check_truncation_chain(double x, double z, int k, double slack = 1e-12);

//---------------------------------------------------------------------------//
// Empirical constants of the second-level integral estimates

struct ScanGrid
{
    std::vector<double> lambdas{1e-1, 1e-2, 1e-4};
    //! Scalar stand-in for the extra momentum term |p_1:n|^(2s)
    std::vector<double> offsets{0.0, 0.5, 2.0};
    std::vector<double> pmags{0.01, 0.1, 0.5, 1.0};
    std::vector<double> zs{2.0, 8.0, 32.0};
    std::vector<int> levels{0, 1, 3};
    std::vector<double> exponents{1.0, 1.5};
    //! p' in the frame where p lies on the positive first axis, in units of |p|
    std::vector<Eigen::Vector2d> pprimes{Eigen::Vector2d::Zero(),
                                         Eigen::Vector2d(0.5, 0.0),
                                         Eigen::Vector2d(0.0, 0.5)};
    //! Relative tolerance of the two-dimensional quadrature
    double rel_tol = 1e-6;
};

struct ScanPoint
{
    double lambda;
    double offset;
    double pmag;
    double z;
    int level;
    double exponent;
    Eigen::Vector2d pprime;
    double lhs;
    double reference;
    double ratio;
};

struct ScanResult
{
    std::vector<ScanPoint> points;
    double max_ratio = 0;
    //! Largest ratio per dynamics exponent, in grid order
    std::vector<double> max_ratio_by_exponent;
    //! Same scan at a hundredfold tighter tolerance
    double refined_max_ratio = 0;
    double refinement_change = 0;

    bool stable(double max_change = 0.2) const;
};

/*!
 * Diagonal estimate: ratio |int V sin^2 / (h(...) + |q|^2s) - (pi/2) int drho/(rho ub)|
 * * sqrt(z) / lb_{k+1} over the grid.
 */
ScanResult scan_diagonal_constant(ScanGrid const& grid, SpectralKernel const& kernel = {},
                                  bool refine = true);

//! Off-diagonal estimate: ratio of the |p' + q|^-1 weighted integral to lb_k / z
ScanResult scan_offdiagonal_constant(ScanGrid const& grid, SpectralKernel const& kernel = {},
                                     bool refine = true);

//! Left-hand integral of the diagonal estimate at a single point
double diagonal_integral(double lambda_tilde, double pmag, double z, int k, double s,
                         SpectralKernel const& kernel = {}, double rel_tol = 1e-8);

//! (pi/2) int_a^1 drho / (rho ub_k(rho, z)), zero for a >= 1
double diagonal_reference(double a, double z, int k);

//! Left-hand integral of the off-diagonal estimate at a single point
double offdiagonal_integral(double lambda_tilde, double pmag, Eigen::Vector2d const& pprime,
                            double z, int k, SpectralKernel const& kernel = {},
                            double rel_tol = 1e-8);

//---------------------------------------------------------------------------//
// Case suites

//! One evaluated case of a suite, in the order the suite visits them
struct SuiteCase
{
    char const* check;
    int index;
    double x;
    double y;
    double z;
    int k;
    double lhs;
    double rhs;
    double error;
    bool pass;
};

struct SuiteSummary
{
    int cases = 0;
    int failures = 0;
    double max_error = 0;
    double seconds = 0;

    bool passed() const { return cases > 0 && failures == 0; }
};

using SuiteSink = std::function<void(SuiteCase const&)>;

/*!
 * Random (a, b, z, k): a < b log-uniform in [1e-8, 10], z in [1, 100],
 * k uniform in [0, max_level]; error is |quadrature - closed form|.
 */
SuiteSummary identity_suite(int n_cases, int max_level, double tolerance, std::uint64_t seed,
                            SuiteSink const& sink = {});

/*!
 * Random (x, z, k): x log-uniform in [1e-8, 10], z in [1, 100], k in
 * [0, max_level]; error is the largest relative derivative mismatch.
 */
SuiteSummary derivative_suite(int n_cases, int max_level, double tolerance, double step,
                              std::uint64_t seed, SuiteSink const& sink = {});

/*!
 * Log-spaced grid x in [1e-8, 10], z in [1, 100] with points per axis and
 * every k up to max_level: ordering chain, decay condition, integral
 * inequality on neighbouring and outer intervals, and the weight swap.
 */
SuiteSummary chain_suite(int points, int max_level, double slack, SuiteSink const& sink = {});

//---------------------------------------------------------------------------//
// Monte Carlo covariance of the synthesized field

struct CovarianceCheckOptions
{
    int n_modes = 2048;
    int n_realizations = 10000;
    std::vector<double> times{0.0, 0.5};
    std::vector<Eigen::Vector2d> offsets{Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 0.0)};
    DynamicsSpec dyn;
    SpectralKernel kernel;
    std::uint64_t seed = 0;
    //! Later time of the one-point stationarity comparison
    double stationarity_time = 5.0;
    double quad_tol = 1e-10;
};

struct CovarianceEntry
{
    double time;
    Eigen::Vector2d x;
    int row;
    int col;
    double monte_carlo;
    double std_error;
    double quadrature;
    double zscore;
};

struct StationarityEntry
{
    int row;
    int col;
    double initial;
    double later;
    double std_error;  //!< of the paired difference
    double zscore;
};

struct CovarianceReport
{
    std::vector<CovarianceEntry> entries;
    std::vector<StationarityEntry> stationarity;
    double max_abs_z = 0;

    bool passed(double z_limit = 3.0) const;
};

//! E[w_0(0) (x) w_t(x)] over fresh realizations against the quadrature oracle
CovarianceReport covariance_check(CovarianceCheckOptions const& options);

}  // namespace curldrift
