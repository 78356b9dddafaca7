// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "curldrift/error.hpp"
#include "curldrift/quadrature.hpp"
#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/rng.hpp"
#include "curldrift/spectral_field.hpp"
#include "curldrift/statistics.hpp"

namespace curldrift
{
namespace
{
constexpr double pi = std::numbers::pi;

void require_interval(double a, double b, double z, int k)
{
    if (!(a > 0))
        throw ConfigError("lower limit must be positive", "a");
    if (!(b >= a))
        throw ConfigError("upper limit must not be below the lower limit", "b");
    if (!(z >= 1))
        throw ConfigError("level shift must be at least 1", "z");
    if (k < 0)
        throw ConfigError("truncation level must be nonnegative", "k");
}

QuadOptions tight()
{
    QuadOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-14;
    opt.max_intervals = 2000;
    opt.throw_on_failure = false;
    return opt;
}

//! int_a^b g(x) dx / x in the variable log x
template<class G>
double log_integral(G&& g, double a, double b)
{
    if (a == b)
        return 0;
    auto f = [&](double u) { return g(std::exp(u)); };
    return integrate(f, std::log(a), std::log(b), tight()).value;
}

double relative_error(double approx, double exact)
{
    double const diff = std::abs(approx - exact);
    return exact == 0 ? diff : diff / std::abs(exact);
}

double factorial(int k)
{
    double f = 1;
    for (int j = 2; j <= k; ++j)
        f *= j;
    return f;
}

/*!
 * int f(q) dq over the disk of radius rho_max around center, in polar
 * coordinates with breakpoints clustered at the point center + rho0 e(phi0).
 */
template<class F>
double polar_integral(F&& f,
                      Eigen::Vector2d const& center,
                      double rho_max,
                      double rho0,
                      double phi0,
                      double width,
                      double rel_tol)
{
    QuadOptions inner;
    inner.rel_tol = 0.1 * rel_tol;
    inner.abs_tol = 1e-3 * rel_tol;
    inner.max_intervals = 2000;
    inner.throw_on_failure = false;
    QuadOptions outer = inner;
    outer.rel_tol = rel_tol;

    std::array<double, 4> const spread{1, 4, 16, 64};
    auto angular = [&](double rho) {
        double const wphi = std::min(pi, std::hypot(width, rho - rho0) / rho);
        std::vector<double> pts{phi0 - pi, phi0 + pi};
        for (double m : spread)
        {
            if (m * wphi < pi)
            {
                pts.push_back(phi0 - m * wphi);
                pts.push_back(phi0 + m * wphi);
            }
        }
        pts.push_back(phi0);
        std::sort(pts.begin(), pts.end());
        auto g = [&](double phi) {
            Eigen::Vector2d const q = center + rho * Eigen::Vector2d(std::cos(phi), std::sin(phi));
            return f(q) * rho;
        };
        return integrate(g, std::span<double const>(pts), inner).value;
    };

    std::vector<double> pts{0, rho_max};
    for (double m : spread)
    {
        for (double r : {rho0 - m * width, rho0 + m * width})
        {
            if (r > 0 && r < rho_max)
                pts.push_back(r);
        }
    }
    if (rho0 > 0 && rho0 < rho_max)
        pts.push_back(rho0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return integrate(angular, std::span<double const>(pts), outer).value;
}

template<class Eval>
ScanResult run_scan(Eval&& eval, ScanGrid const& grid, bool with_exponent, bool refine)
{
    ScanResult result;
    auto sweep = [&](double rel_tol, std::vector<ScanPoint>* points) {
        double max_ratio = 0;
        std::vector<double> by_exponent;
        std::vector<double> exps = with_exponent ? grid.exponents : std::vector<double>{1.0};
        std::vector<Eigen::Vector2d> pps = with_exponent ? std::vector<Eigen::Vector2d>{
                                                               Eigen::Vector2d::Zero()}
                                                         : grid.pprimes;
        for (double s : exps)
        {
            double max_s = 0;
            for (double lambda : grid.lambdas)
                for (double offset : grid.offsets)
                    for (double pmag : grid.pmags)
                        for (double z : grid.zs)
                            for (int k : grid.levels)
                                for (auto const& pp : pps)
                                {
                                    ScanPoint pt{lambda, offset, pmag, z, k, s, pp, 0, 0, 0};
                                    eval(pt, rel_tol);
                                    max_s = std::max(max_s, pt.ratio);
                                    if (points)
                                        points->push_back(pt);
                                }
            by_exponent.push_back(max_s);
            max_ratio = std::max(max_ratio, max_s);
        }
        return std::make_pair(max_ratio, by_exponent);
    };

    auto [max_ratio, by_exponent] = sweep(grid.rel_tol, &result.points);
    result.max_ratio = max_ratio;
    if (with_exponent)
        result.max_ratio_by_exponent = by_exponent;
    result.refined_max_ratio = max_ratio;
    if (refine)
        result.refined_max_ratio = sweep(1e-2 * grid.rel_tol, nullptr).first;
    result.refinement_change = result.refined_max_ratio > 0
                                   ? std::abs(result.refined_max_ratio - result.max_ratio)
                                         / result.refined_max_ratio
                                   : 0;
    return result;
}

}  // namespace

//---------------------------------------------------------------------------//

IdentityCheck check_log_integral_identity(double a, double b, double z, int k)
{
    require_interval(a, b, z, k);
    IdentityCheck out;
    out.lhs = log_integral([&](double x) { return 1 / ((1 + x) * truncation_ub(k, x, z)); }, a, b);
    out.rhs = 2 * (truncation_lb(k + 1, a, z) - truncation_lb(k + 1, b, z));
    out.abs_err = std::abs(out.lhs - out.rhs);
    return out;
}

InequalityCheck check_log_integral_inequality(double a, double b, double z, int k, double slack)
{
    require_interval(a, b, z, k);
    InequalityCheck out;
    out.lhs = log_integral([&](double x) { return 1 / ((1 + x) * truncation_lb(k, x, z)); }, a, b);
    out.rhs = 2 * (truncation_ub(k, a, z) - truncation_ub(k, b, z));
    out.slack = slack;
    out.holds = out.lhs <= out.rhs + slack;
    return out;
}

TruncationDerivatives truncation_derivatives(int k, double x, double z)
{
    if (k < 0)
        throw ConfigError("truncation level must be nonnegative", "k");
    double const w = x * (x + 1);
    double const log_value = truncation_log(x, z);
    double const half_log = 0.5 * std::log(log_value);
    double const lb = series_lb_from_log(k, log_value);
    TruncationDerivatives d;
    d.log_value = -1 / w;
    d.lb = k >= 1 ? -1 / (2 * w * series_ub_from_log(k - 1, log_value)) : 0.0;
    d.ub = -1 / (2 * w * lb) * (1 + std::pow(half_log, k) / (factorial(k) * lb));
    return d;
}

DerivativeCheck check_truncation_derivatives(double x, double z, int k, double h)
{
    if (!(x > 0))
        throw ConfigError("x must be positive", "x");
    if (!(h > 0))
        throw ConfigError("finite-difference step must be positive", "h");
    auto const d = truncation_derivatives(k, x, z);
    double const step = h * x;
    auto central = [&](auto&& f) { return (f(x + step) - f(x - step)) / (2 * step); };

    DerivativeCheck out;
    out.rel_err_log = relative_error(central([&](double y) { return truncation_log(y, z); }),
                                     d.log_value);
    out.rel_err_lb = relative_error(central([&](double y) { return truncation_lb(k, y, z); }),
                                    d.lb);
    out.rel_err_ub = relative_error(central([&](double y) { return truncation_ub(k, y, z); }),
                                    d.ub);
    out.max_rel_err = std::max({out.rel_err_log, out.rel_err_lb, out.rel_err_ub});

    double const dz = 1e-6 * std::max(z, 1.0);
    out.increasing_in_z = truncation_log(x, z + dz) > truncation_log(x, z)
                          && truncation_lb(k, x, z + dz) >= truncation_lb(k, x, z)
                          && truncation_ub(k, x, z + dz) > truncation_ub(k, x, z);
    return out;
}

InequalityCheck check_weight_swap(double lambda, double pmag, double z, int k, double slack)
{
    double const a = lambda + pmag * pmag;
    if (!(lambda > 0))
        throw ConfigError("lambda must be positive", "lambda");
    if (!(a <= 1))
        throw ConfigError("lambda + |p|^2 must not exceed 1", "pmag");
    require_interval(a, 1.0, z, k);
    double const plain = log_integral([&](double r) { return 1 / truncation_lb(k, r, z); }, a, 1.0);
    double const shifted
        = log_integral([&](double r) { return 1 / ((1 + r) * truncation_lb(k, r, z)); }, a, 1.0);
    InequalityCheck out;
    out.lhs = std::abs(plain - shifted);
    out.rhs = truncation_ub(k, a, z) / z;
    out.slack = slack;
    out.holds = out.lhs <= out.rhs + slack;
    return out;
}

bool check_decay_condition(double x, double z, int k)
{
    auto const d = truncation_derivatives(k, x, z);
    double const ub = truncation_ub(k, x, z);
    bool ok = -ub / x <= d.ub && d.ub < 0;
    if (k >= 1)
    {
        double const lb = truncation_lb(k, x, z);
        ok = ok && -lb / x <= d.lb && d.lb < 0;
    }
    return ok;
}

bool check_truncation_chain(double x, double z, int k, double slack)
{
    double const log_value = truncation_log(x, z);
    double const root = std::sqrt(log_value);
    double const lb = truncation_lb(k, x, z);
    double const ub = truncation_ub(k, x, z);
    return 1 <= lb + slack && lb <= root + slack && std::sqrt(z) <= root + slack
           && root <= ub + slack && ub <= log_value + slack;
}

//---------------------------------------------------------------------------//

double diagonal_reference(double a, double z, int k)
{
    if (a >= 1)
        return 0;
    return 0.5 * pi * log_integral([&](double r) { return 1 / truncation_ub(k, r, z); }, a, 1.0);
}

double diagonal_integral(double lambda_tilde, double pmag, double z, int k, double s,
                         SpectralKernel const& kernel, double rel_tol)
{
    auto f = [&](Eigen::Vector2d const& q) {
        double const r = q.norm();
        double const vhat = mollifier_hat_radial(r, kernel);
        if (vhat == 0 || r == 0)
            return 0.0;
        double const sin2 = q(1) * q(1) / (r * r);
        double const x = lambda_tilde + (q + Eigen::Vector2d(pmag, 0)).squaredNorm();
        return vhat * sin2 / (x * truncation_ub(k, x, z) + std::pow(r, 2 * s));
    };
    double const width = 0.5 * std::sqrt(lambda_tilde + std::pow(pmag, 2 * s));
    return polar_integral(f, Eigen::Vector2d::Zero(), kernel.cutoff_radius, pmag, pi, width,
                          rel_tol);
}

double offdiagonal_integral(double lambda_tilde, double pmag, Eigen::Vector2d const& pprime,
                            double z, int k, SpectralKernel const& kernel, double rel_tol)
{
    Eigen::Vector2d const p(pmag, 0);
    Eigen::Vector2d const center = -pprime;
    // the polar Jacobian cancels the 1 / |p' + q| weight
    auto f = [&](Eigen::Vector2d const& q) {
        double const r = q.norm();
        double const vhat = mollifier_hat_radial(r, kernel);
        if (vhat == 0 || r == 0)
            return 0.0;
        double const rho = (q - center).norm();
        if (rho == 0)
            return 0.0;
        double const sin2 = q(1) * q(1) / (r * r);
        double const pq2 = (p + q).squaredNorm();
        double const denom = lambda_tilde + pq2 * truncation_ub(k, lambda_tilde + pq2 + r * r, z);
        return pmag * vhat * sin2 / denom / rho;
    };
    Eigen::Vector2d const peak = -p - center;
    double const rho0 = peak.norm();
    double const phi0 = rho0 > 0 ? std::atan2(peak(1), peak(0)) : 0.0;
    double const width = 0.5 * std::sqrt(lambda_tilde);
    return polar_integral(f, center, pprime.norm() + kernel.cutoff_radius, rho0, phi0, width,
                          rel_tol);
}

bool ScanResult::stable(double max_change) const
{
    return std::isfinite(max_ratio) && std::isfinite(refined_max_ratio)
           && refinement_change < max_change;
}

ScanResult scan_diagonal_constant(ScanGrid const& grid, SpectralKernel const& kernel, bool refine)
{
    auto eval = [&](ScanPoint& pt, double rel_tol) {
        double const lt = pt.lambda + pt.offset;
        double const a = lt + pt.pmag * pt.pmag;
        pt.lhs = diagonal_integral(lt, pt.pmag, pt.z, pt.level, pt.exponent, kernel, rel_tol);
        pt.reference = diagonal_reference(a, pt.z, pt.level);
        pt.ratio = std::abs(pt.lhs - pt.reference) * std::sqrt(pt.z)
                   / truncation_lb(pt.level + 1, a, pt.z);
    };
    return run_scan(eval, grid, true, refine);
}

ScanResult scan_offdiagonal_constant(ScanGrid const& grid, SpectralKernel const& kernel,
                                     bool refine)
{
    auto eval = [&](ScanPoint& pt, double rel_tol) {
        double const lt = pt.lambda + pt.offset;
        double const a = lt + pt.pmag * pt.pmag;
        pt.lhs = offdiagonal_integral(lt, pt.pmag, pt.pprime * pt.pmag, pt.z, pt.level, kernel,
                                      rel_tol);
        pt.reference = truncation_lb(pt.level, a, pt.z) / pt.z;
        pt.ratio = pt.lhs / pt.reference;
    };
    return run_scan(eval, grid, false, refine);
}

//---------------------------------------------------------------------------//

bool CovarianceReport::passed(double z_limit) const
{
    return max_abs_z <= z_limit;
}

CovarianceReport covariance_check(CovarianceCheckOptions const& options)
{
    if (options.n_realizations < 2)
        throw ConfigError("covariance check needs at least two realizations", "n_realizations");
    for (double t : options.times)
    {
        if (!(t >= 0))
            throw ConfigError("covariance times must be nonnegative", "times");
    }
    if (!(options.stationarity_time > 0))
        throw ConfigError("stationarity time must be positive", "stationarity_time");

    std::vector<double> schedule = options.times;
    schedule.push_back(options.stationarity_time);
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

    std::size_t const nt = options.times.size();
    std::size_t const nx = options.offsets.size();
    // products indexed by (time, offset, row, col)
    std::vector<RunningStat> products(nt * nx * 4);
    std::array<RunningStat, 4> initial;
    std::array<RunningStat, 4> later;
    std::array<RunningStat, 4> diff;

    double const mass = mollifier_mass(options.kernel);
    Eigen::Vector2d const origin = Eigen::Vector2d::Zero();
    for (int i = 0; i < options.n_realizations; ++i)
    {
        auto modes = std::make_shared<ModeSet<double> const>(
            sample_modes<double>(options.n_modes,
                                 options.kernel,
                                 options.dyn,
                                 derive_key(options.seed, i, Stream::wavevectors),
                                 {},
                                 mass));
        auto state = init_stationary<double>(modes, derive_key(options.seed, i, Stream::amplitudes));
        NormalSampler<Xoshiro256pp> noise{
            Xoshiro256pp(derive_key(options.seed, i, Stream::environment_noise))};
        Eigen::Vector2d const w0 = eval_field(state, origin);

        for (double t : schedule)
        {
            if (t > state.time)
                advance(state, t - state.time, noise);
            for (std::size_t it = 0; it < nt; ++it)
            {
                if (options.times[it] != t)
                    continue;
                for (std::size_t ix = 0; ix < nx; ++ix)
                {
                    Eigen::Vector2d const w = eval_field(state, options.offsets[ix]);
                    for (int r = 0; r < 2; ++r)
                        for (int c = 0; c < 2; ++c)
                            products[((it * nx + ix) * 2 + r) * 2 + c].add(w0(r) * w(c));
                }
            }
            if (t == options.stationarity_time)
            {
                Eigen::Vector2d const w = eval_field(state, origin);
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                    {
                        double const before = w0(r) * w0(c);
                        double const after = w(r) * w(c);
                        initial[r * 2 + c].add(before);
                        later[r * 2 + c].add(after);
                        diff[r * 2 + c].add(after - before);
                    }
            }
        }
    }

    auto zscore = [](double value, double expected, double se) {
        double const d = value - expected;
        if (se > 0)
            return d / se;
        return d == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
    };

    CovarianceReport report;
    for (std::size_t it = 0; it < nt; ++it)
    {
        for (std::size_t ix = 0; ix < nx; ++ix)
        {
            auto const quad = covariance_quadrature(options.times[it], options.offsets[ix],
                                                    options.dyn, options.kernel,
                                                    options.quad_tol);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                {
                    auto const& st = products[((it * nx + ix) * 2 + r) * 2 + c];
                    CovarianceEntry e{options.times[it], options.offsets[ix], r, c, st.mean,
                                      st.stderr_of_mean(), quad.value(r, c), 0};
                    e.zscore = zscore(e.monte_carlo, e.quadrature, e.std_error);
                    report.max_abs_z = std::max(report.max_abs_z, std::abs(e.zscore));
                    report.entries.push_back(e);
                }
        }
    }
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
        {
            int const j = r * 2 + c;
            StationarityEntry e{r, c, initial[j].mean, later[j].mean, diff[j].stderr_of_mean(), 0};
            e.zscore = zscore(diff[j].mean, 0, e.std_error);
            report.max_abs_z = std::max(report.max_abs_z, std::abs(e.zscore));
            report.stationarity.push_back(e);
        }
    return report;
}

}  // namespace curldrift
