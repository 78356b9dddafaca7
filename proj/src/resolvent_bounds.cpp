// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/resolvent_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "curldrift/error.hpp"
#include "curldrift/quadrature.hpp"

namespace curldrift
{
namespace
{
constexpr double pi = std::numbers::pi;

void require_lambda(double lambda)
{
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be positive and finite, got " + std::to_string(lambda));
}

//! Breakpoints 0, lo, 4 lo, 16 lo, ..., 1 for integrands with a feature at lo
std::vector<double> graded_points(double lo)
{
    std::vector<double> pts{0.0};
    for (double r = std::max(lo, 1e-300); r < 1.0; r *= 4)
        pts.push_back(r);
    pts.push_back(1.0);
    return pts;
}

//! Angular integral of sin^2 over (a + b cos) for a > |b|
double sin2_over_shifted_cos(double a, double b)
{
    return 2 * pi / (a + std::sqrt((a - b) * (a + b)));
}

std::vector<double> peak_points(double center, double width)
{
    std::vector<double> pts{0.0, 1.0};
    for (double f : {-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0})
    {
        double const r = center + f * width;
        if (r > 0 && r < 1)
            pts.push_back(r);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

struct SecondLevel
{
    double diag;
    double off;
    double rel_error;
};

SecondLevel second_level(double pmag,
                         double lambda,
                         DynamicsSpec const& dyn,
                         SpectralKernel const& kernel,
                         double rel_tol,
                         bool want_diag,
                         bool want_off)
{
    double const mp = dynamics_rate_radial(pmag, dyn);
    double const base = lambda + pmag * pmag + mp;
    double const width = std::sqrt(lambda + mp) + 1e-3 * pmag;
    auto pts = peak_points(pmag, width);
    QuadOptions opt{0.0, rel_tol, 4000, true};

    // denominators carry the angular integral in closed form
    auto angular = [&](double rho) {
        double const a = base + rho * rho + dynamics_rate_radial(rho, dyn);
        double const b = 2 * pmag * rho;
        return sin2_over_shifted_cos(a, b);
    };

    SecondLevel out{0, 0, 0};
    if (want_diag)
    {
        auto f = [&](double rho) { return rho * mollifier_hat_radial(rho, kernel) * angular(rho); };
        auto res = integrate(f, std::span<double const>(pts), opt);
        out.diag = inv_two_pi_sq * pmag * pmag * res.value;
        out.rel_error = std::max(out.rel_error, res.abs_error / std::max(std::abs(res.value), 1e-300));
    }
    if (want_off)
    {
        auto f = [&](double rho) { return mollifier_hat_radial(rho, kernel) * angular(rho); };
        auto res = integrate(f, std::span<double const>(pts), opt);
        out.off = inv_two_pi_sq * pmag * res.value;
        out.rel_error = std::max(out.rel_error, res.abs_error / std::max(std::abs(res.value), 1e-300));
    }
    return out;
}

}  // namespace

void BoundParams::validate() const
{
    if (!(epsilon > 0) || !std::isfinite(epsilon))
        throw ConfigError("epsilon must be positive", "epsilon");
    if (!(k1 >= 1) || !std::isfinite(k1))
        throw ConfigError("k1 must be at least 1", "k1");
    if (!(k2 >= 1) || !std::isfinite(k2))
        throw ConfigError("k2 must be at least 1", "k2");
}

//---------------------------------------------------------------------------//

double truncation_log(double x, double z)
{
    if (!(x > 0))
        throw ConfigError("truncation_log needs x > 0, got " + std::to_string(x));
    return z + std::log1p(1 / x);
}

double series_lb_from_log(int k, double log_value)
{
    if (k < 0)
        throw ConfigError("series level must be nonnegative");
    double const h = 0.5 * std::log(log_value);
    double term = 1;
    double sum = 1;
    for (int j = 1; j <= k; ++j)
    {
        term *= h / j;
        sum += term;
    }
    return sum;
}

double series_ub_from_log(int k, double log_value)
{
    return log_value / series_lb_from_log(k, log_value);
}

double truncation_lb(int k, double x, double z)
{
    return series_lb_from_log(k, truncation_log(x, z));
}

double truncation_ub(int k, double x, double z)
{
    return series_ub_from_log(k, truncation_log(x, z));
}

double level_shift(int k, int n, BoundParams const& params)
{
    if (k < 1 || n < 1)
        throw ConfigError("level indices start at 1");
    return params.k1 * std::pow(static_cast<double>(n + k), 2 + 2 * params.epsilon);
}

double level_factor(int k, int n, BoundParams const& params)
{
    return params.k2 * std::sqrt(level_shift(k, n, params));
}

std::vector<double> c_sequence(int k_max, double epsilon)
{
    if (!(epsilon > 0))
        throw ConfigError("c sequence needs epsilon > 0", "epsilon");
    if (k_max < 1)
        throw ConfigError("c sequence needs k_max >= 1");
    std::vector<double> c(static_cast<std::size_t>(k_max));
    c[0] = 1;
    for (int j = 2; j <= k_max; ++j)
    {
        double const prev = c[j - 2];
        if (j % 2 == 0)
        {
            int const k = j / 2;
            c[j - 1] = pi / prev * (1 + std::pow(k, -1 - epsilon));
        }
        else
        {
            int const k = (j - 1) / 2;
            c[j - 1] = pi / prev * (1 - std::pow(k + 1, -1 - epsilon));
        }
    }
    return c;
}

//---------------------------------------------------------------------------//

double simplified_level1(double lambda, DynamicsSpec const& dyn)
{
    require_lambda(lambda);
    dyn.validate();
    auto f = [&](double r) { return r / (lambda + r * r + dynamics_rate_radial(r, dyn)); };
    auto pts = graded_points(1e-2 * std::min(lambda, std::sqrt(lambda)));
    return integrate(f, std::span<double const>(pts), {1e-15, 1e-12}).value;
}

double level1_upper(double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel)
{
    require_lambda(lambda);
    dyn.validate();
    auto f = [&](double r) {
        return r * mollifier_hat_radial(r, kernel) / (lambda + r * r + dynamics_rate_radial(r, dyn));
    };
    auto pts = graded_points(1e-2 * std::min(lambda, std::sqrt(lambda)));
    // half the angular mass 2 pi, times (2 pi)^-2
    return integrate(f, std::span<double const>(pts), {1e-15, 1e-12}).value / (4 * pi);
}

FormValue h2_diag(double pmag, double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel, double rel_tol)
{
    if (!(pmag > 0))
        throw ConfigError("h2_diag needs pmag > 0");
    if (!(lambda >= 0))
        throw ConfigError("h2_diag needs lambda >= 0");
    dyn.validate();
    auto s = second_level(pmag, lambda, dyn, kernel, rel_tol, true, false);
    return {s.diag, s.rel_error * s.diag};
}

FormValue h2_off_bound(double pmag, double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel, double rel_tol)
{
    if (!(pmag > 0))
        throw ConfigError("h2_off_bound needs pmag > 0");
    if (!(lambda >= 0))
        throw ConfigError("h2_off_bound needs lambda >= 0");
    dyn.validate();
    auto s = second_level(pmag, lambda, dyn, kernel, rel_tol, false, true);
    return {s.off, s.rel_error * s.off};
}

BracketResult bracket(double lambda, DynamicsSpec const& dyn, SpectralKernel const& kernel)
{
    require_lambda(lambda);
    dyn.validate();
    BracketResult out;
    out.lambda = lambda;

    auto pts = graded_points(1e-2 * std::min(lambda, std::sqrt(lambda)));
    QuadOptions opt{1e-15, 1e-10, 4000, true};

    double inner_rel = 0;
    auto lower_integrand = [&](double r) {
        double const v = mollifier_hat_radial(r, kernel);
        if (v == 0)
            return 0.0;
        auto s = second_level(r, lambda, dyn, kernel, 1e-11, true, true);
        inner_rel = std::max(inner_rel, s.rel_error);
        return r * v / (lambda + r * r + dynamics_rate_radial(r, dyn) + s.diag + s.off);
    };
    auto lo = integrate(lower_integrand, std::span<double const>(pts), opt);
    out.lower_form = lo.value / (4 * pi);
    out.lower_error = (lo.abs_error / (4 * pi)) + inner_rel * out.lower_form;

    auto upper_integrand = [&](double r) {
        return r * mollifier_hat_radial(r, kernel) / (lambda + r * r + dynamics_rate_radial(r, dyn));
    };
    auto up = integrate(upper_integrand, std::span<double const>(pts), opt);
    out.upper_form = up.value / (4 * pi);
    out.upper_error = up.abs_error / (4 * pi);

    double const scale = 4 / (lambda * lambda);
    out.lower = scale * out.lower_form;
    out.upper = scale * out.upper_form;
    out.lower_error *= scale;
    out.upper_error *= scale;
    return out;
}

//---------------------------------------------------------------------------//

int envelope_level(double log_value)
{
    double const k = std::floor(std::log(log_value) / 2);
    return k > 0 ? static_cast<int>(k) : 0;
}

Envelope envelope_from_log_lambda(double log_lambda, BoundParams const& params)
{
    if (!(log_lambda < 0))
        throw ConfigError("envelope needs lambda in (0, 1)");
    params.validate();
    Envelope out;
    // log(1 + 1/lambda) = -log(lambda) + log(1 + lambda)
    out.log_value = -log_lambda + std::log1p(std::exp(log_lambda));
    out.level = envelope_level(out.log_value);
    int const level = 2 * out.level + 1;
    double const z = level_shift(level, 1, params);
    double const f = level_factor(level, 1, params);
    double const lz = z + out.log_value;
    out.upper_env = f * series_ub_from_log(out.level, lz);
    out.lower_env = std::max(0.0, (series_lb_from_log(out.level, lz) - f) / f);
    return out;
}

Envelope envelope(double lambda, BoundParams const& params)
{
    if (!(lambda > 0 && lambda < 1))
        throw ConfigError("envelope needs lambda in (0, 1), got " + std::to_string(lambda));
    return envelope_from_log_lambda(std::log(lambda), params);
}

double poisson_clt_ratio(double lambda)
{
    double const l = truncation_log(lambda, 0);
    int const k = envelope_level(l);
    return std::sqrt(l) / series_lb_from_log(k, l);
}

//---------------------------------------------------------------------------//

double gamma_level1(double lambda, double gamma)
{
    require_lambda(lambda);
    if (!(gamma >= 0))
        throw ConfigError("gamma must be nonnegative");
    auto f = [&](double r) {
        if (r == 0)
            return 0.0;
        double const rr = r * r;
        return r / (lambda + rr + rr * std::pow(log_e_plus_inv_sq(r), gamma));
    };
    auto pts = graded_points(1e-2 * std::sqrt(lambda));
    return integrate(f, std::span<double const>(pts), {1e-15, 1e-12}).value;
}

double gamma_primitive(double x, double gamma)
{
    if (!(x > 0))
        throw ConfigError("gamma_primitive needs x > 0");
    return std::pow(std::log(std::numbers::e + 1 / x), 1 - gamma);
}

ExponentFit fit_line(std::span<double const> xs, std::span<double const> ys)
{
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ConfigError("line fit needs at least two (x, y) samples");
    double const n = static_cast<double>(xs.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0))
        throw ConfigError("line fit needs distinct abscissae");
    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        double const r = ys[i] - fit.intercept - fit.slope * xs[i];
        rss += r * r;
    }
    fit.std_error = xs.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    return fit;
}

ExponentFit fit_log_exponent(std::span<std::pair<double, double> const> samples)
{
    if (samples.size() < 2)
        throw ConfigError("exponent fit needs at least two samples");
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto [lambda, v] : samples)
    {
        double const ll = std::abs(std::log(lambda));
        if (!(lambda > 0) || !(ll > 0) || !(v > 0))
            throw ConfigError("exponent fit needs lambda in (0,1) or (1,inf) and v > 0");
        xs.push_back(std::log(ll));
        ys.push_back(std::log(v));
    }
    return fit_line(xs, ys);
}

EnvelopeSlopes envelope_slopes(double lambda_min, double lambda_max, int n_points,
                               BoundParams const& params)
{
    if (!(lambda_min > 0 && lambda_min < lambda_max && lambda_max < 1) || n_points < 2)
        throw ConfigError("envelope slopes need 0 < lambda_min < lambda_max < 1 and two points");
    std::vector<double> xs, upper, lower;
    double const lo = std::log(lambda_min);
    double const hi = std::log(lambda_max);
    for (int i = 0; i < n_points; ++i)
    {
        auto const e = envelope_from_log_lambda(lo + (hi - lo) * i / (n_points - 1), params);
        double const root = std::sqrt(e.log_value);
        xs.push_back(std::log(e.log_value));
        upper.push_back(std::log(e.upper_env / root));
        lower.push_back(std::log(e.lower_env / root));
    }
    return {fit_line(xs, upper), fit_line(xs, lower)};
}

}  // namespace curldrift
