// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <doctest.h>

#include "curldrift/error.hpp"
#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/rng.hpp"

using namespace curldrift;

// Reference values from tests/oracles/bounds_oracle.py
namespace oracle
{
constexpr double log_two = 0.69314718055994530942;
constexpr double log_value_1e6 = 13.815511557963774104;
constexpr double lb_3 = 2.5313963814625953522;
constexpr double ub_3 = 2.6132298225926836705;
constexpr double level1_s1_1e3 = 1.9003505836459333523;
constexpr double level1_s05_1e2 = 0.65795592900545136313;
constexpr double gamma1_1e4 = 1.0753598032607385672;
constexpr double gamma0_1e4 = 2.4758843878215424276;
constexpr double gamma05_1e8 = 2.6741425844978896796;
constexpr double h2_diag = 0.0018345092544676294264;
constexpr double h2_off = 0.028460814802914392634;
constexpr double c3 = 0.3232233047033631189;
}  // namespace oracle

TEST_CASE("truncation log")
{
    CHECK(truncation_log(1, 0) == doctest::Approx(oracle::log_two).epsilon(1e-15));
    CHECK(truncation_log(1e-6, 0) == doctest::Approx(oracle::log_value_1e6).epsilon(1e-14));
    CHECK(truncation_log(1e12, 3) == doctest::Approx(3).epsilon(1e-11));
    CHECK_THROWS_AS(truncation_log(0, 1), ConfigError);
}

TEST_CASE("truncated series")
{
    for (double x : {1e-8, 0.3, 10.0})
    {
        CHECK(truncation_lb(0, x, 2) == 1.0);
        CHECK(truncation_ub(0, x, 2) == truncation_log(x, 2));
    }
    CHECK(truncation_lb(3, 0.01, 2) == doctest::Approx(oracle::lb_3).epsilon(1e-14));
    CHECK(truncation_ub(3, 0.01, 2) == doctest::Approx(oracle::ub_3).epsilon(1e-14));
    double const root = std::sqrt(truncation_log(1e-4, 5));
    CHECK(truncation_lb(60, 1e-4, 5) == doctest::Approx(root).epsilon(1e-14));
    CHECK(truncation_ub(60, 1e-4, 5) == doctest::Approx(root).epsilon(1e-14));
}

TEST_CASE("level constants")
{
    BoundParams const unit{0.5, 1, 1};
    CHECK(level_shift(1, 1, unit) == doctest::Approx(8).epsilon(1e-15));
    BoundParams const p;
    for (int k = 1; k < 6; ++k)
    {
        for (int n = 1; n < 6; ++n)
        {
            CHECK(level_shift(2 * k, n + 1, p) == level_shift(2 * k + 1, n, p));
            CHECK(level_factor(k, n, p) / std::sqrt(level_shift(k, n, p))
                  == doctest::Approx(p.k2).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(level_shift(0, 1, p), ConfigError);
    CHECK_THROWS_AS((BoundParams{0, 4, 4}.validate()), ConfigError);
}

TEST_CASE("alternating constants")
{
    auto const c = c_sequence(10000, 0.5);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == 2 * std::numbers::pi);
    CHECK(c[2] == doctest::Approx(oracle::c3).epsilon(1e-14));
    CHECK_THROWS_AS(c_sequence(10, 0), ConfigError);
}

TEST_CASE("first level form")
{
    auto const s1 = DynamicsSpec::power(1);
    CHECK(simplified_level1(2, s1) == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-12));
    CHECK(simplified_level1(1e-3, s1) == doctest::Approx(oracle::level1_s1_1e3).epsilon(1e-11));
    CHECK(simplified_level1(1e-2, DynamicsSpec::power(0.5))
          == doctest::Approx(oracle::level1_s05_1e2).epsilon(1e-11));
    double prev = 0;
    for (double lambda : {1.0, 0.1, 1e-2, 1e-4, 1e-8, 1e-12})
    {
        double const v = level1_upper(lambda, s1);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(simplified_level1(0, s1), ConfigError);
}

TEST_CASE("first level form with the unit disk kernel")
{
    SpectralKernel const disk{BumpProfile::unit_disk};
    auto const s1 = DynamicsSpec::power(1);
    double lo = 1e300;
    double hi = 0;
    for (double lambda : {1.0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12})
    {
        double const ratio = level1_upper(lambda, s1, disk) / level1_upper(lambda, s1);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(lo >= 1);
    CHECK(hi <= 3);
}

TEST_CASE("log-modified form")
{
    CHECK(gamma_level1(1e-4, 1) == doctest::Approx(oracle::gamma1_1e4).epsilon(1e-10));
    CHECK(gamma_level1(1e-4, 0) == doctest::Approx(oracle::gamma0_1e4).epsilon(1e-10));
    CHECK(gamma_level1(1e-8, 0.5) == doctest::Approx(oracle::gamma05_1e8).epsilon(1e-10));
    for (double lambda : {1e-1, 1e-4, 1e-9})
        CHECK(gamma_level1(lambda, 0)
              == doctest::Approx(simplified_level1(lambda, DynamicsSpec::power(1))).epsilon(1e-10));
}

TEST_CASE("second level multipliers against a direct polar integral")
{
    auto const s1 = DynamicsSpec::power(1);
    auto const d = h2_diag(0.3, 0.1, s1);
    auto const o = h2_off_bound(0.3, 0.1, s1);
    CHECK(d.value == doctest::Approx(oracle::h2_diag).epsilon(1e-8));
    CHECK(o.value == doctest::Approx(oracle::h2_off).epsilon(1e-8));
    CHECK(std::isfinite(o.value));
    double const coarse = h2_off_bound(0.3, 0.1, s1, {}, 1e-6).value;
    CHECK(std::abs(coarse - o.value) <= 1e-6 * o.value);
}

TEST_CASE("second level multipliers vanish with the momentum")
{
    auto const s1 = DynamicsSpec::power(1);
    CHECK(h2_diag(1e-6, 0.1, s1).value < 1e-11);
    double const a = h2_off_bound(1e-4, 0.1, s1).value;
    double const b = h2_off_bound(2e-4, 0.1, s1).value;
    CHECK(b / a == doctest::Approx(2).epsilon(1e-3));
    for (double p : {0.01, 0.2, 0.7, 0.99, 1.5})
    {
        CHECK(h2_diag(p, 1e-3, s1).value >= 0);
        CHECK(h2_off_bound(p, 1e-3, s1).value >= 0);
    }
}

TEST_CASE("bracket ordering")
{
    for (double s : {0.5, 1.0})
    {
        for (double lambda : {0.5, 0.1, 1e-2, 1e-3})
        {
            auto const b = bracket(lambda, DynamicsSpec::power(s));
            CHECK(b.lower > 0);
            CHECK(b.lower <= b.upper);
            CHECK(b.upper == doctest::Approx(4 / (lambda * lambda) * b.upper_form).epsilon(1e-15));
        }
    }
}

TEST_CASE("upper form stays bounded for s = 0.5")
{
    auto const half = DynamicsSpec::power(0.5);
    double const a = level1_upper(1e-8, half);
    double const b = level1_upper(1e-12, half);
    CHECK(b >= a);
    CHECK(b - a <= 0.01 * b);
}

TEST_CASE("envelope level")
{
    double const big = std::exp(8.0);
    CHECK(envelope_level(big) == 4);
    CHECK(envelope_level(1.0) == 0);
    auto const e = envelope_from_log_lambda(-big);
    CHECK(e.level == 4);
    CHECK(e.upper_env > 0);
    CHECK(e.lower_env >= 0);
    CHECK_THROWS_AS(envelope(1.5), ConfigError);
}

TEST_CASE("envelope ordering")
{
    for (double lambda = 1e-2; lambda >= 1e-12; lambda /= 10)
    {
        auto const e = envelope(lambda);
        CHECK(e.lower_env <= e.upper_env);
        double const r = poisson_clt_ratio(lambda);
        CHECK(r >= 1);
        CHECK(r <= 3);
    }
}

TEST_CASE("exponent fits")
{
    std::vector<std::pair<double, double>> exact, flat, noisy;
    Xoshiro256pp gen(4);
    for (int i = 0; i <= 32; ++i)
    {
        double const lambda = std::pow(10.0, -4 - 8.0 * i / 32);
        double const l = std::abs(std::log(lambda));
        exact.emplace_back(lambda, std::pow(l, 0.5));
        flat.emplace_back(lambda, 3.0);
        noisy.emplace_back(lambda, std::pow(l, 0.25) * (1 + 0.01 * (2 * uniform01(gen) - 1)));
    }
    auto const a = fit_log_exponent(exact);
    CHECK(a.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.std_error <= 1e-12);
    CHECK(std::abs(fit_log_exponent(flat).slope) <= 1e-12);
    CHECK(std::abs(fit_log_exponent(noisy).slope - 0.25) <= 0.02);
    std::vector<double> const xs{0, 1, 2};
    std::vector<double> const ys{1, 3, 5};
    auto const line = fit_line(xs, ys);
    CHECK(line.slope == doctest::Approx(2));
    CHECK(line.intercept == doctest::Approx(1));
}
