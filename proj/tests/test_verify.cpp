// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "curldrift/error.hpp"
#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/verify.hpp"

using namespace curldrift;

// tests/oracles/bounds_oracle.py
namespace oracle
{
constexpr double identity_half_one = 0.21468727723597073741;
constexpr double identity_random = 3.0173329721023975858;
}  // namespace oracle

TEST_CASE("log integral identity")
{
    auto const r = check_log_integral_identity(0.5, 1, 1, 0);
    CHECK(r.rhs == doctest::Approx(oracle::identity_half_one).epsilon(1e-14));
    CHECK(std::abs(r.lhs - oracle::identity_half_one) <= 1e-8);
    CHECK(r.rhs == doctest::Approx(std::log((1 + std::log(3.0)) / (1 + std::log(2.0)))));

    auto const q = check_log_integral_identity(1e-5, 0.3, 5, 4);
    CHECK(std::abs(q.lhs - oracle::identity_random) <= 1e-10);
    CHECK(q.abs_err <= 1e-10);

    auto const same = check_log_integral_identity(0.2, 0.2, 3, 2);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    CHECK_THROWS_AS(check_log_integral_identity(0.5, 0.2, 1, 0), ConfigError);
    CHECK_THROWS_AS(check_log_integral_identity(0.1, 0.2, 0.5, 0), ConfigError);
}

TEST_CASE("log integral inequality")
{
    auto const same = check_log_integral_inequality(0.2, 0.2, 3, 2);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    CHECK(same.holds);

    // k = 0: L(a) - L(b) <= 2 (L(a) - L(b))
    double const a = 1e-3;
    double const b = 2.0;
    double const z = 1.5;
    auto const r = check_log_integral_inequality(a, b, z, 0);
    double const la = truncation_log(a, z);
    double const lb = truncation_log(b, z);
    CHECK(r.lhs == doctest::Approx(la - lb).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(2 * (la - lb)).epsilon(1e-14));
    CHECK(r.holds);
}

TEST_CASE("truncation derivatives")
{
    auto const d = truncation_derivatives(3, 1.0, 0.0);
    CHECK(d.log_value == doctest::Approx(-0.5).epsilon(1e-15));
    auto const c = check_truncation_derivatives(1.0, 0.0, 0, 1e-6);
    CHECK(c.rel_err_log <= 1e-6);
    for (double x : {1e-8, 1e-3, 0.5, 9.0})
    {
        for (int k : {0, 1, 5, 10})
        {
            auto const r = check_truncation_derivatives(x, 7.0, k);
            CHECK(r.max_rel_err <= 1e-6);
            CHECK(r.increasing_in_z);
        }
    }
}

TEST_CASE("chain and decay")
{
    for (double x : {1e-8, 1e-2, 1.0, 10.0})
    {
        for (int k = 0; k <= 10; ++k)
        {
            CHECK(check_truncation_chain(x, 1.0, k));
            CHECK(check_truncation_chain(x, 100.0, k));
            CHECK(check_decay_condition(x, 2.0, k));
        }
    }
}

TEST_CASE("weight swap")
{
    auto const r = check_weight_swap(1e-4, 0.1, 4, 2);
    CHECK(r.holds);
    CHECK(r.lhs >= 0);
    CHECK_THROWS_AS(check_weight_swap(0.5, 0.9, 4, 2), ConfigError);
}

TEST_CASE("suites")
{
    int visited = 0;
    auto const id = identity_suite(100, 8, 1e-8, 1, [&](SuiteCase const& c) {
        ++visited;
        CHECK(c.k <= 8);
        CHECK(c.x <= c.y);
    });
    CHECK(visited == 100);
    CHECK(id.passed());
    CHECK(id.max_error <= 1e-8);

    auto const again = identity_suite(100, 8, 1e-8, 1);
    CHECK(again.max_error == id.max_error);

    auto const der = derivative_suite(1000, 10, 1e-6, 1e-6, 1);
    CHECK(der.passed());

    auto const chain = chain_suite(12, 10, 1e-12);
    CHECK(chain.passed());
    CHECK(chain.cases > 0);
}

TEST_CASE("scan integrals at single points")
{
    double const ref = diagonal_reference(0.01, 8, 1);
    CHECK(ref > 0);
    CHECK(diagonal_reference(1.5, 8, 1) == 0.0);
    double const lhs = diagonal_integral(0.01, 0.3, 8, 1, 1.0);
    CHECK(std::isfinite(lhs));
    CHECK(lhs > 0);
    double const off = offdiagonal_integral(0.01, 0.3, Eigen::Vector2d(0.15, 0), 8, 1);
    CHECK(std::isfinite(off));
    CHECK(off > 0);
}

TEST_CASE("small scans are refinement stable")
{
    ScanGrid g;
    g.lambdas = {1e-2};
    g.offsets = {0.5};
    g.pmags = {0.1, 0.5};
    g.zs = {8};
    g.levels = {1};
    g.exponents = {1.0};
    g.pprimes = {Eigen::Vector2d(0, 0)};
    auto const d = scan_diagonal_constant(g);
    auto const o = scan_offdiagonal_constant(g);
    CHECK(d.points.size() == 2);
    CHECK(std::isfinite(d.max_ratio));
    CHECK(std::isfinite(o.max_ratio));
    CHECK(d.stable());
    CHECK(o.stable());
}

TEST_CASE("covariance oracle on a small ensemble")
{
    CovarianceCheckOptions opt;
    opt.n_modes = 256;
    opt.n_realizations = 2000;
    opt.dyn = DynamicsSpec::power(0);
    opt.seed = 3;
    auto const r = covariance_check(opt);
    CHECK(r.entries.size() == 16);
    CHECK(r.stationarity.size() == 4);
    CHECK(r.passed());
    for (auto const& e : r.entries)
    {
        CHECK(e.std_error > 0);
        if (e.time == 0 && e.x.norm() == 0 && e.row != e.col)
            CHECK(std::abs(e.monte_carlo) <= 3 * e.std_error);
    }
}
