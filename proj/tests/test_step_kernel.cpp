// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "curldrift/rng.hpp"
#include "curldrift/spectral_field.hpp"
#include "curldrift/statistics.hpp"
#include "curldrift/step_kernel.hpp"

using namespace curldrift;

namespace
{
template<class Scalar>
FieldTracker<Scalar> make_tracker(int n, double dt, std::uint64_t seed)
{
    auto const m = sample_modes(n, {}, DynamicsSpec::power(1), seed);
    FieldTracker<Scalar> ft;
    ft.resize(n);
    NormalSampler<Xoshiro256pp> normal{Xoshiro256pp(seed + 1)};
    for (int j = 0; j < n; ++j)
    {
        double const rate = m.rate[j];
        ft.px[j] = Scalar(m.px[j]);
        ft.py[j] = Scalar(m.py[j]);
        ft.ex[j] = Scalar(m.ex[j]);
        ft.ey[j] = Scalar(m.ey[j]);
        ft.decay[j] = Scalar(std::expm1(-rate * dt));
        ft.sigma[j] = Scalar(std::sqrt(-m.variance[j] * std::expm1(-2 * rate * dt)));
        ft.a[j] = Scalar(std::sqrt(m.variance[j]) * normal());
        ft.b[j] = Scalar(std::sqrt(m.variance[j]) * normal());
    }
    ft.seed(seed + 2);
    resync_phases(ft, 0.0, 0.0);
    return ft;
}

//! Double precision replay of one fused step from the same uniforms
template<class Scalar>
std::array<double, 2> reference_step(FieldTracker<Scalar> const& before,
                                     FieldTracker<Scalar> const& uniforms, double x1, double x2)
{
    double w1 = 0;
    double w2 = 0;
    for (int j = 0; j < before.n_modes; ++j)
    {
        double const u1 = uniforms.u1[j];
        double const u2 = uniforms.u2[j];
        double const rad = std::sqrt(-2 * std::log(u1));
        double const theta = 2 * std::numbers::pi * u2 - std::numbers::pi / 4;
        double const g1 = rad * std::cos(theta);
        double const g2 = rad * std::sin(theta);
        double const a = double(before.a[j]) * (1 + double(before.decay[j]))
                         + double(before.sigma[j]) * g1;
        double const b = double(before.b[j]) * (1 + double(before.decay[j]))
                         + double(before.sigma[j]) * g2;
        double const ph = double(before.px[j]) * x1 + double(before.py[j]) * x2;
        double const amp = a * std::cos(ph) + b * std::sin(ph);
        w1 += double(before.ex[j]) * amp;
        w2 += double(before.ey[j]) * amp;
    }
    return {w1, w2};
}

template<class Scalar>
void check_against_reference(double tol)
{
    int const n = 300;
    auto ft = make_tracker<Scalar>(n, 0.01, 7);
    double x1 = 0;
    double x2 = 0;
    Xoshiro256pp gen(3);
    double scale = std::sqrt(mollifier_mass() * inv_two_pi_sq);
    for (int step = 0; step < 50; ++step)
    {
        double const dx1 = 0.3 * (uniform01(gen) - 0.5);
        double const dx2 = 0.3 * (uniform01(gen) - 0.5);
        x1 += dx1;
        x2 += dx2;
        auto const before = ft;
        auto uniforms = ft;
        fill_uniforms(uniforms);
        auto const expected = reference_step(before, uniforms, x1, x2);
        auto const got = fused_step(ft, dx1, dx2, true);
        CHECK(std::abs(got[0] - expected[0]) <= tol * scale);
        CHECK(std::abs(got[1] - expected[1]) <= tol * scale);
        CHECK(ft.lanes == uniforms.lanes);
    }
}
}  // namespace

TEST_CASE("padding")
{
    FieldTracker<float> ft;
    ft.resize(17);
    CHECK(ft.n_modes == 17);
    CHECK(ft.n_padded == 32);
    CHECK(ft.a.size() == 32u);
    ft.resize(0);
    CHECK(ft.n_padded == 0);
}

TEST_CASE("double step matches the exact transition")
{
    check_against_reference<double>(1e-9);
}

TEST_CASE("single step matches the exact transition")
{
    check_against_reference<float>(2e-4);
}

TEST_CASE("resync restores exact phases")
{
    auto ft = make_tracker<double>(64, 0.01, 9);
    double x1 = 0;
    double x2 = 0;
    for (int i = 0; i < 200; ++i)
    {
        fused_step(ft, 0.05, -0.03, true);
        x1 += 0.05;
        x2 -= 0.03;
    }
    auto exact = ft;
    resync_phases(exact, x1, x2);
    double worst = 0;
    for (int j = 0; j < ft.n_modes; ++j)
    {
        worst = std::max(worst, std::abs(ft.c[j] - exact.c[j]));
        worst = std::max(worst, std::abs(ft.s[j] - exact.s[j]));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("kernel normals")
{
    Xoshiro256pp gen(12);
    RunningStat m1, m2, prod;
    for (int i = 0; i < 200000; ++i)
    {
        double const u1 = (std::floor(uniform01(gen) * 16777216.0) + 0.5) / 16777216.0;
        double const u2 = std::floor(uniform01(gen) * 16777216.0) / 16777216.0;
        auto const g = kernel_normal_pair<float>(float(u1), float(u2));
        auto const gd = kernel_normal_pair<double>(u1, u2);
        CHECK(std::abs(g[0] - gd[0]) <= 1e-5 * (1 + std::abs(gd[0])));
        m1.add(g[0] * g[0]);
        m2.add(g[1] * g[1]);
        prod.add(g[0] * g[1]);
    }
    CHECK(std::abs(m1.mean - 1) <= 3 * m1.stderr_of_mean());
    CHECK(std::abs(m2.mean - 1) <= 3 * m2.stderr_of_mean());
    CHECK(std::abs(prod.mean) <= 3 * prod.stderr_of_mean());
}

TEST_CASE("vectorized sincos")
{
    std::vector<double> x, s(2001), c(2001);
    for (int i = -1000; i <= 1000; ++i)
        x.push_back(i * 97.13);
    sincos_reduced(x.data(), s.data(), c.data(), int(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        CHECK(s[i] == doctest::Approx(std::sin(x[i])).epsilon(1e-12).scale(1));
        CHECK(c[i] == doctest::Approx(std::cos(x[i])).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("tracked field matches direct evaluation")
{
    auto ft = make_tracker<double>(100, 0.01, 4);
    resync_phases(ft, 1.5, -2.0);
    auto const w = tracked_field(ft);
    double w1 = 0;
    double w2 = 0;
    for (int j = 0; j < ft.n_modes; ++j)
    {
        double const ph = ft.px[j] * 1.5 - ft.py[j] * 2.0;
        double const amp = ft.a[j] * std::cos(ph) + ft.b[j] * std::sin(ph);
        w1 += ft.ex[j] * amp;
        w2 += ft.ey[j] * amp;
    }
    CHECK(w[0] == doctest::Approx(w1).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(w2).epsilon(1e-12));
}
