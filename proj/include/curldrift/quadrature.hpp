// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "curldrift/error.hpp"

namespace curldrift
{

struct QuadOptions
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
    bool throw_on_failure = true;
};

struct QuadResult
{
    double value = 0;
    double abs_error = 0;
    int evaluations = 0;
    bool converged = true;
};

namespace detail
{
inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk15_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes
inline constexpr std::array<double, 4> g7_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double a;
    double b;
    double value;
    double error;
    bool operator<(Segment const& other) const { return error < other.error; }
};

template<class F>
Segment gk15(F& f, double a, double b)
{
    double const center = 0.5 * (a + b);
    double const half = 0.5 * (b - a);
    double const fc = f(center);
    double kronrod = fc * gk15_weights[7];
    double gauss = fc * g7_weights[3];
    for (int i = 0; i < 7; ++i)
    {
        double const dx = half * gk15_nodes[i];
        double const fsum = f(center - dx) + f(center + dx);
        kronrod += gk15_weights[i] * fsum;
        if (i % 2 == 1)
            gauss += g7_weights[i / 2] * fsum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Globally adaptive Gauss-Kronrod (7/15) integration.
 *
 * The interval with the largest error estimate is bisected until the summed
 * error estimate drops below max(abs_tol, rel_tol * |value|). Breakpoints
 * split the initial partition, e.g. at a kink or a sharp peak.
 */
template<class F>
QuadResult integrate(F&& f, std::span<double const> points, QuadOptions const& opt = {})
{
    QuadResult result;
    if (points.size() < 2 || points.front() == points.back())
        return result;

    std::priority_queue<detail::Segment> queue;
    double total = 0;
    double error = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
    {
        if (points[i] == points[i + 1])
            continue;
        auto seg = detail::gk15(f, points[i], points[i + 1]);
        result.evaluations += 15;
        total += seg.value;
        error += seg.error;
        queue.push(seg);
    }

    int intervals = static_cast<int>(queue.size());
    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    while (error > target() && intervals < opt.max_intervals)
    {
        auto worst = queue.top();
        double const mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            break;
        queue.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        result.evaluations += 30;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++intervals;
    }

    // Re-sum to shed the cancellation accumulated by incremental updates
    total = 0;
    error = 0;
    while (!queue.empty())
    {
        total += queue.top().value;
        error += queue.top().error;
        queue.pop();
    }
    result.value = total;
    result.abs_error = error;
    result.converged = !(error > target());
    if (!result.converged && opt.throw_on_failure)
        throw QuadratureError("adaptive quadrature did not converge", total, error);
    return result;
}

template<class F>
QuadResult integrate(F&& f, double a, double b, QuadOptions const& opt = {})
{
    std::array<double, 2> const points{a, b};
    return integrate(f, std::span<double const>(points), opt);
}

//! Trapezoid rule on n equispaced nodes over one period [0, 2 pi).
template<class F>
double periodic_trapezoid(F&& f, int n)
{
    double const h = 2 * std::numbers::pi / n;
    double sum = 0;
    for (int i = 0; i < n; ++i)
        sum += f(i * h);
    return sum * h;
}

}  // namespace curldrift
