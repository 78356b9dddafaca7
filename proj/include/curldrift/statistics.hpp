// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace curldrift
{

//! Welford running mean and variance
struct RunningStat
{
    std::int64_t count = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x)
    {
        ++count;
        double const delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    double variance() const
    {
        return count > 1 ? m2 / static_cast<double>(count - 1)
                         : std::numeric_limits<double>::quiet_NaN();
    }
    double stddev() const { return std::sqrt(variance()); }
    double stderr_of_mean() const { return std::sqrt(variance() / static_cast<double>(count)); }
};

/*!
 * Running covariance of a pair.
 *
 * The standard error is that of the mean of the raw products u v, which
 * is the leading term when both means are statistically zero.
 */
struct RunningCov
{
    std::int64_t count = 0;
    double mean_u = 0;
    double mean_v = 0;
    double comoment = 0;
    RunningStat product;

    void add(double u, double v)
    {
        ++count;
        double const n = static_cast<double>(count);
        double const du = u - mean_u;
        mean_u += du / n;
        mean_v += (v - mean_v) / n;
        comoment += du * (v - mean_v);
        product.add(u * v);
    }

    double covariance() const
    {
        return count > 1 ? comoment / static_cast<double>(count - 1)
                         : std::numeric_limits<double>::quiet_NaN();
    }
    double stderr_of_cov() const { return product.stderr_of_mean(); }
};

}  // namespace curldrift
