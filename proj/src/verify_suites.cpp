// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>

#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/rng.hpp"
#include "curldrift/verify.hpp"

namespace curldrift
{
namespace
{
constexpr double x_min = 1e-8;
constexpr double x_max = 10.0;
constexpr double z_min = 1.0;
constexpr double z_max = 100.0;

class Timer
{
  public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double log_uniform(Xoshiro256pp& gen, double lo, double hi)
{
    return std::exp(std::log(lo) + uniform01(gen) * std::log(hi / lo));
}

int uniform_level(Xoshiro256pp& gen, int max_level)
{
    return std::min(max_level, static_cast<int>(uniform01(gen) * (max_level + 1)));
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    out.back() = hi;
    return out;
}

void record(SuiteSummary& s, SuiteCase const& c, SuiteSink const& sink)
{
    ++s.cases;
    if (!c.pass)
        ++s.failures;
    if (std::isfinite(c.error))
        s.max_error = std::max(s.max_error, c.error);
    else
        s.max_error = c.error;
    if (sink)
        sink(c);
}

}  // namespace

SuiteSummary identity_suite(int n_cases, int max_level, double tolerance, std::uint64_t seed,
                            SuiteSink const& sink)
{
    Timer timer;
    Xoshiro256pp gen(derive_key(seed, 0, Stream::verify_cases));
    SuiteSummary out;
    for (int i = 0; i < n_cases; ++i)
    {
        double a = log_uniform(gen, x_min, x_max);
        double b = log_uniform(gen, x_min, x_max);
        if (a > b)
            std::swap(a, b);
        double const z = z_min + (z_max - z_min) * uniform01(gen);
        int const k = uniform_level(gen, max_level);
        auto const r = check_log_integral_identity(a, b, z, k);
        record(out, {"identity", i, a, b, z, k, r.lhs, r.rhs, r.abs_err, r.abs_err <= tolerance},
               sink);
    }
    out.seconds = timer.seconds();
    return out;
}

SuiteSummary derivative_suite(int n_cases, int max_level, double tolerance, double step,
                              std::uint64_t seed, SuiteSink const& sink)
{
    Timer timer;
    Xoshiro256pp gen(derive_key(seed, 1, Stream::verify_cases));
    SuiteSummary out;
    for (int i = 0; i < n_cases; ++i)
    {
        double const x = log_uniform(gen, x_min, x_max);
        double const z = z_min + (z_max - z_min) * uniform01(gen);
        int const k = uniform_level(gen, max_level);
        auto const r = check_truncation_derivatives(x, z, k, step);
        bool const pass = r.max_rel_err <= tolerance && r.increasing_in_z;
        record(out, {"derivative", i, x, 0.0, z, k, r.rel_err_lb, r.rel_err_ub, r.max_rel_err, pass},
               sink);
    }
    out.seconds = timer.seconds();
    return out;
}

SuiteSummary chain_suite(int points, int max_level, double slack, SuiteSink const& sink)
{
    Timer timer;
    auto const xs = log_grid(x_min, x_max, points);
    auto const zs = log_grid(z_min, z_max, points);
    SuiteSummary out;
    int index = 0;
    auto inequality = [&](char const* name, double x, double y, double z, int k,
                          InequalityCheck const& r) {
        double const excess = std::max(0.0, r.lhs - r.rhs);
        record(out, {name, index++, x, y, z, k, r.lhs, r.rhs, excess, r.holds}, sink);
    };
    for (int k = 0; k <= max_level; ++k)
    {
        for (double z : zs)
        {
            for (std::size_t i = 0; i < xs.size(); ++i)
            {
                double const x = xs[i];
                double const lb = truncation_lb(k, x, z);
                double const ub = truncation_ub(k, x, z);
                bool const chain = check_truncation_chain(x, z, k, slack);
                record(out, {"chain", index++, x, 0.0, z, k, lb, ub, 0.0, chain}, sink);
                bool const decay = check_decay_condition(x, z, k);
                record(out, {"decay", index++, x, 0.0, z, k, lb, ub, 0.0, decay}, sink);

                if (i + 1 < xs.size())
                {
                    inequality("inequality", x, xs[i + 1], z, k,
                               check_log_integral_inequality(x, xs[i + 1], z, k, slack));
                    inequality("inequality", x, x_max, z, k,
                               check_log_integral_inequality(x, x_max, z, k, slack));
                }
                if (x < 1)
                {
                    double const lambda = 0.5 * x;
                    double const pmag = std::sqrt(0.5 * x);
                    inequality("weight_swap", lambda, pmag, z, k,
                               check_weight_swap(lambda, pmag, z, k, slack));
                }
            }
        }
    }
    out.seconds = timer.seconds();
    return out;
}

}  // namespace curldrift
