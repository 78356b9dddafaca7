// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/particle_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <thread>

#include "curldrift/error.hpp"
#include "curldrift/quadrature.hpp"
#include "curldrift/rng.hpp"
#include "curldrift/spectral_field.hpp"
#include "curldrift/step_kernel.hpp"

namespace curldrift
{
namespace
{
constexpr double checkpoint_tol = 1e-9;

struct RunContext
{
    SimParams const& params;
    double mass;
    std::vector<std::int64_t> checkpoint_steps;
    std::vector<std::int64_t> laplace_steps;
    std::shared_ptr<ModeSet<double> const> shared_modes;
};

double brownian_transform(double lambda, double horizon)
{
    double const lt = lambda * horizon;
    return 4 / (lambda * lambda) * (-std::expm1(-lt) - lt * std::exp(-lt));
}

//! Tail of the transform beyond T, extrapolating |X|^2 <= C t sqrt(log t)
double laplace_tail_bound(double lambda, double horizon, double msd_at_horizon)
{
    auto envelope = [](double t) { return t * std::sqrt(std::max(std::log(t), 1.0)); };
    double const c = msd_at_horizon / envelope(horizon);
    auto f = [&](double t) { return std::exp(-lambda * (t - horizon)) * envelope(t); };
    std::vector<double> pts{horizon};
    for (double k : {1.0, 4.0, 16.0, 64.0})
        pts.push_back(horizon + k / lambda);
    double const tail = integrate(f, std::span<double const>(pts), {0.0, 1e-10}).value;
    return c * std::exp(-lambda * horizon) * tail;
}

template<class Scalar>
ReplicaRecord run_replica(RunContext const& ctx, int replica_id)
{
    auto const& p = ctx.params;
    ReplicaRecord rec;
    rec.replica_id = replica_id;
    rec.points.resize(ctx.checkpoint_steps.size());
    rec.laplace.assign(p.laplace_lambdas.size(), 0.0);
    rec.laplace_cv.assign(p.laplace_lambdas.size(), 0.0);

    auto const id = static_cast<std::uint64_t>(replica_id);
    FieldTracker<Scalar> ft;
    ft.resize(p.n_modes);
    if (p.n_modes > 0)
    {
        std::shared_ptr<ModeSet<double> const> modes = ctx.shared_modes;
        if (!modes)
        {
            SamplingOptions opt;
            opt.infrared_cutoff = p.infrared_cutoff;
            modes = std::make_shared<ModeSet<double> const>(
                sample_modes<double>(p.n_modes, p.kernel, p.dyn,
                                     derive_key(p.master_seed, id, Stream::wavevectors), opt,
                                     ctx.mass));
        }
        auto env = init_stationary<double>(modes, derive_key(p.master_seed, id, Stream::amplitudes));
        for (int j = 0; j < p.n_modes; ++j)
        {
            ft.px[j] = static_cast<Scalar>(modes->px[j]);
            ft.py[j] = static_cast<Scalar>(modes->py[j]);
            ft.ex[j] = static_cast<Scalar>(modes->ex[j]);
            ft.ey[j] = static_cast<Scalar>(modes->ey[j]);
            ft.a[j] = static_cast<Scalar>(env.a[j]);
            ft.b[j] = static_cast<Scalar>(env.b[j]);
            if (!p.freeze_environment)
            {
                double const rate = modes->rate[j];
                ft.decay[j] = static_cast<Scalar>(std::expm1(-rate * p.dt));
                ft.sigma[j] = static_cast<Scalar>(
                    std::sqrt(-modes->variance[j] * std::expm1(-2 * rate * p.dt)));
            }
        }
    }
    ft.seed(derive_key(p.master_seed, id, Stream::environment_noise));
    NormalSampler<Xoshiro256pp> noise{Xoshiro256pp(derive_key(p.master_seed, id, Stream::particle_noise))};

    resync_phases(ft, 0.0, 0.0);
    auto omega = tracked_field(ft);

    double const dt = p.dt;
    double const sqdt = std::sqrt(dt);
    double const sq2 = std::numbers::sqrt2;
    double const max_step = max_rotation_step<Scalar>();
    std::int64_t const n_steps = p.n_steps();

    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Vector2d bm = Eigen::Vector2d::Zero();
    Eigen::Vector2d drift = Eigen::Vector2d::Zero();

    std::size_t const n_lambda = p.laplace_lambdas.size();
    std::vector<double> weight(n_lambda, 1.0);
    std::vector<double> step_decay(n_lambda);
    for (std::size_t i = 0; i < n_lambda; ++i)
        step_decay[i] = std::exp(-p.laplace_lambdas[i] * dt);
    double prev_f = 0;
    double prev_g = 0;

    std::size_t next_cp = 0;
    for (std::int64_t n = 0; n < n_steps; ++n)
    {
        double const g1 = noise();
        double const g2 = noise();
        double const db1 = sqdt * g1;
        double const db2 = sqdt * g2;
        double const dx1 = omega[0] * dt + sq2 * db1;
        double const dx2 = omega[1] * dt + sq2 * db2;
        drift(0) += omega[0] * dt;
        drift(1) += omega[1] * dt;
        bm(0) += db1;
        bm(1) += db2;
        x(0) += dx1;
        x(1) += dx2;

        bool const resync = (n + 1) % p.resync_period == 0 || std::hypot(dx1, dx2) > max_step;
        if (resync)
        {
            resync_phases(ft, x(0), x(1));
            omega = fused_step(ft, 0.0, 0.0, false);
        }
        else
        {
            omega = fused_step(ft, dx1, dx2, true);
        }

        if (!std::isfinite(omega[0]) || !std::isfinite(omega[1]) || !x.allFinite())
        {
            rec.valid = false;
            return rec;
        }

        double const f = x.squaredNorm();
        double const g = f - 2 * bm.squaredNorm();
        for (std::size_t i = 0; i < n_lambda; ++i)
        {
            if (n + 1 > ctx.laplace_steps[i])
                continue;
            double const w_next = weight[i] * step_decay[i];
            rec.laplace[i] += 0.5 * dt * (weight[i] * prev_f + w_next * f);
            rec.laplace_cv[i] += 0.5 * dt * (weight[i] * prev_g + w_next * g);
            weight[i] = w_next;
        }
        prev_f = f;
        prev_g = g;

        while (next_cp < ctx.checkpoint_steps.size() && ctx.checkpoint_steps[next_cp] == n + 1)
        {
            rec.points[next_cp] = {x, bm, drift};
            ++next_cp;
        }
    }

    if (p.trend_window)
    {
        auto [lo, hi] = *p.trend_window;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int count = 0;
        for (std::size_t k = 0; k < rec.points.size(); ++k)
        {
            double const t = p.checkpoint_times[k];
            if (t < lo * (1 - checkpoint_tol) || t > hi * (1 + checkpoint_tol))
                continue;
            double const xv = std::log(t);
            double const yv = rec.points[k].x.squaredNorm() / t;
            sx += xv;
            sy += yv;
            sxx += xv * xv;
            sxy += xv * yv;
            ++count;
        }
        double const denom = count * sxx - sx * sx;
        rec.trend_slope = (count >= 2 && denom > 0) ? (count * sxy - sx * sy) / denom : 0.0;
    }
    return rec;
}

RunContext make_context(SimParams const& params)
{
    params.validate();
    RunContext ctx{params, params.n_modes > 0 ? mollifier_mass(params.kernel) : 0.0,
                   params.checkpoint_steps(), {}, nullptr};
    for (std::size_t i = 0; i < params.laplace_lambdas.size(); ++i)
    {
        double const h = params.laplace_horizons.empty() ? params.horizon : params.laplace_horizons[i];
        ctx.laplace_steps.push_back(static_cast<std::int64_t>(std::llround(h / params.dt)));
    }
    if (!params.fresh_wavevectors && params.n_modes > 0)
    {
        SamplingOptions opt;
        opt.infrared_cutoff = params.infrared_cutoff;
        ctx.shared_modes = std::make_shared<ModeSet<double> const>(sample_modes<double>(
            params.n_modes, params.kernel, params.dyn,
            derive_key(params.master_seed, 0, Stream::wavevectors), opt, ctx.mass));
    }
    return ctx;
}

ReplicaRecord dispatch(RunContext const& ctx, int replica_id)
{
    if (ctx.params.precision == Precision::double_)
        return run_replica<double>(ctx, replica_id);
    return run_replica<float>(ctx, replica_id);
}

}  // namespace

//---------------------------------------------------------------------------//

void SimParams::validate() const
{
    if (!(dt > 0) || !std::isfinite(dt))
        throw ConfigError("dt must be positive", "dt");
    if (!(horizon > 0) || !std::isfinite(horizon))
        throw ConfigError("horizon must be positive", "horizon");
    if (checkpoint_times.empty())
        throw ConfigError("checkpoint list must not be empty", "checkpoints");
    if (n_replicas < 2)
        throw ConfigError("need at least two replicas", "n_replicas");
    if (n_modes < 0)
        throw ConfigError("n_modes must be nonnegative", "n_modes");
    if (resync_period < 1)
        throw ConfigError("resync_period must be at least 1", "resync_period");
    if (!(infrared_cutoff >= 0 && infrared_cutoff < kernel.cutoff_radius))
        throw ConfigError("infrared_cutoff must lie in [0, cutoff radius)", "infrared_cutoff");
    if (!(max_invalid_fraction >= 0 && max_invalid_fraction <= 1))
        throw ConfigError("max_invalid_fraction must lie in [0, 1]", "max_invalid_fraction");
    dyn.validate();

    double prev = 0;
    for (double t : checkpoint_times)
    {
        if (!(t > prev))
            throw ConfigError("checkpoints must be positive and strictly increasing", "checkpoints");
        if (t > horizon * (1 + checkpoint_tol))
            throw ConfigError("checkpoint " + std::to_string(t) + " exceeds the horizon",
                              "checkpoints");
        double const steps = t / dt;
        if (std::abs(steps - std::round(steps)) > checkpoint_tol * std::max(1.0, steps))
            throw ConfigError("checkpoint " + std::to_string(t) + " is not a multiple of dt",
                              "checkpoints");
        prev = t;
    }
    auto steps = checkpoint_steps();
    for (std::size_t i = 1; i < steps.size(); ++i)
        if (steps[i] <= steps[i - 1])
            throw ConfigError("checkpoint spacing is below dt", "checkpoints");

    for (double l : laplace_lambdas)
        if (!(l > 0) || !std::isfinite(l))
            throw ConfigError("laplace lambdas must be positive", "lambdas");
    if (!laplace_horizons.empty())
    {
        if (laplace_horizons.size() != laplace_lambdas.size())
            throw ConfigError("one laplace horizon per lambda is required", "laplace_horizons");
        for (double h : laplace_horizons)
            if (!(h > 0) || h > horizon * (1 + checkpoint_tol))
                throw ConfigError("laplace horizons must lie in (0, horizon]", "laplace_horizons");
    }
    if (trend_window && !(trend_window->first > 0 && trend_window->second > trend_window->first))
        throw ConfigError("trend window needs 0 < t_lo < t_hi", "trend_window");
}

std::int64_t SimParams::n_steps() const
{
    return static_cast<std::int64_t>(std::ceil(horizon / dt - checkpoint_tol));
}

std::vector<std::int64_t> SimParams::checkpoint_steps() const
{
    std::vector<std::int64_t> out;
    out.reserve(checkpoint_times.size());
    for (double t : checkpoint_times)
        out.push_back(static_cast<std::int64_t>(std::llround(t / dt)));
    return out;
}

ReplicaRecord simulate_replica(SimParams const& params, int replica_id)
{
    auto ctx = make_context(params);
    return dispatch(ctx, replica_id);
}

//---------------------------------------------------------------------------//

EnsembleAccumulator::EnsembleAccumulator(SimParams const& params)
    : times_(params.checkpoint_times)
    , lambdas_(params.laplace_lambdas)
    , has_trend_(params.trend_window.has_value())
    , points_(params.checkpoint_times.size())
    , laplace_(params.laplace_lambdas.size())
    , laplace_cv_(params.laplace_lambdas.size())
{
    for (std::size_t i = 0; i < lambdas_.size(); ++i)
        horizons_.push_back(params.laplace_horizons.empty() ? params.horizon
                                                            : params.laplace_horizons[i]);
    if (has_trend_)
    {
        window_ = *params.trend_window;
        for (double t : times_)
            if (t >= window_.first * (1 - checkpoint_tol) && t <= window_.second * (1 + checkpoint_tol))
                ++trend_points_;
    }
}

void EnsembleAccumulator::add(ReplicaRecord const& rec)
{
    ++total_;
    if (!rec.valid)
    {
        ++invalid_;
        return;
    }
    for (std::size_t k = 0; k < points_.size(); ++k)
    {
        auto const& cp = rec.points[k];
        auto& ps = points_[k];
        double const x1 = cp.x(0);
        double const x2 = cp.x(1);
        ps.msd.add(x1 * x1 + x2 * x2);
        ps.x1.add(x1);
        ps.x2.add(x2);
        ps.iso.add(x1 * x1 - x2 * x2);
        ps.drift1.add(cp.drift(0));
        ps.drift_sq.add(cp.drift.squaredNorm());
        ps.b_dot_drift.add(cp.b.dot(cp.drift));
        ps.cross.add(cp.b(0), cp.drift(0));
    }
    for (std::size_t i = 0; i < laplace_.size(); ++i)
    {
        laplace_[i].add(rec.laplace[i]);
        laplace_cv_[i].add(rec.laplace_cv[i]);
    }
    if (has_trend_)
        trend_.add(rec.trend_slope);
}

EnsembleResult EnsembleAccumulator::finalize() const
{
    std::int64_t const valid = total_ - invalid_;
    if (valid < 2)
        throw ReplicaFailure("fewer than two valid replicas", static_cast<std::size_t>(invalid_),
                             static_cast<std::size_t>(total_));

    EnsembleResult out;
    auto& c = out.curve;
    c.times = times_;
    c.n_valid = valid;
    for (std::size_t k = 0; k < points_.size(); ++k)
    {
        auto const& ps = points_[k];
        double const t = times_[k];
        c.msd_mean.push_back(ps.msd.mean);
        c.msd_stderr.push_back(ps.msd.stderr_of_mean());
        c.d_of_t.push_back(ps.msd.mean / t);
        c.d_stderr.push_back(ps.msd.stderr_of_mean() / t);
        c.mean_x1.push_back(ps.x1.mean);
        c.mean_x1_stderr.push_back(ps.x1.stderr_of_mean());
        c.mean_x2.push_back(ps.x2.mean);
        c.mean_x2_stderr.push_back(ps.x2.stderr_of_mean());
        c.isotropy.push_back(ps.iso.mean);
        c.isotropy_stderr.push_back(ps.iso.stderr_of_mean());
        c.drift_mean.push_back(ps.drift1.mean);
        c.drift_var.push_back(ps.drift1.variance());
        c.cross.push_back(ps.cross.covariance());
        c.cross_stderr.push_back(ps.cross.stderr_of_cov());
        c.decomposition.push_back(4 * t + ps.drift_sq.mean
                                  + 2 * std::numbers::sqrt2 * ps.b_dot_drift.mean);
    }

    auto& l = out.laplace;
    for (std::size_t i = 0; i < lambdas_.size(); ++i)
    {
        double const lambda = lambdas_[i];
        double const h = horizons_[i];
        l.lambdas.push_back(lambda);
        l.horizons.push_back(h);
        l.d_total.push_back(laplace_[i].mean);
        l.d_total_stderr.push_back(laplace_[i].stderr_of_mean());
        l.d_v.push_back(laplace_[i].mean - brownian_transform(lambda, h));
        l.d_v_stderr.push_back(laplace_[i].stderr_of_mean());
        // msd at the last checkpoint inside the window
        double tail = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = times_.size(); k-- > 0;)
        {
            if (times_[k] <= h * (1 + checkpoint_tol))
            {
                tail = laplace_tail_bound(lambda, times_[k], points_[k].msd.mean);
                break;
            }
        }
        l.tail_bound.push_back(tail);
        out.diagnostics.d_v_control.push_back(laplace_cv_[i].mean);
        out.diagnostics.d_v_control_stderr.push_back(laplace_cv_[i].stderr_of_mean());
    }

    if (has_trend_)
    {
        TrendEstimate tr;
        tr.slope = trend_.mean;
        tr.std_error = trend_.stderr_of_mean();
        tr.t_lo = window_.first;
        tr.t_hi = window_.second;
        tr.n_points = trend_points_;
        out.trend = tr;
    }
    out.diagnostics.n_total = total_;
    out.diagnostics.n_invalid = invalid_;
    return out;
}

MsdCurve estimate_msd(std::span<ReplicaRecord const> ensemble, SimParams const& params)
{
    EnsembleAccumulator acc(params);
    for (auto const& rec : ensemble)
        acc.add(rec);
    return acc.finalize().curve;
}

LaplaceEstimate estimate_laplace(MsdCurve const& curve, std::span<double const> lambdas)
{
    if (curve.times.empty())
        throw ConfigError("laplace estimate needs a non-empty curve");
    double const horizon = curve.times.back();
    double lambda_min = std::numeric_limits<double>::infinity();
    for (double l : lambdas)
    {
        if (!(l > 0))
            throw ConfigError("laplace lambdas must be positive", "lambdas");
        lambda_min = std::min(lambda_min, l);
    }
    if (!lambdas.empty() && lambda_min * horizon < 8)
        throw ConfigError("laplace estimate needs horizon >= 8 / lambda_min = "
                              + std::to_string(8 / lambda_min) + ", curve ends at "
                              + std::to_string(horizon),
                          "horizon");

    std::vector<double> t{0.0};
    std::vector<double> m{0.0};
    std::vector<double> se{0.0};
    t.insert(t.end(), curve.times.begin(), curve.times.end());
    m.insert(m.end(), curve.msd_mean.begin(), curve.msd_mean.end());
    se.insert(se.end(), curve.msd_stderr.begin(), curve.msd_stderr.end());

    LaplaceEstimate out;
    for (double lambda : lambdas)
    {
        double total = 0;
        double total_se = 0;
        double dv = 0;
        for (std::size_t i = 0; i + 1 < t.size(); ++i)
        {
            double const h = 0.5 * (t[i + 1] - t[i]);
            double const w0 = std::exp(-lambda * t[i]);
            double const w1 = std::exp(-lambda * t[i + 1]);
            total += h * (w0 * m[i] + w1 * m[i + 1]);
            total_se += h * (w0 * se[i] + w1 * se[i + 1]);
            dv += h * (w0 * (m[i] - 4 * t[i]) + w1 * (m[i + 1] - 4 * t[i + 1]));
        }
        out.lambdas.push_back(lambda);
        out.horizons.push_back(horizon);
        out.d_total.push_back(total);
        out.d_total_stderr.push_back(total_se);
        out.d_v.push_back(dv);
        out.d_v_stderr.push_back(total_se);
        out.tail_bound.push_back(laplace_tail_bound(lambda, horizon, m.back()));
    }
    return out;
}

CrossStat cross_covariance(std::span<double const> u, std::span<double const> v, double time)
{
    if (u.size() != v.size())
        throw ConfigError("cross covariance needs samples of equal length");
    RunningCov acc;
    for (std::size_t i = 0; i < u.size(); ++i)
        acc.add(u[i], v[i]);
    return {time, acc.covariance(), acc.stderr_of_cov()};
}

std::vector<CrossStat> yaglom_cross_stat(std::span<ReplicaRecord const> ensemble, SimParams const& params)
{
    auto curve = estimate_msd(ensemble, params);
    std::vector<CrossStat> out;
    for (std::size_t k = 0; k < curve.times.size(); ++k)
        out.push_back({curve.times[k], curve.cross[k], curve.cross_stderr[k]});
    return out;
}

EnsembleResult ensemble_runner(SimParams const& params, RunnerOptions const& options)
{
    auto const start = std::chrono::steady_clock::now();
    auto ctx = make_context(params);
    int const threads = std::max(1, options.threads);
    int const block = std::max(64, 16 * threads);

    EnsembleAccumulator acc(params);
    std::vector<ReplicaRecord> buffer(static_cast<std::size_t>(block));
    for (int base = 0; base < params.n_replicas; base += block)
    {
        int const count = std::min(block, params.n_replicas - base);
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        auto work = [&] {
            try
            {
                for (int i = next++; i < count && !failed; i = next++)
                    buffer[i] = dispatch(ctx, base + i);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        };
        if (threads == 1)
        {
            work();
        }
        else
        {
            std::vector<std::jthread> pool;
            for (int w = 0; w < std::min(threads, count); ++w)
                pool.emplace_back(work);
        }
        if (failure)
            std::rethrow_exception(failure);
        for (int i = 0; i < count; ++i)
        {
            acc.add(buffer[i]);
            if (options.on_replica)
                options.on_replica(buffer[i]);
        }
        if (options.progress)
            options.progress(base + count, params.n_replicas);
    }

    auto result = acc.finalize();
    auto const& d = result.diagnostics;
    if (static_cast<double>(d.n_invalid) > params.max_invalid_fraction * static_cast<double>(d.n_total))
        throw ReplicaFailure(std::to_string(d.n_invalid) + " of " + std::to_string(d.n_total)
                                 + " replicas became non-finite",
                             static_cast<std::size_t>(d.n_invalid),
                             static_cast<std::size_t>(d.n_total));
    result.diagnostics.threads = threads;
    result.diagnostics.wall_seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace curldrift
