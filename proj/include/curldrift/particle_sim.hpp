// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curldrift/kernel.hpp"
#include "curldrift/statistics.hpp"

namespace curldrift
{

enum class Precision
{
    single,
    double_,
};

struct SimParams
{
    double dt = 0.01;
    double horizon = 10;
    std::vector<double> checkpoint_times;
    int n_replicas = 1000;
    int n_modes = 2048;
    DynamicsSpec dyn;
    SpectralKernel kernel;
    std::uint64_t master_seed = 0;

    //! Draw new wavevectors for each replica (otherwise one set per run)
    bool fresh_wavevectors = true;
    //! Keep the initial environment fixed in time
    bool freeze_environment = false;
    double infrared_cutoff = 1e-6;
    Precision precision = Precision::single;
    //! Steps between exact recomputations of the tracked phases
    int resync_period = 64;

    //! Per-replica Laplace transforms of |X|^2 on the step grid
    std::vector<double> laplace_lambdas;
    //! Integration horizon per lambda; defaults to the run horizon
    std::vector<double> laplace_horizons;

    //! Window [t_lo, t_hi] for the per-replica slope of |X|^2/t against log t
    std::optional<std::pair<double, double>> trend_window;

    //! Abort when more than this fraction of replicas is invalid
    double max_invalid_fraction = 1e-3;

    void validate() const;
    std::int64_t n_steps() const;
    //! Step index of every checkpoint
    std::vector<std::int64_t> checkpoint_steps() const;
};

struct CheckpointRecord
{
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    //! Standard Brownian motion driving the particle, X = sqrt(2) B + drift
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    //! Time integral of the drift along the path
    Eigen::Vector2d drift = Eigen::Vector2d::Zero();
};

struct ReplicaRecord
{
    int replica_id = 0;
    bool valid = true;
    std::vector<CheckpointRecord> points;
    //! int_0^T exp(-lambda t) |X|^2 dt per configured lambda
    std::vector<double> laplace;
    //! Same with |X|^2 - 2 |B|^2
    std::vector<double> laplace_cv;
    double trend_slope = 0;
};

struct MsdCurve
{
    std::vector<double> times;
    std::vector<double> msd_mean;
    std::vector<double> msd_stderr;
    std::vector<double> d_of_t;
    std::vector<double> d_stderr;
    std::vector<double> mean_x1, mean_x1_stderr;
    std::vector<double> mean_x2, mean_x2_stderr;
    //! E[X1^2] - E[X2^2]
    std::vector<double> isotropy, isotropy_stderr;
    //! first component of the drift integral
    std::vector<double> drift_mean, drift_var;
    //! Cov(B1(t), drift1(t))
    std::vector<double> cross, cross_stderr;
    //! 4t + E|drift|^2 + 2 sqrt(2) E[B . drift]
    std::vector<double> decomposition;
    std::int64_t n_valid = 0;
};

struct LaplaceEstimate
{
    std::vector<double> lambdas;
    std::vector<double> horizons;
    std::vector<double> d_total;
    std::vector<double> d_total_stderr;
    //! d_total minus the Brownian transform over the same window
    std::vector<double> d_v;
    std::vector<double> d_v_stderr;
    //! Bound on the transform mass beyond the horizon
    std::vector<double> tail_bound;
};

struct TrendEstimate
{
    double slope = 0;
    double std_error = 0;
    double t_lo = 0;
    double t_hi = 0;
    int n_points = 0;
};

struct RunDiagnostics
{
    std::int64_t n_total = 0;
    std::int64_t n_invalid = 0;
    int threads = 1;
    double wall_seconds = 0;
    //! Control-variate D_V: transform of |X|^2 - 2|B|^2, lower variance
    std::vector<double> d_v_control;
    std::vector<double> d_v_control_stderr;
};

struct EnsembleResult
{
    MsdCurve curve;
    LaplaceEstimate laplace;
    std::optional<TrendEstimate> trend;
    RunDiagnostics diagnostics;
};

//---------------------------------------------------------------------------//

ReplicaRecord simulate_replica(SimParams const& params, int replica_id);

/*!
 * Streaming ensemble statistics, fed in replica order.
 */
class EnsembleAccumulator
{
  public:
    explicit EnsembleAccumulator(SimParams const& params);

    void add(ReplicaRecord const& rec);
    //! Throws ReplicaFailure with fewer than two valid replicas
    EnsembleResult finalize() const;

  private:
    struct PointStats
    {
        RunningStat msd, x1, x2, iso, drift1, drift_sq, b_dot_drift;
        RunningCov cross;
    };

    std::vector<double> times_;
    std::vector<double> lambdas_;
    std::vector<double> horizons_;
    bool has_trend_;
    std::pair<double, double> window_{0, 0};
    int trend_points_ = 0;
    std::vector<PointStats> points_;
    std::vector<RunningStat> laplace_, laplace_cv_;
    RunningStat trend_;
    std::int64_t total_ = 0;
    std::int64_t invalid_ = 0;
};

MsdCurve estimate_msd(std::span<ReplicaRecord const> ensemble, SimParams const& params);

//! Trapezoid transform of a curve; requires lambda_min * T >= 8
LaplaceEstimate estimate_laplace(MsdCurve const& curve, std::span<double const> lambdas);

struct CrossStat
{
    double time;
    double cov;
    double std_error;
};

std::vector<CrossStat> yaglom_cross_stat(std::span<ReplicaRecord const> ensemble,
                                         SimParams const& params);

//! Covariance of two samples with the standard error of the mean product
CrossStat cross_covariance(std::span<double const> u, std::span<double const> v, double time = 0);

struct RunnerOptions
{
    int threads = 1;
    std::function<void(std::int64_t done, std::int64_t total)> progress;
    //! Called for every replica in replica order, e.g. to stream records
    std::function<void(ReplicaRecord const&)> on_replica;
};

EnsembleResult ensemble_runner(SimParams const& params, RunnerOptions const& options = {});

}  // namespace curldrift
