// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "curldrift/kernel.hpp"
#include "curldrift/particle_sim.hpp"
#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/verify.hpp"

namespace curldrift
{

inline constexpr int config_schema_version = 1;

//! Version string of the library and command-line tool
char const* tool_version();

struct PhysicsConfig
{
    DynamicsSpec dyn = DynamicsSpec::power(1.0);
    SpectralKernel kernel;
};

struct DiscretizationConfig
{
    double dt = 0.01;
    double horizon = 10;
    //! Explicit checkpoint times; empty means the generated grid below
    std::vector<double> checkpoints;
    //! Generated grid: count points from start to horizon, "linear" or "log"
    double grid_start = 1;
    int grid_count = 10;
    std::string grid_spacing = "linear";
    Precision precision = Precision::single;
    int resync_period = 64;
    double infrared_cutoff = 1e-6;
    bool freeze_environment = false;
    bool fresh_wavevectors = true;

    std::vector<double> checkpoint_times() const;
};

struct EnsembleConfig
{
    int n_replicas = 1000;
    int n_modes = 2048;
    double max_invalid_fraction = 1e-3;
    std::optional<std::pair<double, double>> trend_window;
};

struct LaplaceConfig
{
    std::vector<double> lambdas{0.5, 0.1};
    //! Per-lambda horizons; empty means horizon_factor / lambda
    std::vector<double> horizons;
    double horizon_factor = 10;
    //! Add the quadrature bracket to each row
    bool brackets = true;
};

struct BoundsConfig
{
    BoundParams params;
    //! Bracket grid
    std::vector<double> lambdas{0.5, 0.1, 1e-2, 1e-3};
    //! Power exponents tabulated by the first-level integral
    std::vector<double> exponents{0.5, 1.0};
    std::vector<double> gammas{0.5, 0.75, 1.0, 1.5};
    double scan_lambda_min = 1e-12;
    double scan_lambda_max = 1e-4;
    int scan_points = 33;
    //! Terms of the alternating constant sequence
    int c_terms = 10000;
};

struct VerifyConfig
{
    int identity_cases = 100;
    int identity_max_level = 8;
    int derivative_cases = 1000;
    //! Points per axis of the (x, z) ordering grid
    int chain_points = 40;
    int max_level = 10;
    double identity_tolerance = 1e-8;
    double derivative_tolerance = 1e-6;
    double derivative_step = 1e-6;
    double chain_slack = 1e-12;
    bool scans = true;
    double scan_rel_tol = 1e-6;
    double scan_max_change = 0.2;
};

struct CovarianceConfig
{
    int n_realizations = 10000;
    std::vector<double> times{0.0, 0.5};
    std::vector<Eigen::Vector2d> offsets{Eigen::Vector2d::Zero(), Eigen::Vector2d(1.0, 0.0)};
    double stationarity_time = 5;
    double z_limit = 3;
    double quad_tol = 1e-10;
};

struct IoConfig
{
    std::string out_dir = "out";
    //! Stream one row per replica and checkpoint
    bool replica_csv = false;
};

struct RunConfig
{
    int schema_version = config_schema_version;
    std::uint64_t master_seed = 0;
    PhysicsConfig physics;
    DiscretizationConfig discretization;
    EnsembleConfig ensemble;
    LaplaceConfig laplace;
    BoundsConfig bounds;
    VerifyConfig verify;
    CovarianceConfig covariance;
    IoConfig io;

    //! Throws ConfigError naming the offending key
    void validate() const;

    SimParams sim_params() const;
    //! Simulation parameters with the Laplace lambdas and their horizons
    SimParams laplace_params() const;
    CovarianceCheckOptions covariance_options() const;
    ScanGrid scan_grid() const;
};

//! Strict parse: unknown keys and wrong types raise ConfigError with the key path
RunConfig parse_config(std::string const& text);
RunConfig load_config(std::string const& path);

//! Fully resolved configuration with a fixed key order
nlohmann::ordered_json to_json(RunConfig const& config);

}  // namespace curldrift
