// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curldrift/config.hpp"

namespace curldrift
{

enum class ExitCode : int
{
    ok = 0,
    check_failed = 1,
    config_error = 2,
    numeric_error = 3,
    replica_failure = 4,
};

//! Environment variable holding the default worker count
inline constexpr char const* threads_env_var = "CURLDRIFT_THREADS";

//! Worker count from the environment, else the hardware concurrency
int default_threads();

std::vector<std::string> const& command_names();

struct CommandRequest
{
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
};

struct CommandResult
{
    bool passed = true;
    //! Deterministic summary written next to the tables
    nlohmann::ordered_json summary;
    //! Timing details that go to the metadata record only
    nlohmann::ordered_json timings;
};

/*!
 * Run one subcommand on a validated configuration, writing its tables
 * into out_dir.
 */
CommandResult execute(std::string const& command, RunConfig const& config, int threads,
                      std::filesystem::path const& out_dir);

//! Load, override, validate, execute, write metadata; returns the exit code
int run_command(CommandRequest const& request, std::ostream& out, std::ostream& err);

}  // namespace curldrift
