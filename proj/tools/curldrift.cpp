// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "curldrift/commands.hpp"

int main(int argc, char** argv)
{
    using namespace curldrift;

    CLI::App app{"Brownian motion in a curl-of-SHE drift: simulation, bounds and checks"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1, 1);

    CommandRequest request;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;

    for (auto const& name : command_names())
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", request.config_path, "JSON run configuration")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override master_seed");
        sub->add_option("--threads", threads,
                        std::string("Worker threads (default $") + threads_env_var
                            + " or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "Override io.out_dir");
        sub->callback([&request, name] { request.command = name; });
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::Success const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return static_cast<int>(ExitCode::config_error);
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed"))
        request.seed = seed;
    if (sub->count("--threads"))
        request.threads = threads;
    if (sub->count("--out"))
        request.out_dir = out_dir;
    return run_command(request, std::cout, std::cerr);
}
