// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "curldrift/error.hpp"
#include "curldrift/io.hpp"
#include "curldrift/particle_sim.hpp"
#include "curldrift/resolvent_bounds.hpp"
#include "curldrift/verify.hpp"

namespace curldrift
{
namespace
{
using oj = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double poisson_ratio_limit = 3.0;

std::vector<double> log_spaced(double lo, double hi, int n)
{
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

oj fit_json(ExponentFit const& f)
{
    oj j;
    j["slope"] = f.slope;
    j["std_error"] = f.std_error;
    j["intercept"] = f.intercept;
    return j;
}

oj suite_json(SuiteSummary const& s)
{
    oj j;
    j["cases"] = s.cases;
    j["failures"] = s.failures;
    j["max_error"] = s.max_error;
    j["passed"] = s.passed();
    return j;
}

oj scan_json(ScanResult const& s, double max_change)
{
    oj j;
    j["points"] = s.points.size();
    j["max_ratio"] = s.max_ratio;
    j["max_ratio_by_exponent"] = s.max_ratio_by_exponent;
    j["refined_max_ratio"] = s.refined_max_ratio;
    j["refinement_change"] = s.refinement_change;
    j["stable"] = s.stable(max_change);
    return j;
}

//---------------------------------------------------------------------------//

CommandResult run_simulate(RunConfig const& config, int threads, fs::path const& dir)
{
    SimParams const params = config.sim_params();
    std::optional<CsvWriter> replicas;
    if (config.io.replica_csv)
        replicas.emplace(dir / "replicas.csv",
                         std::vector<std::string>{"replica", "valid", "t", "x1", "x2", "b1", "b2",
                                                  "drift1", "drift2"});
    auto const times = params.checkpoint_times;

    RunnerOptions options;
    options.threads = threads;
    if (replicas)
    {
        options.on_replica = [&](ReplicaRecord const& rec) {
            for (std::size_t i = 0; i < rec.points.size(); ++i)
            {
                auto const& p = rec.points[i];
                replicas->row(rec.replica_id, rec.valid, times[i], p.x(0), p.x(1), p.b(0),
                              p.b(1), p.drift(0), p.drift(1));
            }
        };
    }
    auto const result = ensemble_runner(params, options);
    auto const& c = result.curve;

    CsvWriter msd(dir / "msd.csv",
                  {"t", "msd", "msd_se", "d", "d_se", "mean_x1", "mean_x1_se", "mean_x2",
                   "mean_x2_se", "isotropy", "isotropy_se", "drift_mean", "drift_var", "cross",
                   "cross_se", "decomposition"});
    for (std::size_t i = 0; i < c.times.size(); ++i)
        msd.row(c.times[i], c.msd_mean[i], c.msd_stderr[i], c.d_of_t[i], c.d_stderr[i],
                c.mean_x1[i], c.mean_x1_stderr[i], c.mean_x2[i], c.mean_x2_stderr[i],
                c.isotropy[i], c.isotropy_stderr[i], c.drift_mean[i], c.drift_var[i], c.cross[i],
                c.cross_stderr[i], c.decomposition[i]);

    CsvWriter trend(dir / "trend.csv", {"t_lo", "t_hi", "points", "slope", "slope_se"});
    CommandResult out;
    oj& s = out.summary;
    s["command"] = "simulate";
    s["replicas"] = result.diagnostics.n_total;
    s["invalid"] = result.diagnostics.n_invalid;
    s["valid"] = c.n_valid;
    if (result.trend)
    {
        auto const& t = *result.trend;
        trend.row(t.t_lo, t.t_hi, t.n_points, t.slope, t.std_error);
        s["trend"] = {{"t_lo", t.t_lo},
                      {"t_hi", t.t_hi},
                      {"points", t.n_points},
                      {"slope", t.slope},
                      {"slope_se", t.std_error}};
    }
    else
    {
        s["trend"] = nullptr;
    }
    out.timings["ensemble_seconds"] = result.diagnostics.wall_seconds;
    return out;
}

CommandResult run_laplace(RunConfig const& config, int threads, fs::path const& dir)
{
    SimParams const params = config.laplace_params();
    RunnerOptions options;
    options.threads = threads;
    auto const result = ensemble_runner(params, options);
    auto const& l = result.laplace;
    auto const& d = result.diagnostics;

    CsvWriter csv(dir / "laplace.csv",
                  {"lambda", "horizon", "d_total", "d_total_se", "d_v", "d_v_se", "d_v_control",
                   "d_v_control_se", "tail_bound", "bracket_lower", "bracket_upper",
                   "in_bracket"});
    CommandResult out;
    oj rows = oj::array();
    for (std::size_t i = 0; i < l.lambdas.size(); ++i)
    {
        double lower = std::nan("");
        double upper = std::nan("");
        std::string verdict;
        oj row;
        row["lambda"] = l.lambdas[i];
        row["d_v_control"] = d.d_v_control[i];
        row["d_v_control_se"] = d.d_v_control_stderr[i];
        if (config.laplace.brackets)
        {
            auto const b = bracket(l.lambdas[i], params.dyn, params.kernel);
            lower = b.lower;
            upper = b.upper;
            double const se = d.d_v_control_stderr[i];
            bool const inside
                = d.d_v_control[i] >= lower - 3 * se && d.d_v_control[i] <= upper + 3 * se;
            verdict = inside ? "1" : "0";
            out.passed = out.passed && inside;
            row["bracket_lower"] = lower;
            row["bracket_upper"] = upper;
            row["in_bracket"] = inside;
        }
        csv.row(l.lambdas[i], l.horizons[i], l.d_total[i], l.d_total_stderr[i], l.d_v[i],
                l.d_v_stderr[i], d.d_v_control[i], d.d_v_control_stderr[i], l.tail_bound[i],
                lower, upper, verdict);
        rows.push_back(row);
    }
    out.summary["command"] = "laplace";
    out.summary["replicas"] = d.n_total;
    out.summary["invalid"] = d.n_invalid;
    out.summary["lambdas"] = rows;
    out.summary["passed"] = out.passed;
    out.timings["ensemble_seconds"] = d.wall_seconds;
    return out;
}

CommandResult run_bounds(RunConfig const& config, fs::path const& dir)
{
    auto const& b = config.bounds;
    auto const& dyn = config.physics.dyn;
    auto const& kernel = config.physics.kernel;
    CommandResult out;
    oj& s = out.summary;
    s["command"] = "bounds";

    bool ordered = true;
    {
        CsvWriter csv(dir / "bracket.csv", {"lambda", "lower", "upper", "lower_error",
                                            "upper_error", "lower_form", "upper_form"});
        for (double lambda : b.lambdas)
        {
            auto const r = bracket(lambda, dyn, kernel);
            ordered = ordered && r.lower <= r.upper + r.lower_error + r.upper_error;
            csv.row(lambda, r.lower, r.upper, r.lower_error, r.upper_error, r.lower_form,
                    r.upper_form);
        }
    }
    s["bracket_ordered"] = ordered;

    auto const full = log_spaced(b.scan_lambda_min, 1.0, b.scan_points);
    {
        CsvWriter csv(dir / "level1.csv", {"exponent", "lambda", "value", "value_over_log"});
        for (double e : b.exponents)
        {
            auto const d = DynamicsSpec::power(e);
            for (double lambda : full)
            {
                double const v = simplified_level1(lambda, d);
                csv.row(e, lambda, v, v / std::log1p(1 / lambda));
            }
        }
    }

    auto const small = log_spaced(b.scan_lambda_min, b.scan_lambda_max, b.scan_points);
    {
        CsvWriter csv(dir / "gamma.csv", {"gamma", "lambda", "value", "log_abs_log_lambda"});
        oj fits = oj::array();
        for (double g : b.gammas)
        {
            std::vector<std::pair<double, double>> samples;
            for (double lambda : small)
            {
                double const v = gamma_level1(lambda, g);
                samples.emplace_back(lambda, v);
                csv.row(g, lambda, v, std::log(std::abs(std::log(lambda))));
            }
            oj f = fit_json(fit_log_exponent(samples));
            f["gamma"] = g;
            f["expected_slope"] = 1 - g;
            fits.push_back(f);
        }
        s["gamma_fits"] = fits;
    }

    double max_poisson = 0;
    {
        CsvWriter csv(dir / "envelope.csv", {"lambda", "log_value", "level", "lower_env",
                                             "upper_env", "poisson_ratio"});
        for (double lambda : small)
        {
            auto const e = envelope(lambda, b.params);
            double const ratio = poisson_clt_ratio(lambda);
            max_poisson = std::max(max_poisson, ratio);
            csv.row(lambda, e.log_value, e.level, e.lower_env, e.upper_env, ratio);
        }
        auto const slopes
            = envelope_slopes(b.scan_lambda_min, b.scan_lambda_max, b.scan_points, b.params);
        s["envelope_upper_fit"] = fit_json(slopes.upper);
        s["envelope_lower_fit"] = fit_json(slopes.lower);
        s["envelope_expected_slope"] = 1 + b.params.epsilon;
    }
    s["max_poisson_ratio"] = max_poisson;

    auto const c = c_sequence(b.c_terms, b.params.epsilon);
    {
        CsvWriter csv(dir / "c_sequence.csv", {"k", "c"});
        for (std::size_t i = 0; i < c.size(); ++i)
            csv.row(i + 1, c[i]);
    }
    bool const c2_exact = c[1] == 2 * std::numbers::pi;
    s["c2"] = c[1];
    s["c2_exact"] = c2_exact;

    out.passed = ordered && c2_exact && max_poisson <= poisson_ratio_limit;
    s["passed"] = out.passed;
    return out;
}

CommandResult run_verify(RunConfig const& config, fs::path const& dir)
{
    auto const& v = config.verify;
    CommandResult out;
    oj& s = out.summary;
    s["command"] = "verify";

    CsvWriter csv(dir / "verify.csv",
                  {"check", "case", "x", "y", "z", "k", "lhs", "rhs", "error", "pass"});
    auto sink = [&](SuiteCase const& c) {
        csv.row(c.check, c.index, c.x, c.y, c.z, c.k, c.lhs, c.rhs, c.error, c.pass);
    };
    auto const identity = identity_suite(v.identity_cases, v.identity_max_level,
                                         v.identity_tolerance, config.master_seed, sink);
    auto const derivative = derivative_suite(v.derivative_cases, v.max_level,
                                             v.derivative_tolerance, v.derivative_step,
                                             config.master_seed, sink);
    auto const chain = chain_suite(v.chain_points, v.max_level, v.chain_slack, sink);
    csv.flush();

    s["identity"] = suite_json(identity);
    s["derivative"] = suite_json(derivative);
    s["chain"] = suite_json(chain);
    out.timings["identity_seconds"] = identity.seconds;
    out.timings["derivative_seconds"] = derivative.seconds;
    out.timings["chain_seconds"] = chain.seconds;
    bool passed = (v.identity_cases == 0 || identity.passed())
                  && (v.derivative_cases == 0 || derivative.passed()) && chain.passed();

    if (v.scans)
    {
        auto const t0 = std::chrono::steady_clock::now();
        auto const grid = config.scan_grid();
        auto const diag = scan_diagonal_constant(grid, config.physics.kernel);
        auto const off = scan_offdiagonal_constant(grid, config.physics.kernel);
        CsvWriter scans(dir / "scans.csv",
                        {"scan", "lambda", "offset", "pmag", "z", "level", "exponent", "pprime1",
                         "pprime2", "lhs", "reference", "ratio"});
        for (auto const* r : {&diag, &off})
        {
            char const* name = r == &diag ? "diagonal" : "offdiagonal";
            for (auto const& p : r->points)
                scans.row(name, p.lambda, p.offset, p.pmag, p.z, p.level, p.exponent,
                          p.pprime(0), p.pprime(1), p.lhs, p.reference, p.ratio);
        }
        s["diagonal_scan"] = scan_json(diag, v.scan_max_change);
        s["offdiagonal_scan"] = scan_json(off, v.scan_max_change);
        passed = passed && diag.stable(v.scan_max_change) && off.stable(v.scan_max_change);
        out.timings["scan_seconds"]
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    out.passed = passed;
    s["passed"] = passed;
    return out;
}

CommandResult run_covariance(RunConfig const& config, fs::path const& dir)
{
    auto const report = covariance_check(config.covariance_options());
    double const z_limit = config.covariance.z_limit;
    {
        CsvWriter csv(dir / "covariance.csv", {"t", "x1", "x2", "row", "col", "monte_carlo",
                                               "std_error", "quadrature", "zscore"});
        for (auto const& e : report.entries)
            csv.row(e.time, e.x(0), e.x(1), e.row, e.col, e.monte_carlo, e.std_error,
                    e.quadrature, e.zscore);
    }
    {
        CsvWriter csv(dir / "stationarity.csv",
                      {"row", "col", "initial", "later", "difference_se", "zscore"});
        for (auto const& e : report.stationarity)
            csv.row(e.row, e.col, e.initial, e.later, e.std_error, e.zscore);
    }
    CommandResult out;
    out.passed = report.passed(z_limit);
    out.summary["command"] = "covariance";
    out.summary["entries"] = report.entries.size();
    out.summary["stationarity_entries"] = report.stationarity.size();
    out.summary["max_abs_z"] = report.max_abs_z;
    out.summary["z_limit"] = z_limit;
    out.summary["passed"] = out.passed;
    return out;
}

}  // namespace

//---------------------------------------------------------------------------//

int default_threads()
{
    if (char const* env = std::getenv(threads_env_var))
    {
        char* end = nullptr;
        long const n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1)
            return static_cast<int>(n);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::string> const& command_names()
{
    static std::vector<std::string> const names{"simulate", "laplace", "bounds", "verify",
                                                "covariance"};
    return names;
}

CommandResult execute(std::string const& command, RunConfig const& config, int threads,
                      fs::path const& out_dir)
{
    fs::create_directories(out_dir);
    CommandResult r;
    if (command == "simulate")
        r = run_simulate(config, threads, out_dir);
    else if (command == "laplace")
        r = run_laplace(config, threads, out_dir);
    else if (command == "bounds")
        r = run_bounds(config, out_dir);
    else if (command == "verify")
        r = run_verify(config, out_dir);
    else if (command == "covariance")
        r = run_covariance(config, out_dir);
    else
        throw ConfigError("unknown command " + command, "command");
    write_json(out_dir / (command + ".json"), r.summary);
    return r;
}

int run_command(CommandRequest const& request, std::ostream& out, std::ostream& err)
{
    auto const start = std::chrono::steady_clock::now();
    try
    {
        RunConfig config = load_config(request.config_path);
        if (request.seed)
            config.master_seed = *request.seed;
        if (request.out_dir)
            config.io.out_dir = *request.out_dir;
        int const threads = request.threads.value_or(default_threads());
        if (threads < 1)
            throw ConfigError("thread count must be at least 1", "--threads");
        config.validate();

        fs::path const dir = config.io.out_dir;
        auto const result = execute(request.command, config, threads, dir);
        double const wall
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        oj meta;
        meta["tool"] = "curldrift";
        meta["version"] = tool_version();
        meta["command"] = request.command;
        meta["seed"] = config.master_seed;
        meta["config"] = to_json(config);
        meta["threads"] = threads;
        meta["passed"] = result.passed;
        meta["timings"] = result.timings;
        meta["wall_seconds"] = wall;
        write_json(dir / "metadata.json", meta);

        out << request.command << ": " << (result.passed ? "pass" : "FAIL") << " ("
            << dir.string() << ")\n";
        return static_cast<int>(result.passed ? ExitCode::ok : ExitCode::check_failed);
    }
    catch (ConfigError const& e)
    {
        err << "configuration error";
        if (!e.key().empty())
            err << " in '" << e.key() << "'";
        err << ": " << e.what() << '\n';
        return static_cast<int>(ExitCode::config_error);
    }
    catch (ReplicaFailure const& e)
    {
        err << "replica failure: " << e.what() << " (" << e.invalid() << " of " << e.total()
            << " invalid)\n";
        return static_cast<int>(ExitCode::replica_failure);
    }
    catch (std::exception const& e)
    {
        err << "numeric failure: " << e.what() << '\n';
        return static_cast<int>(ExitCode::numeric_error);
    }
}

}  // namespace curldrift
