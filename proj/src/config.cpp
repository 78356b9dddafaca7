// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "curldrift/error.hpp"

#ifndef CURLDRIFT_VERSION
#    define CURLDRIFT_VERSION "0.0.0"
#endif

namespace curldrift
{
namespace
{
using nlohmann::json;

//! Tracks which keys of one section were consumed
class Reader
{
  public:
    Reader(json const& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(describe() + " must be an object", path_.empty() ? "<root>" : path_);
    }

    std::string key_path(std::string const& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    json const* find(std::string const& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    Reader section(std::string const& key)
    {
        static json const empty = json::object();
        json const* v = find(key);
        return Reader(v ? *v : empty, key_path(key));
    }

    void get(std::string const& key, double& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_number())
                throw type_error(key, "a number");
            out = v->get<double>();
        }
    }

    void get(std::string const& key, int& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_number_integer())
                throw type_error(key, "an integer");
            auto const i = v->get<std::int64_t>();
            if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
                throw ConfigError(key_path(key) + " is out of range", key_path(key));
            out = static_cast<int>(i);
        }
    }

    void get(std::string const& key, std::uint64_t& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_number_unsigned())
                throw type_error(key, "a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void get(std::string const& key, bool& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_boolean())
                throw type_error(key, "a boolean");
            out = v->get<bool>();
        }
    }

    void get(std::string const& key, std::string& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_string())
                throw type_error(key, "a string");
            out = v->get<std::string>();
        }
    }

    void get(std::string const& key, std::vector<double>& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_array())
                throw type_error(key, "an array of numbers");
            out.clear();
            for (auto const& e : *v)
            {
                if (!e.is_number())
                    throw type_error(key, "an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    void get(std::string const& key, std::vector<Eigen::Vector2d>& out)
    {
        if (auto const* v = find(key))
        {
            if (!v->is_array())
                throw type_error(key, "an array of [x, y] pairs");
            out.clear();
            for (auto const& e : *v)
            {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                    throw type_error(key, "an array of [x, y] pairs");
                out.emplace_back(e[0].get<double>(), e[1].get<double>());
            }
        }
    }

    void get(std::string const& key, std::optional<std::pair<double, double>>& out)
    {
        if (auto const* v = find(key))
        {
            if (v->is_null())
            {
                out.reset();
                return;
            }
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
                throw type_error(key, "null or a [lo, hi] pair");
            out = std::make_pair((*v)[0].get<double>(), (*v)[1].get<double>());
        }
    }

    template<class E>
    void get_enum(std::string const& key, E& out, std::map<std::string, E> const& names)
    {
        std::string name;
        if (find(key) == nullptr)
            return;
        get(key, name);
        auto it = names.find(name);
        if (it == names.end())
        {
            std::string options;
            for (auto const& [n, e] : names)
                options += (options.empty() ? "" : ", ") + n;
            throw ConfigError(key_path(key) + " must be one of " + options + ", got \"" + name + "\"",
                              key_path(key));
        }
        out = it->second;
    }

    //! Rejects keys that were never requested
    void finish() const
    {
        for (auto const& [key, value] : j_.items())
        {
            if (!seen_.count(key))
                throw ConfigError("unknown configuration key " + key_path(key), key_path(key));
        }
    }

  private:
    json const& j_;
    std::string path_;
    std::set<std::string> seen_;

    std::string describe() const { return path_.empty() ? "configuration" : path_; }

    ConfigError type_error(std::string const& key, char const* what) const
    {
        return ConfigError(key_path(key) + " must be " + what, key_path(key));
    }
};

std::map<std::string, DynamicsSpec::Family> const family_names{
    {"power", DynamicsSpec::Family::power},
    {"log_modified", DynamicsSpec::Family::log_modified},
};
std::map<std::string, BumpProfile> const profile_names{
    {"smooth_bump", BumpProfile::smooth_bump},
    {"unit_disk", BumpProfile::unit_disk},
};
std::map<std::string, Precision> const precision_names{
    {"single", Precision::single},
    {"double", Precision::double_},
};

template<class E>
std::string enum_name(E value, std::map<std::string, E> const& names)
{
    for (auto const& [n, e] : names)
    {
        if (e == value)
            return n;
    }
    return "?";
}

//! Library keys mapped to their configuration path
std::string qualify(std::string const& key)
{
    static std::map<std::string, std::string> const paths{
        {"dt", "discretization.dt"},
        {"horizon", "discretization.horizon"},
        {"checkpoints", "discretization.checkpoints"},
        {"resync_period", "discretization.resync_period"},
        {"infrared_cutoff", "discretization.infrared_cutoff"},
        {"n_replicas", "ensemble.n_replicas"},
        {"n_modes", "ensemble.n_modes"},
        {"max_invalid_fraction", "ensemble.max_invalid_fraction"},
        {"trend_window", "ensemble.trend_window"},
        {"exponent", "physics.exponent"},
        {"lambdas", "laplace.lambdas"},
        {"laplace_horizons", "laplace.horizons"},
        {"epsilon", "bounds.epsilon"},
        {"k1", "bounds.k1"},
        {"k2", "bounds.k2"},
    };
    auto it = paths.find(key);
    return it == paths.end() ? key : it->second;
}

template<class F>
void with_paths(F&& f)
{
    try
    {
        f();
    }
    catch (ConfigError const& e)
    {
        throw ConfigError(e.what(), qualify(e.key()));
    }
}

void require(bool ok, std::string const& key, std::string const& message)
{
    if (!ok)
        throw ConfigError(key + ": " + message, key);
}

bool all_of(std::vector<double> const& v, bool (*pred)(double))
{
    return std::all_of(v.begin(), v.end(), pred);
}

}  // namespace

//---------------------------------------------------------------------------//

char const* tool_version()
{
    return CURLDRIFT_VERSION;
}

std::vector<double> DiscretizationConfig::checkpoint_times() const
{
    if (!checkpoints.empty())
        return checkpoints;
    std::vector<double> out;
    if (grid_count < 1 || !(dt > 0) || !(horizon > 0))
        return out;
    double const lo = std::min(grid_start, horizon);
    for (int i = 0; i < grid_count; ++i)
    {
        double const f = grid_count == 1 ? 1.0 : static_cast<double>(i) / (grid_count - 1);
        double t = grid_spacing == "log" ? lo * std::pow(horizon / lo, f) : lo + f * (horizon - lo);
        t = std::max(1.0, static_cast<double>(std::llround(t / dt))) * dt;
        if (out.empty() || t > out.back())
            out.push_back(t);
    }
    return out;
}

void RunConfig::validate() const
{
    require(schema_version == config_schema_version, "schema_version",
            "unsupported schema version " + std::to_string(schema_version));
    require(discretization.grid_spacing == "linear" || discretization.grid_spacing == "log",
            "discretization.grid_spacing", "must be \"linear\" or \"log\"");
    require(discretization.checkpoints.size() > 0 || discretization.grid_count >= 1,
            "discretization.grid_count", "must be at least 1");
    require(discretization.grid_start > 0, "discretization.grid_start", "must be positive");

    with_paths([&] { sim_params().validate(); });
    with_paths([&] { laplace_params().validate(); });
    require(!laplace.lambdas.empty(), "laplace.lambdas", "must not be empty");
    require(laplace.horizon_factor >= 8, "laplace.horizon_factor",
            "lambda * horizon must be at least 8");
    for (std::size_t i = 0; i < laplace.horizons.size(); ++i)
        require(laplace.lambdas[i] * laplace.horizons[i] >= 8, "laplace.horizons",
                "lambda * horizon must be at least 8");

    with_paths([&] { bounds.params.validate(); });
    require(all_of(bounds.lambdas, [](double l) { return l > 0; }), "bounds.lambdas",
            "must be positive");
    require(all_of(bounds.exponents, [](double s) { return s >= 0; }), "bounds.exponents",
            "must be nonnegative");
    require(all_of(bounds.gammas, [](double g) { return g > 0; }), "bounds.gammas",
            "must be positive");
    require(bounds.scan_lambda_min > 0 && bounds.scan_lambda_min < bounds.scan_lambda_max
                && bounds.scan_lambda_max < 1,
            "bounds.scan_lambda_min", "need 0 < scan_lambda_min < scan_lambda_max < 1");
    require(bounds.scan_points >= 3, "bounds.scan_points", "must be at least 3");
    require(bounds.c_terms >= 2, "bounds.c_terms", "must be at least 2");

    require(verify.identity_cases >= 0, "verify.identity_cases", "must be nonnegative");
    require(verify.derivative_cases >= 0, "verify.derivative_cases", "must be nonnegative");
    require(verify.chain_points >= 2, "verify.chain_points", "must be at least 2");
    require(verify.identity_max_level >= 0, "verify.identity_max_level", "must be nonnegative");
    require(verify.max_level >= 0, "verify.max_level", "must be nonnegative");
    require(verify.identity_tolerance > 0, "verify.identity_tolerance", "must be positive");
    require(verify.derivative_tolerance > 0, "verify.derivative_tolerance", "must be positive");
    require(verify.derivative_step > 0, "verify.derivative_step", "must be positive");
    require(verify.chain_slack >= 0, "verify.chain_slack", "must be nonnegative");
    require(verify.scan_rel_tol > 0, "verify.scan_rel_tol", "must be positive");
    require(verify.scan_max_change > 0, "verify.scan_max_change", "must be positive");

    require(covariance.n_realizations >= 2, "covariance.n_realizations", "must be at least 2");
    require(!covariance.times.empty(), "covariance.times", "must not be empty");
    require(all_of(covariance.times, [](double t) { return t >= 0; }), "covariance.times",
            "must be nonnegative");
    require(!covariance.offsets.empty(), "covariance.offsets", "must not be empty");
    require(covariance.stationarity_time > 0, "covariance.stationarity_time", "must be positive");
    require(covariance.z_limit > 0, "covariance.z_limit", "must be positive");
    require(covariance.quad_tol > 0, "covariance.quad_tol", "must be positive");

    require(!io.out_dir.empty(), "io.out_dir", "must not be empty");
}

SimParams RunConfig::sim_params() const
{
    SimParams p;
    p.dt = discretization.dt;
    p.horizon = discretization.horizon;
    p.checkpoint_times = discretization.checkpoint_times();
    p.n_replicas = ensemble.n_replicas;
    p.n_modes = ensemble.n_modes;
    p.dyn = physics.dyn;
    p.kernel = physics.kernel;
    p.master_seed = master_seed;
    p.fresh_wavevectors = discretization.fresh_wavevectors;
    p.freeze_environment = discretization.freeze_environment;
    p.infrared_cutoff = discretization.infrared_cutoff;
    p.precision = discretization.precision;
    p.resync_period = discretization.resync_period;
    p.trend_window = ensemble.trend_window;
    p.max_invalid_fraction = ensemble.max_invalid_fraction;
    return p;
}

SimParams RunConfig::laplace_params() const
{
    SimParams p = sim_params();
    p.laplace_lambdas = laplace.lambdas;
    p.laplace_horizons = laplace.horizons;
    if (p.laplace_horizons.empty())
    {
        for (double l : laplace.lambdas)
            p.laplace_horizons.push_back(laplace.horizon_factor / l);
    }
    double horizon = 0;
    for (double h : p.laplace_horizons)
        horizon = std::max(horizon, h);
    if (horizon > 0)
    {
        p.horizon = horizon;
        DiscretizationConfig d = discretization;
        d.horizon = horizon;
        p.checkpoint_times = d.checkpoint_times();
    }
    return p;
}

CovarianceCheckOptions RunConfig::covariance_options() const
{
    CovarianceCheckOptions o;
    o.n_modes = ensemble.n_modes;
    o.n_realizations = covariance.n_realizations;
    o.times = covariance.times;
    o.offsets = covariance.offsets;
    o.dyn = physics.dyn;
    o.kernel = physics.kernel;
    o.seed = master_seed;
    o.stationarity_time = covariance.stationarity_time;
    o.quad_tol = covariance.quad_tol;
    return o;
}

ScanGrid RunConfig::scan_grid() const
{
    ScanGrid g;
    g.rel_tol = verify.scan_rel_tol;
    return g;
}

//---------------------------------------------------------------------------//

RunConfig parse_config(std::string const& text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what(), "<root>");
    }

    RunConfig c;
    Reader r(root, "");
    r.get("schema_version", c.schema_version);
    r.get("master_seed", c.master_seed);
    {
        auto s = r.section("physics");
        s.get_enum("family", c.physics.dyn.family, family_names);
        s.get("exponent", c.physics.dyn.exponent);
        s.get_enum("profile", c.physics.kernel.profile, profile_names);
        s.finish();
    }
    {
        auto s = r.section("discretization");
        auto& d = c.discretization;
        s.get("dt", d.dt);
        s.get("horizon", d.horizon);
        s.get("checkpoints", d.checkpoints);
        s.get("grid_start", d.grid_start);
        s.get("grid_count", d.grid_count);
        s.get("grid_spacing", d.grid_spacing);
        s.get_enum("precision", d.precision, precision_names);
        s.get("resync_period", d.resync_period);
        s.get("infrared_cutoff", d.infrared_cutoff);
        s.get("freeze_environment", d.freeze_environment);
        s.get("fresh_wavevectors", d.fresh_wavevectors);
        s.finish();
    }
    {
        auto s = r.section("ensemble");
        auto& e = c.ensemble;
        s.get("n_replicas", e.n_replicas);
        s.get("n_modes", e.n_modes);
        s.get("max_invalid_fraction", e.max_invalid_fraction);
        s.get("trend_window", e.trend_window);
        s.finish();
    }
    {
        auto s = r.section("laplace");
        auto& l = c.laplace;
        s.get("lambdas", l.lambdas);
        s.get("horizons", l.horizons);
        s.get("horizon_factor", l.horizon_factor);
        s.get("brackets", l.brackets);
        s.finish();
    }
    {
        auto s = r.section("bounds");
        auto& b = c.bounds;
        s.get("epsilon", b.params.epsilon);
        s.get("k1", b.params.k1);
        s.get("k2", b.params.k2);
        s.get("lambdas", b.lambdas);
        s.get("exponents", b.exponents);
        s.get("gammas", b.gammas);
        s.get("scan_lambda_min", b.scan_lambda_min);
        s.get("scan_lambda_max", b.scan_lambda_max);
        s.get("scan_points", b.scan_points);
        s.get("c_terms", b.c_terms);
        s.finish();
    }
    {
        auto s = r.section("verify");
        auto& v = c.verify;
        s.get("identity_cases", v.identity_cases);
        s.get("identity_max_level", v.identity_max_level);
        s.get("derivative_cases", v.derivative_cases);
        s.get("chain_points", v.chain_points);
        s.get("max_level", v.max_level);
        s.get("identity_tolerance", v.identity_tolerance);
        s.get("derivative_tolerance", v.derivative_tolerance);
        s.get("derivative_step", v.derivative_step);
        s.get("chain_slack", v.chain_slack);
        s.get("scans", v.scans);
        s.get("scan_rel_tol", v.scan_rel_tol);
        s.get("scan_max_change", v.scan_max_change);
        s.finish();
    }
    {
        auto s = r.section("covariance");
        auto& v = c.covariance;
        s.get("n_realizations", v.n_realizations);
        s.get("times", v.times);
        s.get("offsets", v.offsets);
        s.get("stationarity_time", v.stationarity_time);
        s.get("z_limit", v.z_limit);
        s.get("quad_tol", v.quad_tol);
        s.finish();
    }
    {
        auto s = r.section("io");
        s.get("out_dir", c.io.out_dir);
        s.get("replica_csv", c.io.replica_csv);
        s.finish();
    }
    r.finish();
    c.validate();
    return c;
}

RunConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read configuration file " + path, "--config");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

nlohmann::ordered_json to_json(RunConfig const& c)
{
    using oj = nlohmann::ordered_json;
    auto pairs = [](std::vector<Eigen::Vector2d> const& v) {
        oj out = oj::array();
        for (auto const& x : v)
            out.push_back({x(0), x(1)});
        return out;
    };

    oj j;
    j["schema_version"] = c.schema_version;
    j["master_seed"] = c.master_seed;

    oj& ph = j["physics"];
    ph["family"] = enum_name(c.physics.dyn.family, family_names);
    ph["exponent"] = c.physics.dyn.exponent;
    ph["profile"] = enum_name(c.physics.kernel.profile, profile_names);

    auto const& d = c.discretization;
    oj& di = j["discretization"];
    di["dt"] = d.dt;
    di["horizon"] = d.horizon;
    di["checkpoints"] = d.checkpoint_times();
    di["grid_start"] = d.grid_start;
    di["grid_count"] = d.grid_count;
    di["grid_spacing"] = d.grid_spacing;
    di["precision"] = enum_name(d.precision, precision_names);
    di["resync_period"] = d.resync_period;
    di["infrared_cutoff"] = d.infrared_cutoff;
    di["freeze_environment"] = d.freeze_environment;
    di["fresh_wavevectors"] = d.fresh_wavevectors;

    oj& en = j["ensemble"];
    en["n_replicas"] = c.ensemble.n_replicas;
    en["n_modes"] = c.ensemble.n_modes;
    en["max_invalid_fraction"] = c.ensemble.max_invalid_fraction;
    if (c.ensemble.trend_window)
        en["trend_window"] = {c.ensemble.trend_window->first, c.ensemble.trend_window->second};
    else
        en["trend_window"] = nullptr;

    auto const lp = c.laplace_params();
    oj& la = j["laplace"];
    la["lambdas"] = c.laplace.lambdas;
    la["horizons"] = lp.laplace_horizons;
    la["horizon_factor"] = c.laplace.horizon_factor;
    la["brackets"] = c.laplace.brackets;

    auto const& b = c.bounds;
    oj& bo = j["bounds"];
    bo["epsilon"] = b.params.epsilon;
    bo["k1"] = b.params.k1;
    bo["k2"] = b.params.k2;
    bo["lambdas"] = b.lambdas;
    bo["exponents"] = b.exponents;
    bo["gammas"] = b.gammas;
    bo["scan_lambda_min"] = b.scan_lambda_min;
    bo["scan_lambda_max"] = b.scan_lambda_max;
    bo["scan_points"] = b.scan_points;
    bo["c_terms"] = b.c_terms;

    auto const& v = c.verify;
    oj& ve = j["verify"];
    ve["identity_cases"] = v.identity_cases;
    ve["identity_max_level"] = v.identity_max_level;
    ve["derivative_cases"] = v.derivative_cases;
    ve["chain_points"] = v.chain_points;
    ve["max_level"] = v.max_level;
    ve["identity_tolerance"] = v.identity_tolerance;
    ve["derivative_tolerance"] = v.derivative_tolerance;
    ve["derivative_step"] = v.derivative_step;
    ve["chain_slack"] = v.chain_slack;
    ve["scans"] = v.scans;
    ve["scan_rel_tol"] = v.scan_rel_tol;
    ve["scan_max_change"] = v.scan_max_change;

    auto const& cv = c.covariance;
    oj& co = j["covariance"];
    co["n_realizations"] = cv.n_realizations;
    co["times"] = cv.times;
    co["offsets"] = pairs(cv.offsets);
    co["stationarity_time"] = cv.stationarity_time;
    co["z_limit"] = cv.z_limit;
    co["quad_tol"] = cv.quad_tol;

    oj& io = j["io"];
    io["out_dir"] = c.io.out_dir;
    io["replica_csv"] = c.io.replica_csv;
    return j;
}

}  // namespace curldrift
