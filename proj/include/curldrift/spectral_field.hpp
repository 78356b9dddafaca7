// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "curldrift/error.hpp"
#include "curldrift/kernel.hpp"
#include "curldrift/rng.hpp"

namespace curldrift
{

struct SamplingOptions
{
    //! Wavevectors with |p| <= infrared_cutoff are rejected
    double infrared_cutoff = 1e-6;
    //! Rejection budget per requested mode
    std::int64_t max_attempts_per_mode = 100000;
};

//---------------------------------------------------------------------------//
/*!
 * Random Fourier modes of the stationary drift field.
 *
 * Wavevectors are i.i.d. with density proportional to the mollifier
 * transform, directions are p_perp / |p| and every mode carries the same
 * variance Z_V / ((2 pi)^2 n).
 */
template<class Scalar>
struct ModeSet
{
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    Array px;
    Array py;
    Array ex;
    Array ey;
    Array variance;
    //! OU relaxation rate m(p_j)
    Array rate;
    std::uint64_t seed = 0;

    Eigen::Index size() const { return px.size(); }
};

template<class Scalar>
using ModeSetPtr = std::shared_ptr<ModeSet<Scalar> const>;

template<class Scalar>
struct EnvironmentState
{
    using Array = typename ModeSet<Scalar>::Array;

    double time = 0;
    Array a;  //!< cosine amplitudes
    Array b;  //!< sine amplitudes
    ModeSetPtr<Scalar> modes;
};

//---------------------------------------------------------------------------//

template<class Scalar = double>
ModeSet<Scalar> sample_modes(int n_modes,
                             SpectralKernel const& kernel,
                             DynamicsSpec const& dyn,
                             std::uint64_t seed,
                             SamplingOptions const& options = {},
                             double mass = -1)
{
    if (n_modes < 0)
        throw ConfigError("n_modes must be nonnegative", "n_modes");
    dyn.validate();
    if (mass < 0)
        mass = mollifier_mass(kernel);

    ModeSet<Scalar> m;
    m.seed = seed;
    m.px.resize(n_modes);
    m.py.resize(n_modes);
    m.ex.resize(n_modes);
    m.ey.resize(n_modes);
    m.rate.resize(n_modes);
    m.variance.setConstant(n_modes, Scalar(n_modes > 0 ? mass * inv_two_pi_sq / n_modes : 0));

    Xoshiro256pp gen(seed);
    double const rc = kernel.cutoff_radius;
    std::int64_t const budget = options.max_attempts_per_mode * std::max(n_modes, 1);
    std::int64_t attempts = 0;
    for (int j = 0; j < n_modes; ++j)
    {
        double r;
        double th;
        while (true)
        {
            if (++attempts > budget)
                throw NumericError("mode rejection sampling exhausted its budget after "
                                   + std::to_string(budget) + " proposals");
            r = rc * std::sqrt(uniform01(gen));
            th = 2 * std::numbers::pi * uniform01(gen);
            double const u = uniform01(gen);
            if (r > options.infrared_cutoff && u < mollifier_hat_radial(r, kernel))
                break;
        }
        double const p1 = r * std::cos(th);
        double const p2 = r * std::sin(th);
        double const norm = std::hypot(p1, p2);
        m.px[j] = Scalar(p1);
        m.py[j] = Scalar(p2);
        m.ex[j] = Scalar(p2 / norm);
        m.ey[j] = Scalar(-p1 / norm);
        m.rate[j] = Scalar(dynamics_rate_radial(norm, dyn));
    }
    return m;
}

//! Amplitudes drawn from the stationary law N(0, v_j)
template<class Scalar>
EnvironmentState<Scalar> init_stationary(ModeSetPtr<Scalar> modes, std::uint64_t seed)
{
    EnvironmentState<Scalar> st;
    auto const n = modes->size();
    st.a.resize(n);
    st.b.resize(n);
    NormalSampler<Xoshiro256pp> normal{Xoshiro256pp(seed)};
    for (Eigen::Index j = 0; j < n; ++j)
    {
        double const sd = std::sqrt(double(modes->variance[j]));
        st.a[j] = Scalar(sd * normal());
        st.b[j] = Scalar(sd * normal());
    }
    st.modes = std::move(modes);
    return st;
}

//! Exact Ornstein-Uhlenbeck transition of every amplitude over dt
template<class Scalar, class G>
void advance(EnvironmentState<Scalar>& st, double dt, NormalSampler<G>& normal)
{
    if (!(dt > 0))
        throw ConfigError("advance needs dt > 0");
    auto const& m = *st.modes;
    for (Eigen::Index j = 0; j < m.size(); ++j)
    {
        double const rate = double(m.rate[j]);
        double const decay = std::exp(-rate * dt);
        double const sd = std::sqrt(-double(m.variance[j]) * std::expm1(-2 * rate * dt));
        st.a[j] = Scalar(decay * double(st.a[j]) + sd * normal());
        st.b[j] = Scalar(decay * double(st.b[j]) + sd * normal());
    }
    st.time += dt;
}

template<class Scalar>
Eigen::Matrix<Scalar, 2, 1>
eval_field(EnvironmentState<Scalar> const& st, Eigen::Matrix<Scalar, 2, 1> const& x)
{
    auto const& m = *st.modes;
    auto const phase = m.px * x(0) + m.py * x(1);
    auto const amp = (st.a * phase.cos() + st.b * phase.sin()).eval();
    return {(m.ex * amp).sum(), (m.ey * amp).sum()};
}

struct DivergenceMethod
{
    enum class Kind
    {
        analytic,
        finite_difference,
    };
    Kind kind = Kind::analytic;
    double h = 1e-4;

    static DivergenceMethod analytic() { return {}; }
    static DivergenceMethod finite_difference(double h) { return {Kind::finite_difference, h}; }
};

template<class Scalar>
Scalar eval_divergence(EnvironmentState<Scalar> const& st,
                       Eigen::Matrix<Scalar, 2, 1> const& x,
                       DivergenceMethod method = {})
{
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    auto const& m = *st.modes;
    if (method.kind == DivergenceMethod::Kind::analytic)
    {
        // div of e_j f(p_j . x) is (e_j . p_j) f'(p_j . x), with e_j . p_j
        // evaluated through its definition p_j_perp . p_j / |p_j|
        auto const phase = m.px * x(0) + m.py * x(1);
        auto const dot = (m.py * m.px - m.px * m.py) / (m.px.square() + m.py.square()).sqrt();
        return (dot * (st.b * phase.cos() - st.a * phase.sin())).sum();
    }
    if (!(method.h > 0))
        throw ConfigError("finite-difference step must be positive");
    Scalar const h = Scalar(method.h);
    Vec const dx{h, 0};
    Vec const dy{0, h};
    Scalar const d1 = eval_field(st, Vec(x + dx))(0) - eval_field(st, Vec(x - dx))(0);
    Scalar const d2 = eval_field(st, Vec(x + dy))(1) - eval_field(st, Vec(x - dy))(1);
    return (d1 + d2) / (2 * h);
}

}  // namespace curldrift
