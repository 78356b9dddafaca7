// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace curldrift
{

//! Number of independent generator lanes feeding the environment noise
inline constexpr int noise_lanes = 16;

/*!
 * Structure-of-arrays state of one replica's environment, tracked at the
 * particle position.
 *
 * Besides the OU amplitudes the kernel keeps c_j = cos(p_j . X) and
 * s_j = sin(p_j . X), advanced by rotation with the particle increment and
 * periodically recomputed from X. Arrays are padded to a multiple of the
 * lane count with inert modes.
 */
template<class Scalar>
struct FieldTracker
{
    int n_modes = 0;
    int n_padded = 0;

    std::vector<Scalar> px, py, ex, ey;
    //! expm1(-m dt) and sqrt(v (1 - exp(-2 m dt)))
    std::vector<Scalar> decay, sigma;
    std::vector<Scalar> a, b, c, s;
    //! Uniform scratch; single precision draws in registers from the same lanes
    std::vector<Scalar> u1, u2;
    std::array<std::uint64_t, 4 * noise_lanes> lanes{};

    //! Allocate padded arrays for n modes
    void resize(int n);
    //! Seed the lane generators from a stream key
    void seed(std::uint64_t key);
};

//! Largest particle increment handled by the rotation polynomials
template<class Scalar>
constexpr double max_rotation_step()
{
    return 0.6;
}

//! Recompute c and s exactly at position (x1, x2)
template<class Scalar>
void resync_phases(FieldTracker<Scalar>& ft, double x1, double x2);

/*!
 * One environment step fused with the field evaluation.
 *
 * Rotates (c, s) by the particle increment (when rotate is set), applies the
 * exact OU transition to every amplitude with fresh Box-Muller normals and
 * returns the field at the new position and time.
 */
template<class Scalar>
std::array<double, 2> fused_step(FieldTracker<Scalar>& ft, double dx1, double dx2, bool rotate);

//! Field at the tracked position without advancing anything
template<class Scalar>
std::array<double, 2> tracked_field(FieldTracker<Scalar> const& ft);

//! Fill u1 in (0, 1) and u2 in [0, 1) from the lane generators
template<class Scalar>
void fill_uniforms(FieldTracker<Scalar>& ft);

//! Box-Muller pair from (u1, u2) using the kernel's approximations
template<class Scalar>
std::array<Scalar, 2> kernel_normal_pair(Scalar u1, Scalar u2);

//! Vectorizable double sincos with Cody-Waite reduction, |x| < 1e5
void sincos_reduced(double const* x, double* sin_out, double* cos_out, int n);

extern template struct FieldTracker<float>;
extern template struct FieldTracker<double>;

}  // namespace curldrift
