// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#include "curldrift/step_kernel.hpp"

#include <cmath>
#include <cstring>
#include <type_traits>

#include "curldrift/rng.hpp"

namespace curldrift
{
namespace
{
template<class Scalar>
struct Degrees;

template<>
struct Degrees<float>
{
    static constexpr int rot_cos = 5;
    static constexpr int rot_sin = 4;
    static constexpr int bm_cos = 5;
    static constexpr int bm_sin = 5;
    static constexpr int log = 5;
};

template<>
struct Degrees<double>
{
    static constexpr int rot_cos = 10;
    static constexpr int rot_sin = 9;
    static constexpr int bm_cos = 10;
    static constexpr int bm_sin = 10;
    static constexpr int log = 12;
};

template<class Scalar, int N>
struct Coeffs
{
    Scalar v[N];
};

//! Taylor coefficients of cos (odd = false) or sin / x (odd = true) in x^2
template<class Scalar, int N>
constexpr Coeffs<Scalar, N> taylor(bool odd)
{
    Coeffs<Scalar, N> out{};
    double sign = 1;
    for (int i = 0; i < N; ++i)
    {
        double f = 1;
        for (int j = 2; j <= 2 * i + (odd ? 1 : 0); ++j)
            f *= j;
        out.v[i] = static_cast<Scalar>(sign / f);
        sign = -sign;
    }
    return out;
}

//! 2 / (2k + 1), the atanh series of log((1 + t) / (1 - t)) in t^2
template<class Scalar, int N>
constexpr Coeffs<Scalar, N> atanh_series()
{
    Coeffs<Scalar, N> out{};
    for (int i = 0; i < N; ++i)
        out.v[i] = static_cast<Scalar>(2.0 / (2 * i + 1));
    return out;
}

template<class Scalar, int N>
[[gnu::always_inline]] inline Scalar horner(Scalar x, Coeffs<Scalar, N> const& c)
{
    Scalar acc = c.v[N - 1];
    for (int i = N - 2; i >= 0; --i)
        acc = acc * x + c.v[i];
    return acc;
}

template<class Scalar>
struct Tables
{
    using D = Degrees<Scalar>;
    static constexpr auto rot_cos = taylor<Scalar, D::rot_cos>(false);
    static constexpr auto rot_sin = taylor<Scalar, D::rot_sin>(true);
    static constexpr auto bm_cos = taylor<Scalar, D::bm_cos>(false);
    static constexpr auto bm_sin = taylor<Scalar, D::bm_sin>(true);
    static constexpr auto log = atanh_series<Scalar, D::log>();
};

//! Natural log of u > 0 (normal range) via exponent split and atanh series
template<class Scalar>
[[gnu::always_inline]] inline Scalar fast_log(Scalar u)
{
    Scalar m;
    Scalar e;
    if constexpr (std::is_same_v<Scalar, float>)
    {
        std::uint32_t bits;
        std::memcpy(&bits, &u, sizeof(bits));
        e = static_cast<Scalar>(static_cast<int>((bits >> 23) & 0xffu) - 127);
        std::uint32_t const mb = (bits & 0x7fffffu) | 0x3f800000u;
        std::memcpy(&m, &mb, sizeof(m));
    }
    else
    {
        std::uint64_t bits;
        std::memcpy(&bits, &u, sizeof(bits));
        e = static_cast<Scalar>(static_cast<int>((bits >> 52) & 0x7ffu) - 1023);
        std::uint64_t const mb = (bits & 0xfffffffffffffull) | 0x3ff0000000000000ull;
        std::memcpy(&m, &mb, sizeof(m));
    }
    bool const big = m > Scalar(1.4142135623730951);
    m = big ? m * Scalar(0.5) : m;
    e = big ? e + Scalar(1) : e;
    Scalar const t = (m - Scalar(1)) / (m + Scalar(1));
    return t * horner(t * t, Tables<Scalar>::log) + e * Scalar(0.6931471805599453);
}

template<class Scalar>
[[gnu::always_inline]] inline void box_muller(Scalar u1, Scalar u2, Scalar& n1, Scalar& n2)
{
    Scalar const r = std::sqrt(Scalar(-2) * fast_log(u1));
    // angle q pi/2 + alpha with alpha uniform on [-pi/4, pi/4)
    Scalar const w = Scalar(4) * u2;
    Scalar const q = std::floor(w);
    Scalar const alpha = (w - q - Scalar(0.5)) * Scalar(1.5707963267948966);
    Scalar const a2 = alpha * alpha;
    Scalar const ca = horner(a2, Tables<Scalar>::bm_cos);
    Scalar const sa = alpha * horner(a2, Tables<Scalar>::bm_sin);
    Scalar const xa = q < Scalar(0.5) ? ca : (q < Scalar(1.5) ? -sa : (q < Scalar(2.5) ? -ca : sa));
    Scalar const xb = q < Scalar(0.5) ? sa : (q < Scalar(1.5) ? ca : (q < Scalar(2.5) ? -sa : -ca));
    n1 = r * xa;
    n2 = r * xb;
}

template<bool Rotate, class Scalar>
std::array<double, 2> step_impl(FieldTracker<Scalar>& ft, Scalar dx1, Scalar dx2)
{
    constexpr int L = noise_lanes;
    constexpr bool fused_noise = std::is_same_v<Scalar, float>;
    if constexpr (!fused_noise)
        fill_uniforms(ft);
    int const n = ft.n_padded;
    Scalar const* __restrict px = ft.px.data();
    Scalar const* __restrict py = ft.py.data();
    Scalar const* __restrict ex = ft.ex.data();
    Scalar const* __restrict ey = ft.ey.data();
    Scalar const* __restrict decay = ft.decay.data();
    Scalar const* __restrict sigma = ft.sigma.data();
    Scalar const* __restrict u1 = ft.u1.data();
    Scalar const* __restrict u2 = ft.u2.data();
    Scalar* __restrict a = ft.a.data();
    Scalar* __restrict b = ft.b.data();
    Scalar* __restrict c = ft.c.data();
    Scalar* __restrict s = ft.s.data();

    alignas(64) std::uint64_t st[4][L];
    std::memcpy(st, ft.lanes.data(), sizeof(st));
    alignas(64) Scalar acc1[L] = {};
    alignas(64) Scalar acc2[L] = {};

    for (int base = 0; base < n; base += L)
    {
#pragma omp simd aligned(acc1, acc2 : 64)
        for (int l = 0; l < L; ++l)
        {
            int const j = base + l;
            Scalar v1;
            Scalar v2;
            if constexpr (fused_noise)
            {
                std::uint64_t const r = rotl(st[0][l] + st[3][l], 23) + st[0][l];
                std::uint64_t const t = st[1][l] << 17;
                st[2][l] ^= st[0][l];
                st[3][l] ^= st[1][l];
                st[1][l] ^= st[2][l];
                st[0][l] ^= st[3][l];
                st[2][l] ^= t;
                st[3][l] = rotl(st[3][l], 45);
                v1 = (static_cast<float>(static_cast<std::uint32_t>(r >> 40)) + 0.5f) * 0x1.0p-24f;
                v2 = static_cast<float>(static_cast<std::uint32_t>(r >> 16) & 0xffffffu)
                     * 0x1.0p-24f;
            }
            else
            {
                v1 = u1[j];
                v2 = u2[j];
            }
            Scalar cj = c[j];
            Scalar sj = s[j];
            if constexpr (Rotate)
            {
                Scalar const ph = px[j] * dx1 + py[j] * dx2;
                Scalar const p2 = ph * ph;
                Scalar const cp = horner(p2, Tables<Scalar>::rot_cos);
                Scalar const sp = ph * horner(p2, Tables<Scalar>::rot_sin);
                Scalar const cn = cj * cp - sj * sp;
                sj = sj * cp + cj * sp;
                cj = cn;
                c[j] = cj;
                s[j] = sj;
            }
            Scalar g1;
            Scalar g2;
            box_muller(v1, v2, g1, g2);
            Scalar const aj = a[j] + (decay[j] * a[j] + sigma[j] * g1);
            Scalar const bj = b[j] + (decay[j] * b[j] + sigma[j] * g2);
            a[j] = aj;
            b[j] = bj;
            Scalar const amp = aj * cj + bj * sj;
            acc1[l] += ex[j] * amp;
            acc2[l] += ey[j] * amp;
        }
    }
    if constexpr (fused_noise)
        std::memcpy(ft.lanes.data(), st, sizeof(st));
    double w1 = 0;
    double w2 = 0;
    for (int l = 0; l < L; ++l)
    {
        w1 += acc1[l];
        w2 += acc2[l];
    }
    return {w1, w2};
}

}  // namespace

//---------------------------------------------------------------------------//

template<class Scalar>
void FieldTracker<Scalar>::resize(int n)
{
    n_modes = n;
    n_padded = (n + noise_lanes - 1) / noise_lanes * noise_lanes;
    for (auto* v : {&px, &py, &ex, &ey, &decay, &sigma, &a, &b, &c, &s, &u1, &u2})
        v->assign(static_cast<std::size_t>(n_padded), Scalar(0));
    // inert padding: c = 1 keeps the rotation well conditioned
    for (int j = n; j < n_padded; ++j)
        c[j] = Scalar(1);
}

template<class Scalar>
void FieldTracker<Scalar>::seed(std::uint64_t key)
{
    SplitMix64 sm(key);
    for (auto& w : lanes)
        w = sm();
}

template<class Scalar>
void fill_uniforms(FieldTracker<Scalar>& ft)
{
    constexpr int L = noise_lanes;
    std::uint64_t* __restrict s0 = ft.lanes.data();
    std::uint64_t* __restrict s1 = s0 + L;
    std::uint64_t* __restrict s2 = s0 + 2 * L;
    std::uint64_t* __restrict s3 = s0 + 3 * L;
    Scalar* __restrict u1 = ft.u1.data();
    Scalar* __restrict u2 = ft.u2.data();

    auto next = [&](int l) {
        std::uint64_t const r = rotl(s0[l] + s3[l], 23) + s0[l];
        std::uint64_t const t = s1[l] << 17;
        s2[l] ^= s0[l];
        s3[l] ^= s1[l];
        s1[l] ^= s2[l];
        s0[l] ^= s3[l];
        s2[l] ^= t;
        s3[l] = rotl(s3[l], 45);
        return r;
    };

    for (int base = 0; base < ft.n_padded; base += L)
    {
        if constexpr (std::is_same_v<Scalar, float>)
        {
#pragma omp simd
            for (int l = 0; l < L; ++l)
            {
                std::uint64_t const r = next(l);
                u1[base + l] = (static_cast<float>(static_cast<std::uint32_t>(r >> 40)) + 0.5f)
                               * 0x1.0p-24f;
                u2[base + l] = static_cast<float>(static_cast<std::uint32_t>(r >> 16) & 0xffffffu)
                               * 0x1.0p-24f;
            }
        }
        else
        {
#pragma omp simd
            for (int l = 0; l < L; ++l)
                u1[base + l] = (static_cast<double>(next(l) >> 11) + 0.5) * 0x1.0p-53;
#pragma omp simd
            for (int l = 0; l < L; ++l)
                u2[base + l] = static_cast<double>(next(l) >> 11) * 0x1.0p-53;
        }
    }
}

template<class Scalar>
std::array<Scalar, 2> kernel_normal_pair(Scalar u1, Scalar u2)
{
    Scalar n1;
    Scalar n2;
    box_muller(u1, u2, n1, n2);
    return {n1, n2};
}

void sincos_reduced(double const* __restrict x, double* __restrict sin_out, double* __restrict cos_out, int n)
{
    constexpr double two_over_pi = 6.36619772367581382433e-01;
    constexpr double pio2_1 = 1.57079632673412561417e+00;
    constexpr double pio2_2 = 6.07710050630396597660e-11;
    constexpr double pio2_2t = 2.02226624879595063154e-21;
    constexpr double shifter = 6755399441055744.0;
    constexpr double S1 = -1.66666666666666324348e-01, S2 = 8.33333333332248946124e-03,
                     S3 = -1.98412698298579493134e-04, S4 = 2.75573137070700676789e-06,
                     S5 = -2.50507602534068634195e-08, S6 = 1.58969099521155010221e-10;
    constexpr double C1 = 4.16666666666666019037e-02, C2 = -1.38888888888741095749e-03,
                     C3 = 2.48015872894767294178e-05, C4 = -2.75573143513906633035e-07,
                     C5 = 2.08757232129817482790e-09, C6 = -1.13596475577881948265e-11;
#pragma omp simd
    for (int i = 0; i < n; ++i)
    {
        double const xi = x[i];
        double const k = (xi * two_over_pi + shifter) - shifter;
        double r = xi - k * pio2_1;
        r = r - k * pio2_2;
        r = r - k * pio2_2t;
        double const z = r * r;
        double const sr = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
        double const cr = 1.0 - 0.5 * z
                          + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
        auto const q = static_cast<std::int64_t>(k) & 3;
        sin_out[i] = q == 0 ? sr : (q == 1 ? cr : (q == 2 ? -sr : -cr));
        cos_out[i] = q == 0 ? cr : (q == 1 ? -sr : (q == 2 ? -cr : sr));
    }
}

template<class Scalar>
void resync_phases(FieldTracker<Scalar>& ft, double x1, double x2)
{
    int const n = ft.n_modes;
    thread_local std::vector<double> phase, sn, cs;
    phase.resize(static_cast<std::size_t>(n));
    sn.resize(phase.size());
    cs.resize(phase.size());
    for (int j = 0; j < n; ++j)
        phase[j] = static_cast<double>(ft.px[j]) * x1 + static_cast<double>(ft.py[j]) * x2;
    sincos_reduced(phase.data(), sn.data(), cs.data(), n);
    for (int j = 0; j < n; ++j)
    {
        ft.c[j] = static_cast<Scalar>(cs[j]);
        ft.s[j] = static_cast<Scalar>(sn[j]);
    }
}

template<class Scalar>
std::array<double, 2> fused_step(FieldTracker<Scalar>& ft, double dx1, double dx2, bool rotate)
{
    if (rotate)
        return step_impl<true>(ft, static_cast<Scalar>(dx1), static_cast<Scalar>(dx2));
    return step_impl<false>(ft, Scalar(0), Scalar(0));
}

template<class Scalar>
std::array<double, 2> tracked_field(FieldTracker<Scalar> const& ft)
{
    Scalar w1 = 0;
    Scalar w2 = 0;
    for (int j = 0; j < ft.n_padded; ++j)
    {
        Scalar const amp = ft.a[j] * ft.c[j] + ft.b[j] * ft.s[j];
        w1 += ft.ex[j] * amp;
        w2 += ft.ey[j] * amp;
    }
    return {static_cast<double>(w1), static_cast<double>(w2)};
}

template struct FieldTracker<float>;
template struct FieldTracker<double>;
template void fill_uniforms(FieldTracker<float>&);
template void fill_uniforms(FieldTracker<double>&);
template std::array<float, 2> kernel_normal_pair(float, float);
template std::array<double, 2> kernel_normal_pair(double, double);
template void resync_phases(FieldTracker<float>&, double, double);
template void resync_phases(FieldTracker<double>&, double, double);
template std::array<double, 2> fused_step(FieldTracker<float>&, double, double, bool);
template std::array<double, 2> fused_step(FieldTracker<double>&, double, double, bool);
template std::array<double, 2> tracked_field(FieldTracker<float> const&);
template std::array<double, 2> tracked_field(FieldTracker<double> const&);

}  // namespace curldrift
