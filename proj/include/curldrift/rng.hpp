// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

namespace curldrift
{

//! Stream identifiers for the per-replica key derivation
enum class Stream : std::uint64_t
{
    wavevectors = 0,
    amplitudes = 1,
    environment_noise = 2,
    particle_noise = 3,
    verify_cases = 4,
};

//---------------------------------------------------------------------------//
/*!
 * SplitMix64, used to expand keys into generator states.
 */
class SplitMix64
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr result_type operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  private:
    std::uint64_t state_;
};

//! Key for (master seed, replica, stream); distinct inputs give unrelated keys
constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t replica, Stream stream)
{
    SplitMix64 a(master);
    std::uint64_t key = a();
    SplitMix64 b(key ^ (replica * 0xd1342543de82ef95ull));
    key = b();
    SplitMix64 c(key ^ ((static_cast<std::uint64_t>(stream) + 1) * 0xaf251af3b0f025b5ull));
    return c();
}

constexpr std::uint64_t rotl(std::uint64_t x, int k)
{
    return (x << k) | (x >> (64 - k));
}

//---------------------------------------------------------------------------//
/*!
 * xoshiro256++ seeded through SplitMix64.
 */
class Xoshiro256pp
{
  public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256pp(std::uint64_t seed)
    {
        SplitMix64 sm(seed);
        for (auto& s : s_)
            s = sm();
    }

    constexpr result_type operator()()
    {
        std::uint64_t const result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t const t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  private:
    std::array<std::uint64_t, 4> s_{};
};

//! Uniform in [0, 1) with 53 random bits
template<class G>
double uniform01(G& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

//! Uniform in (0, 1]
template<class G>
double uniform_open0(G& gen)
{
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

//! Pair of independent standard normals (Box-Muller)
template<class G>
std::pair<double, double> normal_pair(G& gen)
{
    double const r = std::sqrt(-2 * std::log(uniform_open0(gen)));
    double const th = 2 * std::numbers::pi * uniform01(gen);
    return {r * std::cos(th), r * std::sin(th)};
}

//! Buffered scalar normal sampler
template<class G>
class NormalSampler
{
  public:
    explicit NormalSampler(G gen) : gen_(std::move(gen)) {}

    double operator()()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        auto [a, b] = normal_pair(gen_);
        spare_ = b;
        has_spare_ = true;
        return a;
    }

    G& engine() { return gen_; }

  private:
    G gen_;
    double spare_ = 0;
    bool has_spare_ = false;
};

}  // namespace curldrift
