// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace facedepth
{
    inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Stream seed split from a base seed and a path of indices.
    inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept
    {
        std::uint64_t s = splitmix64(base);
        for (std::uint64_t p : path)
            s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
        return s;
    }

    // mt19937_64 with distribution code owned here so streams do not depend on the standard library's
    // distribution implementations.
    class random_stream
    {
    public:
        explicit random_stream(std::uint64_t seed) : _engine(seed) {}

        std::uint64_t next_u64() { return _engine(); }

        // [0, 1)
        double uniform01() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

        // Inclusive integer range, unbiased.
        long long uniform_int(long long lo, long long hi)
        {
            if (hi <= lo)
                return lo;
            const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
            if (span == 0)
                return static_cast<long long>(_engine());
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
            std::uint64_t r;
            do
                r = _engine();
            while (r >= limit);
            return lo + static_cast<long long>(r % span);
        }

        template <typename T>
        void shuffle(std::vector<T>& v)
        {
            for (std::size_t i = v.size(); i > 1; --i)
            {
                const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<long long>(i - 1)));
                std::swap(v[i - 1], v[j]);
            }
        }

    private:
        std::mt19937_64 _engine;
    };
}
