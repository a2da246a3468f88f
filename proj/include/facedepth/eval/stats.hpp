// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "../error.hpp"

namespace facedepth::eval
{
    struct aggregate_stats
    {
        double mean = 0.0;
        double std = 0.0;  // n - 1 denominator
        // Undefined (empty) when std is 0.
        std::optional<double> skewness;         // adjusted Fisher-Pearson G1
        std::optional<double> excess_kurtosis;  // bias-corrected G2
        std::size_t n = 0;
    };

    inline aggregate_stats aggregate(std::span<const double> values)
    {
        const std::size_t n = values.size();
        if (n < 4)
            throw parameter_error("aggregate: need at least 4 values, got " + std::to_string(n));
        for (double v : values)
            if (!std::isfinite(v))
                throw parameter_error("aggregate: non-finite value");

        aggregate_stats s;
        s.n = n;
        if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; }))
        {
            s.mean = values[0];
            return s;
        }
        double sum = 0.0;
        for (double v : values)
            sum += v;
        s.mean = sum / static_cast<double>(n);

        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double v : values)
        {
            const double d = v - s.mean;
            const double d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        const double nd = static_cast<double>(n);
        s.std = std::sqrt(m2 / (nd - 1.0));
        m2 /= nd;
        m3 /= nd;
        m4 /= nd;
        const double g1 = m3 / std::pow(m2, 1.5);
        const double g2 = m4 / (m2 * m2) - 3.0;
        s.skewness = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
        s.excess_kurtosis = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
        return s;
    }
}
