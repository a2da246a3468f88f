// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <limits>
#include <span>

#include "image.hpp"

namespace facedepth
{
    inline constexpr double default_window_span_mm = 250.0;

    // Depth window mapped onto [0, 65534]; starts at the nearest valid sample.
    struct normalization_window
    {
        double near_depth_mm = 0.0;
        double span_mm = default_window_span_mm;

        void validate() const
        {
            if (!(span_mm > 0.0))
                throw parameter_error("normalization_window: span must be > 0");
            if (!(near_depth_mm >= 0.0))
                throw parameter_error("normalization_window: near_depth must be >= 0");
        }
    };

    // Millimeters to depth units under a window of the given span.
    inline long long mm_to_depth_units(double mm, double span_mm = default_window_span_mm)
    {
        return round_half_away(mm / span_mm * max_valid_depth);
    }

    // Window anchored at the closest non-hole (non-zero) raw sample.
    inline normalization_window closest_depth_window(std::span<const double> raw_mm,
                                                     double span_mm = default_window_span_mm)
    {
        double nearest = std::numeric_limits<double>::infinity();
        for (double v : raw_mm)
            if (v > 0.0 && v < nearest)
                nearest = v;
        if (nearest == std::numeric_limits<double>::infinity())
            throw parameter_error("no valid depth");
        return {nearest, span_mm};
    }

    // Raw millimeter grid (0 = hole) to a 16-bit depth image.
    inline depth_image normalize_depth(std::span<const double> raw_mm, int width, int height,
                                       const normalization_window& window)
    {
        window.validate();
        if (raw_mm.empty() || raw_mm.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw parameter_error("normalize_depth: raw grid is empty or does not match dimensions");

        std::vector<depth_t> out(raw_mm.size(), hole);
        bool any_valid = false;
        for (std::size_t i = 0; i < raw_mm.size(); ++i)
        {
            const double v = raw_mm[i];
            if (!(v > 0.0))
                continue;
            any_valid = true;
            out[i] = clamp_to_valid((v - window.near_depth_mm) / window.span_mm * max_valid_depth);
        }
        if (!any_valid)
            throw parameter_error("no valid depth");
        return depth_image(width, height, std::move(out));
    }

    inline depth_image normalize_depth(std::span<const double> raw_mm, int width, int height)
    {
        return normalize_depth(raw_mm, width, height, closest_depth_window(raw_mm));
    }
}
