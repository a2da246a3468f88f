// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <array>
#include <cmath>

#include "image.hpp"

namespace facedepth
{
    enum class resample_mode
    {
        nearest,
        bilinear_hole_aware,
    };

    namespace detail
    {
        // Pixel-center alignment: destination center maps to source coordinate, clamped to the grid.
        inline double source_coordinate(int dst, int src_size, int dst_size) noexcept
        {
            const double s = (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
            return std::clamp(s, 0.0, static_cast<double>(src_size - 1));
        }

        struct axis_tap
        {
            int lo;
            int hi;
            double frac;
        };

        inline axis_tap bilinear_tap(int dst, int src_size, int dst_size) noexcept
        {
            const double s = source_coordinate(dst, src_size, dst_size);
            const int lo = static_cast<int>(std::floor(s));
            const int hi = std::min(lo + 1, src_size - 1);
            return {lo, hi, s - lo};
        }
    }

    // Bilinear interpolation over non-hole contributors with renormalized weights; a pixel whose
    // contributors are all holes stays a hole.
    inline depth_image resample(const depth_image& img, int target_width, int target_height, resample_mode mode)
    {
        if (target_width < 1 || target_height < 1)
            throw parameter_error("resample: target size must be >= 1");
        if (img.empty())
            throw parameter_error("resample: empty image");

        const int sw = img.width();
        const int sh = img.height();
        std::vector<depth_t> out(static_cast<std::size_t>(target_width) * static_cast<std::size_t>(target_height), hole);

        if (mode == resample_mode::nearest)
        {
            for (int y = 0; y < target_height; ++y)
            {
                const int sy = std::min(static_cast<int>(std::floor((y + 0.5) * sh / target_height)), sh - 1);
                for (int x = 0; x < target_width; ++x)
                {
                    const int sx = std::min(static_cast<int>(std::floor((x + 0.5) * sw / target_width)), sw - 1);
                    out[static_cast<std::size_t>(y) * target_width + x] = img.at(sx, sy);
                }
            }
            return depth_image(target_width, target_height, std::move(out));
        }

        std::vector<detail::axis_tap> xtaps(static_cast<std::size_t>(target_width));
        for (int x = 0; x < target_width; ++x)
            xtaps[static_cast<std::size_t>(x)] = detail::bilinear_tap(x, sw, target_width);

        for (int y = 0; y < target_height; ++y)
        {
            const auto ty = detail::bilinear_tap(y, sh, target_height);
            for (int x = 0; x < target_width; ++x)
            {
                const auto& tx = xtaps[static_cast<std::size_t>(x)];
                const std::array<int, 4> xs{tx.lo, tx.hi, tx.lo, tx.hi};
                const std::array<int, 4> ys{ty.lo, ty.lo, ty.hi, ty.hi};
                const std::array<double, 4> ws{(1.0 - tx.frac) * (1.0 - ty.frac), tx.frac * (1.0 - ty.frac),
                                               (1.0 - tx.frac) * ty.frac, tx.frac * ty.frac};
                double sum = 0.0;
                double weight = 0.0;
                for (int k = 0; k < 4; ++k)
                {
                    const depth_t v = img.at(xs[k], ys[k]);
                    if (ws[k] <= 0.0 || is_hole(v))
                        continue;
                    sum += ws[k] * v;
                    weight += ws[k];
                }
                if (weight > 0.0)
                    out[static_cast<std::size_t>(y) * target_width + x] = clamp_to_valid(sum / weight);
            }
        }
        return depth_image(target_width, target_height, std::move(out));
    }

    inline depth_image resample(const depth_image& img, int target, resample_mode mode)
    {
        return resample(img, target, target, mode);
    }
}
