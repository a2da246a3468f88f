// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Face-region quality metrics. Depth values are scaled to [0, 1] by 1/65535; the hole sentinel
// therefore counts as 1.0 wherever it is not excluded.

#pragma once

#include <cmath>
#include <vector>

#include "../image.hpp"

namespace facedepth::eval
{
    inline constexpr double unit_scale = 1.0 / static_cast<double>(hole);

    namespace detail
    {
        inline void require_mask(const depth_image& img, const face_mask& mask, const char* what)
        {
            if (!mask.matches(img))
                throw structural_error(std::string(what) + ": mask shape does not match image");
            if (mask.population() == 0)
                throw parameter_error(std::string(what) + ": empty face mask");
        }
    }

    inline double rmse_face(const depth_image& gt, const depth_image& out, const face_mask& mask)
    {
        require_same_shape(gt, out, "rmse_face");
        detail::require_mask(gt, mask, "rmse_face");
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < gt.size(); ++i)
        {
            if (!mask[i])
                continue;
            const double d = (static_cast<double>(gt[i]) - static_cast<double>(out[i])) * unit_scale;
            sum += d * d;
            ++n;
        }
        return std::sqrt(sum / static_cast<double>(n));
    }

    // |center - mean of valid 8-neighbors|; NaN where the center is a hole or has no valid neighbor.
    inline double roughness_response(const depth_image& img, int x, int y)
    {
        if (is_hole(img.at(x, y)))
            return std::nan("");
        double sum = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
            {
                if ((dx == 0 && dy == 0) || !img.contains(x + dx, y + dy))
                    continue;
                const depth_t v = img.at(x + dx, y + dy);
                if (is_hole(v))
                    continue;
                sum += v;
                ++n;
            }
        if (n == 0)
            return std::nan("");
        return std::abs(static_cast<double>(img.at(x, y)) - sum / n) * unit_scale;
    }

    // Mean response over mask pixels that have one; 0 when none do.
    inline double roughness(const depth_image& img, const face_mask& mask)
    {
        detail::require_mask(img, mask, "roughness");
        double sum = 0.0;
        std::size_t n = 0;
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
            {
                if (!mask.at(x, y))
                    continue;
                const double r = roughness_response(img, x, y);
                if (std::isnan(r))
                    continue;
                sum += r;
                ++n;
            }
        return n == 0 ? 0.0 : sum / static_cast<double>(n);
    }

    inline double hole_percentage(const depth_image& img, const face_mask& mask)
    {
        detail::require_mask(img, mask, "hole_percentage");
        std::size_t holes = 0;
        for (std::size_t i = 0; i < img.size(); ++i)
            if (mask[i] && is_hole(img[i]))
                ++holes;
        return static_cast<double>(holes) / static_cast<double>(mask.population());
    }

    // RMSE between input and enhanced over face pixels that were valid in the input.
    inline double falsification_rmse(const depth_image& input, const depth_image& enhanced, const face_mask& mask)
    {
        require_same_shape(input, enhanced, "falsification_rmse");
        if (!mask.matches(input))
            throw structural_error("falsification_rmse: mask shape does not match image");
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < input.size(); ++i)
        {
            if (!mask[i] || is_hole(input[i]))
                continue;
            const double d = (static_cast<double>(input[i]) - static_cast<double>(enhanced[i])) * unit_scale;
            sum += d * d;
            ++n;
        }
        if (n == 0)
            throw parameter_error("falsification_rmse: no non-hole input pixel under the face mask");
        return std::sqrt(sum / static_cast<double>(n));
    }
}
