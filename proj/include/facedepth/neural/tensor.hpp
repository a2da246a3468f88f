// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "../image.hpp"

namespace facedepth::neural
{
    // Channel-major (C, H, W) activation buffer.
    template <typename T>
    struct tensor
    {
        int channels = 0;
        int height = 0;
        int width = 0;
        std::vector<T> data;

        tensor() = default;
        tensor(int c, int h, int w, T fill = T(0))
            : channels(c), height(h), width(w),
              data(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill)
        {
        }

        std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
        std::size_t size() const noexcept { return data.size(); }

        T* channel(int c) noexcept { return data.data() + static_cast<std::size_t>(c) * plane(); }
        const T* channel(int c) const noexcept { return data.data() + static_cast<std::size_t>(c) * plane(); }

        T& at(int c, int y, int x) noexcept { return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * width + x]; }
        T at(int c, int y, int x) const noexcept { return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * width + x]; }

        bool same_shape(const tensor& o) const noexcept
        {
            return channels == o.channels && height == o.height && width == o.width;
        }

        std::string shape_string() const
        {
            return "(" + std::to_string(channels) + ", " + std::to_string(height) + ", " + std::to_string(width) + ")";
        }

        bool all_finite() const
        {
            return std::all_of(data.begin(), data.end(), [](T v) { return std::isfinite(v); });
        }
    };

    // Depth value / 65535; holes encode as exactly 1.
    template <typename T = float>
    tensor<T> encode(const depth_image& img)
    {
        tensor<T> t(1, img.height(), img.width());
        for (std::size_t i = 0; i < img.size(); ++i)
            t.data[i] = static_cast<T>(img[i]) / static_cast<T>(hole);
        return t;
    }

    // Clamp to [0, 1], then quantize half away from zero; only values >= 1 - 1/(2*65535) decode to the hole sentinel.
    template <typename T>
    depth_image decode(const tensor<T>& t)
    {
        if (t.channels != 1)
            throw structural_error("decode: expected 1 channel, got " + std::to_string(t.channels));
        std::vector<depth_t> px(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            double v = static_cast<double>(t.data[i]);
            if (std::isnan(v))
                v = 1.0;
            v = std::clamp(v, 0.0, 1.0);
            px[i] = static_cast<depth_t>(round_half_away(v * hole));
        }
        return depth_image(t.width, t.height, std::move(px));
    }
}
