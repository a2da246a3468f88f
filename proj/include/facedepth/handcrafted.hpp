// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Decimation, hole-filling and spatial edge-preserving enhancers operating on 16-bit depth with the
// 65535 hole sentinel.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "image.hpp"
#include "resample.hpp"

namespace facedepth
{
    struct decimation_config
    {
        // Kernel edge length. 2 and 3 take the median, 4 and above the mean.
        int magnitude = 2;

        void validate() const
        {
            if (magnitude < 2 || magnitude > 8)
                throw parameter_error("decimation magnitude must be in [2, 8], got " + std::to_string(magnitude));
        }

        friend bool operator==(const decimation_config&, const decimation_config&) = default;
    };

    enum class hole_fill_mode
    {
        left,
        farest_from_around,
        nearest_from_around,
    };

    inline const char* to_string(hole_fill_mode m)
    {
        switch (m)
        {
        case hole_fill_mode::left: return "left";
        case hole_fill_mode::farest_from_around: return "farest_from_around";
        case hole_fill_mode::nearest_from_around: return "nearest_from_around";
        }
        return "?";
    }

    inline constexpr int unlimited_radius = std::numeric_limits<int>::max();

    // The SDK expresses delta in 8-bit-era depth levels; scaled by this factor for 16-bit normalized depth.
    inline constexpr double sdk_delta_scale = 256.0;
    inline constexpr double sdk_default_delta = 20.0;

    struct spatial_config
    {
        int iterations = 2;
        double smooth_alpha = 0.5;
        double smooth_delta = sdk_default_delta * sdk_delta_scale;
        // Disabled when empty; otherwise 2, 4, 8, 16 or unlimited_radius.
        std::optional<int> hole_fill_radius;

        void validate() const
        {
            if (iterations < 1)
                throw parameter_error("spatial iterations must be >= 1");
            if (!(smooth_alpha > 0.0 && smooth_alpha <= 1.0))
                throw parameter_error("spatial smooth_alpha must be in (0, 1]");
            if (!(smooth_delta >= 1.0))
                throw parameter_error("spatial smooth_delta must be >= 1");
            if (hole_fill_radius)
            {
                const int r = *hole_fill_radius;
                if (r != 2 && r != 4 && r != 8 && r != 16 && r != unlimited_radius)
                    throw parameter_error("spatial hole_fill_radius must be one of 2, 4, 8, 16, unlimited");
            }
        }

        friend bool operator==(const spatial_config&, const spatial_config&) = default;
    };

    namespace detail
    {
        inline depth_t window_median(std::vector<depth_t>& values)
        {
            std::sort(values.begin(), values.end());
            const std::size_t n = values.size();
            if (n % 2 == 1)
                return values[n / 2];
            return static_cast<depth_t>(round_half_away((static_cast<double>(values[n / 2 - 1]) + values[n / 2]) / 2.0));
        }

        inline depth_t window_mean(const std::vector<depth_t>& values)
        {
            long long sum = 0;
            for (depth_t v : values)
                sum += v;
            return static_cast<depth_t>(round_half_away(static_cast<double>(sum) / static_cast<double>(values.size())));
        }

        // One directional run over a line of the working buffer.
        template <typename Index>
        void smooth_line(std::vector<double>& buf, const std::vector<std::uint8_t>& valid, int count, Index&& at,
                         double alpha, double delta)
        {
            bool have_prev = false;
            double prev = 0.0;
            for (int i = 0; i < count; ++i)
            {
                const std::size_t k = at(i);
                if (!valid[k])
                {
                    have_prev = false;
                    continue;
                }
                const double p = buf[k];
                if (have_prev && std::abs(p - prev) <= delta)
                {
                    const double out = alpha * p + (1.0 - alpha) * prev;
                    buf[k] = out;
                    prev = out;
                }
                else
                {
                    prev = p;
                    have_prev = true;
                }
            }
        }

        template <typename Index>
        void fill_line_runs(std::vector<depth_t>& px, int count, Index&& at, int radius)
        {
            std::optional<depth_t> last;
            int run = 0;
            for (int i = 0; i < count; ++i)
            {
                const std::size_t k = at(i);
                if (!is_hole(px[k]))
                {
                    last = px[k];
                    run = 0;
                    continue;
                }
                ++run;
                if (last && run <= radius)
                    px[k] = *last;
            }
        }
    }

    // Window-condensed image before upscaling: ceil(w/m) x ceil(h/m), truncated windows at the edges.
    inline depth_image decimate_downsample(const depth_image& img, const decimation_config& cfg)
    {
        cfg.validate();
        const int m = cfg.magnitude;
        const int ow = (img.width() + m - 1) / m;
        const int oh = (img.height() + m - 1) / m;
        std::vector<depth_t> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh), hole);
        std::vector<depth_t> window;
        window.reserve(static_cast<std::size_t>(m * m));

        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
            {
                window.clear();
                const int x_end = std::min(img.width(), (ox + 1) * m);
                const int y_end = std::min(img.height(), (oy + 1) * m);
                for (int y = oy * m; y < y_end; ++y)
                    for (int x = ox * m; x < x_end; ++x)
                        if (const depth_t v = img.at(x, y); !is_hole(v))
                            window.push_back(v);
                if (window.empty())
                    continue;
                out[static_cast<std::size_t>(oy) * ow + ox] = m <= 3 ? detail::window_median(window)
                                                                     : detail::window_mean(window);
            }
        return depth_image(ow, oh, std::move(out));
    }

    inline depth_image decimate(const depth_image& img, const decimation_config& cfg)
    {
        const depth_image small = decimate_downsample(img, cfg);
        return resample(small, img.width(), img.height(), resample_mode::bilinear_hole_aware);
    }

    // Single left-to-right raster scan; neighbors are read from the already-filled output.
    inline depth_image fill_holes(const depth_image& img, hole_fill_mode mode)
    {
        std::vector<depth_t> px = img.vector();
        const int w = img.width();
        const int h = img.height();
        auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                if (!is_hole(px[idx(x, y)]))
                    continue;
                if (mode == hole_fill_mode::left)
                {
                    if (x > 0)
                        px[idx(x, y)] = px[idx(x - 1, y)];
                    continue;
                }

                constexpr int offsets[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
                std::optional<depth_t> best;
                for (const auto& o : offsets)
                {
                    const int nx = x + o[0];
                    const int ny = y + o[1];
                    if (nx < 0 || ny < 0 || nx >= w)
                        continue;
                    const depth_t v = px[idx(nx, ny)];
                    if (is_hole(v))
                        continue;
                    if (!best)
                        best = v;
                    else
                        best = mode == hole_fill_mode::farest_from_around ? std::max(*best, v) : std::min(*best, v);
                }
                if (best)
                    px[idx(x, y)] = *best;
            }
        return depth_image(w, h, std::move(px));
    }

    // Edge-preserving recursive smoothing: per iteration L->R and R->L on every row, then T->B and B->T
    // on every column. Optional radius-limited bidirectional per-row hole filling afterwards.
    inline depth_image spatial_filter(const depth_image& img, const spatial_config& cfg)
    {
        cfg.validate();
        const int w = img.width();
        const int h = img.height();
        const std::size_t n = img.size();

        std::vector<double> buf(n);
        std::vector<std::uint8_t> valid(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            valid[i] = is_hole(img[i]) ? 0 : 1;
            buf[i] = img[i];
        }

        const auto uw = static_cast<std::size_t>(w);
        for (int it = 0; it < cfg.iterations; ++it)
        {
            for (int y = 0; y < h; ++y)
            {
                const std::size_t row = static_cast<std::size_t>(y) * uw;
                detail::smooth_line(buf, valid, w, [&](int i) { return row + static_cast<std::size_t>(i); },
                                    cfg.smooth_alpha, cfg.smooth_delta);
                detail::smooth_line(buf, valid, w, [&](int i) { return row + static_cast<std::size_t>(w - 1 - i); },
                                    cfg.smooth_alpha, cfg.smooth_delta);
            }
            for (int x = 0; x < w; ++x)
            {
                const auto col = static_cast<std::size_t>(x);
                detail::smooth_line(buf, valid, h, [&](int i) { return static_cast<std::size_t>(i) * uw + col; },
                                    cfg.smooth_alpha, cfg.smooth_delta);
                detail::smooth_line(buf, valid, h,
                                    [&](int i) { return static_cast<std::size_t>(h - 1 - i) * uw + col; },
                                    cfg.smooth_alpha, cfg.smooth_delta);
            }
        }

        std::vector<depth_t> px(n);
        for (std::size_t i = 0; i < n; ++i)
            px[i] = valid[i] ? clamp_to_valid(buf[i]) : hole;

        if (cfg.hole_fill_radius)
        {
            const int radius = *cfg.hole_fill_radius;
            for (int y = 0; y < h; ++y)
            {
                const std::size_t row = static_cast<std::size_t>(y) * uw;
                detail::fill_line_runs(px, w, [&](int i) { return row + static_cast<std::size_t>(i); }, radius);
                detail::fill_line_runs(px, w, [&](int i) { return row + static_cast<std::size_t>(w - 1 - i); }, radius);
            }
        }
        return depth_image(w, h, std::move(px));
    }
}
