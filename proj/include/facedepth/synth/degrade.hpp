// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "../image.hpp"
#include "../normalize.hpp"
#include "../random.hpp"
#include "outline.hpp"

namespace facedepth::synth
{
    enum class background_mode
    {
        keep,
        randomize_full,
        randomize_ranged_blurred,
    };

    inline const char* to_string(background_mode m)
    {
        switch (m)
        {
        case background_mode::keep: return "keep";
        case background_mode::randomize_full: return "randomize_full";
        case background_mode::randomize_ranged_blurred: return "randomize_ranged_blurred";
        }
        return "?";
    }

    enum class occlusion_mode
    {
        none,
        lower_half,
    };

    inline const char* to_string(occlusion_mode m)
    {
        return m == occlusion_mode::none ? "none" : "lower_half";
    }

    template <typename T>
    struct value_range
    {
        T min{};
        T max{};

        friend bool operator==(const value_range&, const value_range&) = default;
    };

    struct degradation_config
    {
        std::uint64_t seed = 0;
        value_range<int> outline_hole_count{2, 6};
        value_range<int> scatter_hole_count{2, 10};
        // Hole sizes are ellipse major-axis lengths in pixels.
        value_range<double> outline_hole_size{6.0, 30.0};
        value_range<double> scatter_hole_size{3.0, 20.0};
        value_range<double> hole_eccentricity{0.0, 0.9};
        value_range<double> hole_orientation{0.0, std::numbers::pi};
        double noise_amplitude_mm = 15.0;
        double window_span_mm = default_window_span_mm;
        int blur_radius = 2;
        background_mode background = background_mode::keep;
        // Band for the ranged background; empty means the face's own [min, max] depth.
        std::optional<value_range<int>> background_band;
        int background_blur_radius = 3;
        occlusion_mode occlusion = occlusion_mode::none;
        // Occluder plane depth behind the nearest face point.
        double occluder_offset_mm = 10.0;

        friend bool operator==(const degradation_config&, const degradation_config&) = default;
    };

    // Returns the offending field path, or empty when the config is valid.
    inline std::string invalid_field(const degradation_config& c)
    {
        auto bad_count = [](const value_range<int>& r) { return r.min < 0 || r.max < r.min; };
        auto bad_size = [](const value_range<double>& r) { return !(r.min >= 0.0) || !(r.max >= r.min); };
        if (bad_count(c.outline_hole_count))
            return "outline_hole_count";
        if (bad_count(c.scatter_hole_count))
            return "scatter_hole_count";
        if (bad_size(c.outline_hole_size))
            return "outline_hole_size";
        if (bad_size(c.scatter_hole_size))
            return "scatter_hole_size";
        if (bad_size(c.hole_eccentricity) || c.hole_eccentricity.max >= 1.0)
            return "hole_eccentricity";
        if (!(c.hole_orientation.max >= c.hole_orientation.min))
            return "hole_orientation";
        if (!(c.noise_amplitude_mm >= 0.0))
            return "noise_amplitude_mm";
        if (!(c.window_span_mm > 0.0))
            return "window_span_mm";
        if (c.blur_radius < 0)
            return "blur_radius";
        if (c.background_blur_radius < 0)
            return "background_blur_radius";
        if (c.background_band &&
            (c.background_band->min < 0 || c.background_band->max > max_valid_depth || c.background_band->max < c.background_band->min))
            return "background_band";
        if (!(c.occluder_offset_mm >= 0.0))
            return "occluder_offset_mm";
        return {};
    }

    inline void validate(const degradation_config& c)
    {
        if (const auto f = invalid_field(c); !f.empty())
            throw parameter_error("degradation_config." + f + ": invalid range or value");
    }

    struct synth_pair
    {
        depth_image ground_truth;
        depth_image degraded;
        face_mask mask;
        degradation_config config_echo;
    };

    struct ellipse
    {
        double cx, cy;
        double semi_major, semi_minor;
        double angle;
    };

    // Union of filled ellipses rasterized in one pass over pixel centers.
    inline std::vector<std::uint8_t> rasterize_ellipses(int width, int height, const std::vector<ellipse>& shapes)
    {
        std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
        for (const auto& e : shapes)
        {
            if (!(e.semi_major > 0.0) || !(e.semi_minor > 0.0))
                continue;
            const double c = std::cos(e.angle), s = std::sin(e.angle);
            const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - e.semi_major)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.cx + e.semi_major)));
            const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - e.semi_major)));
            const int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.cy + e.semi_major)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                {
                    const double dx = x - e.cx, dy = y - e.cy;
                    const double u = (dx * c + dy * s) / e.semi_major;
                    const double v = (-dx * s + dy * c) / e.semi_minor;
                    if (u * u + v * v <= 1.0)
                        out[static_cast<std::size_t>(y) * width + x] = 1;
                }
        }
        return out;
    }

    // Mean over the (2r+1)^2 window of pixels flagged in `use`; pixels not flagged in `apply` are copied.
    inline std::vector<depth_t> masked_box_blur(const std::vector<depth_t>& px, int width, int height, int radius,
                                                const std::vector<std::uint8_t>& use,
                                                const std::vector<std::uint8_t>& apply)
    {
        if (radius <= 0)
            return px;
        const auto w1 = static_cast<std::size_t>(width) + 1;
        std::vector<long long> sum(w1 * (static_cast<std::size_t>(height) + 1), 0);
        std::vector<long long> cnt(sum.size(), 0);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
            {
                const std::size_t i = static_cast<std::size_t>(y) * width + x;
                const std::size_t o = (static_cast<std::size_t>(y) + 1) * w1 + x + 1;
                const long long v = use[i] ? px[i] : 0;
                sum[o] = v + sum[o - 1] + sum[o - w1] - sum[o - w1 - 1];
                cnt[o] = (use[i] ? 1 : 0) + cnt[o - 1] + cnt[o - w1] - cnt[o - w1 - 1];
            }

        std::vector<depth_t> out = px;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
            {
                const std::size_t i = static_cast<std::size_t>(y) * width + x;
                if (!apply[i])
                    continue;
                const std::size_t xa = static_cast<std::size_t>(std::max(0, x - radius));
                const std::size_t xb = static_cast<std::size_t>(std::min(width, x + radius + 1));
                const std::size_t ya = static_cast<std::size_t>(std::max(0, y - radius));
                const std::size_t yb = static_cast<std::size_t>(std::min(height, y + radius + 1));
                const long long s = sum[yb * w1 + xb] - sum[ya * w1 + xb] - sum[yb * w1 + xa] + sum[ya * w1 + xa];
                const long long n = cnt[yb * w1 + xb] - cnt[ya * w1 + xb] - cnt[yb * w1 + xa] + cnt[ya * w1 + xa];
                if (n > 0)
                    out[i] = static_cast<depth_t>(round_half_away(static_cast<double>(s) / static_cast<double>(n)));
            }
        return out;
    }

    // Averages each non-hole pixel over the non-hole pixels of its window; holes stay holes.
    inline depth_image hole_aware_box_blur(const depth_image& img, int radius)
    {
        std::vector<std::uint8_t> valid(img.size());
        for (std::size_t i = 0; i < img.size(); ++i)
            valid[i] = is_hole(img[i]) ? 0 : 1;
        return depth_image(img.width(), img.height(), masked_box_blur(img.vector(), img.width(), img.height(), radius, valid, valid));
    }

    // Per-pixel noise bound in depth units for a millimeter amplitude.
    inline int noise_bound_units(double amplitude_mm, double span_mm = default_window_span_mm)
    {
        return static_cast<int>(mm_to_depth_units(amplitude_mm, span_mm));
    }

    // Replaces the lower half of the face (by mask bounding box) with a flat occluder just behind the
    // nearest face point.
    inline depth_image occlude_lower_half(const depth_image& gt, double offset_mm, double span_mm)
    {
        int top = gt.height(), bottom = -1;
        depth_t nearest = max_valid_depth;
        for (int y = 0; y < gt.height(); ++y)
            for (int x = 0; x < gt.width(); ++x)
                if (const depth_t v = gt.at(x, y); !is_hole(v))
                {
                    top = std::min(top, y);
                    bottom = std::max(bottom, y);
                    nearest = std::min(nearest, v);
                }
        if (bottom < 0)
            return gt;
        const int split = (top + bottom + 1) / 2;
        const depth_t plane = clamp_to_valid(nearest + static_cast<double>(mm_to_depth_units(offset_mm, span_mm)));
        std::vector<depth_t> px = gt.vector();
        for (int y = split; y < gt.height(); ++y)
            for (int x = 0; x < gt.width(); ++x)
            {
                const std::size_t i = gt.index(x, y);
                if (!is_hole(px[i]))
                    px[i] = plane;
            }
        return depth_image(gt.width(), gt.height(), std::move(px));
    }

    // Holes along the outline and scattered over the image, then uniform noise, hole-aware blur and the
    // background treatment. All randomness comes from `seed`.
    inline depth_image degrade_image(const depth_image& source, const degradation_config& cfg, std::uint64_t seed)
    {
        validate(cfg);
        if (source.empty() || !source.is_square())
            throw parameter_error("degrade: ground truth must be a non-empty square image");

        random_stream rng(seed);
        const int w = source.width();
        const int h = source.height();
        std::vector<depth_t> px = source.vector();

        // Face depth band of the input, for the ranged background.
        depth_t face_lo = hole, face_hi = 0;
        for (depth_t v : px)
            if (!is_hole(v))
            {
                face_lo = std::min(face_lo, v);
                face_hi = std::max(face_hi, v);
            }

        auto draw_ellipse = [&](double cx, double cy, const value_range<double>& size) {
            const double major = rng.uniform(size.min, size.max) / 2.0;
            const double ecc = rng.uniform(cfg.hole_eccentricity.min, cfg.hole_eccentricity.max);
            const double angle = rng.uniform(cfg.hole_orientation.min, cfg.hole_orientation.max);
            return ellipse{cx, cy, major, major * std::sqrt(1.0 - ecc * ecc), angle};
        };

        std::vector<ellipse> shapes;
        const bool has_face = face_hi >= face_lo && face_lo != hole;
        const auto outline_n = rng.uniform_int(cfg.outline_hole_count.min, cfg.outline_hole_count.max);
        if (has_face && outline_n > 0)
        {
            const auto outline = trace_outline(source);
            for (long long k = 0; k < outline_n; ++k)
            {
                const auto& p = outline[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long long>(outline.size()) - 1))];
                shapes.push_back(draw_ellipse(p.x, p.y, cfg.outline_hole_size));
            }
        }
        const auto scatter_n = rng.uniform_int(cfg.scatter_hole_count.min, cfg.scatter_hole_count.max);
        for (long long k = 0; k < scatter_n; ++k)
        {
            const double cx = rng.uniform(0.0, w);
            const double cy = rng.uniform(0.0, h);
            shapes.push_back(draw_ellipse(cx - 0.5, cy - 0.5, cfg.scatter_hole_size));
        }
        const auto stamped = rasterize_ellipses(w, h, shapes);
        for (std::size_t i = 0; i < px.size(); ++i)
            if (stamped[i])
                px[i] = hole;

        const int bound = noise_bound_units(cfg.noise_amplitude_mm, cfg.window_span_mm);
        if (bound > 0)
            for (auto& v : px)
                if (!is_hole(v))
                    v = static_cast<depth_t>(std::clamp<long long>(v + rng.uniform_int(-bound, bound), 0, max_valid_depth));

        std::vector<std::uint8_t> valid(px.size());
        for (std::size_t i = 0; i < px.size(); ++i)
            valid[i] = is_hole(px[i]) ? 0 : 1;
        px = masked_box_blur(px, w, h, cfg.blur_radius, valid, valid);

        switch (cfg.background)
        {
        case background_mode::keep:
            break;
        case background_mode::randomize_full:
            for (auto& v : px)
                if (is_hole(v))
                    v = static_cast<depth_t>(rng.uniform_int(0, max_valid_depth));
            break;
        case background_mode::randomize_ranged_blurred:
        {
            value_range<int> band{0, max_valid_depth};
            if (cfg.background_band)
                band = *cfg.background_band;
            else if (has_face)
                band = {face_lo, face_hi};
            std::vector<std::uint8_t> background(px.size());
            for (std::size_t i = 0; i < px.size(); ++i)
            {
                background[i] = valid[i] ? 0 : 1;
                if (background[i])
                    px[i] = static_cast<depth_t>(rng.uniform_int(band.min, band.max));
            }
            px = masked_box_blur(px, w, h, cfg.background_blur_radius, background, background);
            break;
        }
        }
        return depth_image(w, h, std::move(px));
    }

    inline synth_pair degrade(const depth_image& gt, const degradation_config& cfg)
    {
        validate(cfg);
        const depth_image source =
            cfg.occlusion == occlusion_mode::lower_half ? occlude_lower_half(gt, cfg.occluder_offset_mm, cfg.window_span_mm) : gt;
        return {gt, degrade_image(source, cfg, cfg.seed), face_mask::from_non_holes(gt), cfg};
    }
}
