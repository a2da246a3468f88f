// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace facedepth
{
    using depth_t = std::uint16_t;

    // Maximum 16-bit value marks a pixel without a valid measurement.
    inline constexpr depth_t hole = 65535;
    inline constexpr depth_t max_valid_depth = 65534;

    // Side length of every pipeline-canonical image.
    inline constexpr int canonical_size = 256;

    inline constexpr bool is_hole(depth_t v) noexcept { return v == hole; }

    // Round half away from zero.
    inline long long round_half_away(double v) noexcept { return std::llround(v); }

    inline depth_t clamp_to_valid(double v) noexcept
    {
        const long long r = round_half_away(v);
        return static_cast<depth_t>(std::clamp<long long>(r, 0, max_valid_depth));
    }

    class depth_image
    {
    public:
        depth_image() = default;

        depth_image(int width, int height, depth_t fill = hole)
            : _width(width), _height(height), _samples(checked_area(width, height), fill)
        {
        }

        depth_image(int width, int height, std::vector<depth_t> samples)
            : _width(width), _height(height), _samples(std::move(samples))
        {
            if (_samples.size() != checked_area(width, height))
                throw parameter_error("depth_image: sample count " + std::to_string(_samples.size()) +
                                      " does not match " + std::to_string(width) + "x" + std::to_string(height));
        }

        static depth_image square(int side, depth_t fill = hole) { return depth_image(side, side, fill); }

        int width() const noexcept { return _width; }
        int height() const noexcept { return _height; }
        std::size_t size() const noexcept { return _samples.size(); }
        bool empty() const noexcept { return _samples.empty(); }
        bool is_square() const noexcept { return _width == _height; }

        depth_t at(int x, int y) const { return _samples[index(x, y)]; }
        depth_t operator[](std::size_t i) const { return _samples[i]; }

        bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < _width && y < _height; }

        std::span<const depth_t> samples() const noexcept { return _samples; }
        const std::vector<depth_t>& vector() const noexcept { return _samples; }

        std::size_t hole_count() const noexcept
        {
            return static_cast<std::size_t>(std::count(_samples.begin(), _samples.end(), hole));
        }

        std::size_t index(int x, int y) const noexcept
        {
            return static_cast<std::size_t>(y) * static_cast<std::size_t>(_width) + static_cast<std::size_t>(x);
        }

        friend bool operator==(const depth_image&, const depth_image&) = default;

    private:
        static std::size_t checked_area(int width, int height)
        {
            if (width < 0 || height < 0)
                throw parameter_error("depth_image: negative dimensions");
            return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        }

        int _width = 0;
        int _height = 0;
        std::vector<depth_t> _samples;
    };

    class face_mask
    {
    public:
        face_mask() = default;

        face_mask(int width, int height, bool fill = false)
            : _width(width), _height(height),
              _bits(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0)
        {
        }

        face_mask(int width, int height, std::vector<std::uint8_t> bits)
            : _width(width), _height(height), _bits(std::move(bits))
        {
            if (_bits.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
                throw parameter_error("face_mask: bit count does not match dimensions");
        }

        // True exactly where the image holds a valid depth.
        static face_mask from_non_holes(const depth_image& img)
        {
            std::vector<std::uint8_t> bits(img.size());
            for (std::size_t i = 0; i < img.size(); ++i)
                bits[i] = is_hole(img[i]) ? 0 : 1;
            return face_mask(img.width(), img.height(), std::move(bits));
        }

        int width() const noexcept { return _width; }
        int height() const noexcept { return _height; }
        std::size_t size() const noexcept { return _bits.size(); }

        bool at(int x, int y) const
        {
            return _bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(_width) + static_cast<std::size_t>(x)] != 0;
        }
        bool operator[](std::size_t i) const { return _bits[i] != 0; }

        std::size_t population() const noexcept
        {
            return static_cast<std::size_t>(std::count(_bits.begin(), _bits.end(), std::uint8_t{1}));
        }

        bool matches(const depth_image& img) const noexcept
        {
            return img.width() == _width && img.height() == _height;
        }

        std::span<const std::uint8_t> bits() const noexcept { return _bits; }

        friend bool operator==(const face_mask&, const face_mask&) = default;

    private:
        int _width = 0;
        int _height = 0;
        std::vector<std::uint8_t> _bits;
    };

    inline void require_same_shape(const depth_image& a, const depth_image& b, const char* what)
    {
        if (a.width() != b.width() || a.height() != b.height())
            throw parameter_error(std::string(what) + ": image shapes differ (" + std::to_string(a.width()) + "x" +
                                  std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                  std::to_string(b.height()) + ")");
    }
}
