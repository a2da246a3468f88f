// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include "../resample.hpp"
#include "model_file.hpp"

namespace facedepth::neural
{
    // Reusable inference wrapper; const member functions are safe to call concurrently.
    class enhancer
    {
    public:
        explicit enhancer(model m) : _native(m.native_size), _net(m.spec, std::move(m.weights)) {}

        int native_size() const noexcept { return _native; }
        const network<float>& net() const noexcept { return _net; }

        // Images of other sizes are resampled (bilinear, hole-aware) to the native size and back.
        depth_image operator()(const depth_image& img) const
        {
            if (!img.is_square())
                throw structural_error("enhance: expected a square image, got " + std::to_string(img.width()) + "x" +
                                       std::to_string(img.height()));
            if (img.width() == _native)
                return decode(_net.forward(encode<float>(img)));
            const depth_image small = resample(img, _native, resample_mode::bilinear_hole_aware);
            const depth_image out = decode(_net.forward(encode<float>(small)));
            return resample(out, img.width(), resample_mode::bilinear_hole_aware);
        }

    private:
        int _native;
        network<float> _net;
    };

    inline depth_image enhance(const model& m, const depth_image& img) { return enhancer(m)(img); }
}
