// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Helpers shared by the unit tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <facedepth/neural/network.hpp>
#include <facedepth/random.hpp>
#include <facedepth/synth/dataset.hpp>

namespace facedepth::support
{
    // Random image with roughly `hole_fraction` holes; values drawn from [lo, hi].
    inline depth_image random_image(random_stream& rng, int w, int h, double hole_fraction, int lo = 0, int hi = 65534)
    {
        std::vector<depth_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
        for (auto& v : px)
            v = rng.uniform01() < hole_fraction ? hole : static_cast<depth_t>(rng.uniform_int(lo, hi));
        return depth_image(w, h, std::move(px));
    }

    inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p)
    {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    // Every regular file below `dir` with its bytes, sorted by relative path.
    inline std::vector<std::pair<std::string, std::vector<unsigned char>>> tree_bytes(const std::filesystem::path& dir)
    {
        std::vector<std::pair<std::string, std::vector<unsigned char>>> out;
        for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
            if (e.is_regular_file())
                out.emplace_back(std::filesystem::relative(e.path(), dir).generic_string(), read_bytes(e.path()));
        std::sort(out.begin(), out.end());
        return out;
    }

    // Degradation scaled for 64x64 renders: hole and blur extents shrink with the image side.
    inline synth::degradation_config small_image_degradation()
    {
        synth::degradation_config d;
        d.outline_hole_size = {1.5, 7.5};
        d.scatter_hole_size = {0.75, 5.0};
        d.blur_radius = 1;
        d.background_blur_radius = 1;
        return d;
    }

    struct gradcheck_options
    {
        int networks = 20;
        int side = 16;
        // Kernel weights checked per layer (evenly strided); every bias is always checked.
        std::size_t weights_per_layer = 250;
        double epsilon = 1e-3;
        double min_epsilon = 1e-6;
        // Denominator floor of the relative error.
        double floor = 1e-3;
        std::uint64_t seed = 0x67726164;
    };

    struct gradcheck_result
    {
        double max_relative_error = 0.0;
        std::size_t checked = 0;
        std::size_t refined = 0;  // needed a smaller step to stay off ReLU kinks
        std::size_t skipped = 0;  // still crossed a kink at the smallest step
    };

    // Central differences of L = sum(upstream * forward(input)) against backward(), in double precision.
    // A difference whose +/- evaluations flip any ReLU on/off relative to the unperturbed pass straddles
    // a kink and is not a valid derivative estimate; the step is shrunk by 10x until it is.
    inline gradcheck_result gradient_check(const gradcheck_options& opt)
    {
        using namespace neural;
        const network_spec spec{2, 4, 3, skip_mode::concatenate};
        gradcheck_result res;
        for (int n = 0; n < opt.networks; ++n)
        {
            random_stream rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(n)}));
            auto w = initialize_weights<double>(spec, rng.next_u64());
            for (auto& v : w)
                v += rng.uniform(-0.05, 0.05);  // nonzero biases
            tensor<double> x(1, opt.side, opt.side), up(1, opt.side, opt.side);
            for (auto& v : x.data)
                v = rng.uniform01();
            for (auto& v : up.data)
                v = rng.uniform(-1.0, 1.0);

            network<double> net(spec, w);
            forward_cache<double> base;
            net.forward(x, base);
            std::vector<double> grad(w.size(), 0.0);
            net.backward(base, up, grad);

            const auto& layers = net.plan().layers;
            auto same_pattern = [&](const forward_cache<double>& c, std::size_t first) {
                for (std::size_t l = first; l < layers.size(); ++l)
                {
                    if (layers[l].act != activation::relu)
                        continue;
                    const auto& a = c.outputs[l].data;
                    const auto& b = base.outputs[l].data;
                    for (std::size_t i = 0; i < a.size(); ++i)
                        if ((a[i] > 0.0) != (b[i] > 0.0))
                            return false;
                }
                return true;
            };
            auto objective = [&](forward_cache<double>& c, int first) {
                const auto y = net.forward_from(first, x, c);
                double s = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i)
                    s += up.data[i] * y.data[i];
                return s;
            };

            for (std::size_t l = 0; l < layers.size(); ++l)
            {
                const auto& layer = layers[l];
                std::vector<std::size_t> ids;
                const std::size_t kw = layer.kernel_weights();
                const std::size_t take = std::min(kw, opt.weights_per_layer);
                for (std::size_t j = 0; j < take; ++j)
                    ids.push_back(layer.weight_offset + j * kw / take);
                for (int b = 0; b < layer.out_channels; ++b)
                    ids.push_back(layer.bias_offset() + static_cast<std::size_t>(b));

                forward_cache<double> cp = base, cm = base;
                for (std::size_t id : ids)
                {
                    const double w0 = net.weights()[id];
                    bool valid = false;
                    double fd = 0.0;
                    for (double eps = opt.epsilon; eps >= opt.min_epsilon * 0.999; eps /= 10.0)
                    {
                        net.weights()[id] = w0 + eps;
                        const double lp = objective(cp, static_cast<int>(l));
                        net.weights()[id] = w0 - eps;
                        const double lm = objective(cm, static_cast<int>(l));
                        net.weights()[id] = w0;
                        if (same_pattern(cp, l) && same_pattern(cm, l))
                        {
                            fd = (lp - lm) / (2.0 * eps);
                            valid = true;
                            if (eps < opt.epsilon)
                                ++res.refined;
                            break;
                        }
                    }
                    if (!valid)
                    {
                        ++res.skipped;
                        continue;
                    }
                    const double g = grad[id];
                    const double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), opt.floor});
                    res.max_relative_error = std::max(res.max_relative_error, rel);
                    ++res.checked;
                }
            }
        }
        return res;
    }
}
