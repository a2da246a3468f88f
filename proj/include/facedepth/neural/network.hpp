// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// U-shaped convolutional encoder/decoder with concatenating skip connections.
//
// Layer order (also the flat weight layout, each layer as [out][in][ky][kx] weights then [out] biases):
//   enc{l}.a, enc{l}.b, down{l}            for l = 0 .. levels-1   (down is a stride-2 conv)
//   bottleneck.a, bottleneck.b
//   up{l}, dec{l}.a, dec{l}.b              for l = levels-1 .. 0   (up follows a nearest 2x upsample)
//   head                                   1x1 conv to one channel, sigmoid output
// Level l carries base_channels * 2^l channels; the bottleneck carries base_channels * 2^levels.

#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "../random.hpp"
#include "tensor.hpp"

namespace facedepth::neural
{
    enum class skip_mode
    {
        concatenate,
    };

    struct network_spec
    {
        int depth_levels = 3;
        int base_channels = 8;
        int kernel_size = 3;
        skip_mode skip = skip_mode::concatenate;

        void validate() const
        {
            if (depth_levels < 2)
                throw parameter_error("network.depth_levels: must be >= 2");
            if (depth_levels > 8)
                throw parameter_error("network.depth_levels: must be <= 8");
            if (base_channels < 4)
                throw parameter_error("network.base_channels: must be >= 4");
            if (kernel_size != 3 && kernel_size != 5)
                throw parameter_error("network.kernel_size: must be 3 or 5");
        }

        int channels_at(int level) const { return base_channels << level; }

        friend bool operator==(const network_spec&, const network_spec&) = default;
    };

    enum class activation
    {
        none,
        relu,
    };

    struct conv_layer
    {
        std::string name;
        int in_channels = 0;
        int out_channels = 0;
        int kernel = 3;
        int stride = 1;
        activation act = activation::relu;
        std::size_t weight_offset = 0;

        std::size_t kernel_weights() const
        {
            return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels) *
                   static_cast<std::size_t>(kernel) * static_cast<std::size_t>(kernel);
        }
        std::size_t bias_offset() const { return weight_offset + kernel_weights(); }
        std::size_t parameter_count() const { return kernel_weights() + static_cast<std::size_t>(out_channels); }
    };

    struct layer_plan
    {
        std::vector<conv_layer> layers;
        std::size_t parameter_count = 0;

        // Indices into `layers`.
        struct level_ids
        {
            int enc_a, enc_b, down, up, dec_a, dec_b;
        };
        std::vector<level_ids> levels;
        int bottleneck_a = -1;
        int bottleneck_b = -1;
        int head = -1;
    };

    inline layer_plan plan_layers(const network_spec& spec)
    {
        spec.validate();
        layer_plan plan;
        const int k = spec.kernel_size;
        const int levels = spec.depth_levels;
        plan.levels.resize(static_cast<std::size_t>(levels));

        auto add = [&](std::string name, int in, int out, int kernel, int stride, activation act) {
            conv_layer l{std::move(name), in, out, kernel, stride, act, plan.parameter_count};
            plan.parameter_count += l.parameter_count();
            plan.layers.push_back(std::move(l));
            return static_cast<int>(plan.layers.size() - 1);
        };

        int in = 1;
        for (int l = 0; l < levels; ++l)
        {
            const int c = spec.channels_at(l);
            auto& ids = plan.levels[static_cast<std::size_t>(l)];
            ids.enc_a = add("enc" + std::to_string(l) + ".a", in, c, k, 1, activation::relu);
            ids.enc_b = add("enc" + std::to_string(l) + ".b", c, c, k, 1, activation::relu);
            ids.down = add("down" + std::to_string(l), c, c, k, 2, activation::none);
            in = c;
        }
        const int cb = spec.channels_at(levels);
        plan.bottleneck_a = add("bottleneck.a", in, cb, k, 1, activation::relu);
        plan.bottleneck_b = add("bottleneck.b", cb, cb, k, 1, activation::relu);
        in = cb;
        for (int l = levels - 1; l >= 0; --l)
        {
            const int c = spec.channels_at(l);
            auto& ids = plan.levels[static_cast<std::size_t>(l)];
            ids.up = add("up" + std::to_string(l), in, c, k, 1, activation::none);
            ids.dec_a = add("dec" + std::to_string(l) + ".a", 2 * c, c, k, 1, activation::relu);
            ids.dec_b = add("dec" + std::to_string(l) + ".b", c, c, k, 1, activation::relu);
            in = c;
        }
        plan.head = add("head", in, 1, 1, 1, activation::none);
        return plan;
    }

    inline std::size_t parameter_count(const network_spec& spec) { return plan_layers(spec).parameter_count; }

    // He-uniform kernels, zero biases.
    template <typename T = float>
    std::vector<T> initialize_weights(const network_spec& spec, std::uint64_t seed)
    {
        const layer_plan plan = plan_layers(spec);
        std::vector<T> w(plan.parameter_count, T(0));
        random_stream rng(derive_seed(seed, {0x696e6974}));
        for (const auto& l : plan.layers)
        {
            const double fan_in = static_cast<double>(l.in_channels) * l.kernel * l.kernel;
            const double bound = std::sqrt((l.act == activation::relu ? 6.0 : 3.0) / fan_in);
            for (std::size_t i = 0; i < l.kernel_weights(); ++i)
                w[l.weight_offset + i] = static_cast<T>(rng.uniform(-bound, bound));
        }
        return w;
    }

    namespace detail
    {
        template <typename T>
        using row_matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

        template <typename T>
        using row_map = Eigen::Map<row_matrix<T>>;

        template <typename T>
        using const_row_map = Eigen::Map<const row_matrix<T>>;

        // Output columns [lo, hi) whose input column ox * stride + offset lies inside [0, width).
        inline std::pair<int, int> valid_columns(int offset, int stride, int width, int out_w)
        {
            int lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
            int hi = (width - 1 - offset) >= 0 ? (width - 1 - offset) / stride + 1 : 0;
            lo = std::min(lo, out_w);
            hi = std::clamp(hi, lo, out_w);
            return {lo, hi};
        }

        // Rows indexed by (c, ky, kx), columns by output pixel; zero padding of kernel/2.
        template <typename T>
        void im2col(const tensor<T>& in, int kernel, int stride, int out_h, int out_w, std::vector<T>& col)
        {
            const int pad = kernel / 2;
            const std::size_t cols = static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w);
            col.resize(static_cast<std::size_t>(in.channels) * kernel * kernel * cols);
            std::size_t row = 0;
            for (int c = 0; c < in.channels; ++c)
            {
                const T* src = in.channel(c);
                for (int ky = 0; ky < kernel; ++ky)
                    for (int kx = 0; kx < kernel; ++kx, ++row)
                    {
                        T* dst = col.data() + row * cols;
                        const auto [lo, hi] = valid_columns(kx - pad, stride, in.width, out_w);
                        for (int oy = 0; oy < out_h; ++oy)
                        {
                            T* dst_row = dst + static_cast<std::size_t>(oy) * out_w;
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= in.height)
                            {
                                std::fill(dst_row, dst_row + out_w, T(0));
                                continue;
                            }
                            const T* src_row = src + static_cast<std::size_t>(iy) * in.width;
                            const int off = kx - pad;
                            std::fill(dst_row, dst_row + lo, T(0));
                            if (stride == 1 && hi > lo)
                                std::copy(src_row + lo + off, src_row + hi + off, dst_row + lo);
                            else
                                for (int ox = lo; ox < hi; ++ox)
                                    dst_row[ox] = src_row[ox * stride + off];
                            std::fill(dst_row + hi, dst_row + out_w, T(0));
                        }
                    }
            }
        }

        template <typename T>
        void col2im(const std::vector<T>& col, int kernel, int stride, int out_h, int out_w, tensor<T>& in_grad)
        {
            const int pad = kernel / 2;
            const std::size_t cols = static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w);
            std::fill(in_grad.data.begin(), in_grad.data.end(), T(0));
            std::size_t row = 0;
            for (int c = 0; c < in_grad.channels; ++c)
            {
                T* dst = in_grad.channel(c);
                for (int ky = 0; ky < kernel; ++ky)
                    for (int kx = 0; kx < kernel; ++kx, ++row)
                    {
                        const T* src = col.data() + row * cols;
                        const auto [lo, hi] = valid_columns(kx - pad, stride, in_grad.width, out_w);
                        for (int oy = 0; oy < out_h; ++oy)
                        {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= in_grad.height)
                                continue;
                            T* dst_row = dst + static_cast<std::size_t>(iy) * in_grad.width;
                            const T* src_row = src + static_cast<std::size_t>(oy) * out_w;
                            const int off = kx - pad;
                            for (int ox = lo; ox < hi; ++ox)
                                dst_row[ox * stride + off] += src_row[ox];
                        }
                    }
            }
        }

        template <typename T>
        tensor<T> upsample2(const tensor<T>& in)
        {
            tensor<T> out(in.channels, in.height * 2, in.width * 2);
            for (int c = 0; c < in.channels; ++c)
                for (int y = 0; y < out.height; ++y)
                    for (int x = 0; x < out.width; ++x)
                        out.at(c, y, x) = in.at(c, y / 2, x / 2);
            return out;
        }

        template <typename T>
        tensor<T> upsample2_backward(const tensor<T>& grad)
        {
            tensor<T> out(grad.channels, grad.height / 2, grad.width / 2);
            for (int c = 0; c < grad.channels; ++c)
                for (int y = 0; y < grad.height; ++y)
                    for (int x = 0; x < grad.width; ++x)
                        out.at(c, y / 2, x / 2) += grad.at(c, y, x);
            return out;
        }

        template <typename T>
        tensor<T> concat(const tensor<T>& a, const tensor<T>& b)
        {
            tensor<T> out(a.channels + b.channels, a.height, a.width);
            std::copy(a.data.begin(), a.data.end(), out.data.begin());
            std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
            return out;
        }

        template <typename T>
        T sigmoid(T z)
        {
            return T(1) / (T(1) + std::exp(-z));
        }
    }

    // Activations retained by forward() for backward().
    template <typename T>
    struct forward_cache
    {
        std::vector<std::vector<T>> cols;  // im2col of each layer input
        std::vector<tensor<T>> outputs;    // post-activation output of each layer
        std::vector<tensor<T>> input_shapes;  // shape only (no data) of each layer input
        tensor<T> output;
    };

    template <typename T = float>
    class network
    {
    public:
        network(network_spec spec, std::vector<T> weights) : _spec(spec), _plan(plan_layers(spec)), _weights(std::move(weights))
        {
            if (_weights.size() != _plan.parameter_count)
                throw structural_error("network: expected " + std::to_string(_plan.parameter_count) + " weights, got " +
                                       std::to_string(_weights.size()));
        }

        const network_spec& spec() const noexcept { return _spec; }
        const layer_plan& plan() const noexcept { return _plan; }
        const std::vector<T>& weights() const noexcept { return _weights; }
        std::vector<T>& weights() noexcept { return _weights; }

        void check_input(const tensor<T>& input) const
        {
            const int factor = 1 << _spec.depth_levels;
            if (input.channels != 1 || input.height != input.width || input.height < factor || input.height % factor != 0)
                throw structural_error("network input: expected (1, S, S) with S divisible by " + std::to_string(factor) +
                                       ", got " + input.shape_string());
            if (input.data.size() != input.size() || input.size() != input.plane())
                throw structural_error("network input: data length does not match shape " + input.shape_string());
        }

        tensor<T> forward(const tensor<T>& input) const { return run_forward(input, nullptr); }

        tensor<T> forward(const tensor<T>& input, forward_cache<T>& cache) const { return run_forward(input, &cache); }

        // Recomputes layers from index `first_layer` on, reusing the cached activations of earlier layers.
        // `cache` must hold a complete forward pass of the same input.
        tensor<T> forward_from(int first_layer, const tensor<T>& input, forward_cache<T>& cache) const
        {
            if (cache.outputs.size() != _plan.layers.size())
                throw structural_error("forward_from: cache does not hold a complete forward pass");
            return run_forward(input, &cache, first_layer);
        }

        // Accumulates d(sum upstream * output)/d(weights) into `grad` (same layout as weights).
        void backward(const forward_cache<T>& cache, const tensor<T>& upstream, std::vector<T>& grad) const
        {
            if (!upstream.same_shape(cache.output))
                throw structural_error("backward: upstream gradient shape " + upstream.shape_string() + " does not match output " +
                                       cache.output.shape_string());
            if (grad.size() != _weights.size())
                grad.assign(_weights.size(), T(0));

            tensor<T> g = upstream;
            for (std::size_t i = 0; i < g.size(); ++i)
            {
                const T y = cache.output.data[i];
                g.data[i] *= y * (T(1) - y);
            }
            g = conv_backward(_plan.head, cache, g, grad, true);

            const int levels = _spec.depth_levels;
            std::vector<tensor<T>> skip_grad(static_cast<std::size_t>(levels));
            for (int l = 0; l < levels; ++l)
            {
                const auto& ids = _plan.levels[static_cast<std::size_t>(l)];
                g = conv_backward(ids.dec_b, cache, g, grad, true);
                tensor<T> gcat = conv_backward(ids.dec_a, cache, g, grad, true);
                const int c = _spec.channels_at(l);
                tensor<T> gup(c, gcat.height, gcat.width);
                tensor<T>& gskip = skip_grad[static_cast<std::size_t>(l)];
                gskip = tensor<T>(c, gcat.height, gcat.width);
                std::copy(gcat.data.begin(), gcat.data.begin() + static_cast<std::ptrdiff_t>(gup.size()), gup.data.begin());
                std::copy(gcat.data.begin() + static_cast<std::ptrdiff_t>(gup.size()), gcat.data.end(), gskip.data.begin());
                g = detail::upsample2_backward(conv_backward(ids.up, cache, gup, grad, true));
            }
            g = conv_backward(_plan.bottleneck_b, cache, g, grad, true);
            g = conv_backward(_plan.bottleneck_a, cache, g, grad, true);
            for (int l = levels - 1; l >= 0; --l)
            {
                const auto& ids = _plan.levels[static_cast<std::size_t>(l)];
                g = conv_backward(ids.down, cache, g, grad, true);
                const auto& gskip = skip_grad[static_cast<std::size_t>(l)];
                for (std::size_t i = 0; i < g.size(); ++i)
                    g.data[i] += gskip.data[i];
                g = conv_backward(ids.enc_b, cache, g, grad, true);
                g = conv_backward(ids.enc_a, cache, g, grad, l > 0);
            }
        }

    private:
        tensor<T> run_forward(const tensor<T>& input, forward_cache<T>* cache, int first = 0) const
        {
            check_input(input);
            const std::size_t n = _plan.layers.size();
            std::vector<tensor<T>> local;
            if (cache)
            {
                cache->cols.resize(n);
                cache->outputs.resize(n);
                cache->input_shapes.resize(n);
            }
            else
                local.resize(n);
            std::vector<tensor<T>>& outs = cache ? cache->outputs : local;
            std::vector<T> scratch;

            // Layers before `first` keep their cached outputs.
            auto run = [&](int id, auto&& make_input) -> const tensor<T>& {
                auto& out = outs[static_cast<std::size_t>(id)];
                if (id >= first)
                    out = conv_forward(id, make_input(), cache, scratch);
                return out;
            };

            const int levels = _spec.depth_levels;
            const tensor<T>* x = &input;
            for (int l = 0; l < levels; ++l)
            {
                const auto& ids = _plan.levels[static_cast<std::size_t>(l)];
                x = &run(ids.enc_a, [&]() -> const tensor<T>& { return *x; });
                x = &run(ids.enc_b, [&]() -> const tensor<T>& { return *x; });
                x = &run(ids.down, [&]() -> const tensor<T>& { return *x; });
            }
            x = &run(_plan.bottleneck_a, [&]() -> const tensor<T>& { return *x; });
            x = &run(_plan.bottleneck_b, [&]() -> const tensor<T>& { return *x; });
            for (int l = levels - 1; l >= 0; --l)
            {
                const auto& ids = _plan.levels[static_cast<std::size_t>(l)];
                x = &run(ids.up, [&] { return detail::upsample2(*x); });
                const tensor<T>& skip = outs[static_cast<std::size_t>(ids.enc_b)];
                x = &run(ids.dec_a, [&] { return detail::concat(*x, skip); });
                x = &run(ids.dec_b, [&]() -> const tensor<T>& { return *x; });
            }
            tensor<T> y = run(_plan.head, [&]() -> const tensor<T>& { return *x; });
            for (auto& v : y.data)
                v = detail::sigmoid(v);
            if (cache)
                cache->output = y;
            return y;
        }

        tensor<T> conv_forward(int id, const tensor<T>& in, forward_cache<T>* cache, std::vector<T>& scratch) const
        {
            const conv_layer& l = _plan.layers[static_cast<std::size_t>(id)];
            if (in.channels != l.in_channels)
                throw structural_error("layer " + l.name + ": expected " + std::to_string(l.in_channels) + " input channels, got " +
                                       std::to_string(in.channels));
            const int oh = in.height / l.stride;
            const int ow = in.width / l.stride;
            std::vector<T>& col = cache ? cache->cols[static_cast<std::size_t>(id)] : scratch;
            detail::im2col(in, l.kernel, l.stride, oh, ow, col);

            tensor<T> out(l.out_channels, oh, ow);
            const auto rows = static_cast<Eigen::Index>(l.in_channels * l.kernel * l.kernel);
            const auto pixels = static_cast<Eigen::Index>(out.plane());
            detail::const_row_map<T> w(_weights.data() + l.weight_offset, l.out_channels, rows);
            detail::const_row_map<T> c(col.data(), rows, pixels);
            detail::row_map<T> o(out.data.data(), l.out_channels, pixels);
            o.noalias() = w * c;
            const T* bias = _weights.data() + l.bias_offset();
            for (int ch = 0; ch < l.out_channels; ++ch)
            {
                T* p = out.channel(ch);
                for (std::size_t i = 0; i < out.plane(); ++i)
                {
                    const T v = p[i] + bias[ch];
                    p[i] = (l.act == activation::relu && v < T(0)) ? T(0) : v;
                }
            }
            if (cache)
            {
                auto& shape = cache->input_shapes[static_cast<std::size_t>(id)];
                shape.channels = in.channels;
                shape.height = in.height;
                shape.width = in.width;
            }
            return out;
        }

        // Takes the gradient w.r.t. the layer's post-activation output; returns the gradient w.r.t. its input.
        tensor<T> conv_backward(int id, const forward_cache<T>& cache, tensor<T> g, std::vector<T>& grad, bool need_input) const
        {
            const conv_layer& l = _plan.layers[static_cast<std::size_t>(id)];
            const tensor<T>& out = cache.outputs[static_cast<std::size_t>(id)];
            const std::vector<T>& col = cache.cols[static_cast<std::size_t>(id)];
            if (!g.same_shape(out))
                throw structural_error("layer " + l.name + ": gradient shape " + g.shape_string() + " does not match output " +
                                       out.shape_string());
            if (l.act == activation::relu)
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (!(out.data[i] > T(0)))
                        g.data[i] = T(0);

            const auto rows = static_cast<Eigen::Index>(l.in_channels * l.kernel * l.kernel);
            const auto pixels = static_cast<Eigen::Index>(out.plane());
            detail::const_row_map<T> gm(g.data.data(), l.out_channels, pixels);
            detail::const_row_map<T> c(col.data(), rows, pixels);
            detail::row_map<T> gw(grad.data() + l.weight_offset, l.out_channels, rows);
            gw.noalias() += gm * c.transpose();
            T* gb = grad.data() + l.bias_offset();
            for (int ch = 0; ch < l.out_channels; ++ch)
            {
                const T* p = g.channel(ch);
                T s = T(0);
                for (std::size_t i = 0; i < g.plane(); ++i)
                    s += p[i];
                gb[ch] += s;
            }
            if (!need_input)
                return {};

            const auto& shape = cache.input_shapes[static_cast<std::size_t>(id)];
            std::vector<T> dcol(static_cast<std::size_t>(rows) * static_cast<std::size_t>(pixels));
            detail::const_row_map<T> w(_weights.data() + l.weight_offset, l.out_channels, rows);
            detail::row_map<T> dc(dcol.data(), rows, pixels);
            dc.noalias() = w.transpose() * gm;
            tensor<T> gin(shape.channels, shape.height, shape.width);
            detail::col2im(dcol, l.kernel, l.stride, out.height, out.width, gin);
            return gin;
        }

        network_spec _spec;
        layer_plan _plan;
        std::vector<T> _weights;
    };

    template <typename T>
    tensor<T> forward(const network_spec& spec, std::span<const T> weights, const tensor<T>& input)
    {
        return network<T>(spec, std::vector<T>(weights.begin(), weights.end())).forward(input);
    }

    // Weight gradients of sum(upstream * forward(input)).
    template <typename T>
    std::vector<T> backward(const network_spec& spec, std::span<const T> weights, const tensor<T>& input, const tensor<T>& upstream)
    {
        network<T> net(spec, std::vector<T>(weights.begin(), weights.end()));
        forward_cache<T> cache;
        net.forward(input, cache);
        std::vector<T> grad(weights.size(), T(0));
        net.backward(cache, upstream, grad);
        return grad;
    }
}
