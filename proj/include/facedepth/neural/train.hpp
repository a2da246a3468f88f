// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "../random.hpp"
#include "../synth/degrade.hpp"
#include "model_file.hpp"

namespace facedepth::neural
{
    struct train_config
    {
        int epochs_per_chunk = 10;
        int chunk_size = 1000;
        int batch_size = 8;
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double adam_epsilon = 1e-8;
        std::uint64_t seed = 0;
        // Restrict the loss to face-mask pixels instead of the whole image.
        bool masked_loss = false;
        // Checkpoints are written here on every epoch-loss improvement; none when unset.
        std::optional<std::filesystem::path> checkpoint_dir;

        void validate() const
        {
            if (epochs_per_chunk < 1)
                throw parameter_error("train.epochs_per_chunk: must be >= 1");
            if (chunk_size < 1)
                throw parameter_error("train.chunk_size: must be >= 1");
            if (batch_size < 1)
                throw parameter_error("train.batch_size: must be >= 1");
            if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
                throw parameter_error("train.learning_rate: must be > 0");
            if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
                throw parameter_error("train.beta1/beta2: must lie in (0, 1)");
            if (!(adam_epsilon > 0.0))
                throw parameter_error("train.adam_epsilon: must be > 0");
        }
    };

    struct loss_record
    {
        int epoch = 0;  // 1-based, counted across chunks
        int chunk = 0;  // 0-based
        double loss = 0.0;
    };

    struct train_result
    {
        model best;
        double best_loss = std::numeric_limits<double>::infinity();
        std::vector<loss_record> trace;
        std::vector<std::filesystem::path> checkpoints;
    };

    // Random access to training pairs; chunks are loaded one at a time.
    struct pair_source
    {
        std::size_t count = 0;
        std::function<synth::synth_pair(std::size_t)> load;
    };

    inline pair_source make_pair_source(const std::vector<synth::synth_pair>& pairs)
    {
        return {pairs.size(), [&pairs](std::size_t i) { return pairs[i]; }};
    }

    inline std::string checkpoint_name(int epoch)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "checkpoint_epoch_%04d.fdm", epoch);
        return buf;
    }

    // Adam over a flat float parameter vector.
    class adam
    {
    public:
        adam(std::size_t n, double lr, double beta1, double beta2, double eps)
            : _m(n, 0.0f), _v(n, 0.0f), _lr(lr), _b1(beta1), _b2(beta2), _eps(eps)
        {
        }

        void step(std::vector<float>& w, const std::vector<float>& g)
        {
            ++_t;
            const double c1 = 1.0 - std::pow(_b1, static_cast<double>(_t));
            const double c2 = 1.0 - std::pow(_b2, static_cast<double>(_t));
            const auto b1 = static_cast<float>(_b1), b2 = static_cast<float>(_b2);
            const auto step = static_cast<float>(_lr / c1);
            const auto inv_c2 = static_cast<float>(1.0 / c2);
            const auto eps = static_cast<float>(_eps);
            for (std::size_t i = 0; i < w.size(); ++i)
            {
                _m[i] = b1 * _m[i] + (1.0f - b1) * g[i];
                _v[i] = b2 * _v[i] + (1.0f - b2) * g[i] * g[i];
                w[i] -= step * _m[i] / (std::sqrt(_v[i] * inv_c2) + eps);
            }
        }

    private:
        std::vector<float> _m, _v;
        double _lr, _b1, _b2, _eps;
        long long _t = 0;
    };

    namespace detail
    {
        struct encoded_pair
        {
            tensor<float> input;
            tensor<float> target;
            std::vector<unsigned char> domain;  // loss pixels
            std::size_t domain_size = 0;
        };

        inline encoded_pair encode_pair(const synth::synth_pair& p, bool masked)
        {
            encoded_pair e{encode<float>(p.degraded), encode<float>(p.ground_truth), {}, 0};
            e.domain.assign(p.ground_truth.size(), 1);
            if (masked)
                for (std::size_t i = 0; i < e.domain.size(); ++i)
                    e.domain[i] = p.mask[i] ? 1 : 0;
            e.domain_size = static_cast<std::size_t>(std::count(e.domain.begin(), e.domain.end(), 1));
            return e;
        }

        // Mean squared error over the domain; writes d(loss)/d(output) into `upstream`.
        inline double mse_and_gradient(const tensor<float>& out, const encoded_pair& e, tensor<float>& upstream)
        {
            upstream = tensor<float>(out.channels, out.height, out.width);
            if (e.domain_size == 0)
                return 0.0;
            const double inv_n = 1.0 / static_cast<double>(e.domain_size);
            double sum = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i)
            {
                if (!e.domain[i])
                    continue;
                const double d = static_cast<double>(out.data[i]) - static_cast<double>(e.target.data[i]);
                sum += d * d;
                upstream.data[i] = static_cast<float>(2.0 * d * inv_n);
            }
            return sum * inv_n;
        }
    }

    inline void write_loss_trace(const std::vector<loss_record>& trace, const std::filesystem::path& path)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw io_error("cannot open " + path.string() + " for writing");
        f << "epoch,chunk,loss\n";
        char buf[64];
        for (const auto& r : trace)
        {
            std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", r.epoch, r.chunk, r.loss);
            f << buf;
        }
        if (!f)
            throw io_error("write failed: " + path.string());
    }

    using epoch_callback = std::function<void(const loss_record&)>;

    // Chunked schedule: each run of chunk_size consecutive pairs is trained for epochs_per_chunk epochs
    // before moving on. Single-threaded with a fixed reduction order, so a seed fixes the whole run.
    inline train_result train(const network_spec& spec, const pair_source& data, const train_config& cfg,
                              const epoch_callback& on_epoch = {})
    {
        spec.validate();
        cfg.validate();
        if (data.count == 0)
            throw parameter_error("train: dataset is empty");

        train_result result;
        model current{spec, 0, initialize_weights<float>(spec, derive_seed(cfg.seed, {1}))};
        network<float> net(spec, current.weights);
        adam opt(net.weights().size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon);
        if (cfg.checkpoint_dir)
            std::filesystem::create_directories(*cfg.checkpoint_dir);

        const std::size_t chunk = static_cast<std::size_t>(cfg.chunk_size);
        const std::size_t chunks = (data.count + chunk - 1) / chunk;
        std::vector<float> grad(net.weights().size());
        forward_cache<float> cache;
        tensor<float> upstream;
        int epoch = 0;

        for (std::size_t c = 0; c < chunks; ++c)
        {
            std::vector<detail::encoded_pair> pairs;
            for (std::size_t i = c * chunk; i < std::min(data.count, (c + 1) * chunk); ++i)
            {
                const synth::synth_pair p = data.load(i);
                if (!p.degraded.is_square() || p.degraded.width() != p.ground_truth.width() ||
                    p.degraded.height() != p.ground_truth.height())
                    throw structural_error("train: pair " + std::to_string(i) + " is not a square pair of equal shape");
                if (current.native_size == 0)
                    current.native_size = p.degraded.width();
                else if (p.degraded.width() != current.native_size)
                    throw structural_error("train: pair " + std::to_string(i) + " has size " + std::to_string(p.degraded.width()) +
                                           ", expected " + std::to_string(current.native_size));
                pairs.push_back(detail::encode_pair(p, cfg.masked_loss));
            }
            net.check_input(pairs.front().input);

            std::vector<std::size_t> order(pairs.size());
            for (int e = 0; e < cfg.epochs_per_chunk; ++e)
            {
                ++epoch;
                std::iota(order.begin(), order.end(), std::size_t{0});
                random_stream rng(derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(epoch)}));
                rng.shuffle(order);

                double epoch_sum = 0.0;
                int batch = 0;
                for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size), ++batch)
                {
                    const std::size_t end = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
                    std::fill(grad.begin(), grad.end(), 0.0f);
                    double batch_sum = 0.0;
                    for (std::size_t k = b; k < end; ++k)
                    {
                        const auto& p = pairs[order[k]];
                        const tensor<float> out = net.forward(p.input, cache);
                        batch_sum += detail::mse_and_gradient(out, p, upstream);
                        net.backward(cache, upstream, grad);
                    }
                    const double batch_loss = batch_sum / static_cast<double>(end - b);
                    if (!std::isfinite(batch_loss))
                        throw training_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                             std::to_string(batch) + ": " + std::to_string(batch_loss));
                    const float scale = 1.0f / static_cast<float>(end - b);
                    for (auto& g : grad)
                        g *= scale;
                    opt.step(net.weights(), grad);
                    epoch_sum += batch_sum;
                }

                const loss_record rec{epoch, static_cast<int>(c), epoch_sum / static_cast<double>(pairs.size())};
                result.trace.push_back(rec);
                if (rec.loss < result.best_loss)
                {
                    result.best_loss = rec.loss;
                    current.weights = net.weights();
                    if (cfg.checkpoint_dir)
                    {
                        const auto path = *cfg.checkpoint_dir / checkpoint_name(epoch);
                        save_model(current, path);
                        result.checkpoints.push_back(path);
                    }
                }
                if (on_epoch)
                    on_epoch(rec);
            }
        }
        result.best = std::move(current);
        return result;
    }

    inline train_result train(const network_spec& spec, const std::vector<synth::synth_pair>& pairs, const train_config& cfg,
                              const epoch_callback& on_epoch = {})
    {
        return train(spec, make_pair_source(pairs), cfg, on_epoch);
    }
}
