// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#include <gtest/gtest.h>

#include <facedepth/enhancers.hpp>
#include <facedepth/neural/train.hpp>

#include "support.hpp"

using namespace facedepth;
using namespace facedepth::neural;
namespace fs = std::filesystem;

namespace
{
    // Closed-form count: encoder pairs and strided convs, bottleneck, decoder upsample convs and
    // concatenating pairs, 1x1 head; every conv carries one bias per output channel.
    std::size_t count_oracle(int levels, int base, int k)
    {
        auto conv = [](std::size_t in, std::size_t out, int kernel) {
            return in * out * static_cast<std::size_t>(kernel * kernel) + out;
        };
        std::size_t total = 0, in = 1;
        for (int l = 0; l < levels; ++l)
        {
            const std::size_t c = static_cast<std::size_t>(base) << l;
            total += conv(in, c, k) + conv(c, c, k) + conv(c, c, k);
            in = c;
        }
        const std::size_t cb = static_cast<std::size_t>(base) << levels;
        total += conv(in, cb, k) + conv(cb, cb, k);
        in = cb;
        for (int l = levels - 1; l >= 0; --l)
        {
            const std::size_t c = static_cast<std::size_t>(base) << l;
            total += conv(in, c, k) + conv(2 * c, c, k) + conv(c, c, k);
            in = c;
        }
        return total + conv(in, 1, 1);
    }

    std::vector<synth::synth_pair> small_pairs(int count, int size, std::uint64_t seed)
    {
        synth::dataset_spec spec;
        spec.count = count;
        spec.size = size;
        spec.face_seed_base = seed;
        spec.degradation = support::small_image_degradation();
        spec.degradation.seed = seed + 1;
        return synth::generate_dataset(spec);
    }

    fs::path temp_dir(const std::string& name)
    {
        auto p = fs::temp_directory_path() / ("facedepth_neural_" + name);
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }
}

TEST(Network, ParameterCountMatchesClosedForm)
{
    for (int levels : {2, 3, 4})
        for (int base : {4, 8})
            for (int k : {3, 5})
                EXPECT_EQ(parameter_count({levels, base, k, skip_mode::concatenate}), count_oracle(levels, base, k))
                    << levels << "/" << base << "/" << k;
    EXPECT_EQ(parameter_count({2, 8, 3, skip_mode::concatenate}), 35425u);
}

TEST(Network, ShapeValidation)
{
    EXPECT_THROW((network_spec{1, 8, 3, skip_mode::concatenate}.validate()), parameter_error);
    EXPECT_THROW((network_spec{3, 2, 3, skip_mode::concatenate}.validate()), parameter_error);
    EXPECT_THROW((network_spec{3, 8, 4, skip_mode::concatenate}.validate()), parameter_error);
}

TEST(Network, ZeroWeightsGiveHalf)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    network<float> net(spec, std::vector<float>(parameter_count(spec), 0.0f));
    tensor<float> x(1, 16, 16, 0.3f);
    const auto y = net.forward(x);
    for (float v : y.data)
        ASSERT_EQ(v, 0.5f);
}

TEST(Network, ShapeInvariance)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    const network<float> net(spec, initialize_weights<float>(spec, 1));
    for (int s : {32, 64, 256})
    {
        const auto y = net.forward(tensor<float>(1, s, s, 0.5f));
        EXPECT_EQ(y.channels, 1);
        EXPECT_EQ(y.height, s);
        EXPECT_EQ(y.width, s);
        for (float v : y.data)
            ASSERT_TRUE(v > 0.0f && v < 1.0f);
    }
}

TEST(Network, StructuralErrors)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    EXPECT_THROW(network<float>(spec, std::vector<float>(10)), structural_error);
    const network<float> net(spec, initialize_weights<float>(spec, 1));
    try
    {
        net.forward(tensor<float>(1, 18, 18));
        FAIL();
    }
    catch (const structural_error& e)
    {
        EXPECT_NE(std::string(e.what()).find("(1, 18, 18)"), std::string::npos) << e.what();
    }
    EXPECT_THROW(net.forward(tensor<float>(2, 16, 16)), structural_error);
}

TEST(Network, ZeroUpstreamGivesZeroGradient)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    const auto w = initialize_weights<double>(spec, 3);
    tensor<double> x(1, 16, 16, 0.25);
    const auto g = backward<double>(spec, w, x, tensor<double>(1, 16, 16, 0.0));
    for (double v : g)
        ASSERT_EQ(v, 0.0);
}

TEST(Network, GradientMatchesFiniteDifferences)
{
    support::gradcheck_options opt;
    opt.networks = 2;
    opt.weights_per_layer = 40;
    opt.seed = 99;
    const auto r = support::gradient_check(opt);
    EXPECT_LT(r.max_relative_error, 1e-3);
    EXPECT_GT(r.checked, 500u);
    EXPECT_LT(r.skipped * 20, r.checked);
}

TEST(Encoding, RoundTripAndThreshold)
{
    std::vector<depth_t> all(65536);
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = static_cast<depth_t>(i);
    const depth_image img(256, 256, all);
    EXPECT_EQ(decode(encode<float>(img)), img);
    EXPECT_EQ(decode(encode<double>(img)), img);
    const auto e = encode<float>(img);
    EXPECT_EQ(encode<float>(decode(e)).data, e.data);
    EXPECT_EQ(e.data[65535], 1.0f);

    tensor<double> t(1, 1, 4);
    t.data = {-0.5, 1.0 - 1.0 / (2.0 * 65535.0), 1.0 - 1.1 / (2.0 * 65535.0), 3.0};
    const auto d = decode(t);
    EXPECT_EQ(d[0], 0);
    EXPECT_EQ(d[1], hole);
    EXPECT_EQ(d[2], 65534);
    EXPECT_EQ(d[3], hole);
}

TEST(ModelFile, RoundTripIsBitExact)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    model m{spec, 32, initialize_weights<float>(spec, 5)};
    const auto bytes = serialize_model(m);
    EXPECT_EQ(deserialize_model(bytes), m);

    const auto dir = temp_dir("file");
    save_model(m, dir / "a.fdm");
    save_model(load_model(dir / "a.fdm"), dir / "b.fdm");
    EXPECT_EQ(support::read_bytes(dir / "a.fdm"), support::read_bytes(dir / "b.fdm"));
    EXPECT_EQ(support::read_bytes(dir / "a.fdm"), bytes);
    EXPECT_THROW(load_model(dir / "missing.fdm"), io_error);
}

TEST(ModelFile, CorruptionIsDetected)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    const auto bytes = serialize_model({spec, 32, initialize_weights<float>(spec, 5)});

    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x01;
    EXPECT_THROW(deserialize_model(flipped), format_error);

    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(deserialize_model(magic), format_error);

    EXPECT_THROW(deserialize_model(std::vector<unsigned char>(bytes.begin(), bytes.end() - 9)), format_error);
    EXPECT_THROW(deserialize_model({}), format_error);
}

TEST(Enhance, DeterministicTotalAndSizeAware)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    const enhancer e(model{spec, 32, initialize_weights<float>(spec, 8)});
    random_stream rng(4);
    const auto img = support::random_image(rng, 32, 32, 0.3);
    EXPECT_EQ(e(img), e(img));
    EXPECT_EQ(e(depth_image(32, 32)).width(), 32);
    EXPECT_EQ(e(support::random_image(rng, 48, 48, 0.2)).width(), 48);
    EXPECT_THROW(e(depth_image(32, 16)), structural_error);

    const auto named = model_enhancer("net", model{spec, 32, initialize_weights<float>(spec, 8)});
    EXPECT_EQ(apply(named, img), e(img));
}

TEST(Train, TraceCheckpointsAndDeterminism)
{
    const auto pairs = small_pairs(25, 32, 40);
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    train_config cfg;
    cfg.epochs_per_chunk = 2;
    cfg.chunk_size = 10;
    cfg.batch_size = 4;
    cfg.seed = 17;
    cfg.checkpoint_dir = temp_dir("ckpt");

    const auto a = train(spec, pairs, cfg);
    EXPECT_EQ(a.trace.size(), 2u * 3u);  // epochs x chunks
    EXPECT_LE(a.checkpoints.size(), a.trace.size());
    EXPECT_GE(a.checkpoints.size(), 1u);
    for (std::size_t i = 0; i < a.trace.size(); ++i)
    {
        EXPECT_EQ(a.trace[i].epoch, static_cast<int>(i) + 1);
        EXPECT_EQ(a.trace[i].chunk, static_cast<int>(i / 2));
    }
    EXPECT_EQ(a.best.native_size, 32);
    EXPECT_EQ(load_model(a.checkpoints.back()), a.best);

    cfg.checkpoint_dir.reset();
    const auto b = train(spec, pairs, cfg);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        EXPECT_EQ(a.trace[i].loss, b.trace[i].loss);
    EXPECT_EQ(a.best, b.best);

    const auto dir = temp_dir("trace");
    write_loss_trace(a.trace, dir / "loss.csv");
    const auto text = support::read_bytes(dir / "loss.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + static_cast<long>(a.trace.size()));
}

TEST(Train, Errors)
{
    const network_spec spec{2, 4, 3, skip_mode::concatenate};
    train_config cfg;
    EXPECT_THROW(train(spec, std::vector<synth::synth_pair>{}, cfg), parameter_error);
    cfg.batch_size = 0;
    EXPECT_THROW(train(spec, small_pairs(2, 32, 1), cfg), parameter_error);

    auto mixed = small_pairs(2, 32, 1);
    const auto other = small_pairs(1, 16, 2);
    mixed.push_back(other[0]);
    EXPECT_THROW(train(spec, mixed, train_config{}), structural_error);

    train_config wild;
    wild.learning_rate = 1e38;
    wild.epochs_per_chunk = 3;
    try
    {
        train(spec, small_pairs(8, 32, 3), wild);
        FAIL() << "diverging run did not abort";
    }
    catch (const training_error& e)
    {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("epoch"), std::string::npos);
        EXPECT_NE(msg.find("batch"), std::string::npos);
    }
}

TEST(Train, DeskNetworkHalvesLossWithinTwentyEpochs)
{
    const auto pairs = small_pairs(200, 64, 500);
    train_config cfg;
    cfg.epochs_per_chunk = 20;
    cfg.chunk_size = 200;
    cfg.seed = 1;
    const auto r = train({3, 8, 3, skip_mode::concatenate}, pairs, cfg);
    EXPECT_LT(r.trace.back().loss, 0.5 * r.trace.front().loss);
    EXPECT_LE(r.best_loss, r.trace.front().loss);
}
