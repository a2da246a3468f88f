// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#include <gtest/gtest.h>

#include <facedepth/eval/report.hpp>

#include "oracles/stats_lists.hpp"
#include "support.hpp"

using namespace facedepth;
using namespace facedepth::eval;
namespace fs = std::filesystem;

namespace
{
    face_mask random_mask(random_stream& rng, int w, int h, double p)
    {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
        for (auto& b : bits)
            b = rng.uniform01() < p ? 1 : 0;
        bits[0] = 1;
        return face_mask(w, h, std::move(bits));
    }

    // Kernel oracle: center weight 1, each valid in-image neighbor -1/n.
    double roughness_oracle(const depth_image& img, const face_mask& m)
    {
        double total = 0;
        int count = 0;
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
            {
                if (!m.at(x, y) || img.at(x, y) == 65535)
                    continue;
                std::vector<double> nb;
                for (int j = y - 1; j <= y + 1; ++j)
                    for (int i = x - 1; i <= x + 1; ++i)
                        if ((i != x || j != y) && i >= 0 && j >= 0 && i < img.width() && j < img.height() && img.at(i, j) != 65535)
                            nb.push_back(img.at(i, j) / 65535.0);
                if (nb.empty())
                    continue;
                double r = img.at(x, y) / 65535.0;
                for (double v : nb)
                    r -= v / static_cast<double>(nb.size());
                total += std::abs(r);
                ++count;
            }
        return count ? total / count : 0.0;
    }

    fs::path temp_dir(const std::string& name)
    {
        auto p = fs::temp_directory_path() / ("facedepth_eval_" + name);
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    std::vector<eval_item> small_items(int n)
    {
        synth::dataset_spec spec;
        spec.count = n;
        spec.size = 32;
        spec.face_seed_base = 70;
        spec.degradation = support::small_image_degradation();
        std::vector<eval_item> items;
        synth::dataset_generator gen(spec);
        gen.for_each([&](synth::dataset_entry& e) {
            items.push_back({"img" + std::to_string(e.face_index), e.pair.ground_truth, e.pair.degraded, e.pair.mask});
        });
        return items;
    }
}

TEST(Metrics, RmseExamplesAndOracle)
{
    const face_mask all(4, 4, true);
    const depth_image zero(4, 4, depth_t{0});
    EXPECT_EQ(rmse_face(zero, zero, all), 0.0);
    EXPECT_EQ(rmse_face(zero, depth_image(4, 4), all), 1.0);
    EXPECT_THROW(rmse_face(zero, zero, face_mask(4, 4, false)), parameter_error);
    EXPECT_THROW(rmse_face(zero, zero, face_mask(3, 4, true)), structural_error);

    random_stream rng(1);
    for (int k = 0; k < 50; ++k)
    {
        const int w = static_cast<int>(rng.uniform_int(2, 16)), h = static_cast<int>(rng.uniform_int(2, 16));
        const auto a = support::random_image(rng, w, h, 0.2), b = support::random_image(rng, w, h, 0.2);
        const auto m = random_mask(rng, w, h, 0.6);
        double s = 0;
        int n = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (m.at(x, y))
                {
                    const double d = a.at(x, y) / 65535.0 - b.at(x, y) / 65535.0;
                    s += d * d;
                    ++n;
                }
        ASSERT_NEAR(rmse_face(a, b, m), std::sqrt(s / n), 1e-12);
        ASSERT_EQ(rmse_face(a, b, m), rmse_face(b, a, m));
    }
}

TEST(Metrics, RoughnessExamplesAndOracle)
{
    const face_mask all(6, 6, true);
    EXPECT_EQ(roughness(depth_image(6, 6, depth_t{900}), all), 0.0);

    std::vector<depth_t> px(9, 0);
    px[4] = 6000;
    std::vector<std::uint8_t> center(9, 0);
    center[4] = 1;
    EXPECT_NEAR(roughness(depth_image(3, 3, px), face_mask(3, 3, center)), 6000.0 / 65535.0, 1e-15);
    EXPECT_EQ(roughness(depth_image(3, 3), face_mask(3, 3, true)), 0.0);

    random_stream rng(2);
    for (int k = 0; k < 50; ++k)
    {
        const int w = static_cast<int>(rng.uniform_int(2, 16)), h = static_cast<int>(rng.uniform_int(2, 16));
        const auto img = support::random_image(rng, w, h, 0.25, 1000, 60000);
        const auto m = random_mask(rng, w, h, 0.7);
        ASSERT_NEAR(roughness(img, m), roughness_oracle(img, m), 1e-12);

        // Translation invariance away from clamping.
        std::vector<depth_t> shifted(img.vector());
        for (auto& v : shifted)
            if (!is_hole(v))
                v = static_cast<depth_t>(v + 500);
        ASSERT_NEAR(roughness(depth_image(w, h, shifted), m), roughness(img, m), 1e-12);
    }
}

TEST(Metrics, HolePercentage)
{
    std::vector<depth_t> px(100, 5);
    px[3] = px[50] = px[99] = hole;
    EXPECT_DOUBLE_EQ(hole_percentage(depth_image(10, 10, px), face_mask(10, 10, true)), 0.03);
    EXPECT_EQ(hole_percentage(depth_image(10, 10, depth_t{1}), face_mask(10, 10, true)), 0.0);
    EXPECT_EQ(hole_percentage(depth_image(10, 10), face_mask(10, 10, true)), 1.0);
}

TEST(Metrics, FalsificationDomain)
{
    const depth_image in(2, 1, std::vector<depth_t>{1000, hole});
    const depth_image out(2, 1, std::vector<depth_t>{1000, 5});
    const face_mask m(2, 1, true);
    EXPECT_EQ(falsification_rmse(in, in, m), 0.0);
    EXPECT_EQ(falsification_rmse(in, out, m), 0.0);  // the filled hole is outside the domain
    EXPECT_THROW(falsification_rmse(depth_image(2, 1), out, m), parameter_error);

    random_stream rng(3);
    for (int k = 0; k < 30; ++k)
    {
        const auto a = support::random_image(rng, 9, 7, 0.3), b = support::random_image(rng, 9, 7, 0.1);
        const auto mask = random_mask(rng, 9, 7, 0.8);
        double s = 0;
        int n = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask[i] && a[i] != 65535)
            {
                const double d = (double(a[i]) - double(b[i])) / 65535.0;
                s += d * d;
                ++n;
            }
        if (n)
        {
            ASSERT_NEAR(falsification_rmse(a, b, mask), std::sqrt(s / n), 1e-12);
        }
    }
}

TEST(Stats, MatchesFrozenScipyValues)
{
    // scipy.stats: np.std(ddof=1), skew(bias=False), kurtosis(bias=False).
    const double expected[][4] = {
        {22, 43.617656975128774, 2.2323959116364578, 4.9868659572006537},
        {3, 1.5811388300841898, 0, -1.2000000000000004},
        {0.034775, 0.022850304780711976, 2.1500379351532022, 5.172085093653024},
        {2.4431818181818183, 5.9470170139017062, 0.10951160325874486, -0.036153577251485824},
        {0.3209153846153846, 0.26063033158784438, 1.1085046902219895, 1.6580684051342542},
    };
    const auto& lists = oracle::stats_lists();
    for (std::size_t i = 0; i < lists.size(); ++i)
    {
        const auto s = aggregate(lists[i]);
        EXPECT_NEAR(s.mean, expected[i][0], 1e-12 * std::max(1.0, std::abs(expected[i][0])));
        EXPECT_NEAR(s.std, expected[i][1], 1e-12 * expected[i][1]);
        ASSERT_TRUE(s.skewness && s.excess_kurtosis);
        EXPECT_NEAR(*s.skewness, expected[i][2], 1e-10);
        EXPECT_NEAR(*s.excess_kurtosis, expected[i][3], 1e-10);
        EXPECT_EQ(s.n, lists[i].size());
    }
}

TEST(Stats, EdgeCases)
{
    const std::vector<double> constant(6, 0.25);
    const auto c = aggregate(constant);
    EXPECT_EQ(c.mean, 0.25);
    EXPECT_EQ(c.std, 0.0);
    EXPECT_FALSE(c.skewness);
    EXPECT_FALSE(c.excess_kurtosis);
    EXPECT_THROW(aggregate(std::vector<double>{1, 2, 3}), parameter_error);
    EXPECT_THROW(aggregate(std::vector<double>{1, 2, 3, std::nan("")}), parameter_error);
}

TEST(Comparison, NoneRowPresetsAndOrdering)
{
    const auto items = small_items(6);
    const auto report = run_comparison(items, handcrafted_presets());
    ASSERT_EQ(report.summaries.size(), 8u);
    for (std::size_t i = 1; i < report.summaries.size(); ++i)
        EXPECT_LE(report.summaries[i - 1].mean_rmse(), report.summaries[i].mean_rmse());
    for (const auto& name : preset_names())
        EXPECT_EQ(std::count_if(report.summaries.begin(), report.summaries.end(), [&](const auto& s) { return s.enhancer == name; }), 1)
            << name;
    for (const auto& r : report.records)
        if (r.enhancer == "None")
        {
            const auto& it = *std::find_if(items.begin(), items.end(), [&](const auto& i) { return i.image_id == r.image_id; });
            EXPECT_EQ(r.rmse, rmse_face(it.ground_truth, it.degraded, it.mask));
            EXPECT_EQ(*r.falsification, 0.0);
        }
}

TEST(Comparison, FailuresAreRecordedPerRow)
{
    const auto items = small_items(4);
    const enhancer_config broken{"Broken", model_config{}};
    const auto report = run_comparison(items, {broken});
    std::size_t failed = 0;
    for (const auto& r : report.records)
        failed += r.failed();
    EXPECT_EQ(failed, items.size());
    EXPECT_EQ(report.summaries.back().enhancer, "Broken");
    EXPECT_FALSE(report.summaries.back().metrics.front().stats);

    const auto dir = temp_dir("fail");
    write_per_image_csv(report, dir / "per_image.csv");
    write_aggregate_csv(report, dir / "aggregate.csv");
    write_errors_csv(report.records, dir / "errors.csv");
    const auto errors = support::read_bytes(dir / "errors.csv");
    EXPECT_EQ(std::count(errors.begin(), errors.end(), '\n'), 1 + static_cast<long>(items.size()));
    const auto agg = support::read_bytes(dir / "aggregate.csv");
    const std::string text(agg.begin(), agg.end());
    EXPECT_NE(text.find("Broken,rmse,nan,nan,undefined,undefined,0"), std::string::npos);
}

TEST(Comparison, ReportIsDeterministic)
{
    const auto items = small_items(5);
    const auto dir = temp_dir("det");
    write_per_image_csv(run_comparison(items, handcrafted_presets()), dir / "a.csv");
    write_per_image_csv(run_comparison(items, handcrafted_presets()), dir / "b.csv");
    EXPECT_EQ(support::read_bytes(dir / "a.csv"), support::read_bytes(dir / "b.csv"));
}

TEST(Falsification, IdentityIsZeroAndVariantsAreSeparated)
{
    std::vector<falsification_item> items;
    for (const auto& it : small_items(5))
    {
        items.push_back({it.image_id, "keep", it.degraded, it.mask});
        items.push_back({it.image_id, "occluded", it.degraded, it.mask});
    }
    const auto r = run_falsification(items, {*find_preset("None"), *find_preset("Sp-HfU")});
    ASSERT_EQ(r.summaries.size(), 4u);
    const auto* none = r.find("None", "occluded");
    ASSERT_NE(none, nullptr);
    EXPECT_EQ(none->stats.stats->mean, 0.0);
    EXPECT_EQ(none->stats.n, 5u);
    for (const auto& rec : r.records)
        if (rec.model == "Sp-HfU")
        {
            const auto& it = *std::find_if(items.begin(), items.end(), [&](const auto& i) { return i.image_id == rec.image_id; });
            EXPECT_EQ(rec.falsification, falsification_rmse(it.degraded, apply(*find_preset("Sp-HfU"), it.degraded), it.mask));
        }
}
