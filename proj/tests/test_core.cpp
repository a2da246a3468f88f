// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#include <gtest/gtest.h>

#include <facedepth/normalize.hpp>
#include <facedepth/png_io.hpp>
#include <facedepth/random.hpp>
#include <facedepth/resample.hpp>

#include "support.hpp"

using namespace facedepth;
namespace fs = std::filesystem;

namespace
{
    fs::path temp_dir(const std::string& name)
    {
        auto p = fs::temp_directory_path() / ("facedepth_core_" + name);
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }
}

TEST(DepthImage, SampleCountMustMatchDimensions)
{
    EXPECT_THROW(depth_image(3, 3, std::vector<depth_t>(8)), parameter_error);
    const depth_image img(4, 2, depth_t{7});
    EXPECT_EQ(img.size(), 8u);
    EXPECT_EQ(img.hole_count(), 0u);
    EXPECT_EQ(depth_image(2, 2).hole_count(), 4u);
}

TEST(FaceMask, TrueExactlyOnNonHoles)
{
    const depth_image img(2, 2, std::vector<depth_t>{1, hole, 65534, hole});
    const auto m = face_mask::from_non_holes(img);
    EXPECT_TRUE(m[0]);
    EXPECT_FALSE(m[1]);
    EXPECT_TRUE(m[2]);
    EXPECT_EQ(m.population(), 2u);
}

TEST(Normalize, WindowExamples)
{
    // Near point at 500 mm; samples at the origin, half and full span, and beyond.
    const std::vector<double> raw{500.0, 625.0, 750.0, 900.0, 0.0, 499.0 + 1.0};
    const auto img = normalize_depth(raw, 3, 2);
    EXPECT_EQ(img[0], 0);
    EXPECT_EQ(img[1], 32767);  // round(0.5 * 65534)
    EXPECT_EQ(img[2], 65534);
    EXPECT_EQ(img[3], 65534);  // clamped
    EXPECT_EQ(img[4], hole);
    EXPECT_EQ(img[5], 0);
}

TEST(Normalize, AllHoleInputIsAnError)
{
    const std::vector<double> raw(4, 0.0);
    EXPECT_THROW(normalize_depth(raw, 2, 2), parameter_error);
}

TEST(Normalize, MonotoneAndHolePreserving)
{
    random_stream rng(11);
    std::vector<double> raw(400);
    for (auto& v : raw)
        v = rng.uniform01() < 0.2 ? 0.0 : rng.uniform(400.0, 700.0);
    const auto img = normalize_depth(raw, 20, 20);
    for (std::size_t i = 0; i < raw.size(); ++i)
    {
        EXPECT_EQ(raw[i] == 0.0, is_hole(img[i]));
        for (std::size_t j = 0; j < raw.size(); ++j)
        {
            if (raw[i] > 0.0 && raw[j] > 0.0 && raw[i] < raw[j])
            {
                ASSERT_LE(img[i], img[j]);
            }
        }
    }
}

TEST(Resample, NearestSameSizeIsIdentity)
{
    random_stream rng(3);
    const auto img = support::random_image(rng, 13, 9, 0.3);
    EXPECT_EQ(resample(img, 13, 9, resample_mode::nearest), img);
}

TEST(Resample, ConstantStaysConstant)
{
    const depth_image img(5, 5, depth_t{1234});
    for (int t : {1, 3, 7, 16})
        EXPECT_EQ(resample(img, t, resample_mode::bilinear_hole_aware), depth_image(t, t, depth_t{1234}));
}

TEST(Resample, AllHoleStaysAllHole)
{
    EXPECT_EQ(resample(depth_image(2, 2), 4, resample_mode::bilinear_hole_aware), depth_image(4, 4));
}

TEST(Resample, TwoByTwoWithHoleMatchesHandWeights)
{
    // [100, 200; hole, 300] to 4x4. Source coordinates of the four destination columns/rows:
    // -0.25 -> 0 (clamped), 0.25, 0.75, 1.25 -> 1 (clamped).
    const depth_image src(2, 2, std::vector<depth_t>{100, 200, hole, 300});
    const auto out = resample(src, 4, resample_mode::bilinear_hole_aware);
    EXPECT_EQ(out.at(0, 0), 100);
    EXPECT_EQ(out.at(3, 0), 200);
    EXPECT_EQ(out.at(3, 3), 300);
    EXPECT_TRUE(is_hole(out.at(0, 3)));  // clamps exactly onto the hole: no valid contributor
    EXPECT_EQ(out.at(1, 3), 300);        // only the valid tap carries weight

    const double c[4] = {0.0, 0.25, 0.75, 1.0};
    const double v[2][2] = {{100, 200}, {-1, 300}};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
        {
            double s = 0, wsum = 0;
            for (int j = 0; j < 2; ++j)
                for (int i = 0; i < 2; ++i)
                {
                    const double w = (i ? c[x] : 1 - c[x]) * (j ? c[y] : 1 - c[y]);
                    if (v[j][i] < 0 || w == 0)
                        continue;
                    s += w * v[j][i];
                    wsum += w;
                }
            const depth_t expected = wsum > 0 ? static_cast<depth_t>(std::llround(s / wsum)) : hole;
            EXPECT_EQ(out.at(x, y), expected) << x << "," << y;
        }
}

TEST(Resample, TargetMustBePositive)
{
    EXPECT_THROW(resample(depth_image(2, 2, depth_t{1}), 0, resample_mode::nearest), parameter_error);
}

TEST(Png, RoundTripCoversEverySampleValue)
{
    const auto dir = temp_dir("png");
    std::vector<depth_t> px(65536);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<depth_t>(i);
    const depth_image img(256, 256, px);
    write_png16(dir / "all.png", img);
    EXPECT_EQ(read_png16(dir / "all.png"), img);

    random_stream rng(5);
    for (int k = 0; k < 20; ++k)
    {
        const auto r = support::random_image(rng, 1 + static_cast<int>(rng.uniform_int(0, 40)),
                                             1 + static_cast<int>(rng.uniform_int(0, 40)), 0.2);
        write_png16(dir / "r.png", r);
        ASSERT_EQ(read_png16(dir / "r.png"), r);
    }
}

TEST(Png, RejectsWrongBitDepthAndChannels)
{
    const auto dir = temp_dir("png_bad");
    write_png_raw(dir / "eight.png", 4, 4, 8, PNG_COLOR_TYPE_GRAY, std::vector<unsigned char>(16, 9), 4);
    write_png_raw(dir / "rgb.png", 4, 4, 16, PNG_COLOR_TYPE_RGB, std::vector<unsigned char>(4 * 4 * 6, 9), 4 * 6);
    try
    {
        read_png16(dir / "eight.png");
        FAIL() << "8-bit PNG accepted";
    }
    catch (const format_error& e)
    {
        EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos) << e.what();
    }
    try
    {
        read_png16(dir / "rgb.png");
        FAIL() << "RGB PNG accepted";
    }
    catch (const format_error& e)
    {
        EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
    }
    EXPECT_THROW(read_png16(dir / "missing.png"), io_error);
}

TEST(Random, DerivedSeedsAreDistinctAndStable)
{
    EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
    EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
    EXPECT_NE(derive_seed(7, {1}), derive_seed(8, {1}));
    random_stream a(42), b(42);
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(a.uniform_int(-5, 5), b.uniform_int(-5, 5));
}

TEST(Random, UniformIntStaysInRange)
{
    random_stream rng(9);
    int seen_lo = 0, seen_hi = 0;
    for (int i = 0; i < 5000; ++i)
    {
        const auto v = rng.uniform_int(-3, 3);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 3);
        seen_lo += v == -3;
        seen_hi += v == 3;
    }
    EXPECT_GT(seen_lo, 0);
    EXPECT_GT(seen_hi, 0);
}
