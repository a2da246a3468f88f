// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Binary model layout, all integers little-endian:
//   "FDNNMODL"  u32 version  u32 depth_levels  u32 base_channels  u32 kernel_size  u32 skip_mode
//   u32 native_size  u64 weight_count  f32[weight_count]  u64 checksum
// The checksum is FNV-1a 64 over every preceding byte.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "network.hpp"

namespace facedepth::neural
{
    inline constexpr std::array<char, 8> model_magic{'F', 'D', 'N', 'N', 'M', 'O', 'D', 'L'};
    inline constexpr std::uint32_t model_version = 1;

    struct model
    {
        network_spec spec;
        // Side length the network was trained at; enhance resamples other sizes to it.
        int native_size = 64;
        std::vector<float> weights;

        network<float> make_network() const { return network<float>(spec, weights); }

        friend bool operator==(const model&, const model&) = default;
    };

    inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            h ^= data[i];
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    namespace detail
    {
        template <typename U>
        void put_le(std::vector<unsigned char>& out, U v)
        {
            for (std::size_t i = 0; i < sizeof(U); ++i)
                out.push_back(static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i)));
        }

        template <typename U>
        U get_le(const unsigned char* p)
        {
            std::uint64_t v = 0;
            for (std::size_t i = 0; i < sizeof(U); ++i)
                v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
            return static_cast<U>(v);
        }

        inline constexpr std::size_t model_header_bytes = 8 + 6 * 4 + 8;
    }

    inline std::vector<unsigned char> serialize_model(const model& m)
    {
        m.spec.validate();
        if (m.weights.size() != parameter_count(m.spec))
            throw structural_error("model: weight count " + std::to_string(m.weights.size()) + " does not match network shape (" +
                                   std::to_string(parameter_count(m.spec)) + ")");
        std::vector<unsigned char> out;
        out.reserve(detail::model_header_bytes + 4 * m.weights.size() + 8);
        for (char c : model_magic)
            out.push_back(static_cast<unsigned char>(c));
        detail::put_le<std::uint32_t>(out, model_version);
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.spec.depth_levels));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.spec.base_channels));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.spec.kernel_size));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.spec.skip));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.native_size));
        detail::put_le<std::uint64_t>(out, m.weights.size());
        for (float w : m.weights)
            detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(w));
        detail::put_le<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
        return out;
    }

    inline model deserialize_model(const std::vector<unsigned char>& bytes)
    {
        if (bytes.size() < detail::model_header_bytes + 8)
            throw format_error("model file truncated");
        if (!std::equal(model_magic.begin(), model_magic.end(), bytes.begin()))
            throw format_error("model file: bad magic");
        const std::size_t body = bytes.size() - 8;
        if (fnv1a64(bytes.data(), body) != detail::get_le<std::uint64_t>(bytes.data() + body))
            throw format_error("model file: checksum mismatch");

        const unsigned char* p = bytes.data() + 8;
        const auto version = detail::get_le<std::uint32_t>(p);
        if (version != model_version)
            throw format_error("model file: unsupported version " + std::to_string(version));
        model m;
        m.spec.depth_levels = static_cast<int>(detail::get_le<std::uint32_t>(p + 4));
        m.spec.base_channels = static_cast<int>(detail::get_le<std::uint32_t>(p + 8));
        m.spec.kernel_size = static_cast<int>(detail::get_le<std::uint32_t>(p + 12));
        if (detail::get_le<std::uint32_t>(p + 16) != 0)
            throw format_error("model file: unknown skip mode");
        m.native_size = static_cast<int>(detail::get_le<std::uint32_t>(p + 20));
        const auto count = detail::get_le<std::uint64_t>(p + 24);
        try
        {
            m.spec.validate();
        }
        catch (const parameter_error& e)
        {
            throw format_error(std::string("model file: ") + e.what());
        }
        if (m.native_size < (1 << m.spec.depth_levels) || m.native_size % (1 << m.spec.depth_levels) != 0)
            throw format_error("model file: native size incompatible with depth levels");
        if (count != parameter_count(m.spec))
            throw format_error("model file: weight count does not match network shape");
        if (body != detail::model_header_bytes + 4 * count)
            throw format_error("model file: length does not match weight count");
        m.weights.resize(count);
        const unsigned char* w = bytes.data() + detail::model_header_bytes;
        for (std::size_t i = 0; i < count; ++i)
            m.weights[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(w + 4 * i));
        return m;
    }

    inline void save_model(const model& m, const std::filesystem::path& path)
    {
        const auto bytes = serialize_model(m);
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw io_error("cannot open " + path.string() + " for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f)
            throw io_error("write failed: " + path.string());
    }

    inline model load_model(const std::filesystem::path& path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open " + path.string());
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return deserialize_model(bytes);
    }
}
