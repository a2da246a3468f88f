// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "image.hpp"

namespace facedepth
{
    namespace detail
    {
        struct png_error_state
        {
            char message[256] = {};
        };

        inline void png_error_handler(png_structp png, png_const_charp msg)
        {
            auto* state = static_cast<png_error_state*>(png_get_error_ptr(png));
            if (state)
                std::snprintf(state->message, sizeof(state->message), "%s", msg);
            png_longjmp(png, 1);
        }

        inline void png_warning_handler(png_structp, png_const_charp) {}

        class file_handle
        {
        public:
            file_handle(const std::filesystem::path& path, const char* mode) : _f(std::fopen(path.c_str(), mode)) {}
            ~file_handle()
            {
                if (_f)
                    std::fclose(_f);
            }
            file_handle(const file_handle&) = delete;
            file_handle& operator=(const file_handle&) = delete;

            std::FILE* get() const noexcept { return _f; }
            explicit operator bool() const noexcept { return _f != nullptr; }

            bool close() noexcept
            {
                const bool ok = std::fclose(_f) == 0;
                _f = nullptr;
                return ok;
            }

        private:
            std::FILE* _f;
        };

        struct png_header
        {
            png_uint_32 width = 0;
            png_uint_32 height = 0;
            int bit_depth = 0;
            int color_type = 0;
            int channels = 0;
            int interlace = 0;
        };

        // Runs libpng with C-only state across setjmp; returns false with state.message set on failure.
        inline bool png_read_raw(std::FILE* f, png_error_state& state, png_header& hdr, std::vector<png_byte>& pixels)
        {
            png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler, png_warning_handler);
            if (!png)
            {
                std::snprintf(state.message, sizeof(state.message), "out of memory");
                return false;
            }
            png_infop info = png_create_info_struct(png);
            if (!info)
            {
                png_destroy_read_struct(&png, nullptr, nullptr);
                std::snprintf(state.message, sizeof(state.message), "out of memory");
                return false;
            }
            png_bytep* volatile rows = nullptr;
            if (setjmp(png_jmpbuf(png)))
            {
                std::free(rows);
                png_destroy_read_struct(&png, &info, nullptr);
                return false;
            }
            png_init_io(png, f);
            png_read_info(png, info);
            hdr.width = png_get_image_width(png, info);
            hdr.height = png_get_image_height(png, info);
            hdr.bit_depth = png_get_bit_depth(png, info);
            hdr.color_type = png_get_color_type(png, info);
            hdr.channels = png_get_channels(png, info);
            hdr.interlace = png_get_interlace_type(png, info);

            if (hdr.bit_depth != 16)
            {
                std::snprintf(state.message, sizeof(state.message), "bit depth is %d, expected 16", hdr.bit_depth);
                png_destroy_read_struct(&png, &info, nullptr);
                return false;
            }
            if (hdr.color_type != PNG_COLOR_TYPE_GRAY || hdr.channels != 1)
            {
                std::snprintf(state.message, sizeof(state.message), "channel count is %d, expected 1 (grayscale)",
                              hdr.channels);
                png_destroy_read_struct(&png, &info, nullptr);
                return false;
            }
            if (hdr.interlace != PNG_INTERLACE_NONE)
                png_set_interlace_handling(png);
            png_read_update_info(png, info);

            const std::size_t stride = png_get_rowbytes(png, info);
            pixels.resize(stride * hdr.height);
            rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * hdr.height));
            for (png_uint_32 y = 0; y < hdr.height; ++y)
                rows[y] = pixels.data() + stride * y;
            png_read_image(png, rows);
            png_read_end(png, nullptr);
            std::free(rows);
            png_destroy_read_struct(&png, &info, nullptr);
            return true;
        }

        inline bool png_write_raw(std::FILE* f, png_error_state& state, int width, int height, int bit_depth,
                                  int color_type, const std::vector<png_byte>& pixels, std::size_t stride)
        {
            png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_error_handler, png_warning_handler);
            if (!png)
            {
                std::snprintf(state.message, sizeof(state.message), "out of memory");
                return false;
            }
            png_infop info = png_create_info_struct(png);
            if (!info)
            {
                png_destroy_write_struct(&png, nullptr);
                std::snprintf(state.message, sizeof(state.message), "out of memory");
                return false;
            }
            png_bytep* volatile rows = nullptr;
            if (setjmp(png_jmpbuf(png)))
            {
                std::free(rows);
                png_destroy_write_struct(&png, &info);
                return false;
            }
            png_init_io(png, f);
            png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                         color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
            png_write_info(png, info);
            rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * static_cast<std::size_t>(height)));
            for (int y = 0; y < height; ++y)
                rows[y] = const_cast<png_bytep>(pixels.data() + stride * static_cast<std::size_t>(y));
            png_write_image(png, rows);
            png_write_end(png, nullptr);
            std::free(rows);
            png_destroy_write_struct(&png, &info);
            return true;
        }
    }

    // Writes any 8/16-bit PNG from already packed rows. Used by the grid report and by tests that
    // need non-conforming files.
    inline void write_png_raw(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                              const std::vector<unsigned char>& pixels, std::size_t stride)
    {
        detail::file_handle f(path, "wb");
        if (!f)
            throw io_error("cannot open '" + path.string() + "' for writing");
        detail::png_error_state state;
        if (!detail::png_write_raw(f.get(), state, width, height, bit_depth, color_type, pixels, stride))
            throw io_error("png write failed for '" + path.string() + "': " + state.message);
        if (!f.close())
            throw io_error("cannot finish writing '" + path.string() + "'");
    }

    // Single-channel 16-bit PNG, samples stored big-endian as the format requires.
    inline void write_png16(const std::filesystem::path& path, const depth_image& img)
    {
        if (img.empty())
            throw parameter_error("write_png16: empty image");
        const std::size_t stride = static_cast<std::size_t>(img.width()) * 2;
        std::vector<unsigned char> bytes(stride * static_cast<std::size_t>(img.height()));
        for (std::size_t i = 0; i < img.size(); ++i)
        {
            bytes[2 * i] = static_cast<unsigned char>(img[i] >> 8);
            bytes[2 * i + 1] = static_cast<unsigned char>(img[i] & 0xff);
        }
        write_png_raw(path, img.width(), img.height(), 16, PNG_COLOR_TYPE_GRAY, bytes, stride);
    }

    inline depth_image read_png16(const std::filesystem::path& path)
    {
        detail::file_handle f(path, "rb");
        if (!f)
            throw io_error("cannot open '" + path.string() + "' for reading");

        unsigned char sig[8] = {};
        if (std::fread(sig, 1, sizeof(sig), f.get()) != sizeof(sig) || png_sig_cmp(sig, 0, sizeof(sig)) != 0)
            throw format_error("'" + path.string() + "' is not a PNG file");
        std::rewind(f.get());

        detail::png_error_state state;
        detail::png_header hdr;
        std::vector<png_byte> raw;
        if (!detail::png_read_raw(f.get(), state, hdr, raw))
            throw format_error("'" + path.string() + "': " + state.message);

        const auto w = static_cast<int>(hdr.width);
        const auto h = static_cast<int>(hdr.height);
        std::vector<depth_t> samples(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
        for (std::size_t i = 0; i < samples.size(); ++i)
            samples[i] = static_cast<depth_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
        return depth_image(w, h, std::move(samples));
    }
}
