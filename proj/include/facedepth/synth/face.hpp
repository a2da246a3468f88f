// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Procedural ground-truth face depth: a rotated ellipsoidal head carrying a nose ridge, eye sockets
// and a mouth/chin undulation, rendered by marching orthographic camera rays against the surface.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "../image.hpp"
#include "../normalize.hpp"
#include "../random.hpp"

namespace facedepth::synth
{
    inline constexpr double max_frontal_angle = 0.6;

    struct face_params
    {
        std::uint64_t seed = 0;
        int size = canonical_size;
        // Semi-axes of the head ellipsoid: width, height, depth.
        std::array<double, 3> head_radii_mm{75.0, 95.0, 90.0};
        double nose_height_mm = 22.0;
        double nose_width_mm = 11.0;
        double eye_socket_depth_mm = 7.0;
        double yaw = 0.0;
        double pitch = 0.0;
        double roll = 0.0;
        // Head center shift in pixels (x, y).
        std::array<double, 2> center_offset_px{0.0, 0.0};
        // Orthographic field of view across the full image side.
        double field_of_view_mm = 220.0;
        double camera_distance_mm = 600.0;

        void validate() const
        {
            if (size < 8)
                throw parameter_error("face_params: size must be >= 8");
            for (double r : head_radii_mm)
                if (!(r > 0.0) || !std::isfinite(r))
                    throw parameter_error("face_params: head radii must be finite and > 0");
            if (!(nose_height_mm >= 0.0) || !(nose_width_mm > 0.0) || !(eye_socket_depth_mm >= 0.0))
                throw parameter_error("face_params: nose/eye dimensions out of range");
            if (!(std::abs(yaw) <= max_frontal_angle) || !(std::abs(pitch) <= max_frontal_angle) || !std::isfinite(roll))
                throw parameter_error("face_params: |yaw| and |pitch| must be <= 0.6 rad");
            if (!(field_of_view_mm > 0.0))
                throw parameter_error("face_params: field of view must be > 0");
            const double reach = std::max({head_radii_mm[0], head_radii_mm[1], head_radii_mm[2]}) + nose_height_mm;
            if (!(camera_distance_mm > reach))
                throw parameter_error("face_params: camera distance must exceed the head extent");
        }
    };

    // Varied, mostly frontal faces from a seed.
    inline face_params random_face_params(std::uint64_t seed, int size = canonical_size)
    {
        random_stream rng(derive_seed(seed, {0x66616365}));
        face_params p;
        p.seed = seed;
        p.size = size;
        p.head_radii_mm = {rng.uniform(66.0, 80.0), rng.uniform(86.0, 102.0), rng.uniform(80.0, 98.0)};
        p.nose_height_mm = rng.uniform(15.0, 30.0);
        p.nose_width_mm = rng.uniform(8.0, 14.0);
        p.eye_socket_depth_mm = rng.uniform(8.0, 16.0);
        p.yaw = rng.uniform(-0.4, 0.4);
        p.pitch = rng.uniform(-0.3, 0.3);
        p.roll = rng.uniform(-0.25, 0.25);
        const double shift = 0.04 * size;
        p.center_offset_px = {rng.uniform(-shift, shift), rng.uniform(-shift, shift)};
        return p;
    }

    namespace detail
    {
        struct mat3
        {
            std::array<double, 9> m{};

            std::array<double, 3> apply(const std::array<double, 3>& v) const
            {
                return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2], m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
                        m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
            }

            std::array<double, 3> apply_transposed(const std::array<double, 3>& v) const
            {
                return {m[0] * v[0] + m[3] * v[1] + m[6] * v[2], m[1] * v[0] + m[4] * v[1] + m[7] * v[2],
                        m[2] * v[0] + m[5] * v[1] + m[8] * v[2]};
            }

            friend mat3 operator*(const mat3& a, const mat3& b)
            {
                mat3 r;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        r.m[i * 3 + j] = a.m[i * 3] * b.m[j] + a.m[i * 3 + 1] * b.m[3 + j] + a.m[i * 3 + 2] * b.m[6 + j];
                return r;
            }
        };

        // Head-to-camera rotation: roll about z, then yaw about y, then pitch about x (applied right to left).
        inline mat3 head_rotation(double yaw, double pitch, double roll)
        {
            const double cy = std::cos(yaw), sy = std::sin(yaw);
            const double cp = std::cos(pitch), sp = std::sin(pitch);
            const double cr = std::cos(roll), sr = std::sin(roll);
            const mat3 rz{{cr, -sr, 0, sr, cr, 0, 0, 0, 1}};
            const mat3 ry{{cy, 0, sy, 0, 1, 0, -sy, 0, cy}};
            const mat3 rx{{1, 0, 0, 0, cp, -sp, 0, sp, cp}};
            return rz * ry * rx;
        }

        // Local surface depth of the face front (negative z faces the camera); NaN outside the head outline.
        class face_surface
        {
        public:
            explicit face_surface(const face_params& p)
                : _a(p.head_radii_mm[0]), _b(p.head_radii_mm[1]), _c(p.head_radii_mm[2]), _nose_h(p.nose_height_mm),
                  _nose_w(p.nose_width_mm), _eye_d(p.eye_socket_depth_mm)
            {
            }

            double height(double x, double y) const
            {
                const double r2 = (x / _a) * (x / _a) + (y / _b) * (y / _b);
                // Only the front cap of the head is rendered, like a cropped face scan.
                if (r2 >= face_extent)
                    return std::numeric_limits<double>::quiet_NaN();
                const double base = -_c * std::sqrt(1.0 - r2);

                // Features fade out towards the silhouette.
                const double t = std::clamp((face_extent - r2) / 0.3, 0.0, 1.0);
                const double taper = t * t * (3.0 - 2.0 * t);

                // Nose: long ridge above the tip, short falloff below it.
                const double ridge = 0.32 * _b;
                const double spread_y = y < 0.0 ? ridge : 0.09 * _b;
                const double nose = _nose_h * std::exp(-(y / spread_y) * (y / spread_y)) *
                                    std::exp(-(x / _nose_w) * (x / _nose_w) * (y < 0.0 ? 1.0 + 1.5 * (-y / ridge) : 1.0));

                const double ex = 0.38 * _a, ey = -0.24 * _b, sx = 0.17 * _a, sy = 0.09 * _b;
                const double dy_e = (y - ey) / sy;
                const double eyes = _eye_d * (std::exp(-((x - ex) / sx) * ((x - ex) / sx) - dy_e * dy_e) +
                                              std::exp(-((x + ex) / sx) * ((x + ex) / sx) - dy_e * dy_e));

                const double my = 0.30 * _b, cy = 0.52 * _b;
                const double by = -0.36 * _b;
                const double brow = 0.35 * _eye_d * std::exp(-((y - by) / (0.06 * _b)) * ((y - by) / (0.06 * _b)) -
                                                             (x / (0.55 * _a)) * (x / (0.55 * _a)));

                const double mouth = 0.18 * _nose_h * std::exp(-((y - my) / (0.05 * _b)) * ((y - my) / (0.05 * _b)) -
                                                                (x / (0.30 * _a)) * (x / (0.30 * _a)));
                const double chin = 0.25 * _nose_h * std::exp(-((y - cy) / (0.10 * _b)) * ((y - cy) / (0.10 * _b)) -
                                                               (x / (0.35 * _a)) * (x / (0.35 * _a)));

                return base + taper * (eyes + mouth - nose - chin - brow);
            }

            double max_protrusion() const { return _nose_h + 0.25 * _nose_h + 0.35 * _eye_d; }

            // The rendered solid is the cap in front of the plane through its rim.
            double back_plane() const { return -_c * std::sqrt(1.0 - face_extent); }

            static constexpr double face_extent = 0.88;

        private:
            double _a, _b, _c, _nose_h, _nose_w, _eye_d;
        };
    }

    // Per-pixel ray/surface depth in millimeters; 0 where the ray misses the head.
    inline std::vector<double> render_face_mm(const face_params& p)
    {
        p.validate();
        const int s = p.size;
        const double pix = p.field_of_view_mm / s;
        const double half = (s - 1) / 2.0;
        const detail::mat3 rot = detail::head_rotation(p.yaw, p.pitch, p.roll);
        const detail::face_surface surface(p);
        const std::array<double, 3> center{p.center_offset_px[0] * pix, p.center_offset_px[1] * pix, p.camera_distance_mm};

        const double reach = std::max({p.head_radii_mm[0], p.head_radii_mm[1], p.head_radii_mm[2]}) +
                             surface.max_protrusion() + 1.0;
        const double t_begin = p.camera_distance_mm - reach;
        const double t_end = p.camera_distance_mm + reach;
        constexpr double step = 0.5;

        const double back = surface.back_plane();
        auto gap = [&](double x, double y, double t) {
            const auto local = rot.apply_transposed({x - center[0], y - center[1], t - center[2]});
            const double hgt = surface.height(local[0], local[1]);
            if (std::isnan(hgt) || local[2] > back)
                return -std::numeric_limits<double>::infinity();
            return local[2] - hgt;
        };

        std::vector<double> raw(static_cast<std::size_t>(s) * static_cast<std::size_t>(s), 0.0);
        for (int v = 0; v < s; ++v)
        {
            const double y = (v - half) * pix;
            for (int u = 0; u < s; ++u)
            {
                const double x = (u - half) * pix;
                double prev_t = t_begin;
                double t = t_begin;
                bool hit = false;
                while (t <= t_end)
                {
                    if (gap(x, y, t) >= 0.0)
                    {
                        hit = t > t_begin;
                        break;
                    }
                    prev_t = t;
                    t += step;
                }
                if (!hit)
                    continue;
                double lo = prev_t, hi = t;
                for (int k = 0; k < 40; ++k)
                {
                    const double mid = 0.5 * (lo + hi);
                    if (gap(x, y, mid) >= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                raw[static_cast<std::size_t>(v) * s + u] = 0.5 * (lo + hi);
            }
        }
        return raw;
    }

    // Face pixels normalized over a 250 mm window starting at the nearest point; background is hole.
    inline depth_image generate_ground_truth(const face_params& p)
    {
        const auto raw = render_face_mm(p);
        return normalize_depth(raw, p.size, p.size);
    }
}
