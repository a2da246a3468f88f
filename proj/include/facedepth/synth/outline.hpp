// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <array>
#include <vector>

#include "../image.hpp"

namespace facedepth::synth
{
    struct pixel
    {
        int x = 0;
        int y = 0;

        friend bool operator==(const pixel&, const pixel&) = default;
    };

    // Moore-neighborhood trace of the 8-connected non-hole region containing the topmost-leftmost
    // non-hole pixel. Counterclockwise on screen (down the left side first), closed, starting at that
    // pixel; thin parts of the region are visited once per side.
    inline std::vector<pixel> trace_outline(const depth_image& img)
    {
        // Screen directions in counterclockwise order (y grows downwards): E, NE, N, NW, W, SW, S, SE.
        static constexpr std::array<pixel, 8> dirs{{{1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

        auto inside = [&](int x, int y) { return img.contains(x, y) && !is_hole(img.at(x, y)); };

        pixel start{-1, -1};
        for (int y = 0; y < img.height() && start.x < 0; ++y)
            for (int x = 0; x < img.width(); ++x)
                if (!is_hole(img.at(x, y)))
                {
                    start = {x, y};
                    break;
                }
        if (start.x < 0)
            throw parameter_error("trace_outline: image has no non-hole pixel");

        // Find the next boundary pixel sweeping counterclockwise, starting just past the backtrack direction.
        auto step = [&](const pixel& p, int backtrack) -> int {
            for (int k = 1; k <= 8; ++k)
            {
                const int d = (backtrack + k) % 8;
                if (inside(p.x + dirs[d].x, p.y + dirs[d].y))
                    return d;
            }
            return -1;
        };

        std::vector<pixel> trace{start};
        // Above the topmost-leftmost pixel is background, so the sweep starts from north.
        const int first = step(start, 2);
        if (first < 0)
            return trace;

        pixel cur{start.x + dirs[first].x, start.y + dirs[first].y};
        int dir = first;
        const std::size_t limit = 4 * img.size() + 8;
        while (trace.size() <= limit)
        {
            if (cur == start)
            {
                const int next = step(cur, (dir + 4) % 8);
                if (next == first)
                    break;
                trace.push_back(cur);
                dir = next;
                cur = {cur.x + dirs[next].x, cur.y + dirs[next].y};
                continue;
            }
            trace.push_back(cur);
            const int next = step(cur, (dir + 4) % 8);
            dir = next;
            cur = {cur.x + dirs[next].x, cur.y + dirs[next].y};
        }
        return trace;
    }
}
