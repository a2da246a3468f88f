// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "handcrafted.hpp"
#include "neural/enhance.hpp"

namespace facedepth
{
    struct identity_config
    {
    };

    struct model_config
    {
        std::shared_ptr<const neural::enhancer> net;
    };

    using enhancer_params = std::variant<identity_config, decimation_config, hole_fill_mode, spatial_config, model_config>;

    struct enhancer_config
    {
        std::string name;
        enhancer_params params;
    };

    inline constexpr const char* none_enhancer_name = "None";

    inline std::vector<enhancer_config> handcrafted_presets()
    {
        spatial_config sp16;
        sp16.hole_fill_radius = 16;
        spatial_config spu;
        spu.hole_fill_radius = unlimited_radius;
        return {
            {"De-M2", decimation_config{2}},
            {"De-M8", decimation_config{8}},
            {"Hf-FFA", hole_fill_mode::farest_from_around},
            {"Hf-NFA", hole_fill_mode::nearest_from_around},
            {"Hf-L", hole_fill_mode::left},
            {"Sp-Hf16", sp16},
            {"Sp-HfU", spu},
        };
    }

    inline std::vector<std::string> preset_names()
    {
        std::vector<std::string> names{none_enhancer_name};
        for (const auto& p : handcrafted_presets())
            names.push_back(p.name);
        return names;
    }

    inline std::optional<enhancer_config> find_preset(const std::string& name)
    {
        if (name == none_enhancer_name)
            return enhancer_config{none_enhancer_name, identity_config{}};
        for (auto& p : handcrafted_presets())
            if (p.name == name)
                return p;
        return std::nullopt;
    }

    inline enhancer_config model_enhancer(std::string name, neural::model m)
    {
        return {std::move(name), model_config{std::make_shared<const neural::enhancer>(std::move(m))}};
    }

    namespace detail
    {
        template <class... F>
        struct overloaded : F...
        {
            using F::operator()...;
        };
        template <class... F>
        overloaded(F...) -> overloaded<F...>;
    }

    inline depth_image apply(const enhancer_config& e, const depth_image& img)
    {
        return std::visit(detail::overloaded{
                              [&](const identity_config&) { return img; },
                              [&](const decimation_config& c) { return decimate(img, c); },
                              [&](const hole_fill_mode& m) { return fill_holes(img, m); },
                              [&](const spatial_config& c) { return spatial_filter(img, c); },
                              [&](const model_config& m) {
                                  if (!m.net)
                                      throw parameter_error("enhancer " + e.name + " has no model loaded");
                                  return (*m.net)(img);
                              },
                          },
                          e.params);
    }
}
