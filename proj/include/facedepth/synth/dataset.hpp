// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "degrade.hpp"
#include "face.hpp"

namespace facedepth::synth
{
    // Named degradation variant applied on top of the shared degradation settings.
    struct recipe
    {
        std::string name;
        background_mode background = background_mode::keep;
        occlusion_mode occlusion = occlusion_mode::none;

        friend bool operator==(const recipe&, const recipe&) = default;
    };

    inline std::vector<recipe> standard_recipes()
    {
        return {{"keep", background_mode::keep, occlusion_mode::none},
                {"randomize_full", background_mode::randomize_full, occlusion_mode::none},
                {"ranged_blurred", background_mode::randomize_ranged_blurred, occlusion_mode::none},
                {"occluded", background_mode::keep, occlusion_mode::lower_half}};
    }

    inline std::optional<recipe> find_standard_recipe(const std::string& name)
    {
        for (auto& r : standard_recipes())
            if (r.name == name)
                return r;
        return std::nullopt;
    }

    struct dataset_spec
    {
        int count = 1;
        std::uint64_t face_seed_base = 0;
        int size = canonical_size;
        // Shared settings; `degradation.seed` is the base of every pair's stream.
        degradation_config degradation;
        std::vector<recipe> recipes{standard_recipes()[0]};
    };

    struct dataset_entry
    {
        int face_index = 0;
        int recipe_index = 0;
        std::string recipe_name;
        face_params face;
        synth_pair pair;
    };

    // Random-access, deterministic pair generation. Pairs are ordered face-major with recipes interleaved.
    class dataset_generator
    {
    public:
        explicit dataset_generator(dataset_spec spec) : _spec(std::move(spec))
        {
            if (_spec.count < 1)
                throw parameter_error("dataset: count must be >= 1");
            if (_spec.recipes.empty())
                throw parameter_error("dataset: at least one recipe is required");
            validate(_spec.degradation);
        }

        const dataset_spec& spec() const noexcept { return _spec; }

        std::size_t size() const noexcept { return static_cast<std::size_t>(_spec.count) * _spec.recipes.size(); }

        face_params face(int face_index) const
        {
            return random_face_params(derive_seed(_spec.face_seed_base, {static_cast<std::uint64_t>(face_index)}), _spec.size);
        }

        degradation_config degradation(int face_index, int recipe_index) const
        {
            degradation_config cfg = _spec.degradation;
            const auto& r = _spec.recipes[static_cast<std::size_t>(recipe_index)];
            cfg.background = r.background;
            cfg.occlusion = r.occlusion;
            cfg.seed = derive_seed(_spec.degradation.seed,
                                   {static_cast<std::uint64_t>(face_index), static_cast<std::uint64_t>(recipe_index)});
            return cfg;
        }

        // All recipes of one face, sharing one rendered ground truth.
        std::vector<dataset_entry> face_entries(int face_index) const
        {
            const face_params fp = face(face_index);
            const depth_image gt = generate_ground_truth(fp);
            std::vector<dataset_entry> out;
            out.reserve(_spec.recipes.size());
            for (int r = 0; r < static_cast<int>(_spec.recipes.size()); ++r)
                out.push_back({face_index, r, _spec.recipes[static_cast<std::size_t>(r)].name, fp, degrade(gt, degradation(face_index, r))});
            return out;
        }

        dataset_entry at(std::size_t i) const
        {
            const int n = static_cast<int>(_spec.recipes.size());
            const int f = static_cast<int>(i / static_cast<std::size_t>(n));
            const int r = static_cast<int>(i % static_cast<std::size_t>(n));
            const face_params fp = face(f);
            return {f, r, _spec.recipes[static_cast<std::size_t>(r)].name, fp, degrade(generate_ground_truth(fp), degradation(f, r))};
        }

        template <typename Fn>
        void for_each(Fn&& fn) const
        {
            for (int f = 0; f < _spec.count; ++f)
                for (auto& e : face_entries(f))
                    fn(e);
        }

    private:
        dataset_spec _spec;
    };

    inline std::vector<synth_pair> generate_dataset(const dataset_spec& spec)
    {
        dataset_generator gen(spec);
        std::vector<synth_pair> out;
        out.reserve(gen.size());
        gen.for_each([&](dataset_entry& e) { out.push_back(std::move(e.pair)); });
        return out;
    }
}
