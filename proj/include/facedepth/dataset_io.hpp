// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// On-disk dataset layout:
//   <dir>/<face>_gt.png              ground truth, one per face
//   <dir>/<face>_<recipe>_deg.png    degraded variant per recipe
//   <dir>/manifest.json              entry list; masks are re-derived from the ground truth

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "png_io.hpp"
#include "synth/dataset.hpp"

namespace facedepth
{
    struct manifest_entry
    {
        int face = 0;
        std::string recipe;
        std::string ground_truth;  // file names relative to the dataset directory
        std::string degraded;
    };

    struct dataset_manifest
    {
        int size = 0;
        int count = 0;
        std::vector<std::string> recipes;
        std::vector<manifest_entry> entries;
    };

    inline std::string face_stem(int face)
    {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%05d", face);
        return buf;
    }

    inline nlohmann::ordered_json manifest_json(const dataset_manifest& m)
    {
        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["size"] = m.size;
        j["count"] = m.count;
        j["recipes"] = m.recipes;
        auto& entries = j["entries"] = nlohmann::ordered_json::array();
        for (const auto& e : m.entries)
            entries.push_back({{"face", e.face}, {"recipe", e.recipe}, {"ground_truth", e.ground_truth}, {"degraded", e.degraded}});
        return j;
    }

    inline void write_text_file(const std::filesystem::path& path, const std::string& text)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw io_error("cannot open " + path.string() + " for writing");
        f << text;
        if (!f)
            throw io_error("write failed: " + path.string());
    }

    inline dataset_manifest write_dataset(const synth::dataset_spec& spec, const std::filesystem::path& dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw io_error("cannot create " + dir.string() + ": " + ec.message());
        synth::dataset_generator gen(spec);
        dataset_manifest m{spec.size, spec.count, {}, {}};
        for (const auto& r : spec.recipes)
            m.recipes.push_back(r.name);
        for (int f = 0; f < spec.count; ++f)
        {
            const auto entries = gen.face_entries(f);
            const std::string gt_name = face_stem(f) + "_gt.png";
            write_png16(dir / gt_name, entries.front().pair.ground_truth);
            for (const auto& e : entries)
            {
                const std::string deg_name = face_stem(f) + "_" + e.recipe_name + "_deg.png";
                write_png16(dir / deg_name, e.pair.degraded);
                m.entries.push_back({f, e.recipe_name, gt_name, deg_name});
            }
        }
        write_text_file(dir / "manifest.json", manifest_json(m).dump(2) + "\n");
        return m;
    }

    inline dataset_manifest read_manifest(const std::filesystem::path& dir)
    {
        const auto path = dir / "manifest.json";
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open dataset manifest " + path.string());
        dataset_manifest m;
        try
        {
            const auto j = nlohmann::json::parse(f);
            m.size = j.at("size").get<int>();
            m.count = j.at("count").get<int>();
            m.recipes = j.at("recipes").get<std::vector<std::string>>();
            for (const auto& e : j.at("entries"))
                m.entries.push_back({e.at("face").get<int>(), e.at("recipe").get<std::string>(),
                                     e.at("ground_truth").get<std::string>(), e.at("degraded").get<std::string>()});
        }
        catch (const nlohmann::json::exception& ex)
        {
            throw format_error("malformed manifest " + path.string() + ": " + ex.what());
        }
        return m;
    }

    inline synth::synth_pair load_pair(const std::filesystem::path& dir, const manifest_entry& e)
    {
        synth::synth_pair p;
        p.ground_truth = read_png16(dir / e.ground_truth);
        p.degraded = read_png16(dir / e.degraded);
        require_same_shape(p.ground_truth, p.degraded, "dataset pair");
        p.mask = face_mask::from_non_holes(p.ground_truth);
        return p;
    }

    // Entries whose recipe is in `recipes` (all when empty), in manifest order.
    inline std::vector<manifest_entry> select_entries(const dataset_manifest& m, const std::vector<std::string>& recipes)
    {
        std::vector<manifest_entry> out;
        for (const auto& e : m.entries)
            if (recipes.empty() || std::find(recipes.begin(), recipes.end(), e.recipe) != recipes.end())
                out.push_back(e);
        return out;
    }

    inline std::string entry_id(const manifest_entry& e) { return face_stem(e.face) + "_" + e.recipe; }
}
