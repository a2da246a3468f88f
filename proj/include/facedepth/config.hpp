// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// JSON run configurations for the command-line subcommands. Unknown keys are rejected with their
// field path, and every configuration serializes back to the fully resolved form it was run with.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "enhancers.hpp"
#include "neural/train.hpp"
#include "synth/dataset.hpp"

namespace facedepth::config
{
    using json = nlohmann::ordered_json;

    inline constexpr int schema_version = 1;

    // Invalid or unknown configuration field; the message starts with the field path.
    class config_error : public parameter_error
    {
    public:
        using parameter_error::parameter_error;
    };

    // Reads one JSON object and tracks consumed keys so leftovers can be rejected.
    class object_reader
    {
    public:
        object_reader(const json& j, std::string path) : _j(j), _path(std::move(path))
        {
            if (!_j.is_object())
                throw config_error((_path.empty() ? std::string("config") : _path) + ": expected a JSON object");
        }

        std::string field_path(const std::string& key) const { return _path.empty() ? key : _path + "." + key; }

        bool has(const std::string& key)
        {
            _seen.insert(key);
            return _j.contains(key) && !_j.at(key).is_null();
        }

        const json& raw(const std::string& key)
        {
            _seen.insert(key);
            return _j.at(key);
        }

        template <typename T>
        void read(const std::string& key, T& out)
        {
            if (!has(key))
                return;
            try
            {
                out = _j.at(key).get<T>();
            }
            catch (const nlohmann::json::exception&)
            {
                throw config_error(field_path(key) + ": wrong type (got " + std::string(_j.at(key).type_name()) + ")");
            }
        }

        template <typename T>
        T require(const std::string& key)
        {
            if (!has(key))
                throw config_error(field_path(key) + ": required field missing");
            T v{};
            read(key, v);
            return v;
        }

        object_reader child(const std::string& key) { return object_reader(raw(key), field_path(key)); }

        void finish() const
        {
            for (auto it = _j.begin(); it != _j.end(); ++it)
                if (!_seen.count(it.key()))
                    throw config_error(field_path(it.key()) + ": unknown field");
        }

    private:
        const json& _j;
        std::string _path;
        std::set<std::string> _seen;
    };

    template <typename T>
    void read_range(object_reader& r, const std::string& key, synth::value_range<T>& out)
    {
        if (!r.has(key))
            return;
        const json& v = r.raw(key);
        if (!v.is_array() || v.size() != 2)
            throw config_error(r.field_path(key) + ": expected [min, max]");
        try
        {
            out = {v[0].get<T>(), v[1].get<T>()};
        }
        catch (const nlohmann::json::exception&)
        {
            throw config_error(r.field_path(key) + ": wrong element type");
        }
    }

    template <typename T>
    json range_json(const synth::value_range<T>& r)
    {
        return json::array({r.min, r.max});
    }

    inline void check(bool ok, const object_reader& r, const std::string& key, const std::string& what)
    {
        if (!ok)
            throw config_error(r.field_path(key) + ": " + what);
    }

    inline void read_schema(object_reader& r)
    {
        int v = schema_version;
        r.read("schema_version", v);
        check(v == schema_version, r, "schema_version", "unsupported version " + std::to_string(v));
        std::string command;
        r.read("command", command);
    }

    // ---- shared sub-objects -------------------------------------------------------------------

    // The degradation seed is not read here; commands derive it from their own seed.
    inline synth::degradation_config read_degradation(object_reader r)
    {
        synth::degradation_config c;
        read_range(r, "outline_hole_count", c.outline_hole_count);
        read_range(r, "scatter_hole_count", c.scatter_hole_count);
        read_range(r, "outline_hole_size", c.outline_hole_size);
        read_range(r, "scatter_hole_size", c.scatter_hole_size);
        read_range(r, "hole_eccentricity", c.hole_eccentricity);
        read_range(r, "hole_orientation", c.hole_orientation);
        r.read("noise_amplitude_mm", c.noise_amplitude_mm);
        r.read("window_span_mm", c.window_span_mm);
        r.read("blur_radius", c.blur_radius);
        r.read("background_blur_radius", c.background_blur_radius);
        if (r.has("background_band"))
        {
            synth::value_range<int> band;
            read_range(r, "background_band", band);
            c.background_band = band;
        }
        r.read("occluder_offset_mm", c.occluder_offset_mm);
        r.finish();
        if (const auto f = synth::invalid_field(c); !f.empty())
            throw config_error(r.field_path(f) + ": invalid range or value");
        return c;
    }

    inline json degradation_json(const synth::degradation_config& c)
    {
        json j;
        j["outline_hole_count"] = range_json(c.outline_hole_count);
        j["scatter_hole_count"] = range_json(c.scatter_hole_count);
        j["outline_hole_size"] = range_json(c.outline_hole_size);
        j["scatter_hole_size"] = range_json(c.scatter_hole_size);
        j["hole_eccentricity"] = range_json(c.hole_eccentricity);
        j["hole_orientation"] = range_json(c.hole_orientation);
        j["noise_amplitude_mm"] = c.noise_amplitude_mm;
        j["window_span_mm"] = c.window_span_mm;
        j["blur_radius"] = c.blur_radius;
        j["background_blur_radius"] = c.background_blur_radius;
        j["background_band"] = c.background_band ? range_json(*c.background_band) : json(nullptr);
        j["occluder_offset_mm"] = c.occluder_offset_mm;
        return j;
    }

    inline std::vector<synth::recipe> resolve_recipes(const std::vector<std::string>& names, const object_reader& r)
    {
        std::vector<synth::recipe> out;
        for (const auto& n : names)
        {
            const auto rec = synth::find_standard_recipe(n);
            if (!rec)
            {
                std::string valid;
                for (const auto& s : synth::standard_recipes())
                    valid += (valid.empty() ? "" : ", ") + s.name;
                throw config_error(r.field_path("recipes") + ": unknown recipe '" + n + "' (valid: " + valid + ")");
            }
            out.push_back(*rec);
        }
        return out;
    }

    inline void check_presets(const std::vector<std::string>& names, const object_reader& r)
    {
        for (const auto& n : names)
            if (!find_preset(n))
            {
                std::string valid;
                for (const auto& s : preset_names())
                    valid += (valid.empty() ? "" : ", ") + s;
                throw config_error(r.field_path("presets") + ": unknown preset '" + n + "' (valid: " + valid + ")");
            }
    }

    inline std::vector<std::string> path_strings(const std::vector<std::filesystem::path>& v)
    {
        std::vector<std::string> out;
        for (const auto& p : v)
            out.push_back(p.generic_string());
        return out;
    }

    inline std::vector<std::filesystem::path> read_paths(object_reader& r, const std::string& key)
    {
        std::vector<std::string> s;
        r.read(key, s);
        return {s.begin(), s.end()};
    }

    // ---- commands ---------------------------------------------------------------------------

    struct synth_config
    {
        std::filesystem::path out;
        int count = 0;
        std::uint64_t seed = 0;
        int size = canonical_size;
        std::vector<std::string> recipes;
        synth::degradation_config degradation;

        synth::dataset_spec dataset() const
        {
            synth::dataset_spec s;
            s.count = count;
            s.size = size;
            s.face_seed_base = derive_seed(seed, {0});
            s.degradation = degradation;
            s.degradation.seed = derive_seed(seed, {1});
            s.recipes.clear();
            for (const auto& n : recipes)
                s.recipes.push_back(*synth::find_standard_recipe(n));
            return s;
        }

        static synth_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            synth_config c;
            c.out = r.require<std::string>("out");
            c.count = r.require<int>("count");
            c.seed = r.require<std::uint64_t>("seed");
            r.read("size", c.size);
            for (const auto& rec : synth::standard_recipes())
                c.recipes.push_back(rec.name);
            r.read("recipes", c.recipes);
            if (r.has("degradation"))
                c.degradation = read_degradation(r.child("degradation"));
            r.finish();
            check(c.count >= 1, r, "count", "must be >= 1");
            check(c.size >= 8, r, "size", "must be >= 8");
            check(!c.recipes.empty(), r, "recipes", "must not be empty");
            resolve_recipes(c.recipes, r);
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "synth";
            j["out"] = out.generic_string();
            j["count"] = count;
            j["seed"] = seed;
            j["size"] = size;
            j["recipes"] = recipes;
            j["degradation"] = degradation_json(degradation);
            return j;
        }
    };

    struct degrade_config
    {
        std::vector<std::filesystem::path> inputs;
        std::filesystem::path out;
        std::uint64_t seed = 0;
        std::string recipe = "keep";
        synth::degradation_config degradation;

        static degrade_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            degrade_config c;
            c.inputs = read_paths(r, "inputs");
            c.out = r.require<std::string>("out");
            c.seed = r.require<std::uint64_t>("seed");
            r.read("recipe", c.recipe);
            if (r.has("degradation"))
                c.degradation = read_degradation(r.child("degradation"));
            r.finish();
            check(!c.inputs.empty(), r, "inputs", "at least one input image is required");
            check(synth::find_standard_recipe(c.recipe).has_value(), r, "recipe", "unknown recipe '" + c.recipe + "'");
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "degrade";
            j["inputs"] = path_strings(inputs);
            j["out"] = out.generic_string();
            j["seed"] = seed;
            j["recipe"] = recipe;
            j["degradation"] = degradation_json(degradation);
            return j;
        }
    };

    struct train_command_config
    {
        std::filesystem::path dataset;
        std::filesystem::path out;
        std::uint64_t seed = 0;
        neural::network_spec network;
        neural::train_config train;
        std::vector<std::string> recipes;  // empty: every recipe in the dataset
        std::optional<int> limit;          // first N selected pairs only
        bool checkpoints = true;

        static train_command_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            train_command_config c;
            c.dataset = r.require<std::string>("dataset");
            c.out = r.require<std::string>("out");
            c.seed = r.require<std::uint64_t>("seed");
            if (r.has("network"))
            {
                auto n = r.child("network");
                n.read("depth_levels", c.network.depth_levels);
                n.read("base_channels", c.network.base_channels);
                n.read("kernel_size", c.network.kernel_size);
                std::string skip = "concatenate";
                n.read("skip_mode", skip);
                check(skip == "concatenate", n, "skip_mode", "only 'concatenate' is supported");
                n.finish();
                try
                {
                    c.network.validate();
                }
                catch (const parameter_error& e)
                {
                    throw config_error(std::string(e.what()));
                }
            }
            if (r.has("train"))
            {
                auto t = r.child("train");
                t.read("epochs_per_chunk", c.train.epochs_per_chunk);
                t.read("chunk_size", c.train.chunk_size);
                t.read("batch_size", c.train.batch_size);
                t.read("learning_rate", c.train.learning_rate);
                t.read("beta1", c.train.beta1);
                t.read("beta2", c.train.beta2);
                t.read("adam_epsilon", c.train.adam_epsilon);
                t.read("masked_loss", c.train.masked_loss);
                t.finish();
            }
            r.read("recipes", c.recipes);
            if (r.has("limit"))
                c.limit = r.require<int>("limit");
            r.read("checkpoints", c.checkpoints);
            r.finish();
            c.train.seed = c.seed;
            try
            {
                c.train.validate();
            }
            catch (const parameter_error& e)
            {
                throw config_error(std::string(e.what()));
            }
            check(!c.limit || *c.limit >= 1, r, "limit", "must be >= 1");
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "train";
            j["dataset"] = dataset.generic_string();
            j["out"] = out.generic_string();
            j["seed"] = seed;
            j["network"] = {{"depth_levels", network.depth_levels},
                            {"base_channels", network.base_channels},
                            {"kernel_size", network.kernel_size},
                            {"skip_mode", "concatenate"}};
            j["train"] = {{"epochs_per_chunk", train.epochs_per_chunk}, {"chunk_size", train.chunk_size},
                          {"batch_size", train.batch_size},             {"learning_rate", train.learning_rate},
                          {"beta1", train.beta1},                       {"beta2", train.beta2},
                          {"adam_epsilon", train.adam_epsilon},         {"masked_loss", train.masked_loss}};
            j["recipes"] = recipes;
            j["limit"] = limit ? json(*limit) : json(nullptr);
            j["checkpoints"] = checkpoints;
            return j;
        }
    };

    // Enhancer selection shared by enhance, eval and falsify.
    struct enhancer_selection
    {
        std::vector<std::string> presets;
        std::vector<std::filesystem::path> models;

        void read(object_reader& r)
        {
            r.read("presets", presets);
            models = read_paths(r, "models");
            check_presets(presets, r);
        }

        void write(json& j) const
        {
            j["presets"] = presets;
            j["models"] = path_strings(models);
        }

        bool empty() const { return presets.empty() && models.empty(); }
    };

    struct enhance_config
    {
        std::vector<std::filesystem::path> inputs;
        std::filesystem::path out;
        enhancer_selection enhancers;

        static enhance_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            enhance_config c;
            c.inputs = read_paths(r, "inputs");
            c.out = r.require<std::string>("out");
            c.enhancers.read(r);
            r.finish();
            check(!c.inputs.empty(), r, "inputs", "at least one input image is required");
            check(!c.enhancers.empty(), r, "presets", "select at least one preset or model");
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "enhance";
            j["inputs"] = path_strings(inputs);
            j["out"] = out.generic_string();
            enhancers.write(j);
            return j;
        }
    };

    struct eval_config
    {
        std::filesystem::path dataset;
        std::filesystem::path out;
        enhancer_selection enhancers;
        std::vector<std::string> recipes{"keep"};
        int grid_rows = 0;

        static eval_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            eval_config c;
            c.dataset = r.require<std::string>("dataset");
            c.out = r.require<std::string>("out");
            for (const auto& p : handcrafted_presets())
                c.enhancers.presets.push_back(p.name);
            c.enhancers.read(r);
            r.read("recipes", c.recipes);
            r.read("grid_rows", c.grid_rows);
            r.finish();
            check(c.grid_rows >= 0, r, "grid_rows", "must be >= 0");
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "eval";
            j["dataset"] = dataset.generic_string();
            j["out"] = out.generic_string();
            enhancers.write(j);
            j["recipes"] = recipes;
            j["grid_rows"] = grid_rows;
            return j;
        }
    };

    struct falsify_config
    {
        std::filesystem::path dataset;
        std::filesystem::path out;
        enhancer_selection enhancers;
        std::vector<std::string> variants;  // recipes to compare; empty: all in the dataset

        static falsify_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            falsify_config c;
            c.dataset = r.require<std::string>("dataset");
            c.out = r.require<std::string>("out");
            c.enhancers.read(r);
            r.read("variants", c.variants);
            r.finish();
            check(!c.enhancers.empty(), r, "models", "select at least one model or preset");
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "falsify";
            j["dataset"] = dataset.generic_string();
            j["out"] = out.generic_string();
            enhancers.write(j);
            j["variants"] = variants;
            return j;
        }
    };

    struct report_config
    {
        std::filesystem::path per_image;
        std::filesystem::path out;

        static report_config from_json(const json& j)
        {
            object_reader r(j, "");
            read_schema(r);
            report_config c;
            c.per_image = r.require<std::string>("per_image");
            c.out = r.require<std::string>("out");
            r.finish();
            return c;
        }

        json to_json() const
        {
            json j;
            j["schema_version"] = schema_version;
            j["command"] = "report";
            j["per_image"] = per_image.generic_string();
            j["out"] = out.generic_string();
            return j;
        }
    };

    inline json load_json_file(const std::filesystem::path& path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw io_error("cannot open config " + path.string());
        try
        {
            return json::parse(f, nullptr, true, true);  // configs may carry comments
        }
        catch (const nlohmann::json::parse_error& e)
        {
            throw config_error(path.string() + ": invalid JSON: " + e.what());
        }
    }
}
