// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// facedepth command-line tool. Every subcommand accepts --config <file.json>; flags override the
// corresponding JSON fields before validation.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error, 1 anything else.

#include <CLI11.hpp>

#include <facedepth/commands.hpp>

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace
{
    using facedepth::config::json;

    enum exit_code
    {
        exit_ok = 0,
        exit_failure = 1,
        exit_config = 2,
        exit_io = 3,
    };

    // One flag override; applied only when the flag was given.
    struct override_set
    {
        std::vector<std::function<void(json&)>> apply;

        template <typename T>
        CLI::Option* value(CLI::App* app, const std::string& flag, const std::string& field, const std::string& help)
        {
            auto v = std::make_shared<T>();
            auto* opt = app->add_option(flag, *v, help);
            apply.push_back([v, opt, field](json& j) {
                if (opt->count())
                    j[json::json_pointer(field)] = *v;
            });
            return opt;
        }

        CLI::Option* toggle(CLI::App* app, const std::string& flag, const std::string& field, bool value, const std::string& help)
        {
            auto* opt = app->add_flag(flag, help);
            apply.push_back([opt, field, value](json& j) {
                if (opt->count())
                    j[json::json_pointer(field)] = value;
            });
            return opt;
        }
    };

    struct subcommand
    {
        CLI::App* app = nullptr;
        std::string config_path;
        override_set overrides;
        std::function<void(const json&)> run;

        json resolve() const
        {
            json j = config_path.empty() ? json::object() : facedepth::config::load_json_file(config_path);
            if (!j.is_object())
                throw facedepth::config::config_error("config: expected a JSON object");
            for (const auto& a : overrides.apply)
                a(j);
            return j;
        }
    };

    subcommand& add(std::vector<std::unique_ptr<subcommand>>& subs, CLI::App& app, const std::string& name, const std::string& help)
    {
        subs.push_back(std::make_unique<subcommand>());
        auto& s = *subs.back();
        s.app = app.add_subcommand(name, help);
        s.app->add_option("--config", s.config_path, "JSON configuration file");
        return s;
    }

    void add_enhancer_flags(subcommand& s)
    {
        s.overrides.value<std::vector<std::string>>(s.app, "--preset", "/presets", "Hand-crafted preset name (repeatable)");
        s.overrides.value<std::vector<std::string>>(s.app, "--model", "/models", "Trained model file (repeatable)");
    }
}

int main(int argc, char** argv)
{
    namespace cfg = facedepth::config;
    namespace cmd = facedepth::commands;

    CLI::App app{"Face depth image synthesis, enhancement and evaluation"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<subcommand>> subs;

    {
        auto& s = add(subs, app, "synth", "Generate a synthetic ground-truth / degraded dataset");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Output dataset directory");
        s.overrides.value<int>(s.app, "--count", "/count", "Number of faces");
        s.overrides.value<std::uint64_t>(s.app, "--seed", "/seed", "Master seed");
        s.overrides.value<int>(s.app, "--size", "/size", "Image side length in pixels");
        s.overrides.value<std::vector<std::string>>(s.app, "--recipe", "/recipes", "Degradation recipe (repeatable)");
        s.run = [](const json& j) { cmd::run_synth(cfg::synth_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "degrade", "Degrade existing ground-truth images");
        s.overrides.value<std::vector<std::string>>(s.app, "--input", "/inputs", "Ground-truth PNG (repeatable)");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Output directory");
        s.overrides.value<std::uint64_t>(s.app, "--seed", "/seed", "Master seed");
        s.overrides.value<std::string>(s.app, "--recipe", "/recipe", "Degradation recipe");
        s.run = [](const json& j) { cmd::run_degrade(cfg::degrade_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "train", "Train an enhancement network on a dataset");
        s.overrides.value<std::string>(s.app, "--dataset", "/dataset", "Dataset directory");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Output directory");
        s.overrides.value<std::uint64_t>(s.app, "--seed", "/seed", "Training seed");
        s.overrides.value<int>(s.app, "--depth-levels", "/network/depth_levels", "Encoder/decoder levels");
        s.overrides.value<int>(s.app, "--base-channels", "/network/base_channels", "Channels at the first level");
        s.overrides.value<int>(s.app, "--kernel-size", "/network/kernel_size", "Odd convolution kernel size");
        s.overrides.value<int>(s.app, "--epochs-per-chunk", "/train/epochs_per_chunk", "Epochs per data chunk");
        s.overrides.value<int>(s.app, "--chunk-size", "/train/chunk_size", "Pairs per chunk");
        s.overrides.value<int>(s.app, "--batch-size", "/train/batch_size", "Mini-batch size");
        s.overrides.value<double>(s.app, "--learning-rate", "/train/learning_rate", "Adam learning rate");
        s.overrides.toggle(s.app, "--masked-loss", "/train/masked_loss", true, "Restrict the loss to the face mask");
        s.overrides.value<std::vector<std::string>>(s.app, "--recipe", "/recipes", "Train on this recipe only (repeatable)");
        s.overrides.value<int>(s.app, "--limit", "/limit", "Use only the first N selected pairs");
        s.overrides.toggle(s.app, "--no-checkpoints", "/checkpoints", false, "Do not write checkpoints");
        s.run = [](const json& j) { cmd::run_train(cfg::train_command_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "enhance", "Enhance depth images with presets or trained models");
        s.overrides.value<std::vector<std::string>>(s.app, "--input", "/inputs", "Degraded PNG (repeatable)");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Output directory");
        add_enhancer_flags(s);
        s.run = [](const json& j) { cmd::run_enhance(cfg::enhance_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "eval", "Compare enhancers on a dataset");
        s.overrides.value<std::string>(s.app, "--dataset", "/dataset", "Dataset directory");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Report directory");
        add_enhancer_flags(s);
        s.overrides.value<std::vector<std::string>>(s.app, "--recipe", "/recipes", "Evaluate this recipe (repeatable)");
        s.overrides.value<int>(s.app, "--grid-rows", "/grid_rows", "Rows in the qualitative grid image (0: none)");
        s.run = [](const json& j) { cmd::run_eval(cfg::eval_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "falsify", "Measure how much enhancers alter valid input depth");
        s.overrides.value<std::string>(s.app, "--dataset", "/dataset", "Dataset directory");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Report directory");
        add_enhancer_flags(s);
        s.overrides.value<std::vector<std::string>>(s.app, "--variant", "/variants", "Recipe to compare (repeatable)");
        s.run = [](const json& j) { cmd::run_falsify(cfg::falsify_config::from_json(j)); };
    }
    {
        auto& s = add(subs, app, "report", "Re-aggregate a per-image metrics CSV");
        s.overrides.value<std::string>(s.app, "--per-image", "/per_image", "per_image.csv from eval");
        s.overrides.value<std::string>(s.app, "--out", "/out", "Output directory");
        s.run = [](const json& j) { cmd::run_report(cfg::report_config::from_json(j)); };
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_config;
    }

    for (const auto& s : subs)
    {
        if (!s->app->parsed())
            continue;
        try
        {
            s->run(s->resolve());
            return exit_ok;
        }
        catch (const facedepth::parameter_error& e)
        {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return exit_config;
        }
        catch (const facedepth::io_error& e)
        {
            std::fprintf(stderr, "I/O error: %s\n", e.what());
            return exit_io;
        }
        catch (const facedepth::format_error& e)
        {
            std::fprintf(stderr, "file format error: %s\n", e.what());
            return exit_io;
        }
        catch (const std::filesystem::filesystem_error& e)
        {
            std::fprintf(stderr, "I/O error: %s\n", e.what());
            return exit_io;
        }
        catch (const std::exception& e)
        {
            std::fprintf(stderr, "error: %s\n", e.what());
            return exit_failure;
        }
    }
    return exit_failure;
}
