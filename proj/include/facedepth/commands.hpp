// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

// Subcommand bodies. Each writes only below its configured output directory and echoes the
// resolved configuration to <out>/config.json.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset_io.hpp"
#include "eval/report.hpp"
#include "png_io.hpp"

namespace facedepth::commands
{
    namespace fs = std::filesystem;

    inline void prepare_output(const fs::path& out, const config::json& echo)
    {
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec)
            throw io_error("cannot create output directory " + out.string() + ": " + ec.message());
        write_text_file(out / "config.json", echo.dump(2) + "\n");
    }

    inline std::vector<enhancer_config> build_enhancers(const config::enhancer_selection& sel)
    {
        std::vector<enhancer_config> out;
        for (const auto& n : sel.presets)
            out.push_back(*find_preset(n));
        for (const auto& p : sel.models)
        {
            const std::string name = p.stem().string();
            for (const auto& e : out)
                if (e.name == name)
                    throw config::config_error("models: enhancer name '" + name + "' is used twice");
            out.push_back(model_enhancer(name, neural::load_model(p)));
        }
        return out;
    }

    inline void run_synth(const config::synth_config& cfg)
    {
        prepare_output(cfg.out, cfg.to_json());
        const auto m = write_dataset(cfg.dataset(), cfg.out);
        std::cout << "wrote " << m.entries.size() << " pairs to " << cfg.out.string() << "\n";
    }

    inline void run_degrade(const config::degrade_config& cfg)
    {
        prepare_output(cfg.out, cfg.to_json());
        const auto rec = *synth::find_standard_recipe(cfg.recipe);
        for (std::size_t i = 0; i < cfg.inputs.size(); ++i)
        {
            const depth_image gt = read_png16(cfg.inputs[i]);
            synth::degradation_config d = cfg.degradation;
            d.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)});
            d.background = rec.background;
            d.occlusion = rec.occlusion;
            const auto pair = synth::degrade(gt, d);
            write_png16(cfg.out / (cfg.inputs[i].stem().string() + "_" + rec.name + "_deg.png"), pair.degraded);
        }
        std::cout << "degraded " << cfg.inputs.size() << " images\n";
    }

    inline neural::train_result run_train(const config::train_command_config& cfg)
    {
        const auto manifest = read_manifest(cfg.dataset);
        auto entries = select_entries(manifest, cfg.recipes);
        if (cfg.limit && entries.size() > static_cast<std::size_t>(*cfg.limit))
            entries.resize(static_cast<std::size_t>(*cfg.limit));
        if (entries.empty())
            throw config::config_error("recipes: no dataset entries selected");
        prepare_output(cfg.out, cfg.to_json());

        neural::train_config tc = cfg.train;
        if (cfg.checkpoints)
            tc.checkpoint_dir = cfg.out / "checkpoints";
        const neural::pair_source source{entries.size(), [&](std::size_t i) { return load_pair(cfg.dataset, entries[i]); }};
        auto result = neural::train(cfg.network, source, tc, [](const neural::loss_record& r) {
            std::printf("epoch %d chunk %d loss %.9g\n", r.epoch, r.chunk, r.loss);
            std::fflush(stdout);
        });
        neural::save_model(result.best, cfg.out / "model.fdm");
        neural::write_loss_trace(result.trace, cfg.out / "loss.csv");
        return result;
    }

    inline void run_enhance(const config::enhance_config& cfg)
    {
        const auto enhancers = build_enhancers(cfg.enhancers);
        prepare_output(cfg.out, cfg.to_json());
        for (const auto& in : cfg.inputs)
        {
            const depth_image img = read_png16(in);
            for (const auto& e : enhancers)
                write_png16(cfg.out / (in.stem().string() + "-" + e.name + ".png"), apply(e, img));
        }
        std::cout << "enhanced " << cfg.inputs.size() << " images with " << enhancers.size() << " enhancers\n";
    }

    // Rows of equally sized images tiled left to right, top to bottom.
    inline depth_image compose_grid(const std::vector<std::vector<depth_image>>& rows)
    {
        if (rows.empty() || rows.front().empty())
            throw parameter_error("compose_grid: nothing to compose");
        const int w = rows.front().front().width(), h = rows.front().front().height();
        const int cols = static_cast<int>(rows.front().size());
        const int gw = w * cols;
        std::vector<depth_t> grid(static_cast<std::size_t>(gw) * static_cast<std::size_t>(h) * rows.size(), hole);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < rows[r].size(); ++c)
            {
                const auto& img = rows[r][c];
                require_same_shape(img, rows.front().front(), "compose_grid");
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x)
                        grid[(r * static_cast<std::size_t>(h) + static_cast<std::size_t>(y)) * static_cast<std::size_t>(gw) +
                             c * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = img.at(x, y);
            }
        return depth_image(gw, h * static_cast<int>(rows.size()), std::move(grid));
    }

    inline std::vector<eval::eval_item> load_eval_items(const fs::path& dataset, const std::vector<std::string>& recipes)
    {
        const auto manifest = read_manifest(dataset);
        std::vector<eval::eval_item> items;
        for (const auto& e : select_entries(manifest, recipes))
        {
            auto p = load_pair(dataset, e);
            items.push_back({entry_id(e), std::move(p.ground_truth), std::move(p.degraded), std::move(p.mask)});
        }
        if (items.empty())
            throw config::config_error("recipes: no dataset entries selected");
        return items;
    }

    inline eval::comparison_report run_eval(const config::eval_config& cfg)
    {
        const auto items = load_eval_items(cfg.dataset, cfg.recipes);
        const auto enhancers = build_enhancers(cfg.enhancers);
        prepare_output(cfg.out, cfg.to_json());
        const auto report = eval::run_comparison(items, enhancers);
        eval::write_per_image_csv(report, cfg.out / "per_image.csv");
        eval::write_aggregate_csv(report, cfg.out / "aggregate.csv");
        eval::write_errors_csv(report.records, cfg.out / "errors.csv");
        if (cfg.grid_rows > 0)
        {
            std::vector<enhancer_config> columns{*find_preset(none_enhancer_name)};
            for (const auto& e : enhancers)
                if (e.name != none_enhancer_name)
                    columns.push_back(e);
            std::vector<std::vector<depth_image>> rows;
            for (std::size_t i = 0; i < items.size() && rows.size() < static_cast<std::size_t>(cfg.grid_rows); ++i)
            {
                std::vector<depth_image> row{items[i].ground_truth};
                for (const auto& e : columns)
                {
                    try
                    {
                        row.push_back(apply(e, items[i].degraded));
                    }
                    catch (const std::exception&)
                    {
                        row.emplace_back(items[i].degraded.width(), items[i].degraded.height(), hole);
                    }
                }
                rows.push_back(std::move(row));
            }
            write_png16(cfg.out / "grid.png", compose_grid(rows));
        }
        for (const auto& s : report.summaries)
        {
            const auto& m = s.metrics.front();
            std::printf("%-10s rmse %s\n", s.enhancer.c_str(), m.stats ? eval::detail::format_number(m.stats->mean).c_str() : "nan");
        }
        return report;
    }

    inline eval::falsification_report run_falsify(const config::falsify_config& cfg)
    {
        const auto manifest = read_manifest(cfg.dataset);
        std::vector<eval::falsification_item> items;
        for (const auto& e : select_entries(manifest, cfg.variants))
        {
            auto p = load_pair(cfg.dataset, e);
            items.push_back({face_stem(e.face), e.recipe, std::move(p.degraded), std::move(p.mask)});
        }
        if (items.empty())
            throw config::config_error("variants: no dataset entries selected");
        const auto enhancers = build_enhancers(cfg.enhancers);
        prepare_output(cfg.out, cfg.to_json());
        const auto report = eval::run_falsification(items, enhancers);
        eval::write_falsification_csvs(report, cfg.out / "falsification.csv", cfg.out / "falsification_aggregate.csv");
        for (const auto& s : report.summaries)
            std::printf("%-10s %-16s %s\n", s.model.c_str(), s.variant.c_str(),
                        s.stats.stats ? eval::detail::format_number(s.stats.stats->mean).c_str() : "nan");
        return report;
    }

    // Re-aggregates a per-image CSV written by eval.
    inline eval::comparison_report run_report(const config::report_config& cfg)
    {
        std::ifstream f(cfg.per_image, std::ios::binary);
        if (!f)
            throw io_error("cannot open " + cfg.per_image.string());
        std::string line;
        if (!std::getline(f, line) || line != "image_id,enhancer,rmse,roughness,holes,falsification")
            throw format_error(cfg.per_image.string() + ": unexpected header");

        auto parse = [&](const std::string& s) {
            if (s.empty())
                return std::optional<double>{};
            if (s == "nan")
                return std::optional<double>{std::nan("")};
            try
            {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size())
                    throw std::invalid_argument(s);
                return std::optional<double>{v};
            }
            catch (const std::exception&)
            {
                throw format_error(cfg.per_image.string() + ": bad number '" + s + "'");
            }
        };

        auto parse_required = [&](const std::string& s) {
            const auto v = parse(s);
            if (!v)
                throw format_error(cfg.per_image.string() + ": missing required value");
            return *v;
        };

        eval::comparison_report report;
        std::vector<std::string> order;
        std::map<std::string, std::map<std::string, std::vector<double>>> values;
        int line_no = 1;
        while (std::getline(f, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cells.push_back(cell);
            if (!line.empty() && line.back() == ',')
                cells.emplace_back();
            if (cells.size() != 6)
                throw format_error(cfg.per_image.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
            eval::metric_record r;
            r.image_id = cells[0];
            r.enhancer = cells[1];
            r.rmse = parse_required(cells[2]);
            r.roughness = parse_required(cells[3]);
            r.holes = parse_required(cells[4]);
            r.falsification = parse(cells[5]);
            if (std::find(order.begin(), order.end(), r.enhancer) == order.end())
                order.push_back(r.enhancer);
            auto& v = values[r.enhancer];
            if (!std::isnan(r.rmse))
            {
                v["rmse"].push_back(r.rmse);
                v["roughness"].push_back(r.roughness);
                v["holes"].push_back(r.holes);
                if (r.falsification && !std::isnan(*r.falsification))
                    v["falsification"].push_back(*r.falsification);
            }
            report.records.push_back(std::move(r));
        }
        for (const auto& name : order)
        {
            eval::enhancer_summary s{name, {}};
            for (const auto& m : eval::metric_names())
                s.metrics.push_back(eval::detail::summarize(m, values[name][m]));
            report.summaries.push_back(std::move(s));
        }
        std::stable_sort(report.summaries.begin(), report.summaries.end(),
                         [](const auto& a, const auto& b) { return a.mean_rmse() < b.mean_rmse(); });
        prepare_output(cfg.out, cfg.to_json());
        eval::write_aggregate_csv(report, cfg.out / "aggregate.csv");
        return report;
    }
}
