// License: Apache 2.0. See LICENSE file in root directory.
// Copyright(c) 2026 The facedepth Authors. All Rights Reserved.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "../enhancers.hpp"
#include "metrics.hpp"
#include "stats.hpp"

namespace facedepth::eval
{
    struct eval_item
    {
        std::string image_id;
        depth_image ground_truth;
        depth_image degraded;
        face_mask mask;
    };

    struct metric_record
    {
        std::string image_id;
        std::string enhancer;
        double rmse = std::nan("");
        double roughness = std::nan("");
        double holes = std::nan("");
        // Empty when no face pixel of the input is valid.
        std::optional<double> falsification;
        std::string error;  // non-empty when the enhancer failed on this image

        bool failed() const { return !error.empty(); }

        static metric_record blank(std::string image_id, std::string enhancer)
        {
            metric_record r;
            r.image_id = std::move(image_id);
            r.enhancer = std::move(enhancer);
            return r;
        }
    };

    struct metric_summary
    {
        std::string metric;
        std::size_t n = 0;
        // Empty when fewer than 4 values are available.
        std::optional<aggregate_stats> stats;
    };

    struct enhancer_summary
    {
        std::string enhancer;
        std::vector<metric_summary> metrics;  // rmse, roughness, holes, falsification

        double mean_rmse() const
        {
            const auto& s = metrics.front().stats;
            return s ? s->mean : std::numeric_limits<double>::infinity();
        }
    };

    struct comparison_report
    {
        std::vector<metric_record> records;      // enhancer-major, images in input order
        std::vector<enhancer_summary> summaries;  // ascending mean rmse
    };

    inline std::vector<std::string> metric_names() { return {"rmse", "roughness", "holes", "falsification"}; }

    namespace detail
    {
        inline metric_summary summarize(std::string metric, const std::vector<double>& values)
        {
            metric_summary s{std::move(metric), values.size(), std::nullopt};
            if (values.size() >= 4)
                s.stats = aggregate(values);
            return s;
        }

        inline std::string format_number(double v)
        {
            if (std::isnan(v))
                return "nan";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }

        // Per-image values round-trip exactly so reports can be re-aggregated bit-for-bit.
        inline std::string format_exact(double v)
        {
            if (std::isnan(v))
                return "nan";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "undefined"; }

        inline std::ofstream open_csv(const std::filesystem::path& path)
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f)
                throw io_error("cannot open " + path.string() + " for writing");
            return f;
        }

        inline void finish_csv(std::ofstream& f, const std::filesystem::path& path)
        {
            f.flush();
            if (!f)
                throw io_error("write failed: " + path.string());
        }
    }

    // Runs every enhancer on every item; a "None" identity row is added when absent. Per-image
    // enhancer failures are recorded, not thrown.
    inline comparison_report run_comparison(const std::vector<eval_item>& items, std::vector<enhancer_config> enhancers)
    {
        if (items.empty())
            throw parameter_error("run_comparison: no images");
        for (const auto& it : items)
        {
            if (it.ground_truth.width() != items.front().ground_truth.width() ||
                it.ground_truth.height() != items.front().ground_truth.height())
                throw structural_error("run_comparison: images do not share one size (" + it.image_id + ")");
            require_same_shape(it.ground_truth, it.degraded, "run_comparison");
        }
        if (std::none_of(enhancers.begin(), enhancers.end(), [](const auto& e) { return e.name == none_enhancer_name; }))
            enhancers.insert(enhancers.begin(), *find_preset(none_enhancer_name));

        comparison_report report;
        for (const auto& e : enhancers)
        {
            std::map<std::string, std::vector<double>> values;
            for (const auto& it : items)
            {
                auto r = metric_record::blank(it.image_id, e.name);
                try
                {
                    const depth_image out = apply(e, it.degraded);
                    r.rmse = rmse_face(it.ground_truth, out, it.mask);
                    r.roughness = roughness(out, it.mask);
                    r.holes = hole_percentage(out, it.mask);
                    bool any_valid = false;
                    for (std::size_t i = 0; i < it.degraded.size() && !any_valid; ++i)
                        any_valid = it.mask[i] && !is_hole(it.degraded[i]);
                    if (any_valid)
                        r.falsification = falsification_rmse(it.degraded, out, it.mask);
                }
                catch (const std::exception& ex)
                {
                    r = metric_record::blank(it.image_id, e.name);
                    r.error = ex.what();
                }
                if (!r.failed())
                {
                    values["rmse"].push_back(r.rmse);
                    values["roughness"].push_back(r.roughness);
                    values["holes"].push_back(r.holes);
                    if (r.falsification)
                        values["falsification"].push_back(*r.falsification);
                }
                report.records.push_back(std::move(r));
            }
            enhancer_summary s{e.name, {}};
            for (const auto& m : metric_names())
                s.metrics.push_back(detail::summarize(m, values[m]));
            report.summaries.push_back(std::move(s));
        }
        std::stable_sort(report.summaries.begin(), report.summaries.end(),
                         [](const auto& a, const auto& b) { return a.mean_rmse() < b.mean_rmse(); });
        return report;
    }

    inline void write_per_image_csv(const comparison_report& r, const std::filesystem::path& path)
    {
        auto f = detail::open_csv(path);
        f << "image_id,enhancer,rmse,roughness,holes,falsification\n";
        for (const auto& m : r.records)
            f << m.image_id << ',' << m.enhancer << ',' << detail::format_exact(m.rmse) << ',' << detail::format_exact(m.roughness)
              << ',' << detail::format_exact(m.holes) << ',' << (m.falsification ? detail::format_exact(*m.falsification) : "")
              << '\n';
        detail::finish_csv(f, path);
    }

    inline void write_summary_rows(std::ofstream& f, const std::string& prefix, const metric_summary& m)
    {
        f << prefix << m.metric << ',';
        if (m.stats)
            f << detail::format_number(m.stats->mean) << ',' << detail::format_number(m.stats->std) << ','
              << detail::format_optional(m.stats->skewness) << ',' << detail::format_optional(m.stats->excess_kurtosis);
        else
            f << "nan,nan,undefined,undefined";
        f << ',' << m.n << '\n';
    }

    inline void write_aggregate_csv(const comparison_report& r, const std::filesystem::path& path)
    {
        auto f = detail::open_csv(path);
        f << "enhancer,metric,mean,std,skewness,kurtosis,n\n";
        for (const auto& s : r.summaries)
            for (const auto& m : s.metrics)
                write_summary_rows(f, s.enhancer + ",", m);
        detail::finish_csv(f, path);
    }

    // Always written so a clean run is distinguishable from a missing file.
    inline void write_errors_csv(const std::vector<metric_record>& records, const std::filesystem::path& path)
    {
        auto f = detail::open_csv(path);
        f << "image_id,enhancer,error\n";
        for (const auto& m : records)
            if (m.failed())
            {
                std::string msg = m.error;
                std::replace(msg.begin(), msg.end(), ',', ';');
                std::replace(msg.begin(), msg.end(), '\n', ' ');
                f << m.image_id << ',' << m.enhancer << ',' << msg << '\n';
            }
        detail::finish_csv(f, path);
    }

    // Falsification experiment: how much each model changes already-valid input depth, per input variant.
    struct falsification_item
    {
        std::string image_id;
        std::string variant;
        depth_image degraded;
        face_mask mask;
    };

    struct falsification_record
    {
        std::string image_id;
        std::string model;
        std::string variant;
        double falsification = std::nan("");
        std::string error;
    };

    struct falsification_summary
    {
        std::string model;
        std::string variant;
        metric_summary stats;
    };

    struct falsification_report
    {
        std::vector<falsification_record> records;
        std::vector<falsification_summary> summaries;  // model order as given, variants in first-seen order

        const falsification_summary* find(const std::string& model, const std::string& variant) const
        {
            for (const auto& s : summaries)
                if (s.model == model && s.variant == variant)
                    return &s;
            return nullptr;
        }
    };

    inline falsification_report run_falsification(const std::vector<falsification_item>& items, const std::vector<enhancer_config>& models)
    {
        if (items.empty())
            throw parameter_error("run_falsification: no images");
        std::vector<std::string> variants;
        for (const auto& it : items)
            if (std::find(variants.begin(), variants.end(), it.variant) == variants.end())
                variants.push_back(it.variant);

        falsification_report report;
        for (const auto& m : models)
        {
            std::map<std::string, std::vector<double>> values;
            for (const auto& it : items)
            {
                falsification_record r{it.image_id, m.name, it.variant, std::nan(""), {}};
                try
                {
                    r.falsification = falsification_rmse(it.degraded, apply(m, it.degraded), it.mask);
                    values[it.variant].push_back(r.falsification);
                }
                catch (const std::exception& ex)
                {
                    r.error = ex.what();
                }
                report.records.push_back(std::move(r));
            }
            for (const auto& v : variants)
                report.summaries.push_back({m.name, v, detail::summarize("falsification", values[v])});
        }
        return report;
    }

    inline void write_falsification_csvs(const falsification_report& r, const std::filesystem::path& per_image,
                                         const std::filesystem::path& aggregate_path)
    {
        auto f = detail::open_csv(per_image);
        f << "image_id,model,variant,falsification\n";
        for (const auto& m : r.records)
            f << m.image_id << ',' << m.model << ',' << m.variant << ',' << detail::format_exact(m.falsification) << '\n';
        detail::finish_csv(f, per_image);

        auto a = detail::open_csv(aggregate_path);
        a << "model,variant,metric,mean,std,skewness,kurtosis,n\n";
        for (const auto& s : r.summaries)
            write_summary_rows(a, s.model + "," + s.variant + ",", s.stats);
        detail::finish_csv(a, aggregate_path);
    }
}
