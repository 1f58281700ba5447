#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "taskcodec/eval/plot.hpp"
#include "taskcodec/eval/rdcurve.hpp"

namespace taskcodec {

namespace detail {
inline std::string fmt6(double v) {
    if (std::isinf(v)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
inline std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}
inline std::string pad_to(std::string s, size_t w) {
    while (s.size() < w) s.push_back(' ');
    return s;
}
}  // namespace detail

// Machine-readable per-model table: one row per RD point, plus one
// uncompressed-baseline row per curve when a task metric is present.
inline std::string results_table_tsv(const std::vector<RDCurve>& curves) {
    std::vector<std::string> task_names;
    for (const auto& c : curves) {
        const std::string n = c.task_metric_name();
        if (!n.empty() && std::find(task_names.begin(), task_names.end(), n) == task_names.end())
            task_names.push_back(n);
    }
    std::string out = "curve\tmodel_id\tlambda\tbpp\tpsnr_db\tms_ssim";
    for (const auto& n : task_names) out += "\t" + n;
    out += "\n";
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            out += c.id + "\t" + p.model_id + "\t" + detail::fmt6(p.lambda) + "\t" +
                   detail::fmt6(p.bpp) + "\t" + detail::fmt6(p.psnr_db) + "\t" +
                   detail::fmt6(p.msssim);
            for (const auto& n : task_names)
                out += "\t" + (n == p.task_metric_name ? detail::fmt6(p.task_metric_value) : "-");
            out += "\n";
        }
        // dashed-baseline analogue: task performance on uncompressed data
        const auto* base = [&]() -> const RDPoint* {
            for (const auto& p : c.points)
                if (!std::isnan(p.baseline_task_value)) return &p;
            return nullptr;
        }();
        if (base) {
            out += c.id + ":uncompressed\t-\t-\t-\t-\t-";
            for (const auto& n : task_names)
                out += "\t" + (n == base->task_metric_name ? detail::fmt6(base->baseline_task_value)
                                                           : "-");
            out += "\n";
        }
    }
    return out;
}

struct BdCell {
    bool valid = false;
    double bd_pp = 0.0;
    double bdr_pct = 0.0;
};

struct BdTable {
    std::string anchor_id;
    std::vector<std::string> metric_names;
    std::vector<std::string> test_ids;
    std::vector<std::vector<BdCell>> cells;  // [test][metric]
};

inline BdTable compute_bd_table(const RDCurve& anchor, const std::vector<RDCurve>& tests) {
    BdTable t;
    t.anchor_id = anchor.id;
    auto add_name = [&](const std::string& n) {
        if (!n.empty() &&
            std::find(t.metric_names.begin(), t.metric_names.end(), n) == t.metric_names.end())
            t.metric_names.push_back(n);
    };
    add_name(anchor.task_metric_name());
    for (const auto& c : tests) add_name(c.task_metric_name());
    if (t.metric_names.empty()) t.metric_names.push_back("ms_ssim");

    for (const auto& c : tests) {
        t.test_ids.push_back(c.id);
        std::vector<BdCell> row;
        for (const auto& m : t.metric_names) {
            BdCell cell;
            try {
                const std::string key = (m == "ms_ssim") ? "ms_ssim" : "task";
                // metric availability check: task curves must carry this name
                if (key == "task" &&
                    (anchor.task_metric_name() != m || c.task_metric_name() != m))
                    throw Error(ErrorKind::Data, "metric missing");
                cell.bd_pp = bd_quality(anchor.metric_points(key), c.metric_points(key));
                cell.bdr_pct = bd_rate(anchor.metric_points(key), c.metric_points(key));
                cell.valid = true;
            } catch (const Error&) {
                cell.valid = false;  // no overlap / missing metric: stays n/a
            }
            row.push_back(cell);
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

// Fixed-width text table shaped like the usual BD summaries: one row per
// test curve, BD (pp) columns for every metric, then BDR (%) columns.
inline std::string bd_table_text(const BdTable& t) {
    std::vector<std::string> headers = {"curve"};
    for (const auto& m : t.metric_names) headers.push_back("BD " + m + " (pp)");
    for (const auto& m : t.metric_names) headers.push_back("BDR " + m + " (%)");

    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < t.test_ids.size(); ++i) {
        std::vector<std::string> row = {t.test_ids[i]};
        for (const auto& c : t.cells[i]) row.push_back(c.valid ? detail::fmt2(c.bd_pp) : "n/a");
        for (const auto& c : t.cells[i]) row.push_back(c.valid ? detail::fmt2(c.bdr_pct) : "n/a");
        rows.push_back(std::move(row));
    }
    std::vector<size_t> widths(headers.size());
    for (size_t c = 0; c < headers.size(); ++c) {
        widths[c] = headers[c].size();
        for (const auto& r : rows) widths[c] = std::max(widths[c], r[c].size());
    }
    std::string out = "anchor: " + t.anchor_id + "\n";
    for (size_t c = 0; c < headers.size(); ++c)
        out += detail::pad_to(headers[c], widths[c] + 2);
    out += "\n";
    for (const auto& r : rows) {
        for (size_t c = 0; c < r.size(); ++c) out += detail::pad_to(r[c], widths[c] + 2);
        out += "\n";
    }
    return out;
}

// Writes the metrics table, BD tables (when an anchor is given), and the
// RD plots. Output is deterministic: regenerating from the same inputs
// produces byte-identical files.
inline std::vector<fs::path> emit_report(const std::vector<RDCurve>& curves, const RDCurve* anchor,
                                         const fs::path& out_dir) {
    require(!curves.empty() || anchor, ErrorKind::Data, "emit_report: no curves");
    fs::create_directories(out_dir);
    std::vector<fs::path> written;

    std::vector<RDCurve> all;
    if (anchor) all.push_back(*anchor);
    for (const auto& c : curves) all.push_back(c);

    {
        const fs::path p = out_dir / "results_table.tsv";
        write_file_text(p, results_table_tsv(all));
        written.push_back(p);
    }
    if (anchor && !curves.empty()) {
        const fs::path p = out_dir / "bd_report.txt";
        write_file_text(p, bd_table_text(compute_bd_table(*anchor, curves)));
        written.push_back(p);
    }

    // plots: one per metric family that has data
    auto series_for = [&](autovalue_of) {
        std::vector<plot::Series> ss;
        for (const auto& c : all) {
            plot::Series s;
            s.label = c.id;
            for (const auto& p : c.points) {
                const double v = value_of(p);
                if (std::isfinite(v)) s.points.emplace_back(p.bpp, v);
            }
            if (!s.points.empty()) ss.push_back(std::move(s));
        }
        return ss;
    };

    auto psnr_series = series_for([](const RDPoint& p) { return p.psnr_db; });
    if (!psnr_series.empty()) {
        const fs::path p = out_dir / "rd_psnr.png";
        plot::render_plot(p, "bpp", "PSNR [dB]", psnr_series);
        written.push_back(p);
    }
    auto ms_series = series_for([](const RDPoint& p) { return p.msssim; });
    if (!ms_series.empty()) {
        const fs::path p = out_dir / "rd_msssim.png";
        plot::render_plot(p, "bpp", "MS-SSIM", ms_series);
        written.push_back(p);
    }
    std::string task_name;
    for (const auto& c : all)
        if (!c.task_metric_name().empty()) task_name = c.task_metric_name();
    if (!task_name.empty()) {
        auto task_series = series_for([&](const RDPoint& p) {
            return p.task_metric_name == task_name ? p.task_metric_value
                                                   : std::numeric_limits<double>::quiet_NaN();
        });
        double baseline = std::numeric_limits<double>::quiet_NaN();
        for (const auto& c : all)
            for (const auto& p : c.points)
                if (!std::isnan(p.baseline_task_value)) baseline = p.baseline_task_value;
        const fs::path p = out_dir / ("rd_" + task_name + ".png");
        plot::render_plot(p, "bpp", task_name, task_series, baseline);
        written.push_back(p);
    }
    return written;
}

}  // namespace taskcodec
