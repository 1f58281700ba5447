#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskcodec/eval/bd.hpp"
#include "taskcodec/io/bytes.hpp"

namespace taskcodec {

using nlohmann::json;

// One evaluated model: measured rate plus quality/task metrics. PSNR can be
// the +inf sentinel (serialized as null, excluded from curve fitting).
struct RDPoint {
    double bpp = 0.0;
    double psnr_db = 0.0;
    double msssim = 0.0;
    std::string task_metric_name;  // empty when no task net was evaluated
    double task_metric_value = 0.0;
    double baseline_task_value = std::numeric_limits<double>::quiet_NaN();
    std::string model_id;
    double lambda = 0.0;

    json to_json() const {
        json j{{"bpp", bpp},
               {"ms_ssim", msssim},
               {"model_id", model_id},
               {"lambda", lambda}};
        if (std::isinf(psnr_db))
            j["psnr_db"] = nullptr;
        else
            j["psnr_db"] = psnr_db;
        if (!task_metric_name.empty()) {
            j["task_metric"] = json{{"name", task_metric_name}, {"value", task_metric_value}};
            if (!std::isnan(baseline_task_value)) j["baseline_task"] = baseline_task_value;
        }
        return j;
    }

    static RDPoint from_json(const json& j) {
        RDPoint p;
        p.bpp = j.at("bpp").get<double>();
        if (j.contains("psnr_db") && !j.at("psnr_db").is_null())
            p.psnr_db = j.at("psnr_db").get<double>();
        else
            p.psnr_db = std::numeric_limits<double>::infinity();
        p.msssim = j.value("ms_ssim", 0.0);
        if (j.contains("task_metric")) {
            p.task_metric_name = j.at("task_metric").at("name").get<std::string>();
            p.task_metric_value = j.at("task_metric").at("value").get<double>();
        }
        p.baseline_task_value = j.value("baseline_task", std::numeric_limits<double>::quiet_NaN());
        p.model_id = j.value("model_id", std::string{});
        p.lambda = j.value("lambda", 0.0);
        return p;
    }
};

struct RDCurve {
    std::string id;
    std::vector<RDPoint> points;

    json to_json() const {
        json pts = json::array();
        for (const auto& p : points) pts.push_back(p.to_json());
        return json{{"curve_id", id}, {"points", pts}};
    }

    static RDCurve from_json(const json& j) {
        RDCurve c;
        c.id = j.at("curve_id").get<std::string>();
        for (const auto& pj : j.at("points")) c.points.push_back(RDPoint::from_json(pj));
        return c;
    }

    void save(const fs::path& path) const { write_file_text(path, to_json().dump(2) + "\n"); }

    static RDCurve load(const fs::path& path) {
        try {
            return from_json(json::parse(read_file_text(path)));
        } catch (const json::exception& e) {
            fail(ErrorKind::Data, "cannot parse curve file " + path.string() + ": " + e.what());
        }
    }

    // metric extraction for BD: "psnr" | "ms_ssim" | "task"
    std::vector<CurvePoint> metric_points(const std::string& metric) const {
        std::vector<CurvePoint> out;
        for (const auto& p : points) {
            double v;
            if (metric == "psnr") {
                if (std::isinf(p.psnr_db)) continue;  // sentinel excluded from fitting
                v = p.psnr_db / 100.0;  // keep pp scaling uniform across metrics
            } else if (metric == "ms_ssim") {
                v = p.msssim;
            } else {
                require(!p.task_metric_name.empty(), ErrorKind::Data,
                        "curve " + id + " has no task metric");
                v = p.task_metric_value;
            }
            out.push_back(CurvePoint{p.bpp, v});
        }
        return out;
    }

    std::string task_metric_name() const {
        for (const auto& p : points)
            if (!p.task_metric_name.empty()) return p.task_metric_name;
        return "";
    }
};

}  // namespace taskcodec
