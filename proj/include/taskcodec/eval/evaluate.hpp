#pragma once

#include <optional>

#include "taskcodec/codec/pipeline.hpp"
#include "taskcodec/eval/rdcurve.hpp"
#include "taskcodec/metrics/image_metrics.hpp"
#include "taskcodec/metrics/task_metrics.hpp"
#include "taskcodec/task/adapter.hpp"
#include "taskcodec/train/dataset.hpp"

namespace taskcodec {

struct EvalOptions {
    double lambda = 0.0;
    bool continue_on_error = false;  // log-and-skip per image instead of rethrowing
    double confidence_threshold = 0.5;
};

struct EvalResult {
    RDPoint point;
    std::vector<json> records;          // one per successfully coded image
    std::vector<std::string> failures;  // "<image>: <error>" when continuing
};

namespace detail {
inline json confusion_to_json(const IouAccumulator& acc) {
    json rows = json::array();
    for (const auto& t : acc.tally) rows.push_back(json::array({t.inter, t.uni, t.gt}));
    return rows;
}
inline void confusion_from_json(const json& rows, IouAccumulator& acc) {
    require(rows.size() == acc.tally.size(), ErrorKind::Data, "confusion row count mismatch");
    for (size_t i = 0; i < acc.tally.size(); ++i) {
        acc.tally[i].inter += rows[i][0].get<long>();
        acc.tally[i].uni += rows[i][1].get<long>();
        acc.tally[i].gt += rows[i][2].get<long>();
        acc.valid_pixels += rows[i][2].get<long>();
    }
}
}  // namespace detail

// Reduces per-image records to the model-level point. Report regeneration
// feeds persisted records through this same reducer, so rebuilt tables are
// byte-identical.
inline RDPoint rd_point_from_records(const std::vector<json>& records, const std::string& model_id,
                                     double lambda, int num_classes,
                                     const std::string& task_metric_name) {
    require(!records.empty(), ErrorKind::Data, "no evaluation records");
    double bits = 0.0, pixels = 0.0, msssim_acc = 0.0, psnr_acc = 0.0;
    int psnr_count = 0;
    IouAccumulator task_acc(num_classes), base_acc(num_classes);
    bool have_task = false;
    for (const auto& r : records) {
        bits += r.at("bits_total").get<double>();
        pixels += r.at("pixels").get<double>();
        msssim_acc += r.at("ms_ssim").get<double>();
        if (!r.at("psnr_db").is_null()) {
            psnr_acc += r.at("psnr_db").get<double>();
            ++psnr_count;
        }
        if (r.contains("confusion")) {
            have_task = true;
            detail::confusion_from_json(r.at("confusion"), task_acc);
            detail::confusion_from_json(r.at("baseline_confusion"), base_acc);
        }
    }
    RDPoint p;
    p.bpp = bits / pixels;
    p.msssim = msssim_acc / static_cast<double>(records.size());
    p.psnr_db = psnr_count > 0 ? psnr_acc / psnr_count : std::numeric_limits<double>::infinity();
    p.model_id = model_id;
    p.lambda = lambda;
    if (have_task) {
        p.task_metric_name = task_metric_name;
        p.task_metric_value = task_acc.miou();
        p.baseline_task_value = base_acc.miou();
    }
    return p;
}

// Codes every labeled validation frame through the real bitstream path
// (measured container bits, not estimates), decodes, and aggregates
// quality/task metrics plus the uncompressed-prediction baseline.
inline EvalResult evaluate_model(const CodecModel& model, const SequenceDataset& ds,
                                 const FrozenNetworkHandle* task, const EvalOptions& opts = {}) {
    require(!ds.empty(), ErrorKind::Data, "evaluation dataset is empty");
    EvalResult res;
    const int num_classes = task ? task->num_classes() : 0;

    for (size_t s = 0; s < ds.size(); ++s) {
        const std::string& id = ds.seq(s).id;
        try {
            auto img = ds.frame(s, ds.seq(s).labeled_index);
            CompressResult comp = compress_image(model, *img, opts.lambda);
            const auto container = comp.stream.container();
            DecompressResult dec = decompress_image(model, container);

            json rec;
            rec["image"] = id;
            rec["pixels"] = static_cast<double>(img->h()) * img->w();
            rec["bits_total"] = static_cast<double>(container.size() * 8);
            rec["bits_b1"] = static_cast<double>(comp.stream.b1_bits());
            rec["bits_b2"] = static_cast<double>(comp.stream.b2_bits());
            const double p = psnr(dec.image, *img);
            if (std::isinf(p))
                rec["psnr_db"] = nullptr;
            else
                rec["psnr_db"] = p;
            rec["ms_ssim"] = ms_ssim(dec.image, *img);

            if (task) {
                const Annotations pred =
                    harden_predictions(predict(dec.image, *task), opts.confidence_threshold);
                const Annotations base =
                    harden_predictions(predict(*img, *task), opts.confidence_threshold);
                auto gt = ds.labels(s);
                IouAccumulator acc(num_classes), bacc(num_classes);
                acc.add(*pred.semantic, *gt);
                bacc.add(*base.semantic, *gt);
                rec["confusion"] = detail::confusion_to_json(acc);
                rec["baseline_confusion"] = detail::confusion_to_json(bacc);
            }
            res.records.push_back(std::move(rec));
        } catch (const Error& e) {
            if (!opts.continue_on_error)
                fail(e.kind(), "image " + id + ": " + e.what());
            res.failures.push_back(id + ": " + e.what());
        }
    }
    require(!res.records.empty(), ErrorKind::Data, "every evaluation image failed");
    res.point = rd_point_from_records(res.records, hex_u64(model.fingerprint()).substr(8),
                                      opts.lambda, num_classes, task ? "miou" : "");
    return res;
}

inline void write_records(const fs::path& path, const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) out += r.dump() + "\n";
    write_file_text(path, out);
}

inline std::vector<json> read_records(const fs::path& path) {
    const std::string text = read_file_text(path);
    std::vector<json> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        if (eol > pos) out.push_back(json::parse(text.substr(pos, eol - pos)));
        pos = eol + 1;
    }
    return out;
}

}  // namespace taskcodec
