#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "taskcodec/io/image_io.hpp"
#include "taskcodec/rng.hpp"
#include "taskcodec/task/annotations.hpp"

namespace taskcodec {

namespace fs = std::filesystem;

enum class DatasetLayout { flat_images, sequence_folders };

inline std::string to_string(DatasetLayout l) {
    return l == DatasetLayout::flat_images ? "flat_images" : "sequence_folders";
}
inline DatasetLayout dataset_layout_from_string(const std::string& s) {
    if (s == "flat_images") return DatasetLayout::flat_images;
    if (s == "sequence_folders") return DatasetLayout::sequence_folders;
    fail(ErrorKind::Config, "unknown dataset layout: " + s);
}

struct DatasetDescriptor {
    fs::path root;
    DatasetLayout layout = DatasetLayout::sequence_folders;
    bool annotations = true;  // advertise annotations; false denies all label reads
};

// Ordered video sequences with one labeled frame each. Frames are either
// path-backed (lazily decoded, cached) or in-memory (synthetic fixtures).
// The labeled frame is the one with a sibling "<stem>.labels.pgm"; without
// one the middle frame is the canonical (but unannotated) frame.
class SequenceDataset {
public:
    struct Frame {
        fs::path path;
        mutable std::shared_ptr<const Tensor> mem;
    };
    struct Sequence {
        std::string id;
        std::vector<Frame> frames;
        int labeled_index = 0;
        fs::path labels_path;
        mutable std::shared_ptr<const LabelMap> labels_mem;
        bool has_labels = false;
    };

    size_t size() const { return seqs_.size(); }
    bool empty() const { return seqs_.empty(); }
    const Sequence& seq(size_t i) const { return seqs_.at(i); }
    std::vector<Sequence>& sequences() { return seqs_; }
    const std::vector<Sequence>& sequences() const { return seqs_; }

    bool annotations_available() const { return annotations_available_; }

    // Strategy-isolation hook: any labels() call afterwards throws.
    void deny_annotations() { annotations_available_ = false; }

    std::shared_ptr<const Tensor> frame(size_t s, int f) const {
        const Sequence& sq = seqs_.at(s);
        require(f >= 0 && f < static_cast<int>(sq.frames.size()), ErrorKind::Data,
                "frame index out of range");
        const Frame& fr = sq.frames[static_cast<size_t>(f)];
        if (!fr.mem) fr.mem = std::make_shared<const Tensor>(read_ppm(fr.path));
        return fr.mem;
    }

    std::shared_ptr<const LabelMap> labels(size_t s) const {
        require(annotations_available_, ErrorKind::Data,
                "annotations unavailable: dataset declared annotation-free");
        const Sequence& sq = seqs_.at(s);
        require(sq.has_labels, ErrorKind::Data, "missing-annotation: sequence " + sq.id);
        if (!sq.labels_mem)
            sq.labels_mem = std::make_shared<const LabelMap>(read_pgm_labels(sq.labels_path));
        return sq.labels_mem;
    }

    // Content hash over ids, frame bytes and label bytes.
    uint64_t fingerprint() const {
        uint64_t h = 0xCBF29CE484222325ull;
        for (const auto& sq : seqs_) {
            h = fnv1a64(sq.id.data(), sq.id.size(), h);
            h = fnv1a64(&sq.labeled_index, sizeof(int), h);
            for (size_t f = 0; f < sq.frames.size(); ++f) {
                const auto& fr = sq.frames[f];
                if (!fr.path.empty()) {
                    const auto bytes = read_file_bytes(fr.path);
                    h = fnv1a64(bytes.data(), bytes.size(), h);
                } else if (fr.mem) {
                    h = fnv1a64_doubles(fr.mem->data(), fr.mem->size(), h);
                }
            }
            if (sq.has_labels && annotations_available_) {
                if (!sq.labels_path.empty()) {
                    const auto bytes = read_file_bytes(sq.labels_path);
                    h = fnv1a64(bytes.data(), bytes.size(), h);
                } else if (sq.labels_mem) {
                    h = fnv1a64(sq.labels_mem->data.data(),
                                sq.labels_mem->data.size() * sizeof(int32_t), h);
                }
            }
        }
        return h;
    }

    static SequenceDataset load(const DatasetDescriptor& d) {
        require(fs::exists(d.root), ErrorKind::Data, "dataset root not found: " + d.root.string());
        SequenceDataset ds;
        ds.annotations_available_ = d.annotations;
        if (d.layout == DatasetLayout::flat_images) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(d.root))
                if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& p : files) {
                Sequence sq;
                sq.id = p.stem().string();
                sq.frames.push_back(Frame{p, nullptr});
                sq.labeled_index = 0;
                fs::path lp = p.parent_path() / (p.stem().string() + ".labels.pgm");
                if (fs::exists(lp)) {
                    sq.labels_path = lp;
                    sq.has_labels = true;
                }
                ds.seqs_.push_back(std::move(sq));
            }
        } else {
            std::vector<fs::path> dirs;
            for (const auto& e : fs::directory_iterator(d.root))
                if (e.is_directory()) dirs.push_back(e.path());
            std::sort(dirs.begin(), dirs.end());
            for (const auto& dir : dirs) {
                Sequence sq;
                sq.id = dir.filename().string();
                std::vector<fs::path> frames;
                for (const auto& e : fs::directory_iterator(dir))
                    if (e.is_regular_file() && e.path().extension() == ".ppm")
                        frames.push_back(e.path());
                std::sort(frames.begin(), frames.end());
                require(!frames.empty(), ErrorKind::Data, "empty sequence folder: " + dir.string());
                for (size_t f = 0; f < frames.size(); ++f) {
                    fs::path lp = dir / (frames[f].stem().string() + ".labels.pgm");
                    if (fs::exists(lp)) {
                        sq.labeled_index = static_cast<int>(f);
                        sq.labels_path = lp;
                        sq.has_labels = true;
                    }
                    sq.frames.push_back(Frame{frames[f], nullptr});
                }
                if (!sq.has_labels) sq.labeled_index = static_cast<int>(sq.frames.size()) / 2;
                ds.seqs_.push_back(std::move(sq));
            }
        }
        require(!ds.seqs_.empty(), ErrorKind::Data, "dataset is empty: " + d.root.string());
        return ds;
    }

private:
    std::vector<Sequence> seqs_;
    bool annotations_available_ = true;
};

// ---- synthetic shapes sequences ----
// Classes: 0 background, 1 circle, 2 square, 3 triangle. Shapes carry
// class-tinted colors and drift with constant velocity across the sequence;
// the middle frame is the labeled one.

struct ShapesConfig {
    int sequences = 24;
    int frames = 5;
    int height = 64;
    int width = 64;
    int max_shapes = 3;
    uint64_t seed = 7;
};

inline constexpr int kShapesNumClasses = 4;

namespace detail {

struct ShapeSpec {
    int cls;  // 1..3
    double cx, cy, size, vx, vy;
    double color[3];
};

struct SceneSpec {
    double bg_a[3], bg_b[3];
    double bg_angle;  // gradient direction
    std::vector<ShapeSpec> shapes;
    uint64_t noise_seed;
};

inline SceneSpec make_scene(Rng& rng, const ShapesConfig& cfg) {
    SceneSpec sc;
    for (int c = 0; c < 3; ++c) {
        sc.bg_a[c] = rng.uniform(0.25, 0.7);
        sc.bg_b[c] = rng.uniform(0.25, 0.7);
    }
    sc.bg_angle = rng.uniform(0.0, 6.283185307179586);
    const int count = 1 + rng.uniform_int(cfg.max_shapes);
    for (int i = 0; i < count; ++i) {
        ShapeSpec s;
        s.cls = 1 + rng.uniform_int(3);
        s.size = rng.uniform(7.0, 14.0);
        s.cx = rng.uniform(s.size + 6.0, cfg.width - s.size - 6.0);
        s.cy = rng.uniform(s.size + 6.0, cfg.height - s.size - 6.0);
        s.vx = rng.uniform(-2.0, 2.0);
        s.vy = rng.uniform(-2.0, 2.0);
        const double hi = rng.uniform(0.6, 0.95), lo1 = rng.uniform(0.05, 0.4),
                     lo2 = rng.uniform(0.05, 0.4);
        if (s.cls == 1) {
            s.color[0] = hi; s.color[1] = lo1; s.color[2] = lo2;
        } else if (s.cls == 2) {
            s.color[0] = lo1; s.color[1] = hi; s.color[2] = lo2;
        } else {
            s.color[0] = lo1; s.color[1] = lo2; s.color[2] = hi;
        }
        sc.shapes.push_back(s);
    }
    sc.noise_seed = rng.next_u64();
    return sc;
}

inline bool shape_member(const ShapeSpec& s, double px, double py, double dx, double dy) {
    const double cx = s.cx + dx, cy = s.cy + dy;
    if (s.cls == 1) {
        const double rx = px - cx, ry = py - cy;
        return rx * rx + ry * ry <= s.size * s.size;
    }
    if (s.cls == 2) {
        return std::fabs(px - cx) <= s.size && std::fabs(py - cy) <= s.size;
    }
    // upward triangle
    const double t = (py - (cy - s.size)) / (2.0 * s.size);
    if (t < 0.0 || t > 1.0) return false;
    return std::fabs(px - cx) <= t * s.size;
}

inline void render_frame(const SceneSpec& sc, const ShapesConfig& cfg, int t_rel, Tensor& img,
                         LabelMap* labels) {
    img = Tensor(1, 3, cfg.height, cfg.width);
    if (labels) *labels = LabelMap(cfg.height, cfg.width, 0);
    Rng noise(sc.noise_seed ^ static_cast<uint64_t>(t_rel + 1000003));
    const double ca = std::cos(sc.bg_angle), sa = std::sin(sc.bg_angle);
    const double diag = std::sqrt(static_cast<double>(cfg.width) * cfg.width +
                                  static_cast<double>(cfg.height) * cfg.height);
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) {
            const double proj = ((x * ca + y * sa) / diag + 1.0) * 0.5;
            int cls = 0;
            const detail::ShapeSpec* top = nullptr;
            for (const auto& s : sc.shapes)
                if (shape_member(s, x + 0.5, y + 0.5, s.vx * t_rel, s.vy * t_rel)) {
                    top = &s;
                    cls = s.cls;
                }
            for (int c = 0; c < 3; ++c) {
                double v;
                if (top) {
                    v = top->color[c] + noise.uniform(-0.04, 0.04);
                } else {
                    v = sc.bg_a[c] * (1.0 - proj) + sc.bg_b[c] * proj + noise.uniform(-0.03, 0.03);
                }
                img.at(0, c, y, x) = std::min(1.0, std::max(0.0, v));
            }
            if (labels) labels->at(y, x) = cls;
        }
}

}  // namespace detail

inline SequenceDataset generate_shapes_dataset(const ShapesConfig& cfg) {
    SequenceDataset ds;
    Rng rng(cfg.seed);
    for (int s = 0; s < cfg.sequences; ++s) {
        Rng seq_rng = rng.fork(static_cast<uint64_t>(s));
        const auto scene = detail::make_scene(seq_rng, cfg);
        SequenceDataset::Sequence sq;
        char buf[32];
        std::snprintf(buf, sizeof buf, "seq_%03d", s);
        sq.id = buf;
        sq.labeled_index = cfg.frames / 2;
        for (int f = 0; f < cfg.frames; ++f) {
            Tensor img;
            if (f == sq.labeled_index) {
                auto lm = std::make_shared<LabelMap>();
                detail::render_frame(scene, cfg, f - sq.labeled_index, img, lm.get());
                sq.labels_mem = lm;
                sq.has_labels = true;
            } else {
                detail::render_frame(scene, cfg, f - sq.labeled_index, img, nullptr);
            }
            SequenceDataset::Frame fr;
            fr.mem = std::make_shared<const Tensor>(std::move(img));
            sq.frames.push_back(std::move(fr));
        }
        ds.sequences().push_back(std::move(sq));
    }
    return ds;
}

inline void write_shapes_dataset(const ShapesConfig& cfg, const fs::path& root) {
    SequenceDataset ds = generate_shapes_dataset(cfg);
    for (size_t s = 0; s < ds.size(); ++s) {
        const auto& sq = ds.seq(s);
        const fs::path dir = root / sq.id;
        fs::create_directories(dir);
        for (size_t f = 0; f < sq.frames.size(); ++f) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "frame_%02d.ppm", static_cast<int>(f));
            write_ppm(dir / buf, *ds.frame(s, static_cast<int>(f)));
            if (static_cast<int>(f) == sq.labeled_index) {
                std::snprintf(buf, sizeof buf, "frame_%02d.labels.pgm", static_cast<int>(f));
                write_pgm_labels(dir / buf, *ds.labels(s));
            }
        }
    }
}

}  // namespace taskcodec
