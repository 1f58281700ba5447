#pragma once

#include "taskcodec/train/dataset.hpp"

namespace taskcodec {

// Temporal-augmentation sampler: labeled_only always yields the labeled
// frame; random_frame draws uniformly over the whole sequence. One frame
// per sequence per epoch keeps step counts identical between modes.
enum class FrameMode { labeled_only, random_frame };

inline std::string to_string(FrameMode m) {
    return m == FrameMode::labeled_only ? "labeled_only" : "random_frame";
}
inline FrameMode frame_mode_from_string(const std::string& s) {
    if (s == "labeled_only") return FrameMode::labeled_only;
    if (s == "random_frame") return FrameMode::random_frame;
    fail(ErrorKind::Config, "unknown frame mode: " + s);
}

inline int sample_training_frame_index(const SequenceDataset::Sequence& seq, Rng& rng,
                                       FrameMode mode) {
    require(!seq.frames.empty(), ErrorKind::Data, "empty-sequence: " + seq.id);
    if (mode == FrameMode::labeled_only) return seq.labeled_index;
    return rng.uniform_int(static_cast<int>(seq.frames.size()));
}

inline std::shared_ptr<const Tensor> sample_training_frame(const SequenceDataset& ds, size_t s,
                                                           Rng& rng, FrameMode mode) {
    return ds.frame(s, sample_training_frame_index(ds.seq(s), rng, mode));
}

}  // namespace taskcodec
