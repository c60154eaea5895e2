#pragma once

#include <string>
#include <vector>

#include "cyclesem/dataio.hpp"
#include "cyclesem/models.hpp"
#include "cyclesem/semantic.hpp"

// The cycle inference x -> S(x) -> G(.) -> x_hat, residual scoring, and the
// per-class posterior diagnostic. Pure functions over immutable models; safe
// to parallelize across slices.
namespace cyclesem::anomaly {

// Per-pixel argmax one-hot; ties resolve to the lowest class index. Accepts
// discrete input (idempotent).
SemanticIntermediate discretize(const SemanticIntermediate& s);

// mode continuous -> G(S(x)); discrete -> G(discretize(S(x))).
data::ImageSlice reconstruct(const models::UNet<float>& s, const models::Generator<float>& g,
                             const data::ImageSlice& x, SemanticIntermediate::Mode mode);

std::vector<data::ImageSlice> reconstruct_batch(const models::UNet<float>& s,
                                                const models::Generator<float>& g,
                                                const std::vector<const data::ImageSlice*>& xs,
                                                SemanticIntermediate::Mode mode);

// Elementwise |x - x_hat|; the anomaly score map. No post-processing.
data::ImageSlice residual(const data::ImageSlice& x, const data::ImageSlice& x_hat);

// Optional 3x3 median filter for the infer --median-filter flag. Off by
// default and excluded from acceptance runs.
data::ImageSlice median_filter3(const data::ImageSlice& r);

struct ClassPosteriorStats {
    struct Row {
        std::string name;         // background, gm, wm, csf, les
        bool present = false;     // false when the split has no such pixels
        uint64_t pixel_count = 0;
        std::vector<double> mean_posterior;  // length C, sums to ~1 when present
    };
    std::vector<Row> rows;
};

// Mean posterior vector per ground-truth class over a test split; lesion
// pixels come from the masks and are excluded from the tissue classes.
ClassPosteriorStats class_posterior_stats(const models::UNet<float>& s,
                                          const std::vector<data::Record>& test_records);

std::string to_json(const ClassPosteriorStats& st);

}  // namespace cyclesem::anomaly
