#include "cyclesem/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "cyclesem/segmod.hpp"
#include "cyclesem/synthmod.hpp"

namespace cyclesem::anomaly {

SemanticIntermediate discretize(const SemanticIntermediate& s) {
    SemanticIntermediate out;
    out.mode = SemanticIntermediate::Mode::kDiscrete;
    out.height = s.height;
    out.width = s.width;
    out.num_classes = s.num_classes;
    const size_t hw = static_cast<size_t>(s.height) * s.width;
    out.values.assign(s.values.size(), 0.f);
    for (size_t p = 0; p < hw; ++p) {
        int best = 0;
        float bv = s.values[p];
        for (int c = 1; c < s.num_classes; ++c) {
            const float v = s.values[c * hw + p];
            if (v > bv) {  // strict: ties keep the lowest class index
                bv = v;
                best = c;
            }
        }
        out.values[best * hw + p] = 1.f;
    }
    return out;
}

std::vector<data::ImageSlice> reconstruct_batch(const models::UNet<float>& s,
                                                const models::Generator<float>& g,
                                                const std::vector<const data::ImageSlice*>& xs,
                                                SemanticIntermediate::Mode mode) {
    if (s.desc().num_classes != g.desc().num_classes)
        throw InvalidArgument("reconstruct: segmentor/generator class count mismatch");
    if (s.desc().resolution != g.desc().resolution)
        throw InvalidArgument("reconstruct: segmentor/generator resolution mismatch");
    std::vector<SemanticIntermediate> sems = seg::segment_batch(s, xs);
    if (mode == SemanticIntermediate::Mode::kDiscrete)
        for (auto& sem : sems) sem = discretize(sem);
    std::vector<const SemanticIntermediate*> ptrs;
    ptrs.reserve(sems.size());
    for (const auto& sem : sems) ptrs.push_back(&sem);
    return synth::synthesize_batch(g, ptrs);
}

data::ImageSlice reconstruct(const models::UNet<float>& s, const models::Generator<float>& g,
                             const data::ImageSlice& x, SemanticIntermediate::Mode mode) {
    return reconstruct_batch(s, g, {&x}, mode)[0];
}

data::ImageSlice residual(const data::ImageSlice& x, const data::ImageSlice& x_hat) {
    if (x.height != x_hat.height || x.width != x_hat.width)
        throw InvalidArgument("residual: shape mismatch");
    data::ImageSlice r;
    r.height = x.height;
    r.width = x.width;
    r.pixels.resize(x.pixels.size());
    for (size_t i = 0; i < r.pixels.size(); ++i)
        r.pixels[i] = std::abs(x.pixels[i] - x_hat.pixels[i]);
    return r;
}

data::ImageSlice median_filter3(const data::ImageSlice& r) {
    data::ImageSlice out = r;
    float window[9];
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) {
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < r.height && xx >= 0 && xx < r.width)
                        window[n++] = r.pixels[static_cast<size_t>(yy) * r.width + xx];
                }
            std::nth_element(window, window + n / 2, window + n);
            out.pixels[static_cast<size_t>(y) * r.width + x] = window[n / 2];
        }
    return out;
}

ClassPosteriorStats class_posterior_stats(const models::UNet<float>& s,
                                          const std::vector<data::Record>& test_records) {
    const int C = s.desc().num_classes;
    if (C != data::kNumClasses)
        throw InvalidArgument("class_posterior_stats: expects the 4-class tissue model");
    std::vector<std::vector<double>> sums(C + 1, std::vector<double>(C, 0.0));
    std::vector<uint64_t> counts(C + 1, 0);

    constexpr size_t kBatch = 16;
    for (size_t base = 0; base < test_records.size(); base += kBatch) {
        const size_t end = std::min(test_records.size(), base + kBatch);
        std::vector<const data::ImageSlice*> imgs;
        for (size_t i = base; i < end; ++i) {
            if (!test_records[i].mask)
                throw MissingArtifact("class_posterior_stats: record " + test_records[i].id +
                                      " has no lesion mask");
            imgs.push_back(&test_records[i].image);
        }
        const auto sems = seg::segment_batch(s, imgs);
        for (size_t i = base; i < end; ++i) {
            const auto& rec = test_records[i];
            const auto& sem = sems[i - base];
            const size_t hw = static_cast<size_t>(sem.height) * sem.width;
            for (size_t p = 0; p < hw; ++p) {
                int cls;  // ground-truth bucket: tissue class or LES
                if (rec.mask->mask[p]) {
                    cls = C;  // lesion pixels are not counted inside tissue classes
                } else {
                    cls = 0;
                    for (int c = 0; c < C; ++c)
                        if (rec.labels.onehot[c * hw + p] == 1.f) cls = c;
                }
                ++counts[cls];
                for (int c = 0; c < C; ++c) sums[cls][c] += sem.values[c * hw + p];
            }
        }
    }

    ClassPosteriorStats out;
    for (int k = 0; k <= C; ++k) {
        ClassPosteriorStats::Row row;
        row.name = k < C ? data::kClassNames[k] : "les";
        row.pixel_count = counts[k];
        row.present = counts[k] > 0;
        if (row.present) {
            row.mean_posterior.resize(C);
            for (int c = 0; c < C; ++c)
                row.mean_posterior[c] = sums[k][c] / static_cast<double>(counts[k]);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string to_json(const ClassPosteriorStats& st) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& row : st.rows) {
        if (!row.present) continue;  // zero-pixel classes are reported as absent
        j[row.name] = {{"pixel_count", row.pixel_count}, {"mean_posterior", row.mean_posterior}};
    }
    return j.dump(2) + "\n";
}

}  // namespace cyclesem::anomaly
