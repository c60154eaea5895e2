#include "cyclesem/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cyclesem/parallel.hpp"
#include "cyclesem/prng.hpp"

namespace cyclesem::phantom {

using data::ImageSlice;
using data::kBackground;
using data::kCsf;
using data::kGm;
using data::kNumClasses;
using data::kWm;
using data::LesionMask;
using data::TissueLabelMap;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ellipse {
    double cx, cy, ax, ay;
    double norm(double px, double py) const {
        const double dx = (px - cx) / ax, dy = (py - cy) / ay;
        return std::sqrt(dx * dx + dy * dy);
    }
    bool contains(double px, double py) const { return norm(px, py) <= 1.0; }
};

// Per-slice anatomy carries a few dozen random degrees of freedom (boundary
// harmonics, variable deep nuclei and sulcal CSF pockets) so that healthy
// shape cannot be summarized by a handful of global parameters; local
// segmentation stays easy, global memorization does not.
struct Anatomy {
    Ellipse brain;
    double wob_amp[5];  // boundary harmonics k = 2..6
    double wob_ph[5];
    Ellipse vent_l, vent_r;
    std::vector<Ellipse> deep_gm;  // scattered deep gray blobs
};

Anatomy sample_anatomy(const PhantomConfig& cfg, CounterRng& rng) {
    const double R = cfg.resolution;
    const double area_scale = (R / 64.0) * (R / 64.0);  // blob counts track brain area
    Anatomy a;
    a.brain.cx = R * 0.5 + (rng.uniform() - 0.5) * R * 0.06;
    a.brain.cy = R * 0.5 + (rng.uniform() - 0.5) * R * 0.06;
    a.brain.ax = R * (0.30 + rng.uniform() * 0.08);
    a.brain.ay = R * (0.34 + rng.uniform() * 0.08);
    for (int k = 0; k < 5; ++k) {
        a.wob_amp[k] = rng.uniform() * 0.04;
        a.wob_ph[k] = rng.uniform(0, 2 * kPi);
    }
    const double vdx = a.brain.ax * (0.16 + rng.uniform() * 0.06);
    const double vdy = -a.brain.ay * (0.02 + rng.uniform() * 0.06);
    const double vax = std::max(2.5, a.brain.ax * (0.11 + rng.uniform() * 0.04));
    const double vay = std::max(3.0, a.brain.ay * (0.16 + rng.uniform() * 0.06));
    a.vent_l = {a.brain.cx - vdx, a.brain.cy + vdy, vax, vay};
    a.vent_r = {a.brain.cx + vdx, a.brain.cy + vdy, vax, vay};
    // a field of small deep-gray blobs scattered through the interior: per
    // slice this is far more positional information than a flat latent
    // resolves, while staying trivially segmentable from local contrast
    const int n_deep = std::max(
        1, static_cast<int>(std::llround((14 + static_cast<int>(rng.below(9))) * area_scale)));
    for (int b = 0; b < n_deep; ++b) {
        const double th = rng.uniform(0, 2 * kPi);
        const double ecc = 0.62 * std::sqrt(rng.uniform());
        const double bx = a.brain.cx + a.brain.ax * ecc * std::cos(th);
        const double by = a.brain.cy + a.brain.ay * ecc * std::sin(th);
        a.deep_gm.push_back({bx, by, 2.0 + 1.5 * rng.uniform(), 2.0 + 1.5 * rng.uniform()});
    }
    return a;
}

// Normalized radius with the angular wobble applied; band thresholds live in
// this coordinate.
double brain_radius(const Anatomy& a, double px, double py) {
    const double dx = (px - a.brain.cx) / a.brain.ax;
    const double dy = (py - a.brain.cy) / a.brain.ay;
    const double e = std::sqrt(dx * dx + dy * dy);
    const double th = std::atan2(dy, dx);
    double w = 1.0;
    for (int k = 0; k < 5; ++k) w += a.wob_amp[k] * std::sin((k + 2) * th + a.wob_ph[k]);
    return e / w;
}

int geometric_class(const Anatomy& a, double px, double py) {
    const double e = brain_radius(a, px, py);
    if (e > 1.0) return kBackground;
    if (e > 0.88) return kCsf;  // cortical rim CSF
    if (e > 0.70) return kGm;  // cortex ring
    if (a.vent_l.contains(px, py) || a.vent_r.contains(px, py)) return kCsf;
    for (const auto& d : a.deep_gm)
        if (d.contains(px, py)) return kGm;
    return kWm;
}

// Separable Gaussian blur, zero padding; per-pixel renormalization happens
// in the caller across class planes.
void blur_plane(std::vector<float>& plane, int res, double sigma) {
    if (sigma < 1e-9) return;
    const int half = std::max(1, static_cast<int>(std::ceil(2.0 * sigma)));
    std::vector<double> k(2 * half + 1);
    double ksum = 0.0;
    for (int i = -half; i <= half; ++i) {
        k[i + half] = std::exp(-0.5 * i * i / (sigma * sigma));
        ksum += k[i + half];
    }
    for (auto& v : k) v /= ksum;
    std::vector<float> tmp(plane.size(), 0.f);
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i) {
                const int xx = x + i;
                if (xx >= 0 && xx < res) acc += k[i + half] * plane[size_t(y) * res + xx];
            }
            tmp[size_t(y) * res + x] = static_cast<float>(acc);
        }
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i) {
                const int yy = y + i;
                if (yy >= 0 && yy < res) acc += k[i + half] * tmp[size_t(yy) * res + x];
            }
            plane[size_t(y) * res + x] = static_cast<float>(acc);
        }
}

double class_mean(const PhantomConfig& cfg, int cls) {
    switch (cls) {
        case kBackground: return cfg.mean_background;
        case kGm: return cfg.mean_gm;
        case kWm: return cfg.mean_wm;
        default: return cfg.mean_csf;
    }
}

int stored_class(const TissueLabelMap& labels, int y, int x) {
    const size_t hw = static_cast<size_t>(labels.height) * labels.width;
    const size_t px = static_cast<size_t>(y) * labels.width + x;
    for (int c = 0; c < labels.num_classes; ++c)
        if (labels.onehot[c * hw + px] == 1.f) return c;
    return kBackground;
}

// Lesion base intensity ranges, tied to the CSF mean so the bright-lesion
// overlap holds for any valid tissue contrast.
void lesion_level_range(const PhantomConfig& cfg, bool tumor, double* lo, double* hi) {
    if (tumor) {
        *lo = std::min(0.92, cfg.mean_csf + 0.10);
        *hi = std::min(0.97, cfg.mean_csf + 0.25);
    } else {
        *lo = cfg.mean_gm + 0.05;
        *hi = std::min(0.97, cfg.mean_csf + 0.22);
    }
}

}  // namespace

void validate(const PhantomConfig& cfg) {
    if (cfg.resolution < 16 || cfg.resolution % 8 != 0)
        throw ConfigError("phantom.resolution: must be >= 16 and divisible by 8");
    if (cfg.num_healthy_train < 0) throw ConfigError("phantom.num_healthy_train: must be >= 0");
    if (cfg.num_test < 0) throw ConfigError("phantom.num_test: must be >= 0");
    if (cfg.lesion_fraction < 0.0 || cfg.lesion_fraction > 1.0)
        throw ConfigError("phantom.lesion_fraction: must be in [0,1]");
    if (cfg.lesion_style != "tumor_like" && cfg.lesion_style != "stroke_like")
        throw ConfigError("phantom.lesion_style: must be tumor_like or stroke_like");
    if (cfg.noise_sigma < 0.0) throw ConfigError("phantom.noise_sigma: must be >= 0");
    if (cfg.prob_blur_radius < 0.0) throw ConfigError("phantom.prob_blur_radius: must be >= 0");
    for (double m : {cfg.mean_background, cfg.mean_gm, cfg.mean_wm, cfg.mean_csf})
        if (m < 0.0 || m > 1.0)
            throw ConfigError("phantom.tissue_means: all means must lie in [0,1]");
    if (!(cfg.mean_wm < cfg.mean_gm && cfg.mean_gm < cfg.mean_csf))
        throw ConfigError("phantom.tissue_means: T2-like ordering WM < GM < CSF required");
}

std::pair<ImageSlice, TissueLabelMap> generate_healthy(const PhantomConfig& cfg, int index) {
    validate(cfg);
    const int res = cfg.resolution;
    const size_t hw = static_cast<size_t>(res) * res;
    CounterRng rng(cfg.seed, {kStreamHealthy, static_cast<uint64_t>(index)});
    const Anatomy a = sample_anatomy(cfg, rng);

    TissueLabelMap labels;
    labels.height = labels.width = res;
    labels.num_classes = kNumClasses;
    labels.probs.assign(hw * kNumClasses, 0.f);
    labels.onehot.assign(hw * kNumClasses, 0.f);

    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const int cls = geometric_class(a, x + 0.5, y + 0.5);
            labels.probs[cls * hw + size_t(y) * res + x] = 1.f;
        }

    if (cfg.prob_blur_radius > 0.0) {
        for (int c = 0; c < kNumClasses; ++c) {
            std::vector<float> plane(labels.probs.begin() + c * hw,
                                     labels.probs.begin() + (c + 1) * hw);
            blur_plane(plane, res, cfg.prob_blur_radius);
            std::copy(plane.begin(), plane.end(), labels.probs.begin() + c * hw);
        }
        for (size_t p = 0; p < hw; ++p) {
            double sum = 0.0;
            for (int c = 0; c < kNumClasses; ++c) sum += labels.probs[c * hw + p];
            for (int c = 0; c < kNumClasses; ++c)
                labels.probs[c * hw + p] = static_cast<float>(labels.probs[c * hw + p] / sum);
        }
    }

    // stored one-hot = argmax of probs, ties to the lowest class index
    for (size_t p = 0; p < hw; ++p) {
        int best = 0;
        float bv = labels.probs[p];
        for (int c = 1; c < kNumClasses; ++c) {
            const float v = labels.probs[c * hw + p];
            if (v > bv) {
                bv = v;
                best = c;
            }
        }
        labels.onehot[best * hw + p] = 1.f;
    }

    // intensity = mean of the stored class + noise; a separate stream keeps
    // pixel noise independent of the anatomy draws
    ImageSlice img = ImageSlice::zeros(res);
    CounterRng noise(cfg.seed, {kStreamNoise, static_cast<uint64_t>(index)});
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const double m = class_mean(cfg, stored_class(labels, y, x));
            const double n = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise.normal() : 0.0;
            img.pixels[size_t(y) * res + x] =
                static_cast<float>(std::clamp(m + n, 0.0, 1.0));
        }
    return {std::move(img), std::move(labels)};
}

LesionedSlice inject_lesion(const ImageSlice& image, const TissueLabelMap& labels,
                            const PhantomConfig& cfg, int index) {
    validate(cfg);
    const int res = image.height;
    if (image.width != res || labels.height != res || labels.width != res)
        throw InvalidArgument("inject_lesion: image/label dimensions disagree");
    const size_t hw = static_cast<size_t>(res) * res;
    const bool tumor = cfg.lesion_style == "tumor_like";

    // candidate centers: WM pixels; containment region: any non-background pixel
    std::vector<size_t> wm_pixels;
    std::vector<uint8_t> brain(hw, 0);
    size_t brain_area = 0;
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            const int cls = stored_class(labels, y, x);
            if (cls != kBackground) {
                brain[size_t(y) * res + x] = 1;
                ++brain_area;
            }
            if (cls == kWm) wm_pixels.push_back(size_t(y) * res + x);
        }
    if (wm_pixels.empty() || brain_area == 0)
        throw InvalidArgument("inject_lesion: slice has no brain interior");

    CounterRng rng(cfg.seed, {kStreamLesion, static_cast<uint64_t>(index)});
    double lo, hi;
    lesion_level_range(cfg, tumor, &lo, &hi);

    for (int attempt = 0; attempt < 100; ++attempt) {
        const int nblobs = tumor ? 1 : 1 + static_cast<int>(rng.below(3));
        struct Blob {
            double cx, cy, rho, ph1, ph2, level, tex_fx, tex_fy, tex_ph, tex_amp;
        };
        std::vector<Blob> blobs;
        for (int b = 0; b < nblobs; ++b) {
            Blob bl;
            const size_t cpix = wm_pixels[rng.below(wm_pixels.size())];
            bl.cx = static_cast<double>(cpix % res) + 0.5;
            bl.cy = static_cast<double>(cpix / res) + 0.5;
            bl.rho = tumor ? res * (0.08 + 0.12 * rng.uniform())
                           : res * (0.02 + 0.06 * rng.uniform());
            bl.ph1 = rng.uniform(0, 2 * kPi);
            bl.ph2 = rng.uniform(0, 2 * kPi);
            bl.level = rng.uniform(lo, hi);
            bl.tex_fx = rng.uniform(2.0, 5.0) / res;
            bl.tex_fy = rng.uniform(2.0, 5.0) / res;
            bl.tex_ph = rng.uniform(0, 2 * kPi);
            bl.tex_amp = tumor ? 0.08 : 0.08;
            blobs.push_back(bl);
        }

        // blend weight per pixel: 1 in the blob core, falling to 0.5 at the
        // mask boundary; pixels with w <= 0.5 are untouched
        std::vector<float> wmax(hw, 0.f);
        std::vector<int> owner(hw, -1);
        for (int bi = 0; bi < nblobs; ++bi) {
            const Blob& bl = blobs[bi];
            for (int y = 0; y < res; ++y)
                for (int x = 0; x < res; ++x) {
                    const size_t p = size_t(y) * res + x;
                    if (!brain[p]) continue;
                    const double dx = x + 0.5 - bl.cx, dy = y + 0.5 - bl.cy;
                    const double d = std::sqrt(dx * dx + dy * dy);
                    const double th = std::atan2(dy, dx);
                    const double r =
                        tumor ? bl.rho * (1.0 + 0.15 * std::sin(2 * th + bl.ph1) +
                                          0.10 * std::sin(3 * th + bl.ph2))
                              : bl.rho * (1.0 + 0.35 * std::sin(3 * th + bl.ph1) +
                                          0.25 * std::sin(5 * th + bl.ph2));
                    if (r <= 0.5) continue;
                    const double u = d / r;
                    double w;
                    if (u <= 0.8)
                        w = 1.0;
                    else if (u < 1.0)
                        w = (1.0 - u) / 0.2;
                    else
                        continue;
                    if (w > wmax[p]) {
                        wmax[p] = static_cast<float>(w);
                        owner[p] = bi;
                    }
                }
        }

        size_t mask_count = 0;
        for (size_t p = 0; p < hw; ++p)
            if (wmax[p] > 0.5f) ++mask_count;
        if (mask_count == 0) continue;
        if (mask_count > brain_area / 2) continue;

        LesionedSlice out;
        out.image = image;
        out.labels = labels;
        out.mask = LesionMask::all_false(res);
        CounterRng noise(cfg.seed, {kStreamLesion, static_cast<uint64_t>(index), 0xfeed});
        for (int y = 0; y < res; ++y)
            for (int x = 0; x < res; ++x) {
                const size_t p = size_t(y) * res + x;
                if (wmax[p] <= 0.5f) continue;
                const Blob& bl = blobs[static_cast<size_t>(owner[p])];
                const double tex =
                    bl.tex_amp * std::sin(2 * kPi * (bl.tex_fx * (x + 0.5) + bl.tex_fy * (y + 0.5)) +
                                          bl.tex_ph);
                const double n = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise.normal() : 0.0;
                const double v = std::clamp(bl.level + tex + n, 0.0, 1.0);
                const double w = wmax[p];
                out.image.pixels[p] = static_cast<float>(
                    std::clamp((1.0 - w) * out.image.pixels[p] + w * v, 0.0, 1.0));
                out.mask.mask[p] = 1;
            }
        return out;
    }
    throw Error("inject_lesion: no admissible lesion found in 100 attempts (index " +
                std::to_string(index) + ")");
}

void build_dataset(const PhantomConfig& cfg, const std::string& root) {
    validate(cfg);
    ensure_dir(root);

    // called from worker threads; buffer must be local
    const auto make_id = [](const char* prefix, int i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s%06d", prefix, i);
        return std::string(idbuf);
    };

    // train split: healthy only, no mask files
    {
        data::SplitInfo info;
        info.split = "train";
        info.resolution = cfg.resolution;
        info.num_classes = kNumClasses;
        info.generator_seed = cfg.seed;
        info.lesion_style = "none";
        data::DatasetWriter writer(root, info);
        constexpr int kChunk = 64;
        std::vector<data::Record> chunk;
        for (int base = 0; base < cfg.num_healthy_train; base += kChunk) {
            const int n = std::min(kChunk, cfg.num_healthy_train - base);
            chunk.assign(n, data::Record{});
            parallel_blocks(n, [&](size_t k) {
                const int i = base + static_cast<int>(k);
                auto [img, lbl] = generate_healthy(cfg, i);
                chunk[k] = data::Record{make_id("train", i), std::move(img), std::move(lbl), {}};
            });
            for (auto& r : chunk) writer.write_record(r);
        }
        writer.finalize();
    }

    // test split: lesioned records spread evenly via the fraction accumulator
    {
        data::SplitInfo info;
        info.split = "test";
        info.resolution = cfg.resolution;
        info.num_classes = kNumClasses;
        info.generator_seed = cfg.seed;
        info.lesion_style = cfg.lesion_style;
        data::DatasetWriter writer(root, info);
        constexpr int kChunk = 64;
        std::vector<data::Record> chunk;
        for (int base = 0; base < cfg.num_test; base += kChunk) {
            const int n = std::min(kChunk, cfg.num_test - base);
            chunk.assign(n, data::Record{});
            parallel_blocks(n, [&](size_t k) {
                const int i = base + static_cast<int>(k);
                const int gen_index = cfg.num_healthy_train + i;
                auto [img, lbl] = generate_healthy(cfg, gen_index);
                const bool lesioned =
                    std::floor((i + 1) * cfg.lesion_fraction) - std::floor(i * cfg.lesion_fraction) >=
                    1.0;
                data::Record r;
                r.id = make_id("test", i);
                if (lesioned) {
                    auto les = inject_lesion(img, lbl, cfg, gen_index);
                    r.image = std::move(les.image);
                    r.labels = std::move(les.labels);
                    r.mask = std::move(les.mask);
                } else {
                    r.image = std::move(img);
                    r.labels = std::move(lbl);
                    r.mask = data::LesionMask::all_false(cfg.resolution);
                }
                chunk[k] = std::move(r);
            });
            for (auto& r : chunk) writer.write_record(r);
        }
        writer.finalize();
    }
}

}  // namespace cyclesem::phantom
