#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "cyclesem/dataio.hpp"

// Seeded synthetic brain phantom: a jittered ellipse with a CSF rim, a GM
// cortical ring, WM interior, CSF ventricles and deep GM blobs, rendered with
// a T2-like contrast (WM < GM < CSF). Per-record generation is a pure
// function of (seed, index); dataset bytes are a pure function of the config.
namespace cyclesem::phantom {

struct PhantomConfig {
    uint64_t seed = 7;
    int resolution = 64;
    int num_healthy_train = 200;
    int num_test = 40;
    double lesion_fraction = 0.5;              // of the test split
    std::string lesion_style = "tumor_like";   // tumor_like | stroke_like
    double noise_sigma = 0.04;
    double prob_blur_radius = 1.5;             // px; Gaussian blur of the one-hot maps
    // tissue mean intensities, T2-like ordering WM < GM < CSF. Tissue-tissue
    // contrasts are kept small relative to the lesion brightness so that
    // boundary mistakes score low while unreconstructed lesions score high.
    double mean_background = 0.05;
    double mean_gm = 0.46;
    double mean_wm = 0.35;
    double mean_csf = 0.60;
};

// Throws ConfigError naming "phantom.<field>" on violations.
void validate(const PhantomConfig& cfg);

// Deterministic in (cfg.seed, index).
std::pair<data::ImageSlice, data::TissueLabelMap> generate_healthy(const PhantomConfig& cfg,
                                                                   int index);

struct LesionedSlice {
    data::ImageSlice image;
    data::TissueLabelMap labels;  // unchanged healthy labels; lesions carry no supervision
    data::LesionMask mask;
};

// Overwrites pixels inside the generated lesion only; labels pass through.
// tumor_like: one large bright smooth blob (radius 8-20% of the image side).
// stroke_like: 1-3 small irregular blobs (radius 2-8%), wider intensity spread.
LesionedSlice inject_lesion(const data::ImageSlice& image, const data::TissueLabelMap& labels,
                            const PhantomConfig& cfg, int index);

// Writes <root>/train (all healthy) and <root>/test (healthy + lesioned mix
// per lesion_fraction, masks always present). Record generation may run in
// parallel; bytes are independent of the worker count.
void build_dataset(const PhantomConfig& cfg, const std::string& root);

}  // namespace cyclesem::phantom
