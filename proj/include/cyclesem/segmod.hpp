#pragma once

#include <string>
#include <vector>

#include "cyclesem/dataio.hpp"
#include "cyclesem/models.hpp"
#include "cyclesem/semantic.hpp"

// Segmentation module S: U-Net style encoder-decoder trained with per-pixel
// cross-entropy on healthy slices. The loss itself lives in nn.hpp
// (cross_entropy_loss / softmax_ce_with_logits).
namespace cyclesem::seg {

struct SegTrainConfig {
    int epochs = 30;             // paper setting; desk configs use fewer
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int batch_size = 16;         // paper uses 128
    uint64_t seed = 7;
    int base_channels = 16;
    int depth = 3;
};

void validate(const SegTrainConfig& cfg);

struct SegTrainResult {
    models::UNet<float> model;
    std::vector<double> epoch_ce;  // mean cross-entropy per epoch
};

// Trains on the records' (image, onehot) pairs. Saves a checkpoint per epoch
// under checkpoint_dir when non-empty ("seg_epoch_<k>"). epochs == 0 returns
// the initialized model with an empty curve.
SegTrainResult train_segmentor(const std::vector<data::Record>& train, const SegTrainConfig& cfg,
                               const std::string& checkpoint_dir = "");

// Continuous posterior map for one slice; deterministic, and bit-identical
// to the batched path.
SemanticIntermediate segment(const models::UNet<float>& model, const data::ImageSlice& image);

std::vector<SemanticIntermediate> segment_batch(const models::UNet<float>& model,
                                                const std::vector<const data::ImageSlice*>& images);

// Fraction of pixels whose posterior argmax matches the stored one-hot.
double pixel_accuracy(const models::UNet<float>& model, const std::vector<data::Record>& records);

}  // namespace cyclesem::seg
