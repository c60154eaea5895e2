#pragma once

#include <string>
#include <vector>

#include "cyclesem/dataio.hpp"
#include "cyclesem/models.hpp"

// Autoencoder baseline: convolutional encoder/decoder around a flat dense
// bottleneck, trained with mean-L1 reconstruction on healthy slices. Scored
// through the exact same residual/pooling path as the cycle model.
namespace cyclesem::baseline {

struct AeTrainConfig {
    int epochs = 30;
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int batch_size = 16;
    uint64_t seed = 7;
    int base_channels = 16;
    int bottleneck = 128;
};

void validate(const AeTrainConfig& cfg);

struct AeTrainResult {
    models::ConvAutoencoder<float> model;
    std::vector<double> epoch_l1;
    std::vector<std::string> warnings;
};

AeTrainResult train_ae(const std::vector<data::Record>& train, const AeTrainConfig& cfg,
                       const std::string& checkpoint_dir = "");

data::ImageSlice ae_reconstruct(const models::ConvAutoencoder<float>& model,
                                const data::ImageSlice& image);

std::vector<data::ImageSlice> ae_reconstruct_batch(const models::ConvAutoencoder<float>& model,
                                                   const std::vector<const data::ImageSlice*>& in);

}  // namespace cyclesem::baseline
