#pragma once

#include <string>
#include <vector>

#include "cyclesem/dataio.hpp"
#include "cyclesem/models.hpp"
#include "cyclesem/semantic.hpp"

// Synthesis module: conditional generator G (semantic map -> image) and patch
// discriminator D, trained with the adversarial objective plus lambda * L1.
// Loss definitions live in nn.hpp (adversarial_losses, l1_loss,
// generator_objective).
namespace cyclesem::synth {

struct SynthTrainConfig {
    int epochs = 15;             // paper setting
    double lambda = 10.0;        // paper setting
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int batch_size = 16;
    uint64_t seed = 7;
    int base_channels = 16;
};

void validate(const SynthTrainConfig& cfg);

struct SynthTrainResult {
    models::Generator<float> gen;
    models::PatchDiscriminator<float> disc;
    std::vector<double> epoch_l1;
    std::vector<double> epoch_d_loss;
    std::vector<double> epoch_g_adv;
    std::vector<double> epoch_g_obj;
};

// Alternating updates, one D step then one G step per batch; G trains on the
// records' ground-truth probability maps. epochs == 0 returns initialized
// models with empty curves.
SynthTrainResult train_synthesizer(const std::vector<data::Record>& train,
                                   const SynthTrainConfig& cfg,
                                   const std::string& checkpoint_dir = "");

// Deterministic; output in [0,1] for arbitrary (even invalid) semantic input.
data::ImageSlice synthesize(const models::Generator<float>& gen, const SemanticIntermediate& s);

std::vector<data::ImageSlice> synthesize_batch(const models::Generator<float>& gen,
                                               const std::vector<const SemanticIntermediate*>& in);

}  // namespace cyclesem::synth
