#pragma once

#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "cyclesem/models.hpp"

// Checkpoints are a weights blob "<prefix>.bin" plus a JSON sidecar
// "<prefix>.json". Blob layout: magic "CSW1", u32 tensor count, then per
// tensor: u32 name length, name bytes, u32 dims[4], float32 LE payload. The
// sidecar carries {kind, desc, train_config, epoch, curves, warnings} and its
// schema is stable; see README.
namespace cyclesem::ckpt {

using Curves = std::map<std::string, std::vector<double>>;

void write_weights(const std::string& path, std::vector<nn::Param<float>*> params);
void read_weights(const std::string& path, std::vector<nn::Param<float>*> params);

void save_sidecar(const std::string& prefix, const std::string& kind, const nlohmann::json& desc,
                  const nlohmann::json& train_config, int epoch, const Curves& curves,
                  const std::vector<std::string>& warnings = {});
nlohmann::json load_sidecar(const std::string& prefix);

// Kind string from the sidecar; throws MissingArtifact when absent.
std::string checkpoint_kind(const std::string& prefix);

models::UNet<float> load_segmentor(const std::string& prefix);
models::Generator<float> load_generator(const std::string& prefix);
models::PatchDiscriminator<float> load_discriminator(const std::string& prefix);
models::ConvAutoencoder<float> load_autoencoder(const std::string& prefix);

void save_segmentor(const std::string& prefix, models::UNet<float>& m,
                    const nlohmann::json& train_config, int epoch, const Curves& curves);
void save_generator(const std::string& prefix, models::Generator<float>& m,
                    const nlohmann::json& train_config, int epoch, const Curves& curves);
void save_discriminator(const std::string& prefix, models::PatchDiscriminator<float>& m,
                        const nlohmann::json& train_config, int epoch, const Curves& curves);
void save_autoencoder(const std::string& prefix, models::ConvAutoencoder<float>& m,
                      const nlohmann::json& train_config, int epoch, const Curves& curves,
                      const std::vector<std::string>& warnings = {});

}  // namespace cyclesem::ckpt
