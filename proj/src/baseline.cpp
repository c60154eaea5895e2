#include "cyclesem/baseline.hpp"

#include <cmath>
#include <cstdio>

#include "cyclesem/checkpoint.hpp"
#include "train_util.hpp"

namespace cyclesem::baseline {

using trainutil::images_batch;
using trainutil::shuffled_indices;

void validate(const AeTrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("ae.epochs: must be >= 0");
    if (cfg.learning_rate <= 0) throw ConfigError("ae.learning_rate: must be > 0");
    if (cfg.beta1 <= 0 || cfg.beta1 >= 1) throw ConfigError("ae.beta1: must be in (0,1)");
    if (cfg.beta2 <= 0 || cfg.beta2 >= 1) throw ConfigError("ae.beta2: must be in (0,1)");
    if (cfg.batch_size <= 0) throw ConfigError("ae.batch_size: must be > 0");
    if (cfg.base_channels <= 0) throw ConfigError("ae.base_channels: must be > 0");
    if (cfg.bottleneck <= 0) throw ConfigError("ae.bottleneck: must be > 0");
}

AeTrainResult train_ae(const std::vector<data::Record>& train, const AeTrainConfig& cfg,
                       const std::string& checkpoint_dir) {
    validate(cfg);
    if (train.empty()) throw InvalidArgument("train_ae: empty split");
    const int res = train[0].image.height;

    AeTrainResult out{
        models::ConvAutoencoder<float>(models::AeDesc{cfg.base_channels, cfg.bottleneck, res},
                                       cfg.seed),
        {}, {}};
    if (cfg.bottleneck >= res * res) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "ae.bottleneck (%d) >= input pixel count (%d): no true bottleneck",
                      cfg.bottleneck, res * res);
        out.warnings.emplace_back(buf);
        std::fprintf(stderr, "[train-ae] warning: %s\n", buf);
    }
    auto& model = out.model;
    nn::Adam<float> opt(model.params(), cfg.learning_rate, cfg.beta1, cfg.beta2);
    const nlohmann::json cfg_json{{"epochs", cfg.epochs},
                                  {"learning_rate", cfg.learning_rate},
                                  {"beta1", cfg.beta1},
                                  {"beta2", cfg.beta2},
                                  {"batch_size", cfg.batch_size},
                                  {"bottleneck", cfg.bottleneck},
                                  {"seed", cfg.seed}};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = shuffled_indices(train.size(), cfg.seed, 4, epoch);
        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t b0 = 0; b0 < idx.size(); b0 += cfg.batch_size) {
            const size_t b1 = std::min(idx.size(), b0 + cfg.batch_size);
            const Tensor4f x = images_batch(train, idx, b0, b1);
            models::ConvAutoencoder<float>::Ws ws;
            const Tensor4f xhat = model.forward_train(x, ws);
            const double loss = nn::l1_loss(x, xhat);
            if (!std::isfinite(loss))
                throw TrainingError("train_ae: non-finite loss at epoch " + std::to_string(epoch));
            const Tensor4f g = nn::l1_grad_wrt_xhat(x, xhat);
            opt.zero_grad();
            model.backward(ws, xhat, g);
            opt.step();
            loss_sum += loss * static_cast<double>(b1 - b0);
            seen += b1 - b0;
        }
        out.epoch_l1.push_back(loss_sum / seen);
        std::fprintf(stderr, "[train-ae] epoch %d/%d l1=%.6f\n", epoch + 1, cfg.epochs,
                     out.epoch_l1.back());
        if (!checkpoint_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof(name), "/ae_epoch_%03d", epoch + 1);
            ckpt::save_autoencoder(checkpoint_dir + name, model, cfg_json, epoch + 1,
                                   {{"l1", out.epoch_l1}}, out.warnings);
        }
    }
    return out;
}

std::vector<data::ImageSlice> ae_reconstruct_batch(const models::ConvAutoencoder<float>& model,
                                                   const std::vector<const data::ImageSlice*>& in) {
    const int res = model.desc().resolution;
    for (const auto* im : in)
        if (im->height != res || im->width != res)
            throw InvalidArgument("ae_reconstruct: resolution does not match the trained model");
    Tensor4f x(static_cast<int>(in.size()), 1, res, res);
    for (size_t i = 0; i < in.size(); ++i)
        std::copy(in[i]->pixels.begin(), in[i]->pixels.end(), x.plane(static_cast<int>(i), 0));
    const Tensor4f y = model.forward(x);
    std::vector<data::ImageSlice> out(in.size());
    const size_t hw = static_cast<size_t>(res) * res;
    for (size_t i = 0; i < in.size(); ++i) {
        out[i].height = out[i].width = res;
        out[i].pixels.assign(y.v.begin() + i * hw, y.v.begin() + (i + 1) * hw);
    }
    return out;
}

data::ImageSlice ae_reconstruct(const models::ConvAutoencoder<float>& model,
                                const data::ImageSlice& image) {
    return ae_reconstruct_batch(model, {&image})[0];
}

}  // namespace cyclesem::baseline
