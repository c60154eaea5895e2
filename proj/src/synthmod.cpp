#include "cyclesem/synthmod.hpp"

#include <cmath>
#include <cstdio>

#include "cyclesem/checkpoint.hpp"
#include "train_util.hpp"

namespace cyclesem::synth {

using trainutil::images_batch;
using trainutil::probs_batch;
using trainutil::shuffled_indices;

void validate(const SynthTrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("synth.epochs: must be >= 0");
    if (cfg.lambda < 0) throw ConfigError("synth.lambda: must be >= 0");
    if (cfg.learning_rate <= 0) throw ConfigError("synth.learning_rate: must be > 0");
    if (cfg.beta1 <= 0 || cfg.beta1 >= 1) throw ConfigError("synth.beta1: must be in (0,1)");
    if (cfg.beta2 <= 0 || cfg.beta2 >= 1) throw ConfigError("synth.beta2: must be in (0,1)");
    if (cfg.batch_size <= 0) throw ConfigError("synth.batch_size: must be > 0");
    if (cfg.base_channels <= 0) throw ConfigError("synth.base_channels: must be > 0");
}

SynthTrainResult train_synthesizer(const std::vector<data::Record>& train,
                                   const SynthTrainConfig& cfg,
                                   const std::string& checkpoint_dir) {
    validate(cfg);
    if (train.empty()) throw InvalidArgument("train_synthesizer: empty split");
    const int res = train[0].image.height;
    const int C = train[0].labels.num_classes;

    SynthTrainResult out{
        models::Generator<float>(models::GenDesc{C, cfg.base_channels, res}, cfg.seed),
        models::PatchDiscriminator<float>(models::DiscDesc{1, cfg.base_channels, res}, cfg.seed),
        {}, {}, {}, {}};
    auto& G = out.gen;
    auto& D = out.disc;
    nn::Adam<float> opt_g(G.params(), cfg.learning_rate, cfg.beta1, cfg.beta2);
    nn::Adam<float> opt_d(D.params(), cfg.learning_rate, cfg.beta1, cfg.beta2);
    const nlohmann::json cfg_json{
        {"epochs", cfg.epochs},   {"lambda", cfg.lambda},         {"learning_rate", cfg.learning_rate},
        {"beta1", cfg.beta1},     {"beta2", cfg.beta2},           {"batch_size", cfg.batch_size},
        {"seed", cfg.seed},       {"update_schedule", "1:1 D:G"}, {"g_loss", "non-saturating"}};

    std::string last_good;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = shuffled_indices(train.size(), cfg.seed, 2, epoch);
        double l1_sum = 0, d_sum = 0, adv_sum = 0, obj_sum = 0;
        size_t seen = 0;
        for (size_t b0 = 0; b0 < idx.size(); b0 += cfg.batch_size) {
            const size_t b1 = std::min(idx.size(), b0 + cfg.batch_size);
            const size_t bn = b1 - b0;
            const Tensor4f x = images_batch(train, idx, b0, b1);
            const Tensor4f y = probs_batch(train, idx, b0, b1);

            models::Generator<float>::Ws gws;
            const Tensor4f fake = G.forward_train(y, gws);

            // D step on real and on detached fake
            models::PatchDiscriminator<float>::Ws dws_r, dws_f;
            const Tensor4f s_real = D.forward_train(x, dws_r);
            const Tensor4f s_fake = D.forward_train(fake, dws_f);
            const nn::AdvLosses adv = nn::adversarial_losses(s_real, s_fake);
            Tensor4f g_real, g_fake_d;
            nn::adversarial_grads<float>(s_real, s_fake, &g_real, &g_fake_d, nullptr);
            opt_d.zero_grad();
            D.backward(dws_r, g_real);
            D.backward(dws_f, g_fake_d);
            opt_d.step();

            // G step against the updated discriminator
            models::PatchDiscriminator<float>::Ws dws_f2;
            const Tensor4f s_fake2 = D.forward_train(fake, dws_f2);
            const nn::AdvLosses adv2 = nn::adversarial_losses(s_real, s_fake2);
            Tensor4f g_fake_adv;
            nn::adversarial_grads<float>(s_real, s_fake2, nullptr, nullptr, &g_fake_adv);
            opt_d.zero_grad();  // discard D grads accumulated on the G path
            Tensor4f g_fake = D.backward(dws_f2, g_fake_adv);
            const double l1 = nn::l1_loss(x, fake);
            const Tensor4f g_l1 = nn::l1_grad_wrt_xhat(x, fake);
            for (size_t i = 0; i < g_fake.size(); ++i)
                g_fake.v[i] += static_cast<float>(cfg.lambda) * g_l1.v[i];
            opt_g.zero_grad();
            G.backward(gws, fake, g_fake);
            opt_g.step();

            const double g_obj = nn::generator_objective(adv2.g_adv_loss, l1, cfg.lambda);
            if (!std::isfinite(adv.d_loss) || !std::isfinite(g_obj) || !std::isfinite(l1)) {
                std::string msg = "train_synthesizer: non-finite loss at epoch " +
                                  std::to_string(epoch) + ", batch " +
                                  std::to_string(b0 / cfg.batch_size);
                if (!last_good.empty()) msg += "; last good checkpoint: " + last_good;
                throw TrainingError(msg);
            }
            l1_sum += l1 * bn;
            d_sum += adv.d_loss * bn;
            adv_sum += adv2.g_adv_loss * bn;
            obj_sum += g_obj * bn;
            seen += bn;
        }
        out.epoch_l1.push_back(l1_sum / seen);
        out.epoch_d_loss.push_back(d_sum / seen);
        out.epoch_g_adv.push_back(adv_sum / seen);
        out.epoch_g_obj.push_back(obj_sum / seen);
        std::fprintf(stderr, "[train-synth] epoch %d/%d l1=%.6f d=%.4f g_adv=%.4f\n", epoch + 1,
                     cfg.epochs, out.epoch_l1.back(), out.epoch_d_loss.back(),
                     out.epoch_g_adv.back());
        if (!checkpoint_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof(name), "/gen_epoch_%03d", epoch + 1);
            const ckpt::Curves curves{{"l1", out.epoch_l1},
                                      {"d_loss", out.epoch_d_loss},
                                      {"g_adv", out.epoch_g_adv},
                                      {"g_obj", out.epoch_g_obj}};
            ckpt::save_generator(checkpoint_dir + name, G, cfg_json, epoch + 1, curves);
            last_good = checkpoint_dir + name;
        }
    }
    return out;
}

std::vector<data::ImageSlice> synthesize_batch(const models::Generator<float>& gen,
                                               const std::vector<const SemanticIntermediate*>& in) {
    const int res = gen.desc().resolution;
    const int C = gen.desc().num_classes;
    for (const auto* s : in) {
        if (s->num_classes != C)
            throw InvalidArgument("synthesize: semantic channel count does not match the model");
        if (s->height != res || s->width != res)
            throw InvalidArgument("synthesize: semantic resolution does not match the model");
    }
    Tensor4f y(static_cast<int>(in.size()), C, res, res);
    for (size_t i = 0; i < in.size(); ++i)
        std::copy(in[i]->values.begin(), in[i]->values.end(), y.plane(static_cast<int>(i), 0));
    const Tensor4f img = gen.forward(y);
    std::vector<data::ImageSlice> out(in.size());
    const size_t hw = static_cast<size_t>(res) * res;
    for (size_t i = 0; i < in.size(); ++i) {
        out[i].height = out[i].width = res;
        out[i].pixels.assign(img.v.begin() + i * hw, img.v.begin() + (i + 1) * hw);
    }
    return out;
}

data::ImageSlice synthesize(const models::Generator<float>& gen, const SemanticIntermediate& s) {
    return synthesize_batch(gen, {&s})[0];
}

}  // namespace cyclesem::synth
