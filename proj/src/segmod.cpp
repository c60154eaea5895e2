#include "cyclesem/segmod.hpp"

#include <cmath>
#include <cstdio>

#include "cyclesem/checkpoint.hpp"
#include "train_util.hpp"

namespace cyclesem::seg {

using trainutil::images_batch;
using trainutil::onehot_batch;
using trainutil::shuffled_indices;

void validate(const SegTrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("seg.epochs: must be >= 0");
    if (cfg.learning_rate <= 0) throw ConfigError("seg.learning_rate: must be > 0");
    if (cfg.beta1 <= 0 || cfg.beta1 >= 1) throw ConfigError("seg.beta1: must be in (0,1)");
    if (cfg.beta2 <= 0 || cfg.beta2 >= 1) throw ConfigError("seg.beta2: must be in (0,1)");
    if (cfg.batch_size <= 0) throw ConfigError("seg.batch_size: must be > 0");
    if (cfg.base_channels <= 0) throw ConfigError("seg.base_channels: must be > 0");
    if (cfg.depth < 2 || cfg.depth > 5) throw ConfigError("seg.depth: must be in [2,5]");
}

SegTrainResult train_segmentor(const std::vector<data::Record>& train, const SegTrainConfig& cfg,
                               const std::string& checkpoint_dir) {
    validate(cfg);
    if (train.empty()) throw InvalidArgument("train_segmentor: empty split");
    const int res = train[0].image.height;
    const int C = train[0].labels.num_classes;

    models::UNetDesc desc{1, C, cfg.base_channels, cfg.depth, res};
    SegTrainResult out{models::UNet<float>(desc, cfg.seed), {}};
    auto& model = out.model;
    nn::Adam<float> opt(model.params(), cfg.learning_rate, cfg.beta1, cfg.beta2);
    const nlohmann::json cfg_json{{"epochs", cfg.epochs},       {"learning_rate", cfg.learning_rate},
                                  {"beta1", cfg.beta1},         {"beta2", cfg.beta2},
                                  {"batch_size", cfg.batch_size}, {"seed", cfg.seed}};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto idx = shuffled_indices(train.size(), cfg.seed, 1, epoch);
        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t b0 = 0; b0 < idx.size(); b0 += cfg.batch_size) {
            const size_t b1 = std::min(idx.size(), b0 + cfg.batch_size);
            const Tensor4f x = images_batch(train, idx, b0, b1);
            const Tensor4f t = onehot_batch(train, idx, b0, b1);
            models::UNet<float>::Ws ws;
            const Tensor4f logits = model.logits_train(x, ws);
            Tensor4f dlogits;
            const double loss = nn::softmax_ce_with_logits(logits, t, &dlogits);
            if (!std::isfinite(loss))
                throw TrainingError("train_segmentor: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(b0 / cfg.batch_size) +
                                    " (lr=" + std::to_string(cfg.learning_rate) + ")");
            opt.zero_grad();
            model.backward(ws, dlogits);
            opt.step();
            loss_sum += loss * static_cast<double>(b1 - b0);
            seen += b1 - b0;
        }
        out.epoch_ce.push_back(loss_sum / seen);
        std::fprintf(stderr, "[train-seg] epoch %d/%d mean_ce=%.6f\n", epoch + 1, cfg.epochs,
                     out.epoch_ce.back());
        if (!checkpoint_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof(name), "/seg_epoch_%03d", epoch + 1);
            ckpt::save_segmentor(checkpoint_dir + name, model, cfg_json, epoch + 1,
                                 {{"ce", out.epoch_ce}});
        }
    }
    return out;
}

std::vector<SemanticIntermediate> segment_batch(const models::UNet<float>& model,
                                                const std::vector<const data::ImageSlice*>& images) {
    const int res = model.desc().resolution;
    const int C = model.desc().num_classes;
    for (const auto* im : images)
        if (im->height != res || im->width != res)
            throw InvalidArgument("segment: image resolution does not match the trained model");
    Tensor4f x(static_cast<int>(images.size()), 1, res, res);
    for (size_t i = 0; i < images.size(); ++i)
        std::copy(images[i]->pixels.begin(), images[i]->pixels.end(),
                  x.plane(static_cast<int>(i), 0));
    const Tensor4f p = model.probs(x);
    std::vector<SemanticIntermediate> out(images.size());
    const size_t chw = static_cast<size_t>(C) * res * res;
    for (size_t i = 0; i < images.size(); ++i) {
        out[i].mode = SemanticIntermediate::Mode::kContinuous;
        out[i].height = out[i].width = res;
        out[i].num_classes = C;
        out[i].values.assign(p.v.begin() + i * chw, p.v.begin() + (i + 1) * chw);
    }
    return out;
}

SemanticIntermediate segment(const models::UNet<float>& model, const data::ImageSlice& image) {
    return segment_batch(model, {&image})[0];
}

double pixel_accuracy(const models::UNet<float>& model, const std::vector<data::Record>& records) {
    if (records.empty()) throw InvalidArgument("pixel_accuracy: no records");
    size_t hits = 0, total = 0;
    for (const auto& r : records) {
        const SemanticIntermediate s = segment(model, r.image);
        const size_t hw = static_cast<size_t>(s.height) * s.width;
        for (size_t p = 0; p < hw; ++p) {
            int pred = 0, truth = 0;
            float best = s.values[p];
            for (int c = 1; c < s.num_classes; ++c)
                if (s.values[c * hw + p] > best) {
                    best = s.values[c * hw + p];
                    pred = c;
                }
            for (int c = 0; c < s.num_classes; ++c)
                if (r.labels.onehot[c * hw + p] == 1.f) truth = c;
            hits += pred == truth;
            ++total;
        }
    }
    return static_cast<double>(hits) / total;
}

}  // namespace cyclesem::seg
