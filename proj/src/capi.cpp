#include "cyclesem/capi.h"

#include <cstring>
#include <memory>
#include <string>
#include <variant>

#include "cyclesem/anomaly.hpp"
#include "cyclesem/checkpoint.hpp"
#include "cyclesem/pipeline.hpp"

using namespace cyclesem;

namespace {

thread_local std::string t_last_error;

cs_status status_of(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return CS_ERR_CONFIG;
    if (dynamic_cast<const MissingArtifact*>(&e)) return CS_ERR_MISSING;
    return CS_ERR;
}

template <typename Fn>
cs_status guarded(Fn&& fn) {
    try {
        fn();
        t_last_error.clear();
        return CS_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return CS_ERR;
    }
}

pipeline::ExperimentConfig parse(const char* config_json) {
    if (!config_json) throw ConfigError("config: null config document");
    return pipeline::parse_config_json(config_json);
}

const char* require(const char* v, const char* what) {
    if (!v) throw InvalidArgument(std::string("null argument: ") + what);
    return v;
}

}  // namespace

struct cs_model {
    std::string kind;
    std::variant<models::UNet<float>, models::Generator<float>, models::PatchDiscriminator<float>,
                 models::ConvAutoencoder<float>>
        m;
};

namespace {

data::ImageSlice image_from(const float* image, int h, int w) {
    if (h <= 0 || w <= 0) throw InvalidArgument("image dimensions must be positive");
    data::ImageSlice s;
    s.height = h;
    s.width = w;
    s.pixels.assign(image, image + static_cast<size_t>(h) * w);
    return s;
}

template <typename M>
const M& model_as(const cs_model* m, const char* expected) {
    if (!std::holds_alternative<M>(m->m))
        throw InvalidArgument("model handle is a " + m->kind + ", expected " + expected);
    return std::get<M>(m->m);
}

}  // namespace

namespace {

metrics::ScoredPixels scored_from(const float* scores, const uint8_t* labels, size_t count) {
    metrics::ScoredPixels sp;
    sp.scores.assign(scores, scores + count);
    sp.labels.assign(labels, labels + count);
    return sp;
}

}  // namespace

extern "C" {

const char* cs_version(void) { return kVersion; }

const char* cs_last_error(void) { return t_last_error.c_str(); }

cs_status cs_gen_data(const char* config_json) {
    return guarded([&] { pipeline::gen_data(parse(config_json)); });
}

cs_status cs_train_seg(const char* config_json) {
    return guarded([&] { pipeline::train_seg(parse(config_json)); });
}

cs_status cs_train_synth(const char* config_json) {
    return guarded([&] { pipeline::train_synth(parse(config_json)); });
}

cs_status cs_train_ae(const char* config_json) {
    return guarded([&] { pipeline::train_ae(parse(config_json)); });
}

cs_status cs_infer(const char* config_json, const char* model, const char* mode,
                   const char* data_dir, const char* split, const char* tag, int median_filter) {
    return guarded([&] {
        const auto cfg = parse(config_json);
        pipeline::infer(cfg, model ? model : "cycle", mode ? mode : cfg.mode,
                        data_dir ? data_dir : pipeline::data_dir(cfg), split ? split : "test",
                        require(tag, "tag"), median_filter != 0);
    });
}

cs_status cs_eval(const char* config_json, const char* tag, const char* data_dir,
                  const char* split, char* report_json_out, size_t out_cap) {
    return guarded([&] {
        const auto cfg = parse(config_json);
        const auto rep = pipeline::evaluate(cfg, require(tag, "tag"),
                                            data_dir ? data_dir : pipeline::data_dir(cfg),
                                            split ? split : "test");
        if (report_json_out) {
            const std::string j = metrics::to_json(rep);
            if (j.size() + 1 > out_cap)
                throw InvalidArgument("cs_eval: report buffer too small (need " +
                                      std::to_string(j.size() + 1) + " bytes)");
            std::memcpy(report_json_out, j.c_str(), j.size() + 1);
        }
    });
}

cs_status cs_ablation(const char* config_json, const char* data_dir, const char* split) {
    return guarded([&] {
        const auto cfg = parse(config_json);
        pipeline::ablation(cfg, data_dir ? data_dir : pipeline::data_dir(cfg),
                           split ? split : "test");
    });
}

cs_status cs_report(const char* config_json, const char* tag, const char* data_dir,
                    const char* split, int max_rows) {
    return guarded([&] {
        const auto cfg = parse(config_json);
        pipeline::report(cfg, require(tag, "tag"), data_dir ? data_dir : pipeline::data_dir(cfg),
                         split ? split : "test", max_rows > 0 ? max_rows : 8);
    });
}

cs_status cs_model_open(const char* checkpoint_prefix, cs_model** out) {
    return guarded([&] {
        require(checkpoint_prefix, "checkpoint_prefix");
        require(reinterpret_cast<const char*>(out), "out");
        const std::string prefix = checkpoint_prefix;
        const std::string kind = ckpt::checkpoint_kind(prefix);
        auto holder = std::make_unique<cs_model>();
        holder->kind = kind;
        if (kind == "segmentor")
            holder->m = ckpt::load_segmentor(prefix);
        else if (kind == "generator")
            holder->m = ckpt::load_generator(prefix);
        else if (kind == "discriminator")
            holder->m = ckpt::load_discriminator(prefix);
        else if (kind == "autoencoder")
            holder->m = ckpt::load_autoencoder(prefix);
        else
            throw IoError("unknown checkpoint kind: " + kind);
        *out = holder.release();
    });
}

void cs_model_close(cs_model* m) { delete m; }

cs_status cs_model_kind(const cs_model* m, char* buf, size_t cap) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(m), "model");
        require(buf, "buf");
        if (m->kind.size() + 1 > cap) throw InvalidArgument("cs_model_kind: buffer too small");
        std::memcpy(buf, m->kind.c_str(), m->kind.size() + 1);
    });
}

cs_status cs_model_resolution(const cs_model* m, int* out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(m), "model");
        require(reinterpret_cast<const char*>(out), "out");
        std::visit([&](const auto& model) { *out = model.desc().resolution; }, m->m);
    });
}

cs_status cs_model_num_classes(const cs_model* m, int* out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(m), "model");
        require(reinterpret_cast<const char*>(out), "out");
        if (m->kind == "segmentor")
            *out = std::get<models::UNet<float>>(m->m).desc().num_classes;
        else if (m->kind == "generator")
            *out = std::get<models::Generator<float>>(m->m).desc().num_classes;
        else
            *out = 1;
    });
}

cs_status cs_segment(const cs_model* segmentor, const float* image, int h, int w,
                     float* probs_out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(segmentor), "segmentor");
        require(reinterpret_cast<const char*>(image), "image");
        require(reinterpret_cast<const char*>(probs_out), "probs_out");
        const auto& s = model_as<models::UNet<float>>(segmentor, "segmentor");
        const auto sem = seg::segment(s, image_from(image, h, w));
        std::copy(sem.values.begin(), sem.values.end(), probs_out);
    });
}

cs_status cs_synthesize(const cs_model* generator, const float* semantic, int c, int h, int w,
                        float* image_out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(generator), "generator");
        require(reinterpret_cast<const char*>(semantic), "semantic");
        require(reinterpret_cast<const char*>(image_out), "image_out");
        const auto& g = model_as<models::Generator<float>>(generator, "generator");
        SemanticIntermediate sem;
        sem.mode = SemanticIntermediate::Mode::kContinuous;
        sem.height = h;
        sem.width = w;
        sem.num_classes = c;
        sem.values.assign(semantic, semantic + static_cast<size_t>(c) * h * w);
        const auto img = synth::synthesize(g, sem);
        std::copy(img.pixels.begin(), img.pixels.end(), image_out);
    });
}

cs_status cs_reconstruct(const cs_model* segmentor, const cs_model* generator, const float* image,
                         int h, int w, int discrete_mode, float* recon_out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(segmentor), "segmentor");
        require(reinterpret_cast<const char*>(generator), "generator");
        require(reinterpret_cast<const char*>(image), "image");
        require(reinterpret_cast<const char*>(recon_out), "recon_out");
        const auto& s = model_as<models::UNet<float>>(segmentor, "segmentor");
        const auto& g = model_as<models::Generator<float>>(generator, "generator");
        const auto recon = anomaly::reconstruct(
            s, g, image_from(image, h, w),
            discrete_mode ? SemanticIntermediate::Mode::kDiscrete
                          : SemanticIntermediate::Mode::kContinuous);
        std::copy(recon.pixels.begin(), recon.pixels.end(), recon_out);
    });
}

cs_status cs_ae_reconstruct(const cs_model* autoencoder, const float* image, int h, int w,
                            float* recon_out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(autoencoder), "autoencoder");
        require(reinterpret_cast<const char*>(image), "image");
        require(reinterpret_cast<const char*>(recon_out), "recon_out");
        const auto& ae = model_as<models::ConvAutoencoder<float>>(autoencoder, "autoencoder");
        const auto recon = baseline::ae_reconstruct(ae, image_from(image, h, w));
        std::copy(recon.pixels.begin(), recon.pixels.end(), recon_out);
    });
}

cs_status cs_residual(const float* image, const float* recon, size_t count, float* out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(image), "image");
        require(reinterpret_cast<const char*>(recon), "recon");
        require(reinterpret_cast<const char*>(out), "out");
        for (size_t i = 0; i < count; ++i) out[i] = std::abs(image[i] - recon[i]);
    });
}

cs_status cs_auprc(const float* scores, const uint8_t* labels, size_t count, double* out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(scores), "scores");
        require(reinterpret_cast<const char*>(labels), "labels");
        require(reinterpret_cast<const char*>(out), "out");
        *out = metrics::auprc(scored_from(scores, labels, count));
    });
}

cs_status cs_best_dice(const float* scores, const uint8_t* labels, size_t count, double* dice_out,
                       double* threshold_out) {
    return guarded([&] {
        require(reinterpret_cast<const char*>(scores), "scores");
        require(reinterpret_cast<const char*>(labels), "labels");
        require(reinterpret_cast<const char*>(dice_out), "dice_out");
        require(reinterpret_cast<const char*>(threshold_out), "threshold_out");
        const auto bd = metrics::best_dice(scored_from(scores, labels, count));
        *dice_out = bd.dice;
        *threshold_out = bd.threshold;
    });
}

}  // extern "C"
