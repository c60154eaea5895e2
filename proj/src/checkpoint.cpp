#include "cyclesem/checkpoint.hpp"

#include <cstring>

namespace cyclesem::ckpt {

using nlohmann::json;

namespace {

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

json desc_json(const models::UNetDesc& d) {
    return {{"in_c", d.in_c}, {"num_classes", d.num_classes}, {"base", d.base},
            {"depth", d.depth}, {"resolution", d.resolution}};
}
json desc_json(const models::GenDesc& d) {
    return {{"num_classes", d.num_classes}, {"base", d.base}, {"resolution", d.resolution}};
}
json desc_json(const models::DiscDesc& d) {
    return {{"in_c", d.in_c}, {"base", d.base}, {"resolution", d.resolution}};
}
json desc_json(const models::AeDesc& d) {
    return {{"base", d.base}, {"bottleneck", d.bottleneck}, {"resolution", d.resolution}};
}

json require_sidecar(const std::string& prefix, const std::string& expected_kind) {
    const json side = load_sidecar(prefix);
    const std::string kind = side.at("kind").get<std::string>();
    if (kind != expected_kind)
        throw InvalidArgument("checkpoint " + prefix + " holds a " + kind + ", expected " +
                              expected_kind);
    return side;
}

}  // namespace

void write_weights(const std::string& path, std::vector<nn::Param<float>*> params) {
    std::vector<unsigned char> out;
    out.insert(out.end(), {'C', 'S', 'W', '1'});
    put_u32(out, static_cast<uint32_t>(params.size()));
    for (const auto* p : params) {
        put_u32(out, static_cast<uint32_t>(p->name.size()));
        out.insert(out.end(), p->name.begin(), p->name.end());
        put_u32(out, static_cast<uint32_t>(p->value.n));
        put_u32(out, static_cast<uint32_t>(p->value.c));
        put_u32(out, static_cast<uint32_t>(p->value.h));
        put_u32(out, static_cast<uint32_t>(p->value.w));
        for (float v : p->value.v) append_f32le(out, v);
    }
    write_file_atomic(path, out.data(), out.size());
}

void read_weights(const std::string& path, std::vector<nn::Param<float>*> params) {
    if (!file_exists(path)) throw MissingArtifact("checkpoint weights not found: " + path);
    const auto bytes = read_file(path);
    size_t pos = 0;
    auto need = [&](size_t n) {
        if (pos + n > bytes.size()) throw IoError("truncated checkpoint: " + path);
    };
    need(8);
    if (std::memcmp(bytes.data(), "CSW1", 4) != 0)
        throw IoError("bad checkpoint magic: " + path);
    pos = 4;
    const uint32_t count = get_u32(bytes.data() + pos);
    pos += 4;

    std::map<std::string, nn::Param<float>*> by_name;
    for (auto* p : params) by_name[p->name] = p;
    size_t filled = 0;
    for (uint32_t t = 0; t < count; ++t) {
        need(4);
        const uint32_t nlen = get_u32(bytes.data() + pos);
        pos += 4;
        need(nlen + 16);
        const std::string name(reinterpret_cast<const char*>(bytes.data() + pos), nlen);
        pos += nlen;
        uint32_t dims[4];
        for (auto& d : dims) {
            d = get_u32(bytes.data() + pos);
            pos += 4;
        }
        const size_t numel = static_cast<size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
        need(numel * 4);
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw IoError("checkpoint tensor unknown to model: " + name);
        auto& val = it->second->value;
        if (val.n != static_cast<int>(dims[0]) || val.c != static_cast<int>(dims[1]) ||
            val.h != static_cast<int>(dims[2]) || val.w != static_cast<int>(dims[3]))
            throw IoError("checkpoint tensor shape mismatch: " + name);
        for (size_t i = 0; i < numel; ++i) val.v[i] = read_f32le(bytes.data() + pos + i * 4);
        pos += numel * 4;
        ++filled;
    }
    if (filled != params.size())
        throw IoError("checkpoint is missing tensors: " + path);
}

void save_sidecar(const std::string& prefix, const std::string& kind, const json& desc,
                  const json& train_config, int epoch, const Curves& curves,
                  const std::vector<std::string>& warnings) {
    json j{{"format", "cyclesem-checkpoint-v1"},
           {"kind", kind},
           {"desc", desc},
           {"train_config", train_config},
           {"epoch", epoch},
           {"curves", curves},
           {"warnings", warnings}};
    write_file_atomic(prefix + ".json", j.dump(2) + "\n");
}

json load_sidecar(const std::string& prefix) {
    const std::string path = prefix + ".json";
    if (!file_exists(path)) throw MissingArtifact("checkpoint sidecar not found: " + path);
    const auto bytes = read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw IoError("checkpoint sidecar parse error: " + path + ": " + e.what());
    }
}

std::string checkpoint_kind(const std::string& prefix) {
    return load_sidecar(prefix).at("kind").get<std::string>();
}

models::UNet<float> load_segmentor(const std::string& prefix) {
    const json side = require_sidecar(prefix, "segmentor");
    const auto& d = side.at("desc");
    models::UNetDesc desc{d.at("in_c").get<int>(), d.at("num_classes").get<int>(),
                          d.at("base").get<int>(), d.at("depth").get<int>(),
                          d.at("resolution").get<int>()};
    models::UNet<float> m(desc, 0);
    read_weights(prefix + ".bin", m.params());
    return m;
}

models::Generator<float> load_generator(const std::string& prefix) {
    const json side = require_sidecar(prefix, "generator");
    const auto& d = side.at("desc");
    models::GenDesc desc{d.at("num_classes").get<int>(), d.at("base").get<int>(),
                         d.at("resolution").get<int>()};
    models::Generator<float> m(desc, 0);
    read_weights(prefix + ".bin", m.params());
    return m;
}

models::PatchDiscriminator<float> load_discriminator(const std::string& prefix) {
    const json side = require_sidecar(prefix, "discriminator");
    const auto& d = side.at("desc");
    models::DiscDesc desc{d.at("in_c").get<int>(), d.at("base").get<int>(),
                          d.at("resolution").get<int>()};
    models::PatchDiscriminator<float> m(desc, 0);
    read_weights(prefix + ".bin", m.params());
    return m;
}

models::ConvAutoencoder<float> load_autoencoder(const std::string& prefix) {
    const json side = require_sidecar(prefix, "autoencoder");
    const auto& d = side.at("desc");
    models::AeDesc desc{d.at("base").get<int>(), d.at("bottleneck").get<int>(),
                        d.at("resolution").get<int>()};
    models::ConvAutoencoder<float> m(desc, 0);
    read_weights(prefix + ".bin", m.params());
    return m;
}

void save_segmentor(const std::string& prefix, models::UNet<float>& m, const json& train_config,
                    int epoch, const Curves& curves) {
    write_weights(prefix + ".bin", m.params());
    save_sidecar(prefix, "segmentor", desc_json(m.desc()), train_config, epoch, curves);
}

void save_generator(const std::string& prefix, models::Generator<float>& m,
                    const json& train_config, int epoch, const Curves& curves) {
    write_weights(prefix + ".bin", m.params());
    save_sidecar(prefix, "generator", desc_json(m.desc()), train_config, epoch, curves);
}

void save_discriminator(const std::string& prefix, models::PatchDiscriminator<float>& m,
                        const json& train_config, int epoch, const Curves& curves) {
    write_weights(prefix + ".bin", m.params());
    save_sidecar(prefix, "discriminator", desc_json(m.desc()), train_config, epoch, curves);
}

void save_autoencoder(const std::string& prefix, models::ConvAutoencoder<float>& m,
                      const json& train_config, int epoch, const Curves& curves,
                      const std::vector<std::string>& warnings) {
    write_weights(prefix + ".bin", m.params());
    save_sidecar(prefix, "autoencoder", desc_json(m.desc()), train_config, epoch, curves, warnings);
}

}  // namespace cyclesem::ckpt
