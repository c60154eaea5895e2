#include "cyclesem/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>

#include "cyclesem/anomaly.hpp"
#include "cyclesem/checkpoint.hpp"
#include "cyclesem/parallel.hpp"

namespace cyclesem::pipeline {

using nlohmann::json;

namespace {

// ---- config parsing ----

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) bad_field(section.empty() ? key : section + "." + key, "unknown field");
    }
}

double num_field(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number()) bad_field(path + "." + key, "must be a number");
    return j.at(key).get<double>();
}

int int_field(const json& j, const std::string& path, const char* key, int def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number_integer()) bad_field(path + "." + key, "must be an integer");
    return j.at(key).get<int>();
}

uint64_t seed_field(const json& j, const std::string& path, const char* key, uint64_t def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer())
        bad_field(path + "." + key, "must be a non-negative integer");
    return j.at(key).get<uint64_t>();
}

std::string str_field(const json& j, const std::string& path, const char* key,
                      const std::string& def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_string()) bad_field(path + "." + key, "must be a string");
    return j.at(key).get<std::string>();
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    check_keys(j, "", {"seed", "out_dir", "mode", "threads", "phantom", "seg", "synth", "ae"});

    ExperimentConfig cfg;
    cfg.seed = seed_field(j, "", "seed", cfg.seed);
    const char* env_out = std::getenv("CYCLESEM_OUT");
    cfg.out_dir = str_field(j, "", "out_dir", env_out ? env_out : "out");
    cfg.mode = str_field(j, "", "mode", cfg.mode);
    if (cfg.mode != "continuous" && cfg.mode != "discrete")
        bad_field("mode", "must be continuous or discrete");
    cfg.threads = int_field(j, "", "threads", 0);
    if (cfg.threads < 0) bad_field("threads", "must be >= 0");

    // section seeds default to the global seed
    cfg.phantom.seed = cfg.seed;
    cfg.seg.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
    cfg.ae.seed = cfg.seed;

    if (j.contains("phantom")) {
        const json& p = j.at("phantom");
        if (!p.is_object()) bad_field("phantom", "must be an object");
        check_keys(p, "phantom",
                   {"seed", "resolution", "num_healthy_train", "num_test", "lesion_fraction",
                    "lesion_style", "noise_sigma", "prob_blur_radius", "tissue_means"});
        auto& c = cfg.phantom;
        c.seed = seed_field(p, "phantom", "seed", c.seed);
        c.resolution = int_field(p, "phantom", "resolution", c.resolution);
        c.num_healthy_train = int_field(p, "phantom", "num_healthy_train", c.num_healthy_train);
        c.num_test = int_field(p, "phantom", "num_test", c.num_test);
        c.lesion_fraction = num_field(p, "phantom", "lesion_fraction", c.lesion_fraction);
        c.lesion_style = str_field(p, "phantom", "lesion_style", c.lesion_style);
        c.noise_sigma = num_field(p, "phantom", "noise_sigma", c.noise_sigma);
        c.prob_blur_radius = num_field(p, "phantom", "prob_blur_radius", c.prob_blur_radius);
        if (p.contains("tissue_means")) {
            const json& m = p.at("tissue_means");
            if (!m.is_object()) bad_field("phantom.tissue_means", "must be an object");
            check_keys(m, "phantom.tissue_means", {"background", "gm", "wm", "csf"});
            c.mean_background = num_field(m, "phantom.tissue_means", "background", c.mean_background);
            c.mean_gm = num_field(m, "phantom.tissue_means", "gm", c.mean_gm);
            c.mean_wm = num_field(m, "phantom.tissue_means", "wm", c.mean_wm);
            c.mean_csf = num_field(m, "phantom.tissue_means", "csf", c.mean_csf);
        }
        phantom::validate(c);
    }
    if (j.contains("seg")) {
        const json& p = j.at("seg");
        if (!p.is_object()) bad_field("seg", "must be an object");
        check_keys(p, "seg",
                   {"seed", "epochs", "learning_rate", "beta1", "beta2", "batch_size",
                    "base_channels", "depth"});
        auto& c = cfg.seg;
        c.seed = seed_field(p, "seg", "seed", c.seed);
        c.epochs = int_field(p, "seg", "epochs", c.epochs);
        c.learning_rate = num_field(p, "seg", "learning_rate", c.learning_rate);
        c.beta1 = num_field(p, "seg", "beta1", c.beta1);
        c.beta2 = num_field(p, "seg", "beta2", c.beta2);
        c.batch_size = int_field(p, "seg", "batch_size", c.batch_size);
        c.base_channels = int_field(p, "seg", "base_channels", c.base_channels);
        c.depth = int_field(p, "seg", "depth", c.depth);
        seg::validate(c);
    }
    if (j.contains("synth")) {
        const json& p = j.at("synth");
        if (!p.is_object()) bad_field("synth", "must be an object");
        check_keys(p, "synth",
                   {"seed", "epochs", "lambda", "learning_rate", "beta1", "beta2", "batch_size",
                    "base_channels"});
        auto& c = cfg.synth;
        c.seed = seed_field(p, "synth", "seed", c.seed);
        c.epochs = int_field(p, "synth", "epochs", c.epochs);
        c.lambda = num_field(p, "synth", "lambda", c.lambda);
        c.learning_rate = num_field(p, "synth", "learning_rate", c.learning_rate);
        c.beta1 = num_field(p, "synth", "beta1", c.beta1);
        c.beta2 = num_field(p, "synth", "beta2", c.beta2);
        c.batch_size = int_field(p, "synth", "batch_size", c.batch_size);
        c.base_channels = int_field(p, "synth", "base_channels", c.base_channels);
        synth::validate(c);
    }
    if (j.contains("ae")) {
        const json& p = j.at("ae");
        if (!p.is_object()) bad_field("ae", "must be an object");
        check_keys(p, "ae",
                   {"seed", "epochs", "learning_rate", "beta1", "beta2", "batch_size",
                    "base_channels", "bottleneck"});
        auto& c = cfg.ae;
        c.seed = seed_field(p, "ae", "seed", c.seed);
        c.epochs = int_field(p, "ae", "epochs", c.epochs);
        c.learning_rate = num_field(p, "ae", "learning_rate", c.learning_rate);
        c.beta1 = num_field(p, "ae", "beta1", c.beta1);
        c.beta2 = num_field(p, "ae", "beta2", c.beta2);
        c.batch_size = int_field(p, "ae", "batch_size", c.batch_size);
        c.base_channels = int_field(p, "ae", "base_channels", c.base_channels);
        c.bottleneck = int_field(p, "ae", "bottleneck", c.bottleneck);
        baseline::validate(c);
    }
    return cfg;
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
    const json j{
        {"seed", cfg.seed},
        {"mode", cfg.mode},
        {"phantom",
         {{"seed", cfg.phantom.seed},
          {"resolution", cfg.phantom.resolution},
          {"num_healthy_train", cfg.phantom.num_healthy_train},
          {"num_test", cfg.phantom.num_test},
          {"lesion_fraction", cfg.phantom.lesion_fraction},
          {"lesion_style", cfg.phantom.lesion_style},
          {"noise_sigma", cfg.phantom.noise_sigma},
          {"prob_blur_radius", cfg.phantom.prob_blur_radius},
          {"tissue_means",
           {{"background", cfg.phantom.mean_background},
            {"gm", cfg.phantom.mean_gm},
            {"wm", cfg.phantom.mean_wm},
            {"csf", cfg.phantom.mean_csf}}}}},
        {"seg",
         {{"seed", cfg.seg.seed},
          {"epochs", cfg.seg.epochs},
          {"learning_rate", cfg.seg.learning_rate},
          {"beta1", cfg.seg.beta1},
          {"beta2", cfg.seg.beta2},
          {"batch_size", cfg.seg.batch_size},
          {"base_channels", cfg.seg.base_channels},
          {"depth", cfg.seg.depth}}},
        {"synth",
         {{"seed", cfg.synth.seed},
          {"epochs", cfg.synth.epochs},
          {"lambda", cfg.synth.lambda},
          {"learning_rate", cfg.synth.learning_rate},
          {"beta1", cfg.synth.beta1},
          {"beta2", cfg.synth.beta2},
          {"batch_size", cfg.synth.batch_size},
          {"base_channels", cfg.synth.base_channels}}},
        {"ae",
         {{"seed", cfg.ae.seed},
          {"epochs", cfg.ae.epochs},
          {"learning_rate", cfg.ae.learning_rate},
          {"beta1", cfg.ae.beta1},
          {"beta2", cfg.ae.beta2},
          {"batch_size", cfg.ae.batch_size},
          {"base_channels", cfg.ae.base_channels},
          {"bottleneck", cfg.ae.bottleneck}}}};
    return j.dump(2) + "\n";
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
    return to_hex(fnv1a64(canonical_config_json(cfg)));
}

std::string data_dir(const ExperimentConfig& cfg) { return cfg.out_dir + "/data"; }

namespace {

void write_provenance(const std::string& dir, const std::string& command,
                      const ExperimentConfig& cfg) {
    const json j{{"tool", "cyclesem"},
                 {"version", kVersion},
                 {"command", command},
                 {"config", json::parse(canonical_config_json(cfg))},
                 {"config_fingerprint", config_fingerprint(cfg)}};
    write_file_atomic(dir + "/provenance.json", j.dump(2) + "\n");
}

std::string checkpoint_prefix(const ExperimentConfig& cfg, const std::string& name) {
    return cfg.out_dir + "/checkpoints/" + name;
}

void require_checkpoint(const std::string& prefix, const std::string& producer) {
    if (!file_exists(prefix + ".bin") || !file_exists(prefix + ".json"))
        throw MissingArtifact("checkpoint not found: " + prefix + ".bin (run " + producer +
                              " first)");
}

std::vector<data::Record> load_train_records(const ExperimentConfig& cfg) {
    const std::string droot = data_dir(cfg);
    if (!file_exists(droot + "/train/manifest.json"))
        throw MissingArtifact("training data not found: " + droot +
                              "/train/manifest.json (run gen-data first)");
    return data::load_split(droot, "train");
}

void write_float_image(const std::string& path, const data::ImageSlice& img) {
    const auto bytes = floats_to_le_bytes(img.pixels.data(), img.pixels.size());
    write_file_atomic(path, bytes.data(), bytes.size());
}

data::ImageSlice read_float_image(const std::string& path, int res) {
    data::ImageSlice img;
    img.height = img.width = res;
    img.pixels = le_bytes_to_floats(read_file(path));
    if (img.pixels.size() != static_cast<size_t>(res) * res)
        throw IoError("float image has wrong size: " + path);
    return img;
}

// 8-bit grayscale PGM (binary P5).
void write_pgm(const std::string& path, const std::vector<float>& pixels, int h, int w) {
    std::vector<unsigned char> out;
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", w, h);
    out.insert(out.end(), header, header + n);
    for (float v : pixels)
        out.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f)));
    write_file_atomic(path, out.data(), out.size());
}

}  // namespace

void gen_data(const ExperimentConfig& cfg) {
    set_num_threads(cfg.threads);
    phantom::validate(cfg.phantom);
    const std::string droot = data_dir(cfg);
    phantom::build_dataset(cfg.phantom, droot);
    write_provenance(droot, "gen-data", cfg);
    std::fprintf(stderr, "[gen-data] wrote %s (train=%d test=%d)\n", droot.c_str(),
                 cfg.phantom.num_healthy_train, cfg.phantom.num_test);
}

void train_seg(const ExperimentConfig& cfg) {
    set_num_threads(cfg.threads);
    const auto records = load_train_records(cfg);
    const std::string ckdir = cfg.out_dir + "/checkpoints";
    ensure_dir(ckdir);
    auto result = seg::train_segmentor(records, cfg.seg, ckdir);
    const json cfg_json = json::parse(canonical_config_json(cfg)).at("seg");
    ckpt::save_segmentor(checkpoint_prefix(cfg, "seg"), result.model, cfg_json, cfg.seg.epochs,
                         {{"ce", result.epoch_ce}});
    write_provenance(ckdir, "train-seg", cfg);
}

void train_synth(const ExperimentConfig& cfg) {
    set_num_threads(cfg.threads);
    const auto records = load_train_records(cfg);
    const std::string ckdir = cfg.out_dir + "/checkpoints";
    ensure_dir(ckdir);
    auto result = synth::train_synthesizer(records, cfg.synth, ckdir);
    const json cfg_json = json::parse(canonical_config_json(cfg)).at("synth");
    const ckpt::Curves curves{{"l1", result.epoch_l1},
                              {"d_loss", result.epoch_d_loss},
                              {"g_adv", result.epoch_g_adv},
                              {"g_obj", result.epoch_g_obj}};
    ckpt::save_generator(checkpoint_prefix(cfg, "gen"), result.gen, cfg_json, cfg.synth.epochs,
                         curves);
    ckpt::save_discriminator(checkpoint_prefix(cfg, "disc"), result.disc, cfg_json,
                             cfg.synth.epochs, curves);
    write_provenance(ckdir, "train-synth", cfg);
}

void train_ae(const ExperimentConfig& cfg) {
    set_num_threads(cfg.threads);
    const auto records = load_train_records(cfg);
    const std::string ckdir = cfg.out_dir + "/checkpoints";
    ensure_dir(ckdir);
    auto result = baseline::train_ae(records, cfg.ae, ckdir);
    const json cfg_json = json::parse(canonical_config_json(cfg)).at("ae");
    ckpt::save_autoencoder(checkpoint_prefix(cfg, "ae"), result.model, cfg_json, cfg.ae.epochs,
                           {{"l1", result.epoch_l1}}, result.warnings);
    write_provenance(ckdir, "train-ae", cfg);
}

void infer(const ExperimentConfig& cfg, const std::string& model, const std::string& mode,
           const std::string& data_root, const std::string& split, const std::string& tag,
           bool median_filter) {
    set_num_threads(cfg.threads);
    if (model != "cycle" && model != "ae")
        throw InvalidArgument("infer: model must be cycle or ae");
    if (mode != "continuous" && mode != "discrete")
        throw InvalidArgument("infer: mode must be continuous or discrete");
    if (tag.empty()) throw InvalidArgument("infer: tag must not be empty");

    const auto records = data::load_split(data_root, split);
    const std::string rdir = cfg.out_dir + "/residuals/" + tag;
    ensure_dir(rdir);

    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);

    constexpr size_t kBatch = 16;
    if (model == "cycle") {
        require_checkpoint(checkpoint_prefix(cfg, "seg"), "train-seg");
        require_checkpoint(checkpoint_prefix(cfg, "gen"), "train-synth");
        const auto s = ckpt::load_segmentor(checkpoint_prefix(cfg, "seg"));
        const auto g = ckpt::load_generator(checkpoint_prefix(cfg, "gen"));
        const auto m = mode == "discrete" ? SemanticIntermediate::Mode::kDiscrete
                                          : SemanticIntermediate::Mode::kContinuous;
        for (size_t base = 0; base < records.size(); base += kBatch) {
            const size_t end = std::min(records.size(), base + kBatch);
            std::vector<const data::ImageSlice*> xs;
            for (size_t i = base; i < end; ++i) xs.push_back(&records[i].image);
            const auto recon = anomaly::reconstruct_batch(s, g, xs, m);
            for (size_t i = base; i < end; ++i) {
                data::ImageSlice res = anomaly::residual(records[i].image, recon[i - base]);
                if (median_filter) res = anomaly::median_filter3(res);
                write_float_image(rdir + "/" + records[i].id + ".res", res);
                write_float_image(rdir + "/" + records[i].id + ".rec", recon[i - base]);
            }
        }
    } else {
        require_checkpoint(checkpoint_prefix(cfg, "ae"), "train-ae");
        const auto ae = ckpt::load_autoencoder(checkpoint_prefix(cfg, "ae"));
        for (size_t base = 0; base < records.size(); base += kBatch) {
            const size_t end = std::min(records.size(), base + kBatch);
            std::vector<const data::ImageSlice*> xs;
            for (size_t i = base; i < end; ++i) xs.push_back(&records[i].image);
            const auto recon = baseline::ae_reconstruct_batch(ae, xs);
            for (size_t i = base; i < end; ++i) {
                data::ImageSlice res = anomaly::residual(records[i].image, recon[i - base]);
                if (median_filter) res = anomaly::median_filter3(res);
                write_float_image(rdir + "/" + records[i].id + ".res", res);
                write_float_image(rdir + "/" + records[i].id + ".rec", recon[i - base]);
            }
        }
    }

    const json index{{"split", split},
                     {"ids", ids},
                     {"model", model},
                     {"mode", model == "cycle" ? mode : "n/a"},
                     {"median_filter", median_filter},
                     {"resolution", records.empty() ? 0 : records[0].image.height}};
    write_file_atomic(rdir + "/index.json", index.dump(2) + "\n");
    write_provenance(rdir, "infer", cfg);
    std::fprintf(stderr, "[infer] wrote %zu residual maps to %s\n", records.size(), rdir.c_str());
}

metrics::EvalReport evaluate(const ExperimentConfig& cfg, const std::string& tag,
                             const std::string& data_root, const std::string& split) {
    set_num_threads(cfg.threads);
    const std::string rdir = cfg.out_dir + "/residuals/" + tag;
    if (!file_exists(rdir + "/index.json"))
        throw MissingArtifact("residual directory missing: " + rdir + " (run infer first)");
    json index;
    {
        const auto bytes = read_file(rdir + "/index.json");
        index = json::parse(bytes.begin(), bytes.end());
    }
    const auto ids = index.at("ids").get<std::vector<std::string>>();
    const int res = index.at("resolution").get<int>();

    const auto records = data::load_split(data_root, split);
    if (records.size() != ids.size())
        throw InvalidArgument("evaluate: residual index and split disagree on record count");
    std::vector<data::ImageSlice> residuals;
    std::vector<const data::LesionMask*> masks;
    std::vector<std::string> rec_ids;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].id != ids[i])
            throw InvalidArgument("evaluate: residual index order does not match the manifest");
        residuals.push_back(read_float_image(rdir + "/" + ids[i] + ".res", res));
        masks.push_back(records[i].mask ? &*records[i].mask : nullptr);
        rec_ids.push_back(records[i].id);
    }
    const metrics::ScoredPixels sp = metrics::pool_scores(residuals, masks, rec_ids, split);

    metrics::EvalReport rep;
    rep.auprc = metrics::auprc(sp);
    const auto bd = metrics::best_dice(sp);
    rep.best_dice = bd.dice;
    rep.best_threshold = bd.threshold;
    rep.pixels_total = sp.scores.size();
    rep.pixels_positive = sp.positives();
    rep.pixels_negative = rep.pixels_total - rep.pixels_positive;
    rep.tag = tag;
    rep.split = split;
    rep.config_fingerprint = config_fingerprint(cfg);

    const std::string edir = cfg.out_dir + "/eval";
    ensure_dir(edir);
    write_file_atomic(edir + "/report_" + tag + ".json", metrics::to_json(rep));
    write_file_atomic(edir + "/report_" + tag + ".csv",
                      metrics::csv_header() + "\n" + metrics::to_csv_row(rep) + "\n");
    write_provenance(edir, "eval", cfg);
    std::fprintf(stderr, "[eval] %s: auprc=%.4f best_dice=%.4f (t=%.4g)\n", tag.c_str(), rep.auprc,
                 rep.best_dice, rep.best_threshold);
    return rep;
}

void ablation(const ExperimentConfig& cfg, const std::string& data_root, const std::string& split) {
    // one trained segmentor + one trained generator, two intermediates
    infer(cfg, "cycle", "continuous", data_root, split, "continuous");
    infer(cfg, "cycle", "discrete", data_root, split, "discrete");
    const auto rep_c = evaluate(cfg, "continuous", data_root, split);
    const auto rep_d = evaluate(cfg, "discrete", data_root, split);

    const std::string adir = cfg.out_dir + "/ablation";
    ensure_dir(adir);
    char buf[256];
    std::string csv = "mode,auprc,best_dice\n";
    std::snprintf(buf, sizeof(buf), "continuous,%.9f,%.9f\n", rep_c.auprc, rep_c.best_dice);
    csv += buf;
    std::snprintf(buf, sizeof(buf), "discrete,%.9f,%.9f\n", rep_d.auprc, rep_d.best_dice);
    csv += buf;
    write_file_atomic(adir + "/ablation.csv", csv);
    write_provenance(adir, "ablation", cfg);
}

void report(const ExperimentConfig& cfg, const std::string& tag, const std::string& data_root,
            const std::string& split, int max_rows) {
    set_num_threads(cfg.threads);
    const std::string rdir = cfg.out_dir + "/residuals/" + tag;
    if (!file_exists(rdir + "/index.json"))
        throw MissingArtifact("residual directory missing: " + rdir + " (run infer first)");
    require_checkpoint(checkpoint_prefix(cfg, "seg"), "train-seg");

    const auto records = data::load_split(data_root, split);
    const int res = records.empty() ? 0 : records[0].image.height;
    const std::string odir = cfg.out_dir + "/report/" + tag;
    ensure_dir(odir);

    std::string csv = "id,lesion_pixels,mean_residual_healthy,mean_residual_lesion\n";
    int grids = 0;
    for (const auto& rec : records) {
        const auto resid = read_float_image(rdir + "/" + rec.id + ".res", res);
        double sum_h = 0, sum_l = 0;
        size_t n_h = 0, n_l = 0;
        for (size_t p = 0; p < resid.pixels.size(); ++p) {
            const bool les = rec.mask && rec.mask->mask[p];
            if (les) {
                sum_l += resid.pixels[p];
                ++n_l;
            } else {
                sum_h += resid.pixels[p];
                ++n_h;
            }
        }
        char line[256];
        if (n_l > 0)
            std::snprintf(line, sizeof(line), "%s,%zu,%.6f,%.6f\n", rec.id.c_str(), n_l,
                          sum_h / n_h, sum_l / n_l);
        else
            std::snprintf(line, sizeof(line), "%s,%zu,%.6f,\n", rec.id.c_str(), n_l, sum_h / n_h);
        csv += line;

        if (grids < max_rows) {
            const auto recon = read_float_image(rdir + "/" + rec.id + ".rec", res);
            // horizontal strip: input | reconstruction | residual | mask
            std::vector<float> strip(static_cast<size_t>(res) * res * 4);
            for (int y = 0; y < res; ++y)
                for (int x = 0; x < res; ++x) {
                    const size_t p = static_cast<size_t>(y) * res + x;
                    const size_t row = static_cast<size_t>(y) * res * 4;
                    strip[row + x] = rec.image.pixels[p];
                    strip[row + res + x] = recon.pixels[p];
                    strip[row + 2 * res + x] = resid.pixels[p];
                    strip[row + 3 * res + x] = rec.mask && rec.mask->mask[p] ? 1.f : 0.f;
                }
            write_pgm(odir + "/grid_" + rec.id + ".pgm", strip, res, res * 4);
            ++grids;
        }
    }
    write_file_atomic(odir + "/report.csv", csv);

    const auto s = ckpt::load_segmentor(checkpoint_prefix(cfg, "seg"));
    const auto stats = anomaly::class_posterior_stats(s, records);
    write_file_atomic(odir + "/posterior_stats.json", anomaly::to_json(stats));
    write_provenance(odir, "report", cfg);
    std::fprintf(stderr, "[report] wrote %s (%d grids)\n", odir.c_str(), grids);
}

}  // namespace cyclesem::pipeline
