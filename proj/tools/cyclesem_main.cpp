// cyclesem command-line front end. Talks to the core exclusively through the
// shared library's C API (cyclesem/capi.h); config documents are plain JSON
// assembled here from --config files and --set overrides.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cyclesem/capi.h"

using nlohmann::json;

namespace {

const char* kUsage = R"(cyclesem - image-semantic cycle translation for unsupervised anomaly segmentation

usage: cyclesem <subcommand> [options]

subcommands:
  gen-data     generate the synthetic phantom dataset (train + test splits)
  train-seg    train the tissue segmentor on the train split
  train-synth  train the semantic->image synthesizer (generator + discriminator)
  train-ae     train the autoencoder baseline
  infer        write residual maps for a split (--model cycle|ae, --mode continuous|discrete)
  eval         pool residuals against masks, print and write the EvalReport
  ablation     run continuous vs discrete on shared checkpoints, write ablation.csv
  report       write image grids (input|recon|residual|mask), per-slice CSV, posterior stats

options:
  --config <file>     experiment config JSON (default: built-in defaults)
  --set <path=value>  override a config field, e.g. --set seg.epochs=3 (repeatable)
  --out <dir>         output root (overrides config out_dir and $CYCLESEM_OUT)
  --threads <n>       worker threads (0 = hardware)
  --data-dir <dir>    dataset root for infer/eval/ablation/report (default <out>/data)
  --split <name>      dataset split (default test)
  --tag <name>        residual/eval tag (default: infer mode or "ae")
  --model <m>         infer model: cycle | ae (default cycle)
  --mode <m>          semantic intermediate: continuous | discrete (default from config)
  --median-filter     apply the optional 3x3 median filter to residuals (off by default)
  --rows <n>          report: number of image grids (default 8)
  --help              this message

exit codes: 0 ok, 1 runtime error, 2 unknown subcommand/usage, 3 invalid config
(message names the field), 4 missing prerequisite artifact (message names it).
)";

int fail(cs_status st) {
    std::fprintf(stderr, "error: %s\n", cs_last_error());
    return static_cast<int>(st);
}

bool read_text(const std::string& path, std::string* out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    std::ostringstream ss;
    ss << f.rdbuf();
    *out = ss.str();
    return true;
}

// --set a.b.c=value; value parsed as JSON when possible, else as a string
bool apply_set(json& cfg, const std::string& kv, std::string* err) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
        *err = "--set expects path=value, got: " + kv;
        return false;
    }
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // bare strings like tumor_like
    }
    json* node = &cfg;
    size_t pos = 0;
    for (;;) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) {
            *err = "--set has an empty path segment: " + path;
            return false;
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return true;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

struct Args {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out, data_dir, split, tag, model = "cycle", mode;
    int threads = -1;
    int rows = 8;
    bool median = false;
};

int parse_args(int argc, char** argv, Args* a) {
    for (int i = 2; i < argc; ++i) {
        const std::string f = argv[i];
        auto next = [&](const char* what) -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "error: %s expects a value\n", what);
                std::exit(2);
            }
            return argv[++i];
        };
        if (f == "--config") a->config_path = next("--config");
        else if (f == "--set") a->sets.push_back(next("--set"));
        else if (f == "--out") a->out = next("--out");
        else if (f == "--threads") a->threads = std::atoi(next("--threads"));
        else if (f == "--data-dir") a->data_dir = next("--data-dir");
        else if (f == "--split") a->split = next("--split");
        else if (f == "--tag") a->tag = next("--tag");
        else if (f == "--model") a->model = next("--model");
        else if (f == "--mode") a->mode = next("--mode");
        else if (f == "--median-filter") a->median = true;
        else if (f == "--rows") a->rows = std::atoi(next("--rows"));
        else if (f == "--help" || f == "-h") {
            std::fputs(kUsage, stdout);
            std::exit(0);
        } else {
            std::fprintf(stderr, "error: unknown option: %s\n", f.c_str());
            return 2;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fputs(kUsage, stderr);
        return 2;
    }
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
        std::fputs(kUsage, stdout);
        return 0;
    }
    const char* known[] = {"gen-data", "train-seg", "train-synth", "train-ae",
                           "infer",    "eval",      "ablation",    "report"};
    bool ok = false;
    for (const char* k : known) ok = ok || cmd == k;
    if (!ok) {
        std::fprintf(stderr, "error: unknown subcommand '%s' (see --help)\n", cmd.c_str());
        return 2;
    }

    Args a;
    if (const int rc = parse_args(argc, argv, &a)) return rc;

    json cfg = json::object();
    if (!a.config_path.empty()) {
        std::string text;
        if (!read_text(a.config_path, &text)) {
            std::fprintf(stderr, "error: cannot read config file: %s\n", a.config_path.c_str());
            return 3;
        }
        try {
            cfg = json::parse(text);
        } catch (const json::exception& e) {
            std::fprintf(stderr, "error: config: not valid JSON: %s\n", e.what());
            return 3;
        }
    }
    for (const auto& kv : a.sets) {
        std::string err;
        if (!apply_set(cfg, kv, &err)) {
            std::fprintf(stderr, "error: %s\n", err.c_str());
            return 3;
        }
    }
    if (!a.out.empty()) cfg["out_dir"] = a.out;
    if (a.threads >= 0) cfg["threads"] = a.threads;
    const std::string cfg_text = cfg.dump();

    const char* data_dir = a.data_dir.empty() ? nullptr : a.data_dir.c_str();
    const char* split = a.split.empty() ? nullptr : a.split.c_str();
    const char* mode = a.mode.empty() ? nullptr : a.mode.c_str();

    cs_status st = CS_OK;
    if (cmd == "gen-data") {
        st = cs_gen_data(cfg_text.c_str());
    } else if (cmd == "train-seg") {
        st = cs_train_seg(cfg_text.c_str());
    } else if (cmd == "train-synth") {
        st = cs_train_synth(cfg_text.c_str());
    } else if (cmd == "train-ae") {
        st = cs_train_ae(cfg_text.c_str());
    } else if (cmd == "infer") {
        std::string tag = a.tag;
        if (tag.empty()) tag = a.model == "ae" ? "ae" : (a.mode.empty() ? "continuous" : a.mode);
        st = cs_infer(cfg_text.c_str(), a.model.c_str(), mode, data_dir, split, tag.c_str(),
                      a.median ? 1 : 0);
    } else if (cmd == "eval") {
        std::string tag = a.tag.empty() ? "continuous" : a.tag;
        std::vector<char> buf(8192);
        st = cs_eval(cfg_text.c_str(), tag.c_str(), data_dir, split, buf.data(), buf.size());
        if (st == CS_OK) std::fputs(buf.data(), stdout);
    } else if (cmd == "ablation") {
        st = cs_ablation(cfg_text.c_str(), data_dir, split);
    } else if (cmd == "report") {
        std::string tag = a.tag.empty() ? "continuous" : a.tag;
        st = cs_report(cfg_text.c_str(), tag.c_str(), data_dir, split, a.rows);
    }
    if (st != CS_OK) return fail(st);
    return 0;
}
