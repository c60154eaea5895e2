#pragma once

#include <string>

#include "cyclesem/baseline.hpp"
#include "cyclesem/metrics.hpp"
#include "cyclesem/phantom.hpp"
#include "cyclesem/segmod.hpp"
#include "cyclesem/synthmod.hpp"

// Experiment orchestration behind the CLI subcommands. Every step reads its
// section of one experiment config, writes artifacts under the output
// directory (atomically, idempotent for identical inputs), and leaves a
// provenance.json holding the resolved semantic config, its fingerprint and
// the code version. Execution details (thread count, output root) are
// deliberately excluded from provenance and fingerprints.
namespace cyclesem::pipeline {

struct ExperimentConfig {
    uint64_t seed = 7;
    std::string out_dir = "out";
    std::string mode = "continuous";  // semantic intermediate for infer
    int threads = 0;                  // 0 = hardware concurrency
    phantom::PhantomConfig phantom;
    seg::SegTrainConfig seg;
    synth::SynthTrainConfig synth;
    baseline::AeTrainConfig ae;
};

// Strict parse: unknown fields, type errors and range violations raise
// ConfigError whose message starts with the field path. Section seeds default
// to the global seed; out_dir defaults to $CYCLESEM_OUT or "out".
ExperimentConfig parse_config_json(const std::string& text);

// Semantic fields only, stable key order; basis of the config fingerprint.
std::string canonical_config_json(const ExperimentConfig& cfg);
std::string config_fingerprint(const ExperimentConfig& cfg);

std::string data_dir(const ExperimentConfig& cfg);

void gen_data(const ExperimentConfig& cfg);
void train_seg(const ExperimentConfig& cfg);
void train_synth(const ExperimentConfig& cfg);
void train_ae(const ExperimentConfig& cfg);

// model: "cycle" | "ae"; mode: "continuous" | "discrete" (ignored for ae).
// Writes residuals/<tag>/<id>.res and .rec plus an index.
void infer(const ExperimentConfig& cfg, const std::string& model, const std::string& mode,
           const std::string& data_dir, const std::string& split, const std::string& tag,
           bool median_filter = false);

metrics::EvalReport evaluate(const ExperimentConfig& cfg, const std::string& tag,
                             const std::string& data_dir, const std::string& split);

// Continuous vs discrete on the same trained checkpoints; writes
// ablation/ablation.csv with exactly the rows {continuous, discrete}.
void ablation(const ExperimentConfig& cfg, const std::string& data_dir, const std::string& split);

// Image grids (input | reconstruction | residual | mask) as 8-bit PGM, a
// per-slice CSV, and the class-posterior diagnostic.
void report(const ExperimentConfig& cfg, const std::string& tag, const std::string& data_dir,
            const std::string& split, int max_rows = 8);

}  // namespace cyclesem::pipeline
