#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclesem/common.hpp"
#include "cyclesem/dataio.hpp"

// Pixel-pooled ranking metrics. Both metrics depend on score order only, so
// any strictly increasing rescoring leaves them unchanged.
namespace cyclesem::metrics {

struct ScoredPixels {
    std::vector<float> scores;
    std::vector<uint8_t> labels;  // 1 = lesion
    std::string provenance;       // "<split>: id0,id1,..."

    size_t positives() const {
        size_t n = 0;
        for (uint8_t l : labels) n += l != 0;
        return n;
    }
};

// Average-precision step sum over descending unique thresholds; equal scores
// collapse into one step. Throws InvalidArgument when only one class is
// present.
double auprc(const ScoredPixels& sp);

struct BestDice {
    double dice = 0.0;
    double threshold = 0.0;
};

// Greedy search of DICE(t) over candidate thresholds: all unique score values
// when there are <= 10,000 of them, otherwise 1,001 evenly spaced quantiles.
// Prediction rule is score >= t. Returns the max and its lowest achieving
// threshold. Throws InvalidArgument when there are no positive labels.
BestDice best_dice(const ScoredPixels& sp);

// Concatenates residual scores + mask labels in record order. Every record
// must carry a mask.
ScoredPixels pool_scores(const std::vector<data::ImageSlice>& residuals,
                         const std::vector<const data::LesionMask*>& masks,
                         const std::vector<std::string>& ids, const std::string& split);

struct EvalReport {
    double auprc = 0.0;
    double best_dice = 0.0;
    double best_threshold = 0.0;
    uint64_t pixels_total = 0;
    uint64_t pixels_positive = 0;
    uint64_t pixels_negative = 0;
    std::string tag;
    std::string split;
    std::string config_fingerprint;
};

// Stable serializations; the CSV column order is part of the interface:
// tag,split,auprc,best_dice,best_threshold,pixels_total,pixels_positive,
// pixels_negative,config_fingerprint
std::string to_json(const EvalReport& r);
std::string csv_header();
std::string to_csv_row(const EvalReport& r);

}  // namespace cyclesem::metrics
