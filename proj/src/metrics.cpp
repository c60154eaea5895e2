#include "cyclesem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

namespace cyclesem::metrics {

namespace {

// indices sorted by descending score
std::vector<size_t> order_desc(const ScoredPixels& sp) {
    std::vector<size_t> idx(sp.scores.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return sp.scores[a] > sp.scores[b]; });
    return idx;
}

void check_nonempty(const ScoredPixels& sp) {
    if (sp.scores.size() != sp.labels.size())
        throw InvalidArgument("scored pixels: scores/labels length mismatch");
    if (sp.scores.empty()) throw InvalidArgument("scored pixels: empty");
}

}  // namespace

double auprc(const ScoredPixels& sp) {
    check_nonempty(sp);
    const size_t P = sp.positives();
    const size_t N = sp.scores.size() - P;
    if (P == 0 || N == 0)
        throw InvalidArgument("auprc undefined: input contains a single class");

    const auto idx = order_desc(sp);
    double ap = 0.0, r_prev = 0.0;
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < idx.size()) {
        const float t = sp.scores[idx[i]];
        // consume the whole tie group at this threshold
        while (i < idx.size() && sp.scores[idx[i]] == t) {
            if (sp.labels[idx[i]]) ++tp; else ++fp;
            ++i;
        }
        const double recall = static_cast<double>(tp) / P;
        const double precision = static_cast<double>(tp) / (tp + fp);
        ap += (recall - r_prev) * precision;
        r_prev = recall;
    }
    return ap;
}

BestDice best_dice(const ScoredPixels& sp) {
    check_nonempty(sp);
    const size_t P = sp.positives();
    if (P == 0) throw InvalidArgument("best_dice undefined: no positive labels");

    std::vector<float> uniq = sp.scores;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    std::vector<float> candidates;
    if (uniq.size() <= 10000) {
        candidates = std::move(uniq);
    } else {
        // 1,001 evenly spaced quantiles of the sorted scores
        std::vector<float> sorted = sp.scores;
        std::sort(sorted.begin(), sorted.end());
        candidates.reserve(1001);
        for (int q = 0; q <= 1000; ++q) {
            const size_t pos = static_cast<size_t>(
                std::llround(static_cast<double>(q) * (sorted.size() - 1) / 1000.0));
            candidates.push_back(sorted[pos]);
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }

    // sweep thresholds ascending with cumulative counts: for t = candidate c,
    // predictions are score >= c
    std::vector<float> sorted_scores = sp.scores;
    std::vector<uint8_t> sorted_labels(sp.labels.size());
    {
        const auto idx = order_desc(sp);
        for (size_t k = 0; k < idx.size(); ++k) {
            sorted_scores[k] = sp.scores[idx[k]];
            sorted_labels[k] = sp.labels[idx[k]];
        }
    }
    // prefix over descending scores: tp_desc[k] = positives among the top k
    std::vector<size_t> tp_desc(sorted_scores.size() + 1, 0);
    for (size_t k = 0; k < sorted_scores.size(); ++k)
        tp_desc[k + 1] = tp_desc[k] + (sorted_labels[k] ? 1 : 0);

    BestDice best{-1.0, 0.0};
    for (const float t : candidates) {
        // number of scores >= t (scores sorted descending)
        const auto it = std::lower_bound(sorted_scores.begin(), sorted_scores.end(), t,
                                         [](float s, float th) { return s >= th; });
        const size_t k = static_cast<size_t>(it - sorted_scores.begin());
        const size_t tp = tp_desc[k];
        const size_t fp = k - tp;
        const size_t fn = P - tp;
        const double dice = (2.0 * tp) / (2.0 * tp + fp + fn);
        // ascending candidates + strict > keeps the lowest threshold among ties
        if (dice > best.dice) {
            best.dice = dice;
            best.threshold = t;
        }
    }
    return best;
}

ScoredPixels pool_scores(const std::vector<data::ImageSlice>& residuals,
                         const std::vector<const data::LesionMask*>& masks,
                         const std::vector<std::string>& ids, const std::string& split) {
    if (residuals.size() != masks.size() || residuals.size() != ids.size())
        throw InvalidArgument("pool_scores: inputs must be parallel");
    ScoredPixels sp;
    sp.provenance = split + ":";
    for (size_t i = 0; i < residuals.size(); ++i) {
        if (!masks[i])
            throw MissingArtifact("pool_scores: record " + ids[i] + " has no lesion mask");
        const auto& r = residuals[i];
        const auto& m = *masks[i];
        if (m.height != r.height || m.width != r.width)
            throw InvalidArgument("pool_scores: mask/residual shape mismatch for " + ids[i]);
        for (size_t p = 0; p < r.pixels.size(); ++p) {
            sp.scores.push_back(r.pixels[p]);
            sp.labels.push_back(m.mask[p] ? 1 : 0);
        }
        sp.provenance += (i ? "," : "") + ids[i];
    }
    return sp;
}

std::string to_json(const EvalReport& r) {
    nlohmann::json j{{"auprc", r.auprc},
                     {"best_dice", r.best_dice},
                     {"best_threshold", r.best_threshold},
                     {"pixels", {{"total", r.pixels_total},
                                 {"positive", r.pixels_positive},
                                 {"negative", r.pixels_negative}}},
                     {"tag", r.tag},
                     {"split", r.split},
                     {"config_fingerprint", r.config_fingerprint}};
    return j.dump(2) + "\n";
}

std::string csv_header() {
    return "tag,split,auprc,best_dice,best_threshold,pixels_total,pixels_positive,"
           "pixels_negative,config_fingerprint";
}

std::string to_csv_row(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.9f,%.9f,%.9g,%llu,%llu,%llu,%s", r.tag.c_str(),
                  r.split.c_str(), r.auprc, r.best_dice, r.best_threshold,
                  static_cast<unsigned long long>(r.pixels_total),
                  static_cast<unsigned long long>(r.pixels_positive),
                  static_cast<unsigned long long>(r.pixels_negative),
                  r.config_fingerprint.c_str());
    return buf;
}

}  // namespace cyclesem::metrics
