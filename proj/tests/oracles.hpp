#pragma once

// Test-only oracles. These are deliberately naive O(n^2) reimplementations,
// independent of the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

namespace oracles {

// AP = sum over descending unique thresholds of (R_k - R_{k-1}) * P_k,
// with every count recomputed from scratch.
inline double average_precision(const std::vector<float>& scores,
                                const std::vector<uint8_t>& labels) {
    std::set<float, std::greater<float>> thresholds(scores.begin(), scores.end());
    size_t P = 0;
    for (uint8_t l : labels) P += l != 0;
    double ap = 0.0, r_prev = 0.0;
    for (float t : thresholds) {
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i]) ++tp; else ++fp;
            }
        }
        const double recall = static_cast<double>(tp) / P;
        const double precision = static_cast<double>(tp) / (tp + fp);
        ap += (recall - r_prev) * precision;
        r_prev = recall;
    }
    return ap;
}

struct OracleDice {
    double dice;
    double threshold;
};

// Exhaustive sweep over every unique score value (prediction: score >= t),
// keeping the lowest threshold achieving the maximum.
inline OracleDice exhaustive_best_dice(const std::vector<float>& scores,
                                       const std::vector<uint8_t>& labels) {
    std::set<float> thresholds(scores.begin(), scores.end());
    size_t P = 0;
    for (uint8_t l : labels) P += l != 0;
    OracleDice best{-1.0, 0.0};
    for (float t : thresholds) {  // ascending
        size_t tp = 0, fp = 0;
        for (size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i]) ++tp; else ++fp;
            }
        }
        const size_t fn = P - tp;
        const double dice = (2.0 * tp) / (2.0 * tp + fp + fn);
        if (dice > best.dice) best = {dice, t};
    }
    return best;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Central finite difference of a scalar function at x with step h.
template <typename F>
double central_diff(F&& f, double* x, double h = 1e-3) {
    const double x0 = *x;
    *x = x0 + h;
    const double fp = f();
    *x = x0 - h;
    const double fm = f();
    *x = x0;
    return (fp - fm) / (2.0 * h);
}

// True when the finite difference at step h agrees with a much smaller step.
// Near a kink (|.| or a relu crease inside [x-h, x+h]) the estimates drift
// apart and the coordinate must be excluded from gradient checks. The
// agreement threshold sits well below the 1e-4 check tolerance so that any
// kink contamination large enough to fail the check is also large enough to
// trip the filter.
template <typename F>
bool fd_is_smooth(F&& f, double* x, double* fd_out, double h = 1e-3) {
    const double fd1 = central_diff(f, x, h);
    const double fd2 = central_diff(f, x, h / 16.0);
    *fd_out = fd1;
    return std::abs(fd1 - fd2) <= 3e-5 * std::max({1.0, std::abs(fd1), std::abs(fd2)});
}

}  // namespace oracles
