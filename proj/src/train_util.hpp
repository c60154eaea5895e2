#pragma once

#include <numeric>
#include <vector>

#include "cyclesem/dataio.hpp"
#include "cyclesem/prng.hpp"
#include "cyclesem/tensor.hpp"

// Batch assembly and seeded shuffling shared by the three training loops.
namespace cyclesem::trainutil {

inline std::vector<size_t> shuffled_indices(size_t n, uint64_t seed, uint64_t model_tag,
                                            int epoch) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    CounterRng rng(seed, {kStreamShuffle, model_tag, static_cast<uint64_t>(epoch)});
    for (size_t i = n; i > 1; --i) {
        const size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

inline Tensor4f images_batch(const std::vector<data::Record>& recs,
                             const std::vector<size_t>& idx, size_t b0, size_t b1) {
    const int res = recs[idx[b0]].image.height;
    Tensor4f x(static_cast<int>(b1 - b0), 1, res, res);
    for (size_t k = b0; k < b1; ++k)
        std::copy(recs[idx[k]].image.pixels.begin(), recs[idx[k]].image.pixels.end(),
                  x.plane(static_cast<int>(k - b0), 0));
    return x;
}

inline Tensor4f onehot_batch(const std::vector<data::Record>& recs,
                             const std::vector<size_t>& idx, size_t b0, size_t b1) {
    const auto& l0 = recs[idx[b0]].labels;
    Tensor4f t(static_cast<int>(b1 - b0), l0.num_classes, l0.height, l0.width);
    for (size_t k = b0; k < b1; ++k)
        std::copy(recs[idx[k]].labels.onehot.begin(), recs[idx[k]].labels.onehot.end(),
                  t.plane(static_cast<int>(k - b0), 0));
    return t;
}

inline Tensor4f probs_batch(const std::vector<data::Record>& recs,
                            const std::vector<size_t>& idx, size_t b0, size_t b1) {
    const auto& l0 = recs[idx[b0]].labels;
    Tensor4f t(static_cast<int>(b1 - b0), l0.num_classes, l0.height, l0.width);
    for (size_t k = b0; k < b1; ++k)
        std::copy(recs[idx[k]].labels.probs.begin(), recs[idx[k]].labels.probs.end(),
                  t.plane(static_cast<int>(k - b0), 0));
    return t;
}

}  // namespace cyclesem::trainutil
