#pragma once

#include <vector>

// The semantic intermediate: the segmentor output routed into the
// synthesizer, either as raw per-pixel class probabilities (continuous) or
// as argmax one-hots (discrete).
namespace cyclesem {

struct SemanticIntermediate {
    enum class Mode { kContinuous, kDiscrete };
    Mode mode = Mode::kContinuous;
    int height = 0, width = 0, num_classes = 0;
    std::vector<float> values;  // planar CxHxW
};

}  // namespace cyclesem
