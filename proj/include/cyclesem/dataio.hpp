#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyclesem/common.hpp"

// On-disk dataset: <root>/<split>/manifest.json plus, per record id,
// <id>.img / <id>.lbl / <id>.onehot (raw little-endian float32 planes,
// row-major) and <id>.msk (bytes 0/1). Shapes and FNV-1a checksums are
// recorded in the manifest; reads verify both, so round-trips are bit-exact
// by contract.
namespace cyclesem::data {

// One 2-D grayscale slice, values in [0,1].
struct ImageSlice {
    int height = 0, width = 0;
    std::vector<float> pixels;  // row-major

    static ImageSlice zeros(int res) { return {res, res, std::vector<float>(size_t(res) * res, 0.f)}; }
};

// Per-pixel tissue annotation, probabilistic and one-hot forms, planar CxHxW.
// Class order: 0 background, 1 GM, 2 WM, 3 CSF.
struct TissueLabelMap {
    int height = 0, width = 0, num_classes = 0;
    std::vector<float> probs;
    std::vector<float> onehot;
};

inline constexpr int kBackground = 0;
inline constexpr int kGm = 1;
inline constexpr int kWm = 2;
inline constexpr int kCsf = 3;
inline constexpr int kNumClasses = 4;
inline const char* const kClassNames[kNumClasses] = {"background", "gm", "wm", "csf"};

struct LesionMask {
    int height = 0, width = 0;
    std::vector<uint8_t> mask;  // 0/1

    static LesionMask all_false(int res) { return {res, res, std::vector<uint8_t>(size_t(res) * res, 0)}; }
    bool any() const {
        for (uint8_t m : mask)
            if (m) return true;
        return false;
    }
    size_t count() const {
        size_t n = 0;
        for (uint8_t m : mask) n += m != 0;
        return n;
    }
};

struct Record {
    std::string id;
    ImageSlice image;
    TissueLabelMap labels;
    std::optional<LesionMask> mask;
};

struct FileMeta {
    std::string file;
    std::vector<int> shape;
    std::string fnv64;
};

struct RecordEntry {
    std::string id;
    FileMeta img, lbl, onehot;
    std::optional<FileMeta> msk;
};

struct SplitInfo {
    std::string split;
    int resolution = 0;
    int num_classes = 0;
    uint64_t generator_seed = 0;
    std::string lesion_style;
    std::vector<std::string> ids;          // record order
    std::vector<RecordEntry> entries;      // parallel to ids
};

// Single-writer; write_record streams files, finalize() writes the manifest
// atomically. Splits whose name starts with "train" reject lesioned records;
// splits starting with "test" require a mask on every record.
class DatasetWriter {
  public:
    DatasetWriter(std::string root, SplitInfo info);
    void write_record(const Record& r);
    void finalize();
    const SplitInfo& info() const { return info_; }

  private:
    std::string root_, dir_;
    SplitInfo info_;
    bool finalized_ = false;
};

SplitInfo read_split_info(const std::string& root, const std::string& split);

// Records in manifest order; verifies shapes and checksums. Pure (no state).
std::vector<Record> load_split(const std::string& root, const std::string& split);

Record load_record(const std::string& root, const std::string& split, const SplitInfo& info,
                   const std::string& id);

}  // namespace cyclesem::data
