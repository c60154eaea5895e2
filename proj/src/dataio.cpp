#include "cyclesem/dataio.hpp"

#include <algorithm>
#include <json.hpp>
#include <unordered_set>

namespace cyclesem::data {

using nlohmann::json;

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

FileMeta write_float_plane(const std::string& dir, const std::string& file,
                           const std::vector<float>& v, std::vector<int> shape) {
    const auto bytes = floats_to_le_bytes(v.data(), v.size());
    write_file_atomic(dir + "/" + file, bytes.data(), bytes.size());
    return {file, std::move(shape), to_hex(fnv1a64(bytes.data(), bytes.size()))};
}

FileMeta write_byte_plane(const std::string& dir, const std::string& file,
                          const std::vector<uint8_t>& v, std::vector<int> shape) {
    write_file_atomic(dir + "/" + file, v.data(), v.size());
    return {file, std::move(shape), to_hex(fnv1a64(v.data(), v.size()))};
}

std::vector<unsigned char> read_checked(const std::string& dir, const FileMeta& m,
                                        size_t expected_bytes) {
    const std::string path = dir + "/" + m.file;
    if (!file_exists(path)) throw IoError("record file missing: " + path);
    auto bytes = read_file(path);
    if (bytes.size() != expected_bytes)
        throw IoError("record file has wrong size: " + path);
    if (to_hex(fnv1a64(bytes.data(), bytes.size())) != m.fnv64)
        throw IoError("checksum mismatch: " + path);
    return bytes;
}

json meta_to_json(const FileMeta& m) {
    return json{{"file", m.file}, {"shape", m.shape}, {"fnv64", m.fnv64}};
}

FileMeta meta_from_json(const json& j) {
    FileMeta m;
    m.file = j.at("file").get<std::string>();
    m.shape = j.at("shape").get<std::vector<int>>();
    m.fnv64 = j.at("fnv64").get<std::string>();
    return m;
}

}  // namespace

DatasetWriter::DatasetWriter(std::string root, SplitInfo info)
    : root_(std::move(root)), info_(std::move(info)) {
    if (info_.split.empty()) throw InvalidArgument("dataset split name empty");
    if (info_.resolution <= 0 || info_.num_classes <= 0)
        throw InvalidArgument("dataset resolution/num_classes must be positive");
    info_.ids.clear();
    info_.entries.clear();
    dir_ = root_ + "/" + info_.split;
    ensure_dir(dir_);
}

void DatasetWriter::write_record(const Record& r) {
    if (finalized_) throw InvalidArgument("write_record after finalize");
    if (r.id.empty()) throw InvalidArgument("record id empty");
    const int res = info_.resolution;
    if (r.image.height != res || r.image.width != res)
        throw InvalidArgument("record " + r.id + ": image dimensions do not match split resolution");
    if (r.labels.height != res || r.labels.width != res)
        throw InvalidArgument("record " + r.id + ": label dimensions do not match image");
    if (r.labels.num_classes != info_.num_classes)
        throw InvalidArgument("record " + r.id + ": label class count mismatch");
    if (r.mask && (r.mask->height != res || r.mask->width != res))
        throw InvalidArgument("record " + r.id + ": mask dimensions do not match image");
    for (const auto& id : info_.ids)
        if (id == r.id) throw InvalidArgument("duplicate record id: " + r.id);
    for (float p : r.image.pixels)
        if (!(p >= 0.f && p <= 1.f))
            throw InvalidArgument("record " + r.id + ": image pixel outside [0,1]");
    if (starts_with(info_.split, "train") && r.mask && r.mask->any())
        throw InvalidArgument("record " + r.id + ": training split records must be lesion-free");
    if (starts_with(info_.split, "test") && !r.mask)
        throw InvalidArgument("record " + r.id + ": test split records require a mask");

    RecordEntry e;
    e.id = r.id;
    e.img = write_float_plane(dir_, r.id + ".img", r.image.pixels, {res, res});
    e.lbl = write_float_plane(dir_, r.id + ".lbl", r.labels.probs,
                              {info_.num_classes, res, res});
    e.onehot = write_float_plane(dir_, r.id + ".onehot", r.labels.onehot,
                                 {info_.num_classes, res, res});
    if (r.mask) e.msk = write_byte_plane(dir_, r.id + ".msk", r.mask->mask, {res, res});
    info_.ids.push_back(r.id);
    info_.entries.push_back(std::move(e));
}

void DatasetWriter::finalize() {
    if (finalized_) return;
    json records = json::object();
    for (const auto& e : info_.entries) {
        json rec{{"img", meta_to_json(e.img)},
                 {"lbl", meta_to_json(e.lbl)},
                 {"onehot", meta_to_json(e.onehot)}};
        if (e.msk) rec["msk"] = meta_to_json(*e.msk);
        records[e.id] = std::move(rec);
    }
    const json m{{"format", "cyclesem-dataset-v1"},
                 {"split", info_.split},
                 {"resolution", info_.resolution},
                 {"num_classes", info_.num_classes},
                 {"generator_seed", info_.generator_seed},
                 {"lesion_style", info_.lesion_style},
                 {"ids", info_.ids},
                 {"records", records}};
    write_file_atomic(dir_ + "/manifest.json", m.dump(2) + "\n");
    finalized_ = true;
}

SplitInfo read_split_info(const std::string& root, const std::string& split) {
    const std::string path = root + "/" + split + "/manifest.json";
    if (!file_exists(path))
        throw MissingArtifact("dataset manifest not found: " + path);
    json m;
    try {
        const auto bytes = read_file(path);
        m = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw IoError("manifest parse error: " + path + ": " + e.what());
    }
    try {
        SplitInfo info;
        info.split = m.at("split").get<std::string>();
        info.resolution = m.at("resolution").get<int>();
        info.num_classes = m.at("num_classes").get<int>();
        info.generator_seed = m.at("generator_seed").get<uint64_t>();
        info.lesion_style = m.at("lesion_style").get<std::string>();
        info.ids = m.at("ids").get<std::vector<std::string>>();
        std::unordered_set<std::string> seen;
        const auto& records = m.at("records");
        for (const auto& id : info.ids) {
            if (!seen.insert(id).second) throw IoError("manifest has duplicate id: " + id);
            const auto& rec = records.at(id);
            RecordEntry e;
            e.id = id;
            e.img = meta_from_json(rec.at("img"));
            e.lbl = meta_from_json(rec.at("lbl"));
            e.onehot = meta_from_json(rec.at("onehot"));
            if (rec.contains("msk")) e.msk = meta_from_json(rec.at("msk"));
            info.entries.push_back(std::move(e));
        }
        if (info.split != split)
            throw IoError("manifest split name mismatch: " + info.split + " vs " + split);
        return info;
    } catch (const json::exception& e) {
        throw IoError("manifest field error: " + path + ": " + e.what());
    }
}

Record load_record(const std::string& root, const std::string& split, const SplitInfo& info,
                   const std::string& id) {
    const auto it = std::find(info.ids.begin(), info.ids.end(), id);
    if (it == info.ids.end()) throw InvalidArgument("record id not in manifest: " + id);
    const auto& e = info.entries[static_cast<size_t>(it - info.ids.begin())];
    const std::string dir = root + "/" + split;
    const int res = info.resolution;
    const size_t hw = static_cast<size_t>(res) * res;
    const int C = info.num_classes;

    Record r;
    r.id = id;
    if (e.img.shape != std::vector<int>{res, res}) throw IoError("bad image shape for " + id);
    r.image = {res, res, le_bytes_to_floats(read_checked(dir, e.img, hw * 4))};
    if (e.lbl.shape != std::vector<int>{C, res, res}) throw IoError("bad label shape for " + id);
    r.labels.height = r.labels.width = res;
    r.labels.num_classes = C;
    r.labels.probs = le_bytes_to_floats(read_checked(dir, e.lbl, hw * C * 4));
    if (e.onehot.shape != std::vector<int>{C, res, res})
        throw IoError("bad onehot shape for " + id);
    r.labels.onehot = le_bytes_to_floats(read_checked(dir, e.onehot, hw * C * 4));
    if (e.msk) {
        if (e.msk->shape != std::vector<int>{res, res}) throw IoError("bad mask shape for " + id);
        const auto bytes = read_checked(dir, *e.msk, hw);
        r.mask = LesionMask{res, res, std::vector<uint8_t>(bytes.begin(), bytes.end())};
    }
    return r;
}

std::vector<Record> load_split(const std::string& root, const std::string& split) {
    const SplitInfo info = read_split_info(root, split);
    std::vector<Record> out;
    out.reserve(info.ids.size());
    for (const auto& id : info.ids) out.push_back(load_record(root, split, info, id));
    return out;
}

}  // namespace cyclesem::data
