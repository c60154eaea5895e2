#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cyclesem/dataio.hpp"
#include "cyclesem/prng.hpp"

using namespace cyclesem;
using namespace cyclesem::data;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("cyclesem_dataio_" +
                                                  std::to_string(CounterRng(::getpid()).next_u64() % 100000))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

Record make_record(const std::string& id, int res, uint64_t seed, bool with_mask,
                   bool lesioned = false) {
    CounterRng rng(seed);
    Record r;
    r.id = id;
    r.image.height = r.image.width = res;
    r.image.pixels.resize(size_t(res) * res);
    for (auto& p : r.image.pixels) p = static_cast<float>(rng.uniform());
    r.labels.height = r.labels.width = res;
    r.labels.num_classes = kNumClasses;
    r.labels.probs.assign(size_t(kNumClasses) * res * res, 0.f);
    r.labels.onehot.assign(size_t(kNumClasses) * res * res, 0.f);
    const size_t hw = size_t(res) * res;
    for (size_t p = 0; p < hw; ++p) {
        const int cls = static_cast<int>(rng.below(kNumClasses));
        r.labels.onehot[cls * hw + p] = 1.f;
        for (int c = 0; c < kNumClasses; ++c)
            r.labels.probs[c * hw + p] = c == cls ? 0.7f : 0.1f;
    }
    if (with_mask) {
        r.mask = LesionMask::all_false(res);
        if (lesioned) r.mask->mask[hw / 2] = 1;
    }
    return r;
}

SplitInfo info_for(const char* split, int res) {
    SplitInfo i;
    i.split = split;
    i.resolution = res;
    i.num_classes = kNumClasses;
    i.generator_seed = 1;
    i.lesion_style = "none";
    return i;
}

}  // namespace

TEST_CASE("write then read round-trips bit-for-bit") {
    TempDir tmp;
    const Record orig = make_record("test000000", 64, 5, true, true);
    DatasetWriter w(tmp.str(), info_for("test", 64));
    w.write_record(orig);
    w.finalize();

    const auto back = load_split(tmp.str(), "test");
    REQUIRE(back.size() == 1);
    const Record& r = back[0];
    CHECK(r.id == orig.id);
    REQUIRE(r.image.pixels.size() == orig.image.pixels.size());
    CHECK(std::memcmp(r.image.pixels.data(), orig.image.pixels.data(),
                      orig.image.pixels.size() * 4) == 0);
    CHECK(std::memcmp(r.labels.probs.data(), orig.labels.probs.data(),
                      orig.labels.probs.size() * 4) == 0);
    CHECK(std::memcmp(r.labels.onehot.data(), orig.labels.onehot.data(),
                      orig.labels.onehot.size() * 4) == 0);
    REQUIRE(r.mask.has_value());
    CHECK(r.mask->mask == orig.mask->mask);
}

TEST_CASE("dimension mismatch between image and labels is rejected") {
    TempDir tmp;
    Record r = make_record("test000000", 64, 5, true);
    const Record small = make_record("x", 32, 6, true);
    r.labels = small.labels;
    DatasetWriter w(tmp.str(), info_for("test", 64));
    CHECK_THROWS_AS(w.write_record(r), InvalidArgument);
}

TEST_CASE("training split rejects records with lesion pixels") {
    TempDir tmp;
    const Record r = make_record("train000000", 32, 5, true, /*lesioned=*/true);
    DatasetWriter w(tmp.str(), info_for("train", 32));
    CHECK_THROWS_AS(w.write_record(r), InvalidArgument);

    // all-false masks are fine on a training split
    const Record ok = make_record("train000001", 32, 6, true, false);
    CHECK_NOTHROW(w.write_record(ok));
}

TEST_CASE("duplicate ids are rejected") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    w.write_record(make_record("test000000", 32, 5, true));
    CHECK_THROWS_AS(w.write_record(make_record("test000000", 32, 6, true)), InvalidArgument);
}

TEST_CASE("records come back in manifest order") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    for (const char* id : {"test00000a", "test00000b", "test00000c"})
        w.write_record(make_record(id, 32, std::strlen(id), true));
    w.finalize();
    const auto recs = load_split(tmp.str(), "test");
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "test00000a");
    CHECK(recs[1].id == "test00000b");
    CHECK(recs[2].id == "test00000c");
}

TEST_CASE("loading the same manifest twice yields identical sequences") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    for (int i = 0; i < 4; ++i)
        w.write_record(make_record("test00000" + std::to_string(i), 32, i + 1, true, i % 2));
    w.finalize();
    const auto a = load_split(tmp.str(), "test");
    const auto b = load_split(tmp.str(), "test");
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(std::memcmp(a[i].image.pixels.data(), b[i].image.pixels.data(),
                          a[i].image.pixels.size() * 4) == 0);
    }
}

TEST_CASE("missing record file raises an error") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    w.write_record(make_record("test000000", 32, 5, true));
    w.finalize();
    fs::remove(tmp.path / "test" / "test000000.img");
    CHECK_THROWS_AS(load_split(tmp.str(), "test"), IoError);
}

TEST_CASE("corrupted record file fails the checksum") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    w.write_record(make_record("test000000", 32, 5, true));
    w.finalize();
    {
        std::fstream f(tmp.path / "test" / "test000000.img",
                       std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(10);
        const char junk = 0x5a;
        f.write(&junk, 1);
    }
    CHECK_THROWS_WITH_AS(load_split(tmp.str(), "test"),
                         doctest::Contains("checksum"), IoError);
}

TEST_CASE("empty split loads as an empty sequence") {
    TempDir tmp;
    DatasetWriter w(tmp.str(), info_for("test", 32));
    w.finalize();
    CHECK(load_split(tmp.str(), "test").empty());
}

TEST_CASE("unknown split raises MissingArtifact") {
    TempDir tmp;
    CHECK_THROWS_AS(load_split(tmp.str(), "nope"), MissingArtifact);
}
