#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <unistd.h>

#include "cyclesem/parallel.hpp"
#include "cyclesem/phantom.hpp"

using namespace cyclesem;
using namespace cyclesem::data;
using namespace cyclesem::phantom;

namespace {

namespace fs = std::filesystem;

PhantomConfig small_cfg() {
    PhantomConfig cfg;
    cfg.seed = 11;
    cfg.resolution = 32;
    cfg.num_healthy_train = 10;
    cfg.num_test = 4;
    cfg.lesion_fraction = 0.5;
    return cfg;
}

std::vector<unsigned char> slurp_dir(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<unsigned char> all;
    for (const auto& f : files) {
        const std::string rel = fs::relative(f, root).string();
        all.insert(all.end(), rel.begin(), rel.end());
        const auto bytes = read_file(f.string());
        all.insert(all.end(), bytes.begin(), bytes.end());
    }
    return all;
}

}  // namespace

TEST_CASE("generate_healthy is bit-deterministic in (seed, index)") {
    const auto cfg = small_cfg();
    const auto [img1, lbl1] = generate_healthy(cfg, 3);
    const auto [img2, lbl2] = generate_healthy(cfg, 3);
    CHECK(std::memcmp(img1.pixels.data(), img2.pixels.data(), img1.pixels.size() * 4) == 0);
    CHECK(std::memcmp(lbl1.probs.data(), lbl2.probs.data(), lbl1.probs.size() * 4) == 0);
    CHECK(std::memcmp(lbl1.onehot.data(), lbl2.onehot.data(), lbl1.onehot.size() * 4) == 0);

    const auto [img3, lbl3] = generate_healthy(cfg, 4);
    CHECK(std::memcmp(img1.pixels.data(), img3.pixels.data(), img1.pixels.size() * 4) != 0);
}

TEST_CASE("noiseless slices hit the tissue means exactly") {
    auto cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    cfg.resolution = 64;
    for (int index : {0, 1, 2, 9}) {
        const auto [img, lbl] = generate_healthy(cfg, index);
        const size_t hw = size_t(64) * 64;
        size_t wm_pixels = 0;
        for (size_t p = 0; p < hw; ++p) {
            if (lbl.onehot[kWm * hw + p] == 1.f) {
                ++wm_pixels;
                CHECK(img.pixels[p] == static_cast<float>(cfg.mean_wm));
            }
        }
        CHECK(wm_pixels > 0);
    }
}

TEST_CASE("probability maps are normalized and argmax-consistent") {
    const auto cfg = small_cfg();
    for (int index = 0; index < 20; ++index) {
        const auto [img, lbl] = generate_healthy(cfg, index);
        const size_t hw = size_t(cfg.resolution) * cfg.resolution;
        for (size_t p = 0; p < hw; ++p) {
            double sum = 0.0;
            int argmax = 0, stored = -1;
            float best = -1.f;
            for (int c = 0; c < kNumClasses; ++c) {
                const float v = lbl.probs[c * hw + p];
                CHECK(v >= 0.f);
                sum += v;
                if (v > best) {
                    best = v;
                    argmax = c;
                }
                if (lbl.onehot[c * hw + p] == 1.f) {
                    CHECK(stored == -1);  // exactly one hot entry
                    stored = c;
                }
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(stored == argmax);
        }
        for (float v : img.pixels) {
            CHECK(v >= 0.f);
            CHECK(v <= 1.f);
        }
    }
}

TEST_CASE("tissue intensity ordering WM < GM < CSF holds in aggregate") {
    auto cfg = small_cfg();
    double sums[kNumClasses] = {0, 0, 0, 0};
    size_t counts[kNumClasses] = {0, 0, 0, 0};
    for (int index = 0; index < 120; ++index) {
        const auto [img, lbl] = generate_healthy(cfg, index);
        const size_t hw = size_t(cfg.resolution) * cfg.resolution;
        for (size_t p = 0; p < hw; ++p)
            for (int c = 0; c < kNumClasses; ++c)
                if (lbl.onehot[c * hw + p] == 1.f) {
                    sums[c] += img.pixels[p];
                    ++counts[c];
                }
    }
    for (size_t c = 0; c < kNumClasses; ++c) REQUIRE(counts[c] > 0);
    const double wm = sums[kWm] / counts[kWm];
    const double gm = sums[kGm] / counts[kGm];
    const double csf = sums[kCsf] / counts[kCsf];
    CHECK(wm < gm);
    CHECK(gm < csf);
}

TEST_CASE("lesions are contained in the brain and leave the outside untouched") {
    for (const char* style : {"tumor_like", "stroke_like"}) {
        auto cfg = small_cfg();
        cfg.resolution = 64;
        cfg.lesion_style = style;
        for (int index = 0; index < 10; ++index) {
            const auto [img, lbl] = generate_healthy(cfg, index);
            const auto les = inject_lesion(img, lbl, cfg, index);
            const size_t hw = size_t(64) * 64;
            size_t count = 0;
            for (size_t p = 0; p < hw; ++p) {
                if (les.mask.mask[p]) {
                    ++count;
                    CHECK(lbl.onehot[kBackground * hw + p] == 0.f);  // inside the brain
                } else {
                    CHECK(les.image.pixels[p] == img.pixels[p]);  // untouched outside
                }
            }
            CHECK(count > 0);
            // labels must pass through unchanged: lesions carry no supervision
            CHECK(std::memcmp(les.labels.probs.data(), lbl.probs.data(),
                              lbl.probs.size() * 4) == 0);
            CHECK(std::memcmp(les.labels.onehot.data(), lbl.onehot.data(),
                              lbl.onehot.size() * 4) == 0);
        }
    }
}

TEST_CASE("lesion interiors are brighter than white matter across 100 seeds") {
    for (const char* style : {"tumor_like", "stroke_like"}) {
        auto cfg = small_cfg();
        cfg.resolution = 64;
        cfg.lesion_style = style;
        int brighter = 0, total = 0;
        for (uint64_t seed = 100; seed < 200; ++seed) {
            cfg.seed = seed;
            const auto [img, lbl] = generate_healthy(cfg, 0);
            const auto les = inject_lesion(img, lbl, cfg, 0);
            const size_t hw = size_t(64) * 64;
            double lesion_sum = 0, wm_sum = 0;
            size_t lesion_n = 0, wm_n = 0;
            for (size_t p = 0; p < hw; ++p) {
                if (les.mask.mask[p]) {
                    lesion_sum += les.image.pixels[p];
                    ++lesion_n;
                } else if (lbl.onehot[kWm * hw + p] == 1.f) {
                    wm_sum += img.pixels[p];
                    ++wm_n;
                }
            }
            REQUIRE(lesion_n > 0);
            REQUIRE(wm_n > 0);
            ++total;
            brighter += lesion_sum / lesion_n > wm_sum / wm_n;
        }
        CHECK(brighter == total);
    }
}

TEST_CASE("build_dataset honors the lesion fraction exactly") {
    namespace fs = std::filesystem;
    const auto root = fs::temp_directory_path() / ("cyclesem_phantom_" + std::to_string(getpid()));
    fs::remove_all(root);
    auto cfg = small_cfg();  // train=10, test=4, fraction=0.5
    build_dataset(cfg, root.string());

    const auto train = load_split(root.string(), "train");
    const auto test = load_split(root.string(), "test");
    CHECK(train.size() == 10);
    CHECK(test.size() == 4);
    int lesioned = 0;
    for (const auto& r : test) {
        REQUIRE(r.mask.has_value());
        lesioned += r.mask->any();
    }
    CHECK(lesioned == 2);
    for (const auto& r : train) CHECK(!r.mask.has_value());  // train split stores no masks
    fs::remove_all(root);
}

TEST_CASE("lesion fraction 0 leaves every test mask empty") {
    namespace fs = std::filesystem;
    const auto root = fs::temp_directory_path() / ("cyclesem_phantom0_" + std::to_string(getpid()));
    fs::remove_all(root);
    auto cfg = small_cfg();
    cfg.lesion_fraction = 0.0;
    build_dataset(cfg, root.string());
    for (const auto& r : load_split(root.string(), "test")) {
        REQUIRE(r.mask.has_value());
        CHECK(!r.mask->any());
    }
    fs::remove_all(root);
}

TEST_CASE("dataset bytes are a pure function of the config, for any worker count") {
    namespace fs = std::filesystem;
    const auto root_a = fs::temp_directory_path() / ("cyclesem_det_a_" + std::to_string(getpid()));
    const auto root_b = fs::temp_directory_path() / ("cyclesem_det_b_" + std::to_string(getpid()));
    fs::remove_all(root_a);
    fs::remove_all(root_b);
    const auto cfg = small_cfg();
    set_num_threads(1);
    build_dataset(cfg, root_a.string());
    set_num_threads(3);
    build_dataset(cfg, root_b.string());
    set_num_threads(0);
    CHECK(slurp_dir(root_a) == slurp_dir(root_b));
    fs::remove_all(root_a);
    fs::remove_all(root_b);
}

TEST_CASE("invalid configs are rejected with the field path") {
    auto cfg = small_cfg();
    cfg.noise_sigma = -1;
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("phantom.noise_sigma"), ConfigError);
    cfg = small_cfg();
    cfg.mean_csf = 1.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_cfg();
    cfg.mean_wm = 0.9;  // breaks WM < GM < CSF
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_cfg();
    cfg.lesion_style = "banana";
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_cfg();
    cfg.lesion_fraction = 1.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}
