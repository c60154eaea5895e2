#include <doctest.h>

#include <cstring>

#include "cyclesem/anomaly.hpp"
#include "cyclesem/parallel.hpp"
#include "cyclesem/phantom.hpp"
#include "cyclesem/prng.hpp"
#include "cyclesem/segmod.hpp"
#include "cyclesem/synthmod.hpp"

using namespace cyclesem;
using namespace cyclesem::anomaly;

namespace {

SemanticIntermediate make_sem(std::vector<float> values, int c, int h, int w,
                              SemanticIntermediate::Mode mode) {
    SemanticIntermediate s;
    s.mode = mode;
    s.height = h;
    s.width = w;
    s.num_classes = c;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("discretize takes the argmax with ties to the lowest class") {
    auto s = make_sem({0.1f, 0.7f, 0.1f, 0.1f}, 4, 1, 1, SemanticIntermediate::Mode::kContinuous);
    auto d = discretize(s);
    CHECK(d.mode == SemanticIntermediate::Mode::kDiscrete);
    CHECK(d.values == std::vector<float>{0, 1, 0, 0});

    auto tie = make_sem({0.25f, 0.25f, 0.25f, 0.25f}, 4, 1, 1,
                        SemanticIntermediate::Mode::kContinuous);
    CHECK(discretize(tie).values == std::vector<float>{1, 0, 0, 0});
}

TEST_CASE("discretize is idempotent") {
    CounterRng rng(3);
    std::vector<float> vals(4 * 6 * 6);
    for (auto& v : vals) v = static_cast<float>(rng.uniform());
    const auto s = make_sem(vals, 4, 6, 6, SemanticIntermediate::Mode::kContinuous);
    const auto once = discretize(s);
    const auto twice = discretize(once);
    CHECK(once.values == twice.values);
}

TEST_CASE("residual is |x - xhat|, symmetric, zero iff equal") {
    data::ImageSlice x{1, 2, {0.2f, 0.9f}};
    data::ImageSlice xh{1, 2, {0.5f, 0.4f}};
    const auto r = residual(x, xh);
    CHECK(r.pixels[0] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r.pixels[1] == doctest::Approx(0.5).epsilon(1e-6));
    const auto r2 = residual(xh, x);
    CHECK(r.pixels == r2.pixels);

    const auto rz = residual(x, x);
    for (float v : rz.pixels) CHECK(v == 0.f);

    data::ImageSlice one{1, 1, {1.f}}, zero{1, 1, {0.f}};
    CHECK(residual(one, zero).pixels[0] == 1.f);

    data::ImageSlice wrong{2, 1, {0.f, 0.f}};
    CHECK_THROWS_AS(residual(x, wrong), InvalidArgument);
}

TEST_CASE("cycle reconstruction is deterministic, in range, and thread-count independent") {
    models::UNet<float> s(models::UNetDesc{1, 4, 4, 3, 32}, 61);
    models::Generator<float> g(models::GenDesc{4, 4, 32}, 62);

    phantom::PhantomConfig cfg;
    cfg.resolution = 32;
    const auto [img, lbl] = phantom::generate_healthy(cfg, 0);

    set_num_threads(1);
    const auto a = reconstruct(s, g, img, SemanticIntermediate::Mode::kContinuous);
    set_num_threads(3);
    const auto b = reconstruct(s, g, img, SemanticIntermediate::Mode::kContinuous);
    set_num_threads(0);
    const auto c = reconstruct(s, g, img, SemanticIntermediate::Mode::kContinuous);
    CHECK(a.pixels == b.pixels);
    CHECK(a.pixels == c.pixels);
    for (float v : a.pixels) {
        CHECK(v >= 0.f);
        CHECK(v <= 1.f);
    }

    const auto d = reconstruct(s, g, img, SemanticIntermediate::Mode::kDiscrete);
    CHECK(d.pixels != a.pixels);  // the intermediate really changed
}

TEST_CASE("synthesize clamps arbitrary invalid semantic inputs into [0,1]") {
    models::Generator<float> g(models::GenDesc{4, 4, 16}, 63);
    CounterRng rng(64);
    std::vector<float> garbage(4 * 16 * 16);
    for (auto& v : garbage) v = static_cast<float>(rng.uniform(-20, 20));
    const auto s = make_sem(garbage, 4, 16, 16, SemanticIntermediate::Mode::kContinuous);
    const auto img = synth::synthesize(g, s);
    for (float v : img.pixels) {
        CHECK(v >= 0.f);
        CHECK(v <= 1.f);
    }
}

TEST_CASE("class_posterior_stats: normalized rows, LES only when lesions exist") {
    models::UNet<float> s(models::UNetDesc{1, 4, 4, 3, 32}, 71);
    phantom::PhantomConfig cfg;
    cfg.resolution = 32;
    cfg.seed = 5;

    std::vector<data::Record> recs;
    for (int i = 0; i < 3; ++i) {
        auto [img, lbl] = phantom::generate_healthy(cfg, i);
        data::Record r;
        r.id = "test" + std::to_string(i);
        if (i == 2) {
            auto les = phantom::inject_lesion(img, lbl, cfg, i);
            r.image = std::move(les.image);
            r.labels = std::move(les.labels);
            r.mask = std::move(les.mask);
        } else {
            r.image = std::move(img);
            r.labels = std::move(lbl);
            r.mask = data::LesionMask::all_false(32);
        }
        recs.push_back(std::move(r));
    }

    const auto stats = class_posterior_stats(s, recs);
    REQUIRE(stats.rows.size() == 5);
    bool les_present = false;
    for (const auto& row : stats.rows) {
        if (!row.present) continue;
        double sum = 0;
        for (double v : row.mean_posterior) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
        if (row.name == "les") les_present = true;
    }
    CHECK(les_present);

    // healthy-only split: the LES row is absent
    recs.pop_back();
    const auto healthy = class_posterior_stats(s, recs);
    for (const auto& row : healthy.rows)
        if (row.name == "les") CHECK(!row.present);
    const std::string j = to_json(healthy);
    CHECK(j.find("\"les\"") == std::string::npos);
}

TEST_CASE("median filter is available but separate from the residual contract") {
    data::ImageSlice r{3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}};
    const auto f = median_filter3(r);
    CHECK(f.pixels[4] == 0.f);  // lone spike removed
    const auto raw = residual(r, data::ImageSlice{3, 3, std::vector<float>(9, 0.f)});
    CHECK(raw.pixels[4] == 1.f);  // residual itself stays unfiltered
}
