#include <doctest.h>

#include "cyclesem/models.hpp"
#include "cyclesem/nn.hpp"
#include "cyclesem/prng.hpp"
#include "oracles.hpp"

using namespace cyclesem;
using namespace cyclesem::nn;

namespace {

template <typename T>
Tensor4<T> random_tensor(int n, int c, int h, int w, CounterRng& rng, double lo = -1,
                         double hi = 1) {
    Tensor4<T> t(n, c, h, w);
    for (auto& v : t.v) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

Tensor4<double> random_onehot(int n, int c, int h, int w, CounterRng& rng) {
    Tensor4<double> t(n, c, h, w);
    const size_t hw = static_cast<size_t>(h) * w;
    for (int s = 0; s < n; ++s)
        for (size_t p = 0; p < hw; ++p)
            t.plane(s, static_cast<int>(rng.below(c)))[p] = 1.0;
    return t;
}

size_t param_count(std::vector<Param<double>*> ps) {
    size_t n = 0;
    for (auto* p : ps) n += p->value.size();
    return n;
}

// Generic parameter values for gradient checks. Zero-initialized biases park
// relu pre-activations exactly on the kink (FD sees the two-sided average
// there); random values move every kink to a generic position the smoothness
// filter can detect.
void randomize_params(std::vector<Param<double>*> ps, CounterRng& rng) {
    for (auto* p : ps)
        for (auto& v : p->value.v) v = rng.uniform(-0.4, 0.4);
}

// finite-difference check of accumulated parameter gradients against a scalar
// loss closure; returns the max relative error over all smooth coordinates.
// Coordinates whose step crosses a relu/|.| kink are excluded, and never more
// than 20% of them may be.
template <typename Model, typename LossFn>
double max_param_grad_err(Model& model, LossFn&& loss_and_backward) {
    for (auto* p : model.params()) p->grad.fill(0.0);
    loss_and_backward(/*do_backward=*/true);
    double worst = 0.0;
    size_t total = 0, excluded = 0;
    for (auto* p : model.params()) {
        for (size_t i = 0; i < p->value.size(); ++i) {
            ++total;
            const double analytic = p->grad.v[i];
            double fd = 0.0;
            if (!oracles::fd_is_smooth([&] { return loss_and_backward(false); },
                                       &p->value.v[i], &fd, 1e-3)) {
                ++excluded;
                continue;
            }
            worst = std::max(worst, oracles::rel_err(analytic, fd));
        }
    }
    REQUIRE(excluded * 5 <= total);
    return worst;
}

}  // namespace

TEST_CASE("cross-entropy anchors: perfect, uniform, and the single-pixel value") {
    // perfect prediction
    Tensor4<double> t(1, 4, 1, 1);
    t.v = {1, 0, 0, 0};
    Tensor4<double> p = t;
    CHECK(cross_entropy_loss(p, t) <= 1e-6);

    // uniform prediction over C=4 -> ln 4
    Tensor4<double> u(1, 4, 2, 2);
    u.fill(0.25);
    CounterRng rng(3);
    Tensor4<double> t2 = random_onehot(1, 4, 2, 2, rng);
    CHECK(cross_entropy_loss(u, t2) == doctest::Approx(1.3862943611198906).epsilon(1e-9));

    // single pixel (0.7, 0.1, 0.1, 0.1) vs class 0 -> -ln 0.7
    Tensor4<double> q(1, 4, 1, 1);
    q.v = {0.7, 0.1, 0.1, 0.1};
    CHECK(cross_entropy_loss(q, t) == doctest::Approx(0.35667494393873245).epsilon(1e-9));
}

TEST_CASE("cross-entropy rejects malformed targets and shapes") {
    Tensor4<double> p(1, 4, 1, 1);
    p.fill(0.25);
    Tensor4<double> bad(1, 4, 1, 1);
    bad.v = {0.5, 0.5, 0, 0};  // not one-hot
    CHECK_THROWS_AS(cross_entropy_loss(p, bad), InvalidArgument);
    Tensor4<double> two(1, 4, 1, 1);
    two.v = {1, 1, 0, 0};
    CHECK_THROWS_AS(cross_entropy_loss(p, two), InvalidArgument);
    Tensor4<double> wrong(1, 4, 2, 1);
    CHECK_THROWS_AS(cross_entropy_loss(p, wrong), InvalidArgument);
}

TEST_CASE("adversarial anchors: equilibrium, saturation, and -ln 0.8") {
    Tensor4<double> half(1, 1, 2, 2);
    half.fill(0.5);
    const auto eq = adversarial_losses(half, half);
    CHECK(eq.d_loss == doctest::Approx(1.3862943611198906).epsilon(1e-9));

    Tensor4<double> ones(1, 1, 2, 2), zeros(1, 1, 2, 2);
    ones.fill(1.0);
    zeros.fill(0.0);
    const auto sat = adversarial_losses(ones, zeros);
    CHECK(sat.d_loss == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sat.g_adv_loss == doctest::Approx(16.11809565095832).epsilon(1e-6));  // -ln 1e-7

    Tensor4<double> d8(1, 1, 4, 4);
    d8.fill(0.8);
    CHECK(adversarial_losses(half, d8).g_adv_loss ==
          doctest::Approx(0.2231435513142097).epsilon(1e-9));

    Tensor4<double> nan_t(1, 1, 1, 1);
    nan_t.v = {std::nan("")};
    CHECK_THROWS_AS(adversarial_losses(nan_t, half), InvalidArgument);
}

TEST_CASE("l1 anchors: identity, extremes, and the 2x2 worked example") {
    Tensor4<double> a(1, 1, 2, 2), b(1, 1, 2, 2);
    a.v = {0, 0.5, 0.5, 1};
    CHECK(l1_loss(a, a) == 0.0);
    Tensor4<double> zeros(1, 1, 2, 2), ones(1, 1, 2, 2);
    ones.fill(1.0);
    CHECK(l1_loss(zeros, ones) == doctest::Approx(1.0).epsilon(1e-12));
    b.v = {0.1, 0.5, 0.3, 1};
    CHECK(l1_loss(a, b) == doctest::Approx(0.075).epsilon(1e-9));
    Tensor4<double> wrong(1, 1, 1, 2);
    CHECK_THROWS_AS(l1_loss(a, wrong), InvalidArgument);
}

TEST_CASE("generator objective composes and is linear in l1 with slope lambda") {
    CHECK(generator_objective(0.2, 0.05, 10) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(generator_objective(0.5, 0.33, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(generator_objective(0.2231435513142097, 0.075, 10) ==
          doctest::Approx(0.9731435513142097).epsilon(1e-12));
    for (double lambda : {0.5, 2.0, 10.0}) {
        const double base = generator_objective(0.3, 0.0, lambda);
        const double at1 = generator_objective(0.3, 1.0, lambda);
        const double at2 = generator_objective(0.3, 2.0, lambda);
        CHECK(at1 - base == doctest::Approx(lambda).epsilon(1e-12));
        CHECK(at2 - at1 == doctest::Approx(lambda).epsilon(1e-12));
    }
    CHECK_THROWS_AS(generator_objective(std::nan(""), 0, 1), InvalidArgument);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences at one pixel") {
    CounterRng rng(5);
    Tensor4<double> logits = random_tensor<double>(1, 4, 1, 1, rng);
    Tensor4<double> target(1, 4, 1, 1);
    target.v = {0, 0, 1, 0};
    Tensor4<double> grad;
    softmax_ce_with_logits(logits, target, &grad);
    for (size_t i = 0; i < logits.size(); ++i) {
        const double fd = oracles::central_diff(
            [&] { return softmax_ce_with_logits(logits, target, nullptr); }, &logits.v[i]);
        CHECK(oracles::rel_err(grad.v[i], fd) < 1e-4);
    }
}

TEST_CASE("l1 gradient matches finite differences away from the kink") {
    CounterRng rng(6);
    Tensor4<double> x = random_tensor<double>(1, 1, 3, 3, rng, 0, 1);
    Tensor4<double> xhat = random_tensor<double>(1, 1, 3, 3, rng, 0, 1);
    const Tensor4<double> g = l1_grad_wrt_xhat(x, xhat);
    for (size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x.v[i] - xhat.v[i]) < 1e-4) continue;  // |.| kink exclusion
        const double fd =
            oracles::central_diff([&] { return l1_loss(x, xhat); }, &xhat.v[i]);
        CHECK(oracles::rel_err(g.v[i], fd) < 1e-4);
    }
}

TEST_CASE("adversarial score gradients match finite differences") {
    CounterRng rng(8);
    Tensor4<double> d_real = random_tensor<double>(1, 1, 3, 3, rng, 0.05, 0.95);
    Tensor4<double> d_fake = random_tensor<double>(1, 1, 3, 3, rng, 0.05, 0.95);
    Tensor4<double> g_real, g_fake_d, g_fake_adv;
    adversarial_grads(d_real, d_fake, &g_real, &g_fake_d, &g_fake_adv);
    for (size_t i = 0; i < d_real.size(); ++i) {
        const double fd_r = oracles::central_diff(
            [&] { return adversarial_losses(d_real, d_fake).d_loss; }, &d_real.v[i]);
        CHECK(oracles::rel_err(g_real.v[i], fd_r) < 1e-4);
        const double fd_f = oracles::central_diff(
            [&] { return adversarial_losses(d_real, d_fake).d_loss; }, &d_fake.v[i]);
        CHECK(oracles::rel_err(g_fake_d.v[i], fd_f) < 1e-4);
        const double fd_g = oracles::central_diff(
            [&] { return adversarial_losses(d_real, d_fake).g_adv_loss; }, &d_fake.v[i]);
        CHECK(oracles::rel_err(g_fake_adv.v[i], fd_g) < 1e-4);
    }
}

TEST_CASE("tiny segmentor end-to-end gradient check (<= 500 params)") {
    models::UNetDesc desc{1, 3, 2, 2, 4};
    models::UNet<double> unet(desc, 17);
    CHECK(param_count(unet.params()) <= 500);

    CounterRng rng(18);
    randomize_params(unet.params(), rng);
    const Tensor4<double> x = random_tensor<double>(1, 1, 4, 4, rng, 0, 1);
    const Tensor4<double> t = random_onehot(1, 3, 4, 4, rng);

    const double err = max_param_grad_err(unet, [&](bool do_backward) {
        models::UNet<double>::Ws ws;
        const auto logits = unet.logits_train(x, ws);
        Tensor4<double> dlogits;
        const double loss = softmax_ce_with_logits(logits, t, do_backward ? &dlogits : nullptr);
        if (do_backward) unet.backward(ws, dlogits);
        return loss;
    });
    CHECK(err < 1e-4);
}

TEST_CASE("tiny generator L1 gradient check, target held away from the kink") {
    models::GenDesc desc{3, 2, 4};
    models::Generator<double> gen(desc, 23);
    CounterRng rng(24);
    randomize_params(gen.params(), rng);
    const Tensor4<double> y = random_tensor<double>(1, 3, 4, 4, rng, 0, 1);
    Tensor4<double> x = gen.forward(y);
    for (auto& v : x.v) v = std::min(1.0, v + 0.2);  // keep |x - G(y)| >= ~0.2 everywhere

    const double err = max_param_grad_err(gen, [&](bool do_backward) {
        models::Generator<double>::Ws ws;
        const auto fake = gen.forward_train(y, ws);
        const double loss = l1_loss(x, fake);
        if (do_backward) gen.backward(ws, fake, l1_grad_wrt_xhat(x, fake));
        return loss;
    });
    CHECK(err < 1e-4);
}

TEST_CASE("tiny discriminator adversarial gradient check") {
    models::DiscDesc desc{1, 2, 8};
    models::PatchDiscriminator<double> disc(desc, 29);
    CounterRng rng(30);
    randomize_params(disc.params(), rng);
    const Tensor4<double> x_real = random_tensor<double>(1, 1, 8, 8, rng, 0, 1);
    const Tensor4<double> x_fake = random_tensor<double>(1, 1, 8, 8, rng, 0, 1);

    const double err = max_param_grad_err(disc, [&](bool do_backward) {
        models::PatchDiscriminator<double>::Ws wr, wf;
        const auto s_real = disc.forward_train(x_real, wr);
        const auto s_fake = disc.forward_train(x_fake, wf);
        const double loss = adversarial_losses(s_real, s_fake).d_loss;
        if (do_backward) {
            Tensor4<double> g_real, g_fake;
            adversarial_grads(s_real, s_fake, &g_real, &g_fake, nullptr);
            disc.backward(wr, g_real);
            disc.backward(wf, g_fake);
        }
        return loss;
    });
    CHECK(err < 1e-4);
}

TEST_CASE("tiny autoencoder L1 gradient check") {
    models::AeDesc desc{2, 6, 8};
    models::ConvAutoencoder<double> ae(desc, 31);
    CounterRng rng(32);
    randomize_params(ae.params(), rng);
    const Tensor4<double> x0 = random_tensor<double>(1, 1, 8, 8, rng, 0, 1);
    Tensor4<double> target = ae.forward(x0);
    for (auto& v : target.v) v = std::min(1.0, v + 0.2);

    const double err = max_param_grad_err(ae, [&](bool do_backward) {
        models::ConvAutoencoder<double>::Ws ws;
        const auto xhat = ae.forward_train(x0, ws);
        const double loss = l1_loss(target, xhat);
        if (do_backward) ae.backward(ws, xhat, l1_grad_wrt_xhat(target, xhat));
        return loss;
    });
    CHECK(err < 1e-4);
}

TEST_CASE("unet output is softmax-normalized at the input shape, any divisible size") {
    for (int res : {16, 32}) {
        models::UNetDesc desc{1, 4, 4, 3, res};
        models::UNet<float> unet(desc, 41);
        CounterRng rng(42);
        const Tensor4f x = random_tensor<float>(2, 1, res, res, rng, 0, 1);
        const Tensor4f p = unet.probs(x);
        CHECK(p.n == 2);
        CHECK(p.c == 4);
        CHECK(p.h == res);
        CHECK(p.w == res);
        const size_t hw = static_cast<size_t>(res) * res;
        for (int s = 0; s < 2; ++s)
            for (size_t i = 0; i < hw; ++i) {
                double sum = 0;
                for (int c = 0; c < 4; ++c) {
                    const float v = p.plane(s, c)[i];
                    CHECK(v > 0.f);
                    CHECK(v < 1.f);
                    sum += v;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
            }
    }
}

TEST_CASE("conv forward is independent of batch packing and worker count") {
    models::GenDesc desc{4, 8, 16};
    models::Generator<float> gen(desc, 51);
    CounterRng rng(52);
    const Tensor4f batch = random_tensor<float>(3, 4, 16, 16, rng, 0, 1);
    set_num_threads(1);
    const Tensor4f all1 = gen.forward(batch);
    set_num_threads(4);
    const Tensor4f all4 = gen.forward(batch);
    set_num_threads(0);
    CHECK(all1.v == all4.v);

    // single-sample forward equals its slot in the batched forward, bit-exactly
    Tensor4f one(1, 4, 16, 16);
    std::copy(batch.plane(1, 0), batch.plane(1, 0) + one.size(), one.v.data());
    const Tensor4f y1 = gen.forward(one);
    for (size_t i = 0; i < y1.size(); ++i) CHECK(y1.v[i] == all4.plane(1, 0)[i]);
}
