#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cyclesem/parallel.hpp"
#include "cyclesem/prng.hpp"
#include "cyclesem/tensor.hpp"

// Minimal CNN toolkit: 3x3 convolutions via im2col + Eigen matrix products,
// explicit backward passes, Adam. Everything is deterministic for a fixed
// seed: parallel work is decomposed into fixed-size blocks whose results do
// not depend on the worker count, and no reduction order ever changes.
namespace cyclesem::nn {

inline constexpr double kLogEps = 1e-7;

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using CMapRM = Eigen::Map<const RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

// im2col for k=3, pad=1. oh/ow are the conv output dims.
template <typename T>
void im2col_3x3(const T* x, int c, int h, int w, int stride, T* cols) {
    const int oh = (h - 1) / stride + 1;
    const int ow = (w - 1) / stride + 1;
    for (int ic = 0; ic < c; ++ic) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* row = cols + (static_cast<size_t>(ic) * 9 + ky * 3 + kx) * oh * ow;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - 1;
                    T* dst = row + static_cast<size_t>(oy) * ow;
                    if (iy < 0 || iy >= h) {
                        std::fill(dst, dst + ow, T(0));
                        continue;
                    }
                    const T* src = x + (static_cast<size_t>(ic) * h + iy) * w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - 1;
                        dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_3x3(const T* cols, int c, int h, int w, int stride, T* gx) {
    const int oh = (h - 1) / stride + 1;
    const int ow = (w - 1) / stride + 1;
    for (int ic = 0; ic < c; ++ic) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* row = cols + (static_cast<size_t>(ic) * 9 + ky * 3 + kx) * oh * ow;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    T* dst = gx + (static_cast<size_t>(ic) * h + iy) * w;
                    const T* src = row + static_cast<size_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride + kx - 1;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

template <typename T>
struct Param {
    std::string name;
    Tensor4<T> value;
    Tensor4<T> grad;
};

// 3x3 convolution, pad 1, stride 1 or 2.
template <typename T>
class Conv2d {
  public:
    Conv2d() = default;
    Conv2d(std::string name, int in_c, int out_c, int stride = 1)
        : in_c_(in_c), out_c_(out_c), stride_(stride) {
        w_.name = name + ".w";
        w_.value = Tensor4<T>(out_c, in_c, 3, 3);
        w_.grad = Tensor4<T>(out_c, in_c, 3, 3);
        b_.name = name + ".b";
        b_.value = Tensor4<T>(1, out_c, 1, 1);
        b_.grad = Tensor4<T>(1, out_c, 1, 1);
    }

    void init_he(CounterRng& rng) {
        const double std = std::sqrt(2.0 / (in_c_ * 9.0));
        for (auto& x : w_.value.v) x = static_cast<T>(rng.normal() * std);
        b_.value.fill(T(0));
    }

    Tensor4<T> forward(const Tensor4<T>& x) const {
        if (x.c != in_c_) throw InvalidArgument("conv: channel mismatch");
        const int oh = (x.h - 1) / stride_ + 1, ow = (x.w - 1) / stride_ + 1;
        Tensor4<T> y(x.n, out_c_, oh, ow);
        const size_t colsz = static_cast<size_t>(in_c_) * 9 * oh * ow;
        parallel_blocks(x.n, [&](size_t s) {
            std::vector<T> cols(colsz);
            im2col_3x3(x.plane(static_cast<int>(s), 0), in_c_, x.h, x.w, stride_, cols.data());
            T* out = y.plane(static_cast<int>(s), 0);
            // per-sample single-thread product; outer parallelism is per sample
            CMapRM<T> wm(w_.value.v.data(), out_c_, in_c_ * 9, Eigen::OuterStride<>(in_c_ * 9));
            CMapRM<T> cm(cols.data(), in_c_ * 9, oh * ow, Eigen::OuterStride<>(oh * ow));
            MapRM<T> ym(out, out_c_, oh * ow, Eigen::OuterStride<>(oh * ow));
            ym.noalias() = wm * cm;
            for (int oc = 0; oc < out_c_; ++oc) {
                T* p = out + static_cast<size_t>(oc) * oh * ow;
                const T bv = b_.value.v[oc];
                for (int i = 0; i < oh * ow; ++i) p[i] += bv;
            }
        });
        return y;
    }

    // Accumulates parameter gradients, returns dL/dx. x must be the forward input.
    Tensor4<T> backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
        const int oh = gy.h, ow = gy.w;
        Tensor4<T> gx(x.n, in_c_, x.h, x.w);
        const size_t colsz = static_cast<size_t>(in_c_) * 9 * oh * ow;
        std::vector<Tensor4<T>> gw_per(x.n);
        parallel_blocks(x.n, [&](size_t s) {
            const int si = static_cast<int>(s);
            std::vector<T> cols(colsz);
            im2col_3x3(x.plane(si, 0), in_c_, x.h, x.w, stride_, cols.data());
            const T* g = gy.plane(si, 0);
            // dW_s = gy_s * cols_s^T
            gw_per[s] = Tensor4<T>(out_c_, in_c_, 3, 3);
            CMapRM<T> gm(g, out_c_, oh * ow, Eigen::OuterStride<>(oh * ow));
            CMapRM<T> cm(cols.data(), in_c_ * 9, oh * ow, Eigen::OuterStride<>(oh * ow));
            MapRM<T> gwm(gw_per[s].v.data(), out_c_, in_c_ * 9, Eigen::OuterStride<>(in_c_ * 9));
            gwm.noalias() = gm * cm.transpose();
            // dcols = W^T * gy_s, then scatter back
            std::vector<T> dcols(colsz);
            CMapRM<T> wm(w_.value.v.data(), out_c_, in_c_ * 9, Eigen::OuterStride<>(in_c_ * 9));
            MapRM<T> dcm(dcols.data(), in_c_ * 9, oh * ow, Eigen::OuterStride<>(oh * ow));
            dcm.noalias() = wm.transpose() * gm;
            col2im_3x3(dcols.data(), in_c_, x.h, x.w, stride_, gx.plane(si, 0));
        });
        // fixed-order reductions keep gradients independent of the pool size
        for (int s = 0; s < x.n; ++s)
            for (size_t i = 0; i < w_.grad.size(); ++i) w_.grad.v[i] += gw_per[s].v[i];
        for (int s = 0; s < gy.n; ++s)
            for (int oc = 0; oc < out_c_; ++oc) {
                const T* g = gy.plane(s, oc);
                T acc = 0;
                for (int i = 0; i < oh * ow; ++i) acc += g[i];
                b_.grad.v[oc] += acc;
            }
        return gx;
    }

    void collect(std::vector<Param<T>*>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }
    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }

  private:
    int in_c_ = 0, out_c_ = 0, stride_ = 1;
    Param<T> w_, b_;
};

// Fully connected layer on [n, features, 1, 1] tensors.
template <typename T>
class Dense {
  public:
    Dense() = default;
    Dense(std::string name, int in_f, int out_f) : in_f_(in_f), out_f_(out_f) {
        w_.name = name + ".w";
        w_.value = Tensor4<T>(out_f, in_f, 1, 1);
        w_.grad = Tensor4<T>(out_f, in_f, 1, 1);
        b_.name = name + ".b";
        b_.value = Tensor4<T>(1, out_f, 1, 1);
        b_.grad = Tensor4<T>(1, out_f, 1, 1);
    }

    void init_he(CounterRng& rng) {
        const double std = std::sqrt(2.0 / in_f_);
        for (auto& x : w_.value.v) x = static_cast<T>(rng.normal() * std);
        b_.value.fill(T(0));
    }

    Tensor4<T> forward(const Tensor4<T>& x) const {
        if (x.c * x.h * x.w != in_f_) throw InvalidArgument("dense: feature mismatch");
        Tensor4<T> y(x.n, out_f_, 1, 1);
        CMapRM<T> xm(x.v.data(), x.n, in_f_, Eigen::OuterStride<>(in_f_));
        CMapRM<T> wm(w_.value.v.data(), out_f_, in_f_, Eigen::OuterStride<>(in_f_));
        MapRM<T> ym(y.v.data(), x.n, out_f_, Eigen::OuterStride<>(out_f_));
        ym.noalias() = xm * wm.transpose();
        for (int s = 0; s < x.n; ++s)
            for (int o = 0; o < out_f_; ++o) y.v[static_cast<size_t>(s) * out_f_ + o] += b_.value.v[o];
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
        Tensor4<T> gx(x.n, x.c, x.h, x.w);
        CMapRM<T> xm(x.v.data(), x.n, in_f_, Eigen::OuterStride<>(in_f_));
        CMapRM<T> gm(gy.v.data(), x.n, out_f_, Eigen::OuterStride<>(out_f_));
        CMapRM<T> wm(w_.value.v.data(), out_f_, in_f_, Eigen::OuterStride<>(in_f_));
        MapRM<T> gxm(gx.v.data(), x.n, in_f_, Eigen::OuterStride<>(in_f_));
        MapRM<T> gwm(w_.grad.v.data(), out_f_, in_f_, Eigen::OuterStride<>(in_f_));
        gxm.noalias() = gm * wm;
        gwm.noalias() += gm.transpose() * xm;
        for (int s = 0; s < x.n; ++s)
            for (int o = 0; o < out_f_; ++o) b_.grad.v[o] += gy.v[static_cast<size_t>(s) * out_f_ + o];
        return gx;
    }

    void collect(std::vector<Param<T>*>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

  private:
    int in_f_ = 0, out_f_ = 0;
    Param<T> w_, b_;
};

// ---- elementwise ops ----

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    for (auto& v : y.v) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& y, const Tensor4<T>& gy) {
    Tensor4<T> gx = gy;
    for (size_t i = 0; i < gx.size(); ++i)
        if (y.v[i] <= T(0)) gx.v[i] = T(0);
    return gx;
}

template <typename T>
Tensor4<T> leaky_relu(const Tensor4<T>& x, T slope = T(0.2)) {
    Tensor4<T> y = x;
    for (auto& v : y.v) v = v > T(0) ? v : slope * v;
    return y;
}

template <typename T>
Tensor4<T> leaky_relu_backward(const Tensor4<T>& y, const Tensor4<T>& gy, T slope = T(0.2)) {
    Tensor4<T> gx = gy;
    for (size_t i = 0; i < gx.size(); ++i)
        if (y.v[i] <= T(0)) gx.v[i] *= slope;
    return gx;
}

template <typename T>
Tensor4<T> sigmoid(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    for (auto& v : y.v) v = T(1) / (T(1) + std::exp(-v));
    return y;
}

template <typename T>
Tensor4<T> sigmoid_backward(const Tensor4<T>& y, const Tensor4<T>& gy) {
    Tensor4<T> gx = gy;
    for (size_t i = 0; i < gx.size(); ++i) gx.v[i] *= y.v[i] * (T(1) - y.v[i]);
    return gx;
}

// Per-pixel softmax across channels.
template <typename T>
Tensor4<T> softmax_channels(const Tensor4<T>& x) {
    Tensor4<T> y(x.n, x.c, x.h, x.w);
    const size_t hw = static_cast<size_t>(x.h) * x.w;
    for (int s = 0; s < x.n; ++s) {
        const T* xp = x.plane(s, 0);
        T* yp = y.plane(s, 0);
        for (size_t i = 0; i < hw; ++i) {
            T mx = xp[i];
            for (int c = 1; c < x.c; ++c) mx = std::max(mx, xp[c * hw + i]);
            T sum = 0;
            for (int c = 0; c < x.c; ++c) {
                const T e = std::exp(xp[c * hw + i] - mx);
                yp[c * hw + i] = e;
                sum += e;
            }
            for (int c = 0; c < x.c; ++c) yp[c * hw + i] /= sum;
        }
    }
    return y;
}

template <typename T>
Tensor4<T> upsample2(const Tensor4<T>& x) {
    Tensor4<T> y(x.n, x.c, x.h * 2, x.w * 2);
    for (int s = 0; s < x.n; ++s)
        for (int c = 0; c < x.c; ++c) {
            const T* xp = x.plane(s, c);
            T* yp = y.plane(s, c);
            for (int iy = 0; iy < y.h; ++iy)
                for (int ix = 0; ix < y.w; ++ix)
                    yp[static_cast<size_t>(iy) * y.w + ix] =
                        xp[static_cast<size_t>(iy / 2) * x.w + ix / 2];
        }
    return y;
}

template <typename T>
Tensor4<T> upsample2_backward(const Tensor4<T>& gy) {
    Tensor4<T> gx(gy.n, gy.c, gy.h / 2, gy.w / 2);
    for (int s = 0; s < gy.n; ++s)
        for (int c = 0; c < gy.c; ++c) {
            const T* gp = gy.plane(s, c);
            T* xp = gx.plane(s, c);
            for (int iy = 0; iy < gy.h; ++iy)
                for (int ix = 0; ix < gy.w; ++ix)
                    xp[static_cast<size_t>(iy / 2) * gx.w + ix / 2] +=
                        gp[static_cast<size_t>(iy) * gy.w + ix];
        }
    return gx;
}

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
    Tensor4<T> y(a.n, a.c + b.c, a.h, a.w);
    for (int s = 0; s < a.n; ++s) {
        std::copy(a.plane(s, 0), a.plane(s, 0) + static_cast<size_t>(a.c) * a.h * a.w,
                  y.plane(s, 0));
        std::copy(b.plane(s, 0), b.plane(s, 0) + static_cast<size_t>(b.c) * b.h * b.w,
                  y.plane(s, a.c));
    }
    return y;
}

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& g, int ca) {
    Tensor4<T> ga(g.n, ca, g.h, g.w), gb(g.n, g.c - ca, g.h, g.w);
    for (int s = 0; s < g.n; ++s) {
        std::copy(g.plane(s, 0), g.plane(s, 0) + static_cast<size_t>(ca) * g.h * g.w,
                  ga.plane(s, 0));
        std::copy(g.plane(s, ca), g.plane(s, ca) + static_cast<size_t>(g.c - ca) * g.h * g.w,
                  gb.plane(s, 0));
    }
    return {std::move(ga), std::move(gb)};
}

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
    Tensor4<T> y = a;
    for (size_t i = 0; i < y.size(); ++i) y.v[i] += b.v[i];
    return y;
}

// ---- losses ----
// Reductions are means over every element (pixels x batch); values are
// accumulated in double regardless of T.

// Cross-entropy on probabilities against a strict one-hot target; entries are
// clipped to [1e-7, 1] before the log.
template <typename T>
double cross_entropy_loss(const Tensor4<T>& probs, const Tensor4<T>& onehot) {
    if (!probs.same_shape(onehot)) throw InvalidArgument("cross_entropy: shape mismatch");
    const size_t hw = static_cast<size_t>(probs.h) * probs.w;
    double sum = 0.0;
    for (int s = 0; s < probs.n; ++s) {
        const T* p = probs.plane(s, 0);
        const T* t = onehot.plane(s, 0);
        for (size_t i = 0; i < hw; ++i) {
            int ones = 0;
            double px = 0.0;
            for (int c = 0; c < probs.c; ++c) {
                const T tv = t[c * hw + i];
                if (tv == T(1)) {
                    ++ones;
                    px = static_cast<double>(p[c * hw + i]);
                } else if (tv != T(0)) {
                    throw InvalidArgument("cross_entropy: target not one-hot");
                }
            }
            if (ones != 1) throw InvalidArgument("cross_entropy: target not one-hot");
            sum += -std::log(std::max(px, kLogEps));
        }
    }
    return sum / (static_cast<double>(probs.n) * hw);
}

// Fused softmax + cross-entropy; returns the loss and writes dL/dlogits.
template <typename T>
double softmax_ce_with_logits(const Tensor4<T>& logits, const Tensor4<T>& onehot,
                              std::type_identity_t<Tensor4<T>>* dlogits) {
    if (!logits.same_shape(onehot)) throw InvalidArgument("softmax_ce: shape mismatch");
    Tensor4<T> p = softmax_channels(logits);
    const size_t hw = static_cast<size_t>(p.h) * p.w;
    const double npix = static_cast<double>(p.n) * hw;
    double sum = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (onehot.v[i] == T(1)) sum += -std::log(std::max(static_cast<double>(p.v[i]), kLogEps));
    }
    if (dlogits) {
        *dlogits = Tensor4<T>(p.n, p.c, p.h, p.w);
        for (size_t i = 0; i < p.size(); ++i)
            dlogits->v[i] = static_cast<T>((p.v[i] - onehot.v[i]) / npix);
    }
    return sum / npix;
}

struct AdvLosses {
    double d_loss;
    double g_adv_loss;
};

// Scores are post-sigmoid values, clipped into [eps, 1-eps] before the logs.
// d_loss = -mean log d_real - mean log(1 - d_fake); g_adv = -mean log d_fake
// (non-saturating form).
template <typename T>
AdvLosses adversarial_losses(const Tensor4<T>& d_real, const Tensor4<T>& d_fake) {
    for (const auto& t : {&d_real, &d_fake})
        for (const T v : t->v)
            if (!std::isfinite(static_cast<double>(v)))
                throw InvalidArgument("adversarial_losses: non-finite score");
    auto clip = [](double s) { return std::clamp(s, kLogEps, 1.0 - kLogEps); };
    double lr = 0.0, lf = 0.0, lg = 0.0;
    for (const T v : d_real.v) lr += -std::log(clip(static_cast<double>(v)));
    for (const T v : d_fake.v) {
        const double s = clip(static_cast<double>(v));
        lf += -std::log(1.0 - s);
        lg += -std::log(s);
    }
    return {lr / d_real.size() + lf / d_fake.size(), lg / d_fake.size()};
}

// Gradients of the adversarial losses w.r.t. the scores (clip treated as
// pass-through with the score floored away from 0/1).
template <typename T>
void adversarial_grads(const Tensor4<T>& d_real, const Tensor4<T>& d_fake,
                       std::type_identity_t<Tensor4<T>>* g_real_dloss,
                       std::type_identity_t<Tensor4<T>>* g_fake_dloss,
                       std::type_identity_t<Tensor4<T>>* g_fake_gadv) {
    const double nr = static_cast<double>(d_real.size());
    const double nf = static_cast<double>(d_fake.size());
    if (g_real_dloss) {
        *g_real_dloss = Tensor4<T>(d_real.n, d_real.c, d_real.h, d_real.w);
        for (size_t i = 0; i < d_real.size(); ++i)
            g_real_dloss->v[i] =
                static_cast<T>(-1.0 / (nr * std::max(static_cast<double>(d_real.v[i]), kLogEps)));
    }
    if (g_fake_dloss) {
        *g_fake_dloss = Tensor4<T>(d_fake.n, d_fake.c, d_fake.h, d_fake.w);
        for (size_t i = 0; i < d_fake.size(); ++i)
            g_fake_dloss->v[i] = static_cast<T>(
                1.0 / (nf * std::max(1.0 - static_cast<double>(d_fake.v[i]), kLogEps)));
    }
    if (g_fake_gadv) {
        *g_fake_gadv = Tensor4<T>(d_fake.n, d_fake.c, d_fake.h, d_fake.w);
        for (size_t i = 0; i < d_fake.size(); ++i)
            g_fake_gadv->v[i] =
                static_cast<T>(-1.0 / (nf * std::max(static_cast<double>(d_fake.v[i]), kLogEps)));
    }
}

template <typename T>
double l1_loss(const Tensor4<T>& x, const Tensor4<T>& x_hat) {
    if (!x.same_shape(x_hat)) throw InvalidArgument("l1_loss: shape mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        sum += std::abs(static_cast<double>(x.v[i]) - static_cast<double>(x_hat.v[i]));
    return sum / x.size();
}

// dL1/dx_hat; sign(0) taken as 0.
template <typename T>
Tensor4<T> l1_grad_wrt_xhat(const Tensor4<T>& x, const Tensor4<T>& x_hat) {
    Tensor4<T> g(x.n, x.c, x.h, x.w);
    const double n = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x_hat.v[i]) - static_cast<double>(x.v[i]);
        g.v[i] = static_cast<T>(d > 0 ? 1.0 / n : (d < 0 ? -1.0 / n : 0.0));
    }
    return g;
}

inline double generator_objective(double g_adv_loss, double l1, double lambda) {
    if (!std::isfinite(g_adv_loss) || !std::isfinite(l1) || !std::isfinite(lambda))
        throw InvalidArgument("generator_objective: non-finite input");
    return g_adv_loss + lambda * l1;
}

// ---- optimizer ----

template <typename T>
class Adam {
  public:
    Adam(std::vector<Param<T>*> params, double lr, double beta1, double beta2,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.emplace_back(p->value.size(), T(0));
            v_.emplace_back(p->value.size(), T(0));
        }
    }

    void zero_grad() {
        for (auto* p : params_) p->grad.fill(T(0));
    }

    void step() {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, t_);
        const double c2 = 1.0 - std::pow(b2_, t_);
        for (size_t k = 0; k < params_.size(); ++k) {
            auto& val = params_[k]->value.v;
            const auto& g = params_[k]->grad.v;
            for (size_t i = 0; i < val.size(); ++i) {
                const double gi = static_cast<double>(g[i]);
                m_[k][i] = static_cast<T>(b1_ * m_[k][i] + (1.0 - b1_) * gi);
                v_[k][i] = static_cast<T>(b2_ * v_[k][i] + (1.0 - b2_) * gi * gi);
                const double mhat = m_[k][i] / c1;
                const double vhat = v_[k][i] / c2;
                val[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

  private:
    std::vector<Param<T>*> params_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

}  // namespace cyclesem::nn
