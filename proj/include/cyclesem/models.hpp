#pragma once

#include <string>
#include <vector>

#include "cyclesem/nn.hpp"

// The four networks. Forward passes are deterministic (no dropout, no noise
// injection); a constructed-and-loaded model is immutable under inference.
// Training uses forward_train/backward with an explicit workspace so that
// const models stay safe for concurrent inference.
namespace cyclesem::models {

using nn::Conv2d;
using nn::Dense;
using nn::Param;

// ---- segmentor: encoder-decoder with skip connections ----

struct UNetDesc {
    int in_c = 1;
    int num_classes = 4;
    int base = 16;
    int depth = 3;
    int resolution = 64;
};

template <typename T>
class UNet {
  public:
    UNet() = default;
    UNet(const UNetDesc& d, uint64_t seed) : d_(d) {
        if (d.depth < 2 || d.depth > 5) throw InvalidArgument("unet: depth out of range");
        if (d.resolution % (1 << (d.depth - 1)) != 0)
            throw InvalidArgument("unet: resolution not divisible by 2^(depth-1)");
        CounterRng rng(seed, {kStreamInit, 1});
        const int dd = d.depth;
        conv_in_ = Conv2d<T>("in", d.in_c, ch(0));
        for (int i = 0; i < dd; ++i) enc_.emplace_back("enc" + std::to_string(i), ch(i), ch(i));
        for (int i = 0; i + 1 < dd; ++i)
            down_.emplace_back("down" + std::to_string(i), ch(i), ch(i + 1), 2);
        for (int i = dd - 2; i >= 0; --i) {
            up_.emplace_back("up" + std::to_string(i), ch(i + 1), ch(i));
            merge_.emplace_back("mer" + std::to_string(i), 2 * ch(i), ch(i));
        }
        head_ = Conv2d<T>("head", ch(0), d.num_classes);
        conv_in_.init_he(rng);
        for (auto& c : enc_) c.init_he(rng);
        for (auto& c : down_) c.init_he(rng);
        for (auto& c : up_) c.init_he(rng);
        for (auto& c : merge_) c.init_he(rng);
        head_.init_he(rng);
    }

    struct Ws {
        Tensor4<T> x, a_in;
        std::vector<Tensor4<T>> enc_in, enc_out;   // per level
        std::vector<Tensor4<T>> down_out;          // per down conv
        std::vector<Tensor4<T>> up_in, up_out, cat, mer_out;  // decoder steps
    };

    Tensor4<T> logits_train(const Tensor4<T>& x, Ws& ws) const {
        const int dd = d_.depth;
        ws = Ws{};
        ws.x = x;
        ws.a_in = nn::relu(conv_in_.forward(x));
        Tensor4<T> cur = ws.a_in;
        for (int i = 0; i < dd; ++i) {
            ws.enc_in.push_back(cur);
            ws.enc_out.push_back(nn::relu(enc_[i].forward(cur)));
            if (i + 1 < dd) {
                ws.down_out.push_back(nn::relu(down_[i].forward(ws.enc_out[i])));
                cur = ws.down_out[i];
            }
        }
        cur = ws.enc_out[dd - 1];
        for (int k = 0; k < dd - 1; ++k) {
            const int lvl = dd - 2 - k;
            ws.up_in.push_back(nn::upsample2(cur));
            ws.up_out.push_back(nn::relu(up_[k].forward(ws.up_in[k])));
            ws.cat.push_back(nn::concat_channels(ws.up_out[k], ws.enc_out[lvl]));
            ws.mer_out.push_back(nn::relu(merge_[k].forward(ws.cat[k])));
            cur = ws.mer_out[k];
        }
        return head_.forward(cur);
    }

    Tensor4<T> logits(const Tensor4<T>& x) const {
        Ws ws;
        return logits_train(x, ws);
    }

    // Per-pixel class probabilities (softmax).
    Tensor4<T> probs(const Tensor4<T>& x) const { return nn::softmax_channels(logits(x)); }

    void backward(const Ws& ws, const Tensor4<T>& dlogits) {
        const int dd = d_.depth;
        Tensor4<T> g = head_.backward(ws.mer_out.empty() ? ws.enc_out[dd - 1] : ws.mer_out.back(),
                                      dlogits);
        std::vector<Tensor4<T>> skip_grads(dd);
        for (int k = dd - 2; k >= 0; --k) {
            const int lvl = dd - 2 - k;
            g = nn::relu_backward(ws.mer_out[k], g);
            g = merge_[k].backward(ws.cat[k], g);
            auto [gu, gskip] = nn::split_channels(g, up_[k].out_channels());
            skip_grads[lvl] = std::move(gskip);
            gu = nn::relu_backward(ws.up_out[k], gu);
            gu = up_[k].backward(ws.up_in[k], gu);
            g = nn::upsample2_backward(gu);
        }
        // g now flows into enc_out[dd-1]
        for (int i = dd - 1; i >= 0; --i) {
            if (i < dd - 1) {
                // grad from the down path plus the skip connection
                Tensor4<T> gd = nn::relu_backward(ws.down_out[i], g);
                gd = down_[i].backward(ws.enc_out[i], gd);
                if (skip_grads[i].size() > 0) gd = nn::add(gd, skip_grads[i]);
                g = std::move(gd);
            } else if (skip_grads[i].size() > 0) {
                g = nn::add(g, skip_grads[i]);
            }
            g = nn::relu_backward(ws.enc_out[i], g);
            g = enc_[i].backward(ws.enc_in[i], g);
        }
        g = nn::relu_backward(ws.a_in, g);
        conv_in_.backward(ws.x, g);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        conv_in_.collect(out);
        for (auto& c : enc_) c.collect(out);
        for (auto& c : down_) c.collect(out);
        for (auto& c : up_) c.collect(out);
        for (auto& c : merge_) c.collect(out);
        head_.collect(out);
        return out;
    }

    const UNetDesc& desc() const { return d_; }

  private:
    int ch(int lvl) const { return d_.base << lvl; }

    UNetDesc d_;
    Conv2d<T> conv_in_, head_;
    std::vector<Conv2d<T>> enc_, down_, up_, merge_;
};

// ---- generator: encoder, two residual blocks, decoder, sigmoid output ----

struct GenDesc {
    int num_classes = 4;
    int base = 16;
    int resolution = 64;
};

template <typename T>
class Generator {
  public:
    Generator() = default;
    Generator(const GenDesc& d, uint64_t seed) : d_(d) {
        if (d.resolution % 4 != 0) throw InvalidArgument("generator: resolution not divisible by 4");
        CounterRng rng(seed, {kStreamInit, 2});
        e0_ = Conv2d<T>("e0", d.num_classes, d.base);
        e1_ = Conv2d<T>("e1", d.base, 2 * d.base, 2);
        e2_ = Conv2d<T>("e2", 2 * d.base, 4 * d.base, 2);
        r1a_ = Conv2d<T>("r1a", 4 * d.base, 4 * d.base);
        r1b_ = Conv2d<T>("r1b", 4 * d.base, 4 * d.base);
        r2a_ = Conv2d<T>("r2a", 4 * d.base, 4 * d.base);
        r2b_ = Conv2d<T>("r2b", 4 * d.base, 4 * d.base);
        d1_ = Conv2d<T>("d1", 4 * d.base, 2 * d.base);
        d0_ = Conv2d<T>("d0", 2 * d.base, d.base);
        out_ = Conv2d<T>("out", d.base, 1);
        for (auto* c : {&e0_, &e1_, &e2_, &r1a_, &r1b_, &r2a_, &r2b_, &d1_, &d0_, &out_})
            c->init_he(rng);
    }

    struct Ws {
        Tensor4<T> x, y0, y1, y2;
        Tensor4<T> r1_mid, r1_out, r2_mid, r2_out;  // relu outputs
        Tensor4<T> r1_sum, r2_sum;
        Tensor4<T> u1, y3, u0, y4, pre;
    };

    Tensor4<T> forward_train(const Tensor4<T>& x, Ws& ws) const {
        ws = Ws{};
        ws.x = x;
        ws.y0 = nn::relu(e0_.forward(x));
        ws.y1 = nn::relu(e1_.forward(ws.y0));
        ws.y2 = nn::relu(e2_.forward(ws.y1));
        ws.r1_mid = nn::relu(r1a_.forward(ws.y2));
        ws.r1_sum = nn::add(r1b_.forward(ws.r1_mid), ws.y2);
        ws.r1_out = nn::relu(ws.r1_sum);
        ws.r2_mid = nn::relu(r2a_.forward(ws.r1_out));
        ws.r2_sum = nn::add(r2b_.forward(ws.r2_mid), ws.r1_out);
        ws.r2_out = nn::relu(ws.r2_sum);
        ws.u1 = nn::upsample2(ws.r2_out);
        ws.y3 = nn::relu(d1_.forward(ws.u1));
        ws.u0 = nn::upsample2(ws.y3);
        ws.y4 = nn::relu(d0_.forward(ws.u0));
        ws.pre = out_.forward(ws.y4);
        return nn::sigmoid(ws.pre);
    }

    Tensor4<T> forward(const Tensor4<T>& x) const {
        Ws ws;
        return forward_train(x, ws);
    }

    // gy is dL/d(output); the cached sigmoid output must be passed in.
    void backward(const Ws& ws, const Tensor4<T>& y, const Tensor4<T>& gy) {
        Tensor4<T> g = nn::sigmoid_backward(y, gy);
        g = out_.backward(ws.y4, g);
        g = nn::relu_backward(ws.y4, g);
        g = d0_.backward(ws.u0, g);
        g = nn::upsample2_backward(g);
        g = nn::relu_backward(ws.y3, g);
        g = d1_.backward(ws.u1, g);
        g = nn::upsample2_backward(g);
        g = nn::relu_backward(ws.r2_out, g);
        {
            Tensor4<T> gb = r2b_.backward(ws.r2_mid, g);
            gb = nn::relu_backward(ws.r2_mid, gb);
            gb = r2a_.backward(ws.r1_out, gb);
            g = nn::add(g, gb);
        }
        g = nn::relu_backward(ws.r1_out, g);
        {
            Tensor4<T> gb = r1b_.backward(ws.r1_mid, g);
            gb = nn::relu_backward(ws.r1_mid, gb);
            gb = r1a_.backward(ws.y2, gb);
            g = nn::add(g, gb);
        }
        g = nn::relu_backward(ws.y2, g);
        g = e2_.backward(ws.y1, g);
        g = nn::relu_backward(ws.y1, g);
        g = e1_.backward(ws.y0, g);
        g = nn::relu_backward(ws.y0, g);
        e0_.backward(ws.x, g);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (auto* c : {&e0_, &e1_, &e2_, &r1a_, &r1b_, &r2a_, &r2b_, &d1_, &d0_, &out_})
            c->collect(out);
        return out;
    }

    const GenDesc& desc() const { return d_; }

  private:
    GenDesc d_;
    Conv2d<T> e0_, e1_, e2_, r1a_, r1b_, r2a_, r2b_, d1_, d0_, out_;
};

// ---- discriminator: strided convs to a per-patch realness map ----

struct DiscDesc {
    int in_c = 1;
    int base = 16;
    int resolution = 64;
};

template <typename T>
class PatchDiscriminator {
  public:
    PatchDiscriminator() = default;
    PatchDiscriminator(const DiscDesc& d, uint64_t seed) : d_(d) {
        CounterRng rng(seed, {kStreamInit, 3});
        c0_ = Conv2d<T>("c0", d.in_c, d.base, 2);
        c1_ = Conv2d<T>("c1", d.base, 2 * d.base, 2);
        c2_ = Conv2d<T>("c2", 2 * d.base, 2 * d.base);
        c3_ = Conv2d<T>("c3", 2 * d.base, 1);
        for (auto* c : {&c0_, &c1_, &c2_, &c3_}) c->init_he(rng);
    }

    struct Ws {
        Tensor4<T> x, y0, y1, y2, pre, score;
    };

    // Per-patch scores in (0,1). Receptive field ~23 px.
    Tensor4<T> forward_train(const Tensor4<T>& x, Ws& ws) const {
        ws = Ws{};
        ws.x = x;
        ws.y0 = nn::leaky_relu(c0_.forward(x));
        ws.y1 = nn::leaky_relu(c1_.forward(ws.y0));
        ws.y2 = nn::leaky_relu(c2_.forward(ws.y1));
        ws.pre = c3_.forward(ws.y2);
        ws.score = nn::sigmoid(ws.pre);
        return ws.score;
    }

    Tensor4<T> forward(const Tensor4<T>& x) const {
        Ws ws;
        return forward_train(x, ws);
    }

    // Returns dL/d(input image), used when the generator step flows through D.
    Tensor4<T> backward(const Ws& ws, const Tensor4<T>& gscore) {
        Tensor4<T> g = nn::sigmoid_backward(ws.score, gscore);
        g = c3_.backward(ws.y2, g);
        g = nn::leaky_relu_backward(ws.y2, g);
        g = c2_.backward(ws.y1, g);
        g = nn::leaky_relu_backward(ws.y1, g);
        g = c1_.backward(ws.y0, g);
        g = nn::leaky_relu_backward(ws.y0, g);
        return c0_.backward(ws.x, g);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (auto* c : {&c0_, &c1_, &c2_, &c3_}) c->collect(out);
        return out;
    }

    const DiscDesc& desc() const { return d_; }

  private:
    DiscDesc d_;
    Conv2d<T> c0_, c1_, c2_, c3_;
};

// ---- autoencoder baseline: conv encoder, dense bottleneck, conv decoder ----

struct AeDesc {
    int base = 16;
    int bottleneck = 128;
    int resolution = 64;
};

template <typename T>
class ConvAutoencoder {
  public:
    ConvAutoencoder() = default;
    ConvAutoencoder(const AeDesc& d, uint64_t seed) : d_(d) {
        if (d.resolution % 8 != 0)
            throw InvalidArgument("autoencoder: resolution not divisible by 8");
        CounterRng rng(seed, {kStreamInit, 4});
        const int r8 = d.resolution / 8;
        feat_ = 4 * d.base * r8 * r8;
        e0_ = Conv2d<T>("e0", 1, d.base, 2);
        e1_ = Conv2d<T>("e1", d.base, 2 * d.base, 2);
        e2_ = Conv2d<T>("e2", 2 * d.base, 4 * d.base, 2);
        fc_enc_ = Dense<T>("fce", feat_, d.bottleneck);
        fc_dec_ = Dense<T>("fcd", d.bottleneck, feat_);
        d2_ = Conv2d<T>("d2", 4 * d.base, 2 * d.base);
        d1_ = Conv2d<T>("d1", 2 * d.base, d.base);
        d0_ = Conv2d<T>("d0", d.base, d.base);
        out_ = Conv2d<T>("out", d.base, 1);
        e0_.init_he(rng);
        e1_.init_he(rng);
        e2_.init_he(rng);
        fc_enc_.init_he(rng);
        fc_dec_.init_he(rng);
        d2_.init_he(rng);
        d1_.init_he(rng);
        d0_.init_he(rng);
        out_.init_he(rng);
    }

    struct Ws {
        Tensor4<T> x, y0, y1, y2, flat, lat, fdec, fdec_r, u2, y3, u1, y4, u0, y5, pre;
    };

    Tensor4<T> forward_train(const Tensor4<T>& x, Ws& ws) const {
        const int r8 = d_.resolution / 8;
        ws = Ws{};
        ws.x = x;
        ws.y0 = nn::relu(e0_.forward(x));
        ws.y1 = nn::relu(e1_.forward(ws.y0));
        ws.y2 = nn::relu(e2_.forward(ws.y1));
        ws.flat = ws.y2;
        ws.flat.c = feat_;
        ws.flat.h = ws.flat.w = 1;
        ws.lat = fc_enc_.forward(ws.flat);  // linear latent
        ws.fdec = fc_dec_.forward(ws.lat);
        ws.fdec_r = nn::relu(ws.fdec);
        Tensor4<T> body = ws.fdec_r;
        body.c = 4 * d_.base;
        body.h = body.w = r8;
        ws.u2 = nn::upsample2(body);
        ws.y3 = nn::relu(d2_.forward(ws.u2));
        ws.u1 = nn::upsample2(ws.y3);
        ws.y4 = nn::relu(d1_.forward(ws.u1));
        ws.u0 = nn::upsample2(ws.y4);
        ws.y5 = nn::relu(d0_.forward(ws.u0));
        ws.pre = out_.forward(ws.y5);
        return nn::sigmoid(ws.pre);
    }

    Tensor4<T> forward(const Tensor4<T>& x) const {
        Ws ws;
        return forward_train(x, ws);
    }

    void backward(const Ws& ws, const Tensor4<T>& y, const Tensor4<T>& gy) {
        const int r8 = d_.resolution / 8;
        Tensor4<T> g = nn::sigmoid_backward(y, gy);
        g = out_.backward(ws.y5, g);
        g = nn::relu_backward(ws.y5, g);
        g = d0_.backward(ws.u0, g);
        g = nn::upsample2_backward(g);
        g = nn::relu_backward(ws.y4, g);
        g = d1_.backward(ws.u1, g);
        g = nn::upsample2_backward(g);
        g = nn::relu_backward(ws.y3, g);
        g = d2_.backward(ws.u2, g);
        g = nn::upsample2_backward(g);
        g.c = feat_;
        g.h = g.w = 1;
        g = nn::relu_backward(ws.fdec_r, g);
        g = fc_dec_.backward(ws.lat, g);
        g = fc_enc_.backward(ws.flat, g);
        g.c = 4 * d_.base;
        g.h = g.w = r8;
        g = nn::relu_backward(ws.y2, g);
        g = e2_.backward(ws.y1, g);
        g = nn::relu_backward(ws.y1, g);
        g = e1_.backward(ws.y0, g);
        g = nn::relu_backward(ws.y0, g);
        e0_.backward(ws.x, g);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        e0_.collect(out);
        e1_.collect(out);
        e2_.collect(out);
        fc_enc_.collect(out);
        fc_dec_.collect(out);
        d2_.collect(out);
        d1_.collect(out);
        d0_.collect(out);
        out_.collect(out);
        return out;
    }

    const AeDesc& desc() const { return d_; }
    int feature_dim() const { return feat_; }

  private:
    AeDesc d_;
    int feat_ = 0;
    Conv2d<T> e0_, e1_, e2_, d2_, d1_, d0_, out_;
    Dense<T> fc_enc_, fc_dec_;
};

}  // namespace cyclesem::models
