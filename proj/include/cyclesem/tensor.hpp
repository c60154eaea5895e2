#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cyclesem/common.hpp"

namespace cyclesem {

// Dense NCHW tensor. T is float in the product; tests instantiate double for
// finite-difference gradient checks.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t size() const { return v.size(); }
    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    T* plane(int in, int ic) {
        return v.data() + (static_cast<size_t>(in) * c + ic) * h * w;
    }
    const T* plane(int in, int ic) const {
        return v.data() + (static_cast<size_t>(in) * c + ic) * h * w;
    }

    T& at(int in, int ic, int iy, int ix) {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    T at(int in, int ic, int iy, int ix) const {
        return v[((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    void fill(T x) { std::fill(v.begin(), v.end(), x); }
};

using Tensor4f = Tensor4<float>;

}  // namespace cyclesem
