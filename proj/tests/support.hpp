#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "padnet/ops.hpp"
#include "padnet/params.hpp"
#include "padnet/tape.hpp"

namespace padnet::testing {

inline Tensor4 random_tensor(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor4 t(s);
    for (double& v : t.data()) v = u(rng);
    return t;
}

/// Builds a scalar from the inputs; used by the finite-difference oracle.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Contracts any output with fixed random weights so the result is a scalar
/// that depends on every output entry.
inline Var project(Var out, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    Tape& tape = *out.tape;
    return sum(mul(out, tape.constant(random_tensor(out.shape(), rng))));
}

/// max |analytic - numeric| / max(max |numeric|, 1e-8) over every input entry.
inline double finite_difference_error(const ScalarFn& fn, std::vector<Tensor4> inputs, double step = 1e-5) {
    std::vector<Tensor4> analytic;
    {
        Tape tape;
        std::vector<Var> vars;
        for (const Tensor4& t : inputs) vars.push_back(tape.variable(t));
        const Var loss = fn(tape, vars);
        const Gradients g = tape.backward(loss);
        for (const Var& v : vars) analytic.push_back(g[v]);
    }
    auto eval = [&](const std::vector<Tensor4>& values) {
        Tape tape;
        std::vector<Var> vars;
        for (const Tensor4& t : values) vars.push_back(tape.constant(t));
        return fn(tape, vars).value().item();
    };
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            const double original = inputs[i][j];
            inputs[i][j] = original + step;
            const double plus = eval(inputs);
            inputs[i][j] = original - step;
            const double minus = eval(inputs);
            inputs[i][j] = original;
            const double numeric = (plus - minus) / (2.0 * step);
            diff = std::max(diff, std::abs(numeric - analytic[i][j]));
            scale = std::max(scale, std::abs(numeric));
        }
    }
    return diff / std::max(scale, 1e-8);
}

/// Direct six-loop convolution: out[n][o][y][x] = b[o] + sum w[o][i][ky][kx] * in[n][i][y*s+ky*d-p][x*s+kx*d-p].
inline Tensor4 naive_conv2d(const Tensor4& in, const Tensor4& w, const Tensor4* bias, const ConvSpec& spec) {
    const Shape is = in.shape(), ws = w.shape();
    const auto out_size = [&](std::size_t n, std::size_t k) {
        return (n + 2 * spec.padding - spec.dilation * (k - 1) - 1) / spec.stride + 1;
    };
    const std::size_t oh = out_size(is.h, ws.h), ow = out_size(is.w, ws.w);
    Tensor4 out(Shape{is.n, ws.n, oh, ow});
    for (std::size_t n = 0; n < is.n; ++n)
        for (std::size_t o = 0; o < ws.n; ++o)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = bias != nullptr ? bias->at(0, o, 0, 0) : 0.0;
                    for (std::size_t i = 0; i < ws.c; ++i)
                        for (std::size_t ky = 0; ky < ws.h; ++ky)
                            for (std::size_t kx = 0; kx < ws.w; ++kx) {
                                const long iy = static_cast<long>(y * spec.stride + ky * spec.dilation) -
                                                static_cast<long>(spec.padding);
                                const long ix = static_cast<long>(x * spec.stride + kx * spec.dilation) -
                                                static_cast<long>(spec.padding);
                                if (iy < 0 || ix < 0 || iy >= static_cast<long>(is.h) ||
                                    ix >= static_cast<long>(is.w))
                                    continue;
                                acc += w.at(o, i, ky, kx) * in.at(n, i, static_cast<std::size_t>(iy),
                                                                   static_cast<std::size_t>(ix));
                            }
                    out.at(n, o, y, x) = acc;
                }
    return out;
}

/// Corner-aligned bilinear resampling written as an explicit tent-weight sum.
inline Tensor4 naive_bilinear(const Tensor4& in, std::size_t oh, std::size_t ow) {
    const Shape s = in.shape();
    Tensor4 out(Shape{s.n, s.c, oh, ow});
    const auto src = [](std::size_t i, std::size_t out_n, std::size_t in_n) {
        return out_n == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(in_n - 1) / static_cast<double>(out_n - 1);
    };
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) {
                    const double sy = src(i, oh, s.h), sx = src(j, ow, s.w);
                    double acc = 0.0;
                    for (std::size_t y = 0; y < s.h; ++y)
                        for (std::size_t x = 0; x < s.w; ++x) {
                            const double wy = std::max(0.0, 1.0 - std::abs(sy - static_cast<double>(y)));
                            const double wx = std::max(0.0, 1.0 - std::abs(sx - static_cast<double>(x)));
                            acc += wy * wx * in.at(n, c, y, x);
                        }
                    out.at(n, c, i, j) = acc;
                }
    return out;
}

inline Tensor4 value_of(const std::function<Var(Tape&)>& build) {
    Tape tape;
    return build(tape).value();
}

}  // namespace padnet::testing
