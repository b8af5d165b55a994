#include "padnet/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace padnet {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

long as_index(std::size_t v) { return static_cast<long>(v); }

/// Geometry of one image plane stack seen by the patch expansion.
struct PatchGeometry {
    std::size_t channels, height, width;
    std::size_t kh, kw;
    std::size_t out_h, out_w;
    ConvSpec spec;

    [[nodiscard]] std::size_t rows() const { return channels * kh * kw; }
    [[nodiscard]] std::size_t cols() const { return out_h * out_w; }
};

// cols[(c,ky,kx), (oy,ox)] = x[c, oy*s - p + ky*d, ox*s - p + kx*d] (0 outside).
void im2col(const double* x, const PatchGeometry& g, double* cols) {
    const long s = as_index(g.spec.stride), p = as_index(g.spec.padding), d = as_index(g.spec.dilation);
    const long H = as_index(g.height), W = as_index(g.width);
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.channels; ++c) {
        const double* plane = x + c * g.height * g.width;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
                double* dst = cols + row * g.cols();
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const long iy = as_index(oy) * s - p + as_index(ky) * d;
                    double* drow = dst + oy * g.out_w;
                    if (iy < 0 || iy >= H) {
                        std::fill(drow, drow + g.out_w, 0.0);
                        continue;
                    }
                    const double* srow = plane + iy * W;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const long ix = as_index(ox) * s - p + as_index(kx) * d;
                        drow[ox] = (ix >= 0 && ix < W) ? srow[ix] : 0.0;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add patch columns back into the image.
void col2im(const double* cols, const PatchGeometry& g, double* x) {
    const long s = as_index(g.spec.stride), p = as_index(g.spec.padding), d = as_index(g.spec.dilation);
    const long H = as_index(g.height), W = as_index(g.width);
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.channels; ++c) {
        double* plane = x + c * g.height * g.width;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
                const double* src = cols + row * g.cols();
                for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                    const long iy = as_index(oy) * s - p + as_index(ky) * d;
                    if (iy < 0 || iy >= H) continue;
                    double* drow = plane + iy * W;
                    const double* srow = src + oy * g.out_w;
                    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                        const long ix = as_index(ox) * s - p + as_index(kx) * d;
                        if (ix >= 0 && ix < W) drow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

void check_bias(const std::optional<Var>& bias, std::size_t channels, const char* op) {
    if (!bias) return;
    if (bias->shape() != Shape{1, channels, 1, 1}) {
        throw ConfigError(std::string(op) + ": bias shape " + bias->shape().str() + " expected 1x" +
                          std::to_string(channels) + "x1x1");
    }
}

void add_bias(Tensor4& out, const Tensor4& bias) {
    const Shape& s = out.shape();
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            double* p = out.ptr(n, c, 0, 0);
            const double b = bias[c];
            for (std::size_t i = 0; i < s.plane(); ++i) p[i] += b;
        }
}

void accumulate_bias_grad(const Tensor4& grad_out, Tensor4& grad_bias) {
    const Shape& s = grad_out.shape();
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            const double* p = grad_out.ptr(n, c, 0, 0);
            double acc = 0.0;
            for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
            grad_bias[c] += acc;
        }
}

std::vector<Var> with_bias(Var a, Var b, const std::optional<Var>& bias) {
    std::vector<Var> v{a, b};
    if (bias) v.push_back(*bias);
    return v;
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                          b.shape().str());
    }
}

template <typename Fwd, typename Deriv>
Var unary(Var x, const char* kind, Fwd fwd, Deriv deriv) {
    Tensor4 out(x.shape());
    const Tensor4& in = x.value();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
    Tape& tape = *x.tape;
    return tape.record(std::move(out), {x},
                       [&tape, id = x.id, deriv](const Tensor4& g, std::span<Tensor4* const> gi) {
                           const Tensor4& in = tape.value(id);
                           Tensor4& gx = *gi[0];
                           for (std::size_t i = 0; i < in.size(); ++i) gx[i] += g[i] * deriv(in[i]);
                       },
                       kind);
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, const ConvSpec& spec) {
    if (spec.stride == 0 || spec.dilation == 0 || kernel == 0) {
        throw ConfigError("conv: stride, dilation and kernel size must be positive");
    }
    const long numer = as_index(in + 2 * spec.padding) - as_index(spec.dilation * (kernel - 1)) - 1;
    if (numer < 0) {
        throw ConfigError("conv: input extent " + std::to_string(in) + " too small for kernel " +
                          std::to_string(kernel) + " (dilation " + std::to_string(spec.dilation) +
                          ", padding " + std::to_string(spec.padding) + ")");
    }
    return static_cast<std::size_t>(numer) / spec.stride + 1;
}

std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, const ConvSpec& spec,
                                       std::size_t output_padding) {
    if (spec.stride == 0 || spec.dilation == 0 || kernel == 0 || in == 0) {
        throw ConfigError("conv_transpose: stride, dilation, kernel and input must be positive");
    }
    const long out = as_index((in - 1) * spec.stride) - 2 * as_index(spec.padding) +
                     as_index(spec.dilation * (kernel - 1)) + 1 + as_index(output_padding);
    if (out <= 0) {
        throw ConfigError("conv_transpose: non-positive output extent for input " + std::to_string(in));
    }
    return static_cast<std::size_t>(out);
}

Var conv2d(Var input, Var weight, std::optional<Var> bias, const ConvSpec& spec) {
    const Shape xs = input.shape();
    const Shape ws = weight.shape();
    if (ws.c != xs.c) {
        throw ConfigError("conv2d: weight in_ch " + std::to_string(ws.c) + " != input channels " +
                          std::to_string(xs.c) + " (input " + xs.str() + ", weight " + ws.str() + ")");
    }
    check_bias(bias, ws.n, "conv2d");
    const PatchGeometry geo{xs.c, xs.h, xs.w, ws.h, ws.w,
                            conv_output_size(xs.h, ws.h, spec), conv_output_size(xs.w, ws.w, spec), spec};
    const Shape os{xs.n, ws.n, geo.out_h, geo.out_w};

    Tensor4 out(os);
    std::vector<double> cols(geo.rows() * geo.cols());
    const ConstMatMap wmat(weight.value().data().data(), as_index(ws.n), as_index(geo.rows()));
    for (std::size_t n = 0; n < xs.n; ++n) {
        im2col(input.value().ptr(n, 0, 0, 0), geo, cols.data());
        MatMap(out.ptr(n, 0, 0, 0), as_index(ws.n), as_index(geo.cols())).noalias() =
            wmat * ConstMatMap(cols.data(), as_index(geo.rows()), as_index(geo.cols()));
    }
    if (bias) add_bias(out, bias->value());

    Tape& tape = *input.tape;
    const NodeId xid = input.id, wid = weight.id;
    return tape.record(
        std::move(out), with_bias(input, weight, bias),
        [&tape, xid, wid, geo, xs, ws](const Tensor4& g, std::span<Tensor4* const> gi) {
            const Tensor4& x = tape.value(xid);
            const Tensor4& w = tape.value(wid);
            const ConstMatMap wmat(w.data().data(), as_index(ws.n), as_index(geo.rows()));
            std::vector<double> cols(geo.rows() * geo.cols());
            for (std::size_t n = 0; n < xs.n; ++n) {
                const ConstMatMap gmat(g.ptr(n, 0, 0, 0), as_index(ws.n), as_index(geo.cols()));
                if (gi[1] != nullptr) {
                    im2col(x.ptr(n, 0, 0, 0), geo, cols.data());
                    MatMap(gi[1]->data().data(), as_index(ws.n), as_index(geo.rows())).noalias() +=
                        gmat * ConstMatMap(cols.data(), as_index(geo.rows()), as_index(geo.cols())).transpose();
                }
                if (gi[0] != nullptr) {
                    MatMap(cols.data(), as_index(geo.rows()), as_index(geo.cols())).noalias() =
                        wmat.transpose() * gmat;
                    col2im(cols.data(), geo, gi[0]->ptr(n));
                }
            }
            if (gi[1] != nullptr && tape.fault() == TapeFault::conv_weight_grad) {
                for (double& v : gi[1]->data()) v *= 1.1;
            }
            if (gi.size() > 2 && gi[2] != nullptr) accumulate_bias_grad(g, *gi[2]);
        },
        "conv2d");
}

Var conv_transpose2d(Var input, Var weight, std::optional<Var> bias, const ConvSpec& spec,
                     std::size_t output_padding) {
    const Shape xs = input.shape();
    const Shape ws = weight.shape();
    if (ws.n != xs.c) {
        throw ConfigError("conv_transpose2d: weight in_ch " + std::to_string(ws.n) +
                          " != input channels " + std::to_string(xs.c) + " (input " + xs.str() +
                          ", weight " + ws.str() + ")");
    }
    if (output_padding >= std::max(spec.stride, spec.dilation)) {
        throw ConfigError("conv_transpose2d: output_padding must be smaller than stride or dilation");
    }
    check_bias(bias, ws.c, "conv_transpose2d");
    const std::size_t oh = conv_transpose_output_size(xs.h, ws.h, spec, output_padding);
    const std::size_t ow = conv_transpose_output_size(xs.w, ws.w, spec, output_padding);
    // Patch geometry of the forward conv that maps (out_ch, oh, ow) onto (in_ch, h, w).
    const PatchGeometry geo{ws.c, oh, ow, ws.h, ws.w, xs.h, xs.w, spec};
    const Shape os{xs.n, ws.c, oh, ow};

    Tensor4 out(os);
    std::vector<double> cols(geo.rows() * geo.cols());
    const ConstMatMap wmat(weight.value().data().data(), as_index(ws.n), as_index(geo.rows()));
    for (std::size_t n = 0; n < xs.n; ++n) {
        const ConstMatMap xmat(input.value().ptr(n, 0, 0, 0), as_index(xs.c), as_index(geo.cols()));
        MatMap(cols.data(), as_index(geo.rows()), as_index(geo.cols())).noalias() = wmat.transpose() * xmat;
        col2im(cols.data(), geo, out.ptr(n, 0, 0, 0));
    }
    if (bias) add_bias(out, bias->value());

    Tape& tape = *input.tape;
    const NodeId xid = input.id, wid = weight.id;
    return tape.record(
        std::move(out), with_bias(input, weight, bias),
        [&tape, xid, wid, geo, xs, ws](const Tensor4& g, std::span<Tensor4* const> gi) {
            const Tensor4& x = tape.value(xid);
            const Tensor4& w = tape.value(wid);
            const ConstMatMap wmat(w.data().data(), as_index(ws.n), as_index(geo.rows()));
            std::vector<double> cols(geo.rows() * geo.cols());
            for (std::size_t n = 0; n < xs.n; ++n) {
                im2col(g.ptr(n, 0, 0, 0), geo, cols.data());
                const ConstMatMap cmat(cols.data(), as_index(geo.rows()), as_index(geo.cols()));
                if (gi[0] != nullptr) {
                    MatMap(gi[0]->ptr(n), as_index(xs.c), as_index(geo.cols())).noalias() +=
                        wmat * cmat;
                }
                if (gi[1] != nullptr) {
                    const ConstMatMap xmat(x.ptr(n, 0, 0, 0), as_index(xs.c), as_index(geo.cols()));
                    MatMap(gi[1]->data().data(), as_index(ws.n), as_index(geo.rows())).noalias() +=
                        xmat * cmat.transpose();
                }
            }
            if (gi.size() > 2 && gi[2] != nullptr) accumulate_bias_grad(g, *gi[2]);
        },
        "conv_transpose2d");
}

namespace {

struct AxisWeights {
    std::vector<std::size_t> lo, hi;
    std::vector<double> frac;
};

AxisWeights corner_aligned(std::size_t in, std::size_t out) {
    AxisWeights a;
    a.lo.resize(out);
    a.hi.resize(out);
    a.frac.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
        const double src = out > 1 ? static_cast<double>(o) * static_cast<double>(in - 1) /
                                         static_cast<double>(out - 1)
                                   : 0.0;
        std::size_t lo = static_cast<std::size_t>(std::floor(src));
        lo = std::min(lo, in - 1);
        a.lo[o] = lo;
        a.hi[o] = std::min(lo + 1, in - 1);
        a.frac[o] = src - static_cast<double>(lo);
    }
    return a;
}

}  // namespace

Var bilinear_resize(Var input, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) throw ConfigError("bilinear_resize: output size must be >= 1");
    const Shape xs = input.shape();
    if (xs.h == out_h && xs.w == out_w) {
        // Corner-aligned resize to the same size is exactly the identity.
        Tape& tape = *input.tape;
        return tape.record(input.value(), {input},
                           [](const Tensor4& g, std::span<Tensor4* const> gi) { *gi[0] += g; },
                           "bilinear_resize");
    }
    const AxisWeights ay = corner_aligned(xs.h, out_h);
    const AxisWeights ax = corner_aligned(xs.w, out_w);
    const Shape os{xs.n, xs.c, out_h, out_w};
    Tensor4 out(os);
    const Tensor4& x = input.value();
    for (std::size_t n = 0; n < xs.n; ++n)
        for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t oy = 0; oy < out_h; ++oy) {
                const double fy = ay.frac[oy];
                for (std::size_t ox = 0; ox < out_w; ++ox) {
                    const double fx = ax.frac[ox];
                    out.at(n, c, oy, ox) =
                        (1 - fy) * ((1 - fx) * x.at(n, c, ay.lo[oy], ax.lo[ox]) + fx * x.at(n, c, ay.lo[oy], ax.hi[ox])) +
                        fy * ((1 - fx) * x.at(n, c, ay.hi[oy], ax.lo[ox]) + fx * x.at(n, c, ay.hi[oy], ax.hi[ox]));
                }
            }
    Tape& tape = *input.tape;
    return tape.record(
        std::move(out), {input},
        [ay, ax, xs, os](const Tensor4& g, std::span<Tensor4* const> gi) {
            Tensor4& gx = *gi[0];
            for (std::size_t n = 0; n < xs.n; ++n)
                for (std::size_t c = 0; c < xs.c; ++c)
                    for (std::size_t oy = 0; oy < os.h; ++oy) {
                        const double fy = ay.frac[oy];
                        for (std::size_t ox = 0; ox < os.w; ++ox) {
                            const double fx = ax.frac[ox];
                            const double v = g.at(n, c, oy, ox);
                            gx.at(n, c, ay.lo[oy], ax.lo[ox]) += (1 - fy) * (1 - fx) * v;
                            gx.at(n, c, ay.lo[oy], ax.hi[ox]) += (1 - fy) * fx * v;
                            gx.at(n, c, ay.hi[oy], ax.lo[ox]) += fy * (1 - fx) * v;
                            gx.at(n, c, ay.hi[oy], ax.hi[ox]) += fy * fx * v;
                        }
                    }
        },
        "bilinear_resize");
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Var sigmoid(Var input) {
    return unary(input, "sigmoid", stable_sigmoid, [](double x) {
        const double s = stable_sigmoid(x);
        return s * (1.0 - s);
    });
}

Var relu(Var input) {
    return unary(input, "relu", [](double x) { return x > 0 ? x : 0.0; },
                 [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Var elu(Var input) {
    return unary(input, "elu", [](double x) { return x > 0 ? x : std::expm1(x); },
                 [](double x) { return x > 0 ? 1.0 : std::exp(x); });
}

Var concat_channels(std::span<const Var> inputs) {
    if (inputs.empty()) throw ConfigError("concat_channels: no inputs");
    const Shape first = inputs.front().shape();
    std::size_t channels = 0;
    for (const Var& v : inputs) {
        const Shape s = v.shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w) {
            throw ConfigError("concat_channels: " + s.str() + " incompatible with " + first.str());
        }
        channels += s.c;
    }
    const Shape os{first.n, channels, first.h, first.w};
    Tensor4 out(os);
    const std::size_t plane = first.plane();
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (const Var& v : inputs) {
        offsets.push_back(offset);
        const Tensor4& x = v.value();
        for (std::size_t n = 0; n < first.n; ++n) {
            std::copy_n(x.ptr(n, 0, 0, 0), x.shape().c * plane, out.ptr(n, offset, 0, 0));
        }
        offset += x.shape().c;
    }
    std::vector<Var> ins(inputs.begin(), inputs.end());
    return inputs.front().tape->record(
        std::move(out), ins,
        [offsets, os, plane](const Tensor4& g, std::span<Tensor4* const> gi) {
            for (std::size_t i = 0; i < gi.size(); ++i) {
                if (gi[i] == nullptr) continue;
                Tensor4& gx = *gi[i];
                const std::size_t c = gx.shape().c;
                for (std::size_t n = 0; n < os.n; ++n) {
                    const double* src = g.ptr(n, offsets[i], 0, 0);
                    double* dst = gx.ptr(n, 0, 0, 0);
                    for (std::size_t k = 0; k < c * plane; ++k) dst[k] += src[k];
                }
            }
        },
        "concat_channels");
}

Var add(Var a, Var b) {
    require_same_shape(a, b, "add");
    Tensor4 out = a.value();
    out += b.value();
    return a.tape->record(std::move(out), {a, b},
                          [](const Tensor4& g, std::span<Tensor4* const> gi) {
                              if (gi[0] != nullptr) *gi[0] += g;
                              if (gi[1] != nullptr) *gi[1] += g;
                          },
                          "add");
}

Var mul(Var a, Var b) {
    require_same_shape(a, b, "mul");
    Tensor4 out(a.shape());
    const Tensor4& av = a.value();
    const Tensor4& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    Tape& tape = *a.tape;
    return tape.record(std::move(out), {a, b},
                       [&tape, aid = a.id, bid = b.id](const Tensor4& g, std::span<Tensor4* const> gi) {
                           const Tensor4& av = tape.value(aid);
                           const Tensor4& bv = tape.value(bid);
                           if (gi[0] != nullptr)
                               for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * bv[i];
                           if (gi[1] != nullptr)
                               for (std::size_t i = 0; i < g.size(); ++i) (*gi[1])[i] += g[i] * av[i];
                       },
                       "mul");
}

Var scale(Var a, double factor) {
    Tensor4 out = a.value();
    for (double& v : out.data()) v *= factor;
    return a.tape->record(std::move(out), {a},
                          [factor](const Tensor4& g, std::span<Tensor4* const> gi) {
                              for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += factor * g[i];
                          },
                          "scale");
}

Var sum(Var a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return a.tape->record(Tensor4::scalar(s), {a},
                          [](const Tensor4& g, std::span<Tensor4* const> gi) {
                              const double v = g.item();
                              for (double& x : gi[0]->data()) x += v;
                          },
                          "sum");
}

Var weighted_sum(std::span<const Var> terms, std::span<const double> weights) {
    if (terms.empty() || terms.size() != weights.size()) {
        throw ConfigError("weighted_sum: need one weight per term");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].shape() != Shape{1, 1, 1, 1}) throw ConfigError("weighted_sum: terms must be scalars");
        s += weights[i] * terms[i].value().item();
    }
    std::vector<double> w(weights.begin(), weights.end());
    std::vector<Var> ins(terms.begin(), terms.end());
    return terms.front().tape->record(Tensor4::scalar(s), ins,
                                      [w](const Tensor4& g, std::span<Tensor4* const> gi) {
                                          for (std::size_t i = 0; i < gi.size(); ++i)
                                              if (gi[i] != nullptr) (*gi[i])[0] += w[i] * g.item();
                                      },
                                      "weighted_sum");
}

}  // namespace padnet
