#include "padnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "padnet/ops.hpp"

namespace padnet {
namespace {

constexpr double kNormalEps = 1e-8;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void require_shape(const Tensor4& t, const Shape& s, const char* what, const char* op) {
    if (t.shape() != s) {
        throw ConfigError(std::string(op) + ": " + what + " shape " + t.shape().str() + " expected " + s.str());
    }
}

}  // namespace

std::string_view loss_term_name(LossTerm t) {
    switch (t) {
        case LossTerm::intermediate_depth: return "L1_inter_depth";
        case LossTerm::intermediate_parsing: return "L2_inter_parsing";
        case LossTerm::normal: return "L3_normal";
        case LossTerm::contour: return "L4_contour";
        case LossTerm::final_depth: return "L5_final_depth";
        case LossTerm::final_parsing: return "L6_final_parsing";
    }
    return "?";
}

Var loss_depth(Var pred, const Tensor4& target, const Tensor4& mask) {
    const Shape s = pred.shape();
    require_shape(target, s, "target", "loss_depth");
    require_shape(mask, s, "mask", "loss_depth");
    double count = 0.0, acc = 0.0;
    const Tensor4& p = pred.value();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (mask[i] == 0.0) continue;
        const double d = p[i] - target[i];
        acc += mask[i] * d * d;
        count += mask[i];
    }
    const double denom = std::max(count, 1.0);
    Tape& tape = *pred.tape;
    return tape.record(Tensor4::scalar(acc / denom), {pred},
                       [&tape, id = pred.id, target, mask, denom](const Tensor4& g, std::span<Tensor4* const> gi) {
                           const Tensor4& p = tape.value(id);
                           const double scale = 2.0 * g.item() / denom;
                           for (std::size_t i = 0; i < p.size(); ++i) {
                               if (mask[i] == 0.0) continue;
                               (*gi[0])[i] += scale * mask[i] * (p[i] - target[i]);
                           }
                       },
                       "loss_depth");
}

Var loss_normal(Var pred, const Tensor4& target, const Tensor4& mask) {
    const Shape s = pred.shape();
    if (s.c != 3) throw ConfigError("loss_normal: prediction must have 3 channels, got " + s.str());
    require_shape(target, s, "target", "loss_normal");
    require_shape(mask, Shape{s.n, 1, s.h, s.w}, "mask", "loss_normal");
    const Tensor4& p = pred.value();
    double count = 0.0, acc = 0.0;
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) {
                const double m = mask.at(n, 0, y, x);
                if (m == 0.0) continue;
                double sq = kNormalEps * kNormalEps;
                for (std::size_t c = 0; c < 3; ++c) sq += p.at(n, c, y, x) * p.at(n, c, y, x);
                const double r = std::sqrt(sq);
                for (std::size_t c = 0; c < 3; ++c) {
                    const double d = p.at(n, c, y, x) / r - target.at(n, c, y, x);
                    acc += m * d * d;
                }
                count += m;
            }
    const double denom = std::max(count, 1.0);
    Tape& tape = *pred.tape;
    return tape.record(
        Tensor4::scalar(acc / denom), {pred},
        [&tape, id = pred.id, target, mask, denom, s](const Tensor4& g, std::span<Tensor4* const> gi) {
            const Tensor4& p = tape.value(id);
            Tensor4& gp = *gi[0];
            const double scale = g.item() / denom;
            for (std::size_t n = 0; n < s.n; ++n)
                for (std::size_t y = 0; y < s.h; ++y)
                    for (std::size_t x = 0; x < s.w; ++x) {
                        const double m = mask.at(n, 0, y, x);
                        if (m == 0.0) continue;
                        double sq = kNormalEps * kNormalEps;
                        double v[3];
                        for (std::size_t c = 0; c < 3; ++c) {
                            v[c] = p.at(n, c, y, x);
                            sq += v[c] * v[c];
                        }
                        const double r = std::sqrt(sq);
                        // dL/du, then through u = p / r: g/r - p (p.g) / r^3.
                        double gu[3], pg = 0.0;
                        for (std::size_t c = 0; c < 3; ++c) {
                            gu[c] = 2.0 * m * scale * (v[c] / r - target.at(n, c, y, x));
                            pg += v[c] * gu[c];
                        }
                        for (std::size_t c = 0; c < 3; ++c) {
                            gp.at(n, c, y, x) += gu[c] / r - v[c] * pg / (r * r * r);
                        }
                    }
        },
        "loss_normal");
}

Var loss_parsing(Var logits, const LabelMap& labels, std::uint8_t ignore_index) {
    const Shape s = logits.shape();
    if (labels.n != s.n || labels.h != s.h || labels.w != s.w) {
        throw ConfigError("loss_parsing: label map " + std::to_string(labels.n) + "x" + std::to_string(labels.h) +
                          "x" + std::to_string(labels.w) + " does not match logits " + s.str());
    }
    const Tensor4& z = logits.value();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) {
                const std::uint8_t label = labels.at(n, y, x);
                if (label == ignore_index) continue;
                if (label >= s.c) {
                    throw DataError("loss_parsing: label " + std::to_string(label) + " out of range [0," +
                                    std::to_string(s.c) + ") at pixel (n=" + std::to_string(n) +
                                    ", y=" + std::to_string(y) + ", x=" + std::to_string(x) + ")");
                }
                double mx = z.at(n, 0, y, x);
                for (std::size_t c = 1; c < s.c; ++c) mx = std::max(mx, z.at(n, c, y, x));
                double se = 0.0;
                for (std::size_t c = 0; c < s.c; ++c) se += std::exp(z.at(n, c, y, x) - mx);
                acc += std::log(se) + mx - z.at(n, label, y, x);
                ++count;
            }
    const double denom = static_cast<double>(std::max<std::size_t>(count, 1));
    Tape& tape = *logits.tape;
    return tape.record(
        Tensor4::scalar(acc / denom), {logits},
        [&tape, id = logits.id, labels, ignore_index, denom, s](const Tensor4& g, std::span<Tensor4* const> gi) {
            const Tensor4& z = tape.value(id);
            Tensor4& gz = *gi[0];
            const double scale = g.item() / denom;
            for (std::size_t n = 0; n < s.n; ++n)
                for (std::size_t y = 0; y < s.h; ++y)
                    for (std::size_t x = 0; x < s.w; ++x) {
                        const std::uint8_t label = labels.at(n, y, x);
                        if (label == ignore_index) continue;
                        double mx = z.at(n, 0, y, x);
                        for (std::size_t c = 1; c < s.c; ++c) mx = std::max(mx, z.at(n, c, y, x));
                        double se = 0.0;
                        for (std::size_t c = 0; c < s.c; ++c) se += std::exp(z.at(n, c, y, x) - mx);
                        for (std::size_t c = 0; c < s.c; ++c) {
                            const double prob = std::exp(z.at(n, c, y, x) - mx) / se;
                            gz.at(n, c, y, x) += scale * (prob - (c == label ? 1.0 : 0.0));
                        }
                    }
        },
        "loss_parsing");
}

Var loss_contour(Var logit, const Tensor4& target, double pos_weight) {
    const Shape s = logit.shape();
    require_shape(target, s, "target", "loss_contour");
    const Tensor4& z = logit.value();
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double t = target[i];
        acc += pos_weight * t * softplus(-z[i]) + (1.0 - t) * softplus(z[i]);
    }
    const double denom = static_cast<double>(std::max<std::size_t>(z.size(), 1));
    Tape& tape = *logit.tape;
    return tape.record(Tensor4::scalar(acc / denom), {logit},
                       [&tape, id = logit.id, target, pos_weight, denom](const Tensor4& g, std::span<Tensor4* const> gi) {
                           const Tensor4& z = tape.value(id);
                           const double scale = g.item() / denom;
                           for (std::size_t i = 0; i < z.size(); ++i) {
                               const double sg = stable_sigmoid(z[i]);
                               const double t = target[i];
                               (*gi[0])[i] += scale * (pos_weight * t * (sg - 1.0) + (1.0 - t) * sg);
                           }
                       },
                       "loss_contour");
}

double contour_pos_weight(const Tensor4& target) {
    double pos = 0.0;
    for (double v : target.data()) pos += v;
    if (pos <= 0.0) return 1.0;
    const double neg = static_cast<double>(target.size()) - pos;
    return std::clamp(neg / pos, 1.0, 20.0);
}

Var combine_losses(const std::array<std::optional<Var>, kNumLossTerms>& terms, const LossWeights& weights,
                   LossReport* report) {
    std::vector<Var> present;
    std::vector<double> w;
    LossReport local;
    local.weights = weights;
    for (std::size_t i = 0; i < kNumLossTerms; ++i) {
        if (!terms[i]) continue;
        const double v = terms[i]->value().item();
        if (!std::isfinite(v)) {
            throw DivergenceError("loss " + std::string(loss_term_name(static_cast<LossTerm>(i))) +
                                  " is not finite (" + std::to_string(v) + ")");
        }
        local.values[i] = v;
        present.push_back(*terms[i]);
        w.push_back(weights[i]);
    }
    if (present.empty()) throw ConfigError("combine_losses: no loss terms");
    Var total = weighted_sum(present, w);
    local.total = total.value().item();
    if (report != nullptr) *report = local;
    return total;
}

}  // namespace padnet
