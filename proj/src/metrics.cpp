#include "padnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace padnet {

void DepthAccumulator::add(const Tensor4& pred, const Tensor4& gt, const Tensor4& mask) {
    if (pred.shape() != gt.shape() || mask.shape() != gt.shape()) {
        throw ConfigError("depth_metrics: shapes " + pred.shape().str() + ", " + gt.shape().str() + ", " +
                          mask.shape().str() + " differ");
    }
    const double t1 = 1.25, t2 = t1 * t1, t3 = t2 * t1;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (mask[i] == 0.0 || !(gt[i] > 0.0)) continue;
        const double d = std::max(pred[i], kDepthFloor);
        const double g = gt[i];
        const double err = d - g;
        rel_ += std::abs(err) / (denom_ == RelDenominator::ground_truth ? g : d);
        sq_ += err * err;
        log10_ += std::abs(std::log10(d) - std::log10(g));
        const double ratio = std::max(g / d, d / g);
        within_[0] += ratio < t1;
        within_[1] += ratio < t2;
        within_[2] += ratio < t3;
        ++count_;
    }
}

void DepthAccumulator::merge(const DepthAccumulator& other) {
    count_ += other.count_;
    rel_ += other.rel_;
    sq_ += other.sq_;
    log10_ += other.log10_;
    for (int i = 0; i < 3; ++i) within_[i] += other.within_[i];
}

std::optional<DepthMetrics> DepthAccumulator::result() const {
    if (count_ == 0) return std::nullopt;
    const auto n = static_cast<double>(count_);
    DepthMetrics m;
    m.rel = rel_ / n;
    m.rms = std::sqrt(sq_ / n);
    m.log10 = log10_ / n;
    m.delta1 = static_cast<double>(within_[0]) / n;
    m.delta2 = static_cast<double>(within_[1]) / n;
    m.delta3 = static_cast<double>(within_[2]) / n;
    return m;
}

std::optional<DepthMetrics> depth_metrics(const Tensor4& pred, const Tensor4& gt, const Tensor4& mask,
                                          RelDenominator denom) {
    DepthAccumulator acc(denom);
    acc.add(pred, gt, mask);
    return acc.result();
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::uint8_t ignore_index)
    : classes_(num_classes), ignore_(ignore_index), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(const LabelMap& pred, const LabelMap& gt) {
    if (pred.n != gt.n || pred.h != gt.h || pred.w != gt.w) throw ConfigError("parsing_metrics: label maps differ in shape");
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        const std::uint8_t g = gt.data[i];
        if (g == ignore_) continue;
        const std::uint8_t p = pred.data[i];
        if (g >= classes_ || p >= classes_) {
            throw DataError("parsing_metrics: label out of range at pixel " + std::to_string(i) + " (gt " +
                            std::to_string(g) + ", pred " + std::to_string(p) + ")");
        }
        ++counts_[g * classes_ + p];
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw ConfigError("confusion matrices have different class counts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

std::optional<ParsingMetrics> ConfusionMatrix::result() const {
    const std::uint64_t total_px = total();
    if (total_px == 0) return std::nullopt;
    ParsingMetrics m;
    m.per_class_iou.resize(classes_);
    double iou_sum = 0.0, acc_sum = 0.0;
    std::size_t iou_n = 0, acc_n = 0;
    std::uint64_t correct = 0;
    for (std::size_t c = 0; c < classes_; ++c) {
        std::uint64_t gt_c = 0, pred_c = 0;
        for (std::size_t k = 0; k < classes_; ++k) {
            gt_c += at(c, k);
            pred_c += at(k, c);
        }
        const std::uint64_t tp = at(c, c);
        correct += tp;
        const std::uint64_t uni = gt_c + pred_c - tp;
        if (uni > 0) {
            const double iou = static_cast<double>(tp) / static_cast<double>(uni);
            m.per_class_iou[c] = iou;
            iou_sum += iou;
            ++iou_n;
        }
        if (gt_c > 0) {
            acc_sum += static_cast<double>(tp) / static_cast<double>(gt_c);
            ++acc_n;
        }
    }
    m.mean_iou = iou_sum / static_cast<double>(iou_n);
    m.mean_accuracy = acc_sum / static_cast<double>(acc_n);
    m.pixel_accuracy = static_cast<double>(correct) / static_cast<double>(total_px);
    return m;
}

std::optional<ParsingMetrics> parsing_metrics(const LabelMap& pred, const LabelMap& gt, std::size_t num_classes,
                                              std::uint8_t ignore_index) {
    ConfusionMatrix cm(num_classes, ignore_index);
    cm.add(pred, gt);
    return cm.result();
}

LabelMap argmax_labels(const Tensor4& logits) {
    const Shape s = logits.shape();
    LabelMap out(s.n, s.h, s.w);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) {
                std::size_t best = 0;
                for (std::size_t c = 1; c < s.c; ++c)
                    if (logits.at(n, c, y, x) > logits.at(n, best, y, x)) best = c;
                out.at(n, y, x) = static_cast<std::uint8_t>(best);
            }
    return out;
}

}  // namespace padnet
