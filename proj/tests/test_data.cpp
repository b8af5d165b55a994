#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "padnet/dataset_io.hpp"
#include "padnet/experiment.hpp"
#include "support.hpp"

using namespace padnet;
using namespace padnet::testing;

namespace {

Tensor4 ones_like(const Tensor4& t) { return Tensor4(t.shape(), 1.0); }

SceneConfig small_scene() {
    SceneConfig cfg;
    cfg.height = 24;
    cfg.width = 32;
    return cfg;
}

Sample constant_sample(std::size_t h, std::size_t w, double depth) {
    Sample s;
    s.num_classes = 3;
    s.image = Tensor4(Shape{1, 3, h, w}, 0.5);
    s.depth = Tensor4(Shape{1, 1, h, w}, depth);
    s.labels = LabelMap(1, h, w, 1);
    derive_targets(s, 8.0);
    return s;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("padnet_test_" + name);
}

}  // namespace

// ---- scene generator ------------------------------------------------------

TEST(GenerateScene, DeterministicPerSeed) {
    const SceneConfig cfg = small_scene();
    EXPECT_EQ(generate_scene(3, cfg), generate_scene(3, cfg));
    EXPECT_FALSE(generate_scene(3, cfg) == generate_scene(4, cfg));
}

TEST(GenerateScene, ZeroObjectsIsTheGroundPlane) {
    SceneConfig cfg = small_scene();
    cfg.min_objects = cfg.max_objects = 0;
    cfg.dropout = 0.0;
    const Sample s = generate_scene(1, cfg);
    for (auto l : s.labels.data) EXPECT_EQ(l, 0);
    for (std::size_t y = 0; y < cfg.height; ++y) {
        const double want = cfg.near_depth + (cfg.far_depth - cfg.near_depth) * static_cast<double>(y) / 23.0;
        EXPECT_NEAR(s.depth.at(0, 0, y, 5), want, 1e-6);
    }
    EXPECT_EQ(max_abs(s.contour), 0.0);
}

TEST(GenerateScene, ObjectsOccludeThePlane) {
    SceneConfig cfg = small_scene();
    cfg.min_objects = cfg.max_objects = 3;
    cfg.dropout = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Sample s = generate_scene(seed, cfg);
        std::size_t object_pixels = 0;
        for (std::size_t y = 0; y < cfg.height; ++y)
            for (std::size_t x = 0; x < cfg.width; ++x) {
                const double plane =
                    cfg.near_depth + (cfg.far_depth - cfg.near_depth) * static_cast<double>(y) / 23.0;
                if (s.labels.at(0, y, x) != 0) {
                    ++object_pixels;
                    EXPECT_LT(s.depth.at(0, 0, y, x), plane);
                } else {
                    EXPECT_NEAR(s.depth.at(0, 0, y, x), plane, 1e-6);
                }
            }
        EXPECT_GT(object_pixels, 0u);
    }
}

TEST(GenerateScene, InvariantsHold) {
    const SceneConfig cfg = small_scene();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Sample s = generate_scene(seed, cfg);
        for (double v : s.image.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        for (auto l : s.labels.data) EXPECT_LT(l, cfg.num_classes);
        for (std::size_t i = 0; i < s.depth.size(); ++i) {
            EXPECT_EQ(s.valid_mask[i], s.depth[i] > 0.0 ? 1.0 : 0.0);
            if (s.depth[i] > 0.0) {
                EXPECT_LE(s.depth[i], cfg.far_depth + 1e-6);
            }
        }
    }
}

TEST(SceneConfig, ValidationNamesTheField) {
    SceneConfig cfg;
    cfg.num_classes = 1;
    try {
        cfg.validate();
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(e.path().find("num_classes"), std::string::npos);
    }
}

// ---- derived targets ------------------------------------------------------

TEST(Normals, ConstantDepthPointsAtTheCamera) {
    const Tensor4 depth(Shape{1, 1, 5, 6}, 2.5);
    const NormalMap nm = normals_from_depth(depth, ones_like(depth), 8.0);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
            EXPECT_EQ(nm.normal.at(0, 0, y, x), 0.0);
            EXPECT_EQ(nm.normal.at(0, 1, y, x), 0.0);
            EXPECT_EQ(nm.normal.at(0, 2, y, x), 1.0);
            EXPECT_EQ(nm.mask.at(0, 0, y, x), 1.0);
        }
}

TEST(Normals, UnitRampAlongX) {
    Tensor4 depth(Shape{1, 1, 4, 7});
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 7; ++x) depth.at(0, 0, y, x) = 1.0 + static_cast<double>(x);
    const NormalMap nm = normals_from_depth(depth, ones_like(depth), 1.0);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 7; ++x) {
            EXPECT_NEAR(nm.normal.at(0, 0, y, x), -0.707107, 1e-6);
            EXPECT_NEAR(nm.normal.at(0, 1, y, x), 0.0, 1e-6);
            EXPECT_NEAR(nm.normal.at(0, 2, y, x), 0.707107, 1e-6);
        }
}

TEST(Normals, UnitLengthWhereValidAndMaskedNearHoles) {
    const Sample s = generate_scene(5, small_scene());
    for (std::size_t y = 0; y < s.height(); ++y)
        for (std::size_t x = 0; x < s.width(); ++x) {
            if (s.normal_mask.at(0, 0, y, x) == 0.0) continue;
            double sq = 0;
            for (std::size_t c = 0; c < 3; ++c) sq += s.normal.at(0, c, y, x) * s.normal.at(0, c, y, x);
            EXPECT_NEAR(sq, 1.0, 1e-12);
        }
    Tensor4 depth(Shape{1, 1, 5, 5}, 2.0), mask = ones_like(depth);
    mask.at(0, 0, 2, 2) = 0.0;
    const NormalMap nm = normals_from_depth(depth, mask, 1.0);
    EXPECT_EQ(nm.mask.at(0, 0, 2, 2), 0.0);
    EXPECT_EQ(nm.mask.at(0, 0, 2, 1), 0.0);
    EXPECT_EQ(nm.mask.at(0, 0, 1, 2), 0.0);
    EXPECT_EQ(nm.mask.at(0, 0, 1, 1), 1.0);
}

TEST(Contours, HalfPlaneMarksBothSidesOfTheBoundary) {
    for (std::size_t c = 1; c < 8; ++c) {
        LabelMap labels(1, 4, 8, 0);
        for (std::size_t y = 0; y < 4; ++y)
            for (std::size_t x = c; x < 8; ++x) labels.at(0, y, x) = 2;
        const Tensor4 edges = contours_from_semantics(labels);
        for (std::size_t y = 0; y < 4; ++y)
            for (std::size_t x = 0; x < 8; ++x) {
                EXPECT_EQ(edges.at(0, 0, y, x), (x == c - 1 || x == c) ? 1.0 : 0.0) << "c=" << c << " x=" << x;
            }
    }
}

TEST(Contours, SinglePixelIslandAndIgnoredNeighbours) {
    LabelMap labels(1, 3, 3, 0);
    labels.at(0, 1, 1) = 1;
    const Tensor4 e = contours_from_semantics(labels);
    EXPECT_EQ(e.at(0, 0, 1, 1), 1.0);
    EXPECT_EQ(e.at(0, 0, 0, 1), 1.0);
    EXPECT_EQ(e.at(0, 0, 1, 0), 1.0);
    EXPECT_EQ(e.at(0, 0, 0, 0), 0.0);  // diagonal only
    labels.at(0, 1, 1) = kIgnoreLabel;
    EXPECT_EQ(max_abs(contours_from_semantics(labels)), 1.0);  // the ignored pixel itself sees real labels
    EXPECT_EQ(contours_from_semantics(labels).at(0, 0, 0, 1), 0.0);
}

// ---- augmentation ---------------------------------------------------------

TEST(Augment, IdentityParametersReturnTheSample) {
    const Sample s = generate_scene(2, small_scene());
    const Sample a = augment_with(s, AugmentParams{}, 8.0);
    EXPECT_EQ(a.labels, s.labels);
    EXPECT_LT(max_abs_diff(a.image, s.image), 1e-12);
    EXPECT_LT(max_abs_diff(a.depth, s.depth), 1e-12);
}

TEST(Augment, DoubleFlipIsIdentity) {
    const Sample s = generate_scene(3, small_scene());
    AugmentParams flip;
    flip.flip = true;
    const Sample once = augment_with(s, flip, 8.0);
    EXPECT_FALSE(once.labels == s.labels);
    const Sample twice = augment_with(once, flip, 8.0);
    EXPECT_EQ(twice.labels, s.labels);
    EXPECT_LT(max_abs_diff(twice.depth, s.depth), 1e-12);
}

TEST(Augment, FlipMirrorsImageAndNegatesHorizontalNormals) {
    Sample s = constant_sample(6, 9, 2.0);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 9; ++x) {
            s.depth.at(0, 0, y, x) = 2.0 + 0.1 * static_cast<double>(x * x) + 0.05 * static_cast<double>(y);
            s.image.at(0, 0, y, x) = static_cast<double>(x) / 9.0;
        }
    derive_targets(s, 8.0);
    AugmentParams flip;
    flip.flip = true;
    const Sample f = augment_with(s, flip, 8.0);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 9; ++x) {
            const std::size_t m = 8 - x;
            EXPECT_EQ(f.image.at(0, 0, y, x), s.image.at(0, 0, y, m));
            EXPECT_NEAR(f.normal.at(0, 0, y, x), -s.normal.at(0, 0, y, m), 1e-12);
            EXPECT_NEAR(f.normal.at(0, 1, y, x), s.normal.at(0, 1, y, m), 1e-12);
            EXPECT_NEAR(f.normal.at(0, 2, y, x), s.normal.at(0, 2, y, m), 1e-12);
        }
}

TEST(Augment, ScalingDividesDepthByRatio) {
    const Sample s = constant_sample(8, 8, 3.0);
    AugmentParams p;
    p.ratio = 1.5;
    p.crop_y = 2;
    p.crop_x = 1;
    const Sample a = augment_with(s, p, 8.0);
    for (double d : a.depth.data()) EXPECT_NEAR(d, 2.0, 1e-12);
}

TEST(Augment, ShrinkingPadsWithInvalidPixels) {
    const Sample s = constant_sample(8, 8, 3.0);
    AugmentParams p;
    p.ratio = 0.5;
    const Sample a = augment_with(s, p, 8.0);
    EXPECT_NEAR(a.depth.at(0, 0, 0, 0), 6.0, 1e-12);
    EXPECT_EQ(a.depth.at(0, 0, 7, 7), 0.0);
    EXPECT_EQ(a.labels.at(0, 7, 7), kIgnoreLabel);
    EXPECT_EQ(a.valid_mask.at(0, 0, 7, 7), 0.0);
}

TEST(Augment, RandomAugmentationPreservesInvariants) {
    const Sample s = generate_scene(6, small_scene());
    Rng rng = make_rng(1, 1);
    for (int i = 0; i < 20; ++i) {
        const Sample a = augment(s, rng, kNyudRatios, 8.0);
        EXPECT_EQ(a.height(), s.height());
        EXPECT_EQ(a.width(), s.width());
        for (std::size_t k = 0; k < a.depth.size(); ++k) {
            EXPECT_GE(a.depth[k], 0.0);
            EXPECT_EQ(a.valid_mask[k], a.depth[k] > 0.0 ? 1.0 : 0.0);
        }
        for (auto l : a.labels.data) EXPECT_TRUE(l < s.num_classes || l == kIgnoreLabel);
        EXPECT_TRUE(a.image.all_finite());
    }
}

TEST(MakeBatch, StacksAndBuildsQuarterTargets) {
    const std::vector<Sample> data = generate_dataset(small_scene(), 1, 2);
    const Sample* members[] = {&data[0], &data[1]};
    const Batch b = make_batch(members);
    EXPECT_EQ(b.image.shape(), (Shape{2, 3, 24, 32}));
    EXPECT_EQ(b.q_depth.shape(), (Shape{2, 1, 6, 8}));
    EXPECT_EQ(b.q_normal.shape(), (Shape{2, 3, 6, 8}));
    EXPECT_EQ(b.q_labels.h, 6u);
    EXPECT_EQ(b.labels.at(1, 3, 4), data[1].labels.at(0, 3, 4));
}

// ---- dataset files --------------------------------------------------------

TEST(DatasetFile, RoundTripIsExact) {
    const std::vector<Sample> data = generate_dataset(small_scene(), 10, 3);
    const auto bytes = encode_dataset(data);
    EXPECT_EQ(decode_dataset(bytes, small_scene().camera_constant), data);
    const auto path = temp_file("roundtrip.pads");
    write_dataset(path, data);
    EXPECT_EQ(read_dataset(path), data);
    EXPECT_EQ(read_file(path), bytes);
    std::filesystem::remove(path);
}

TEST(DatasetFile, TruncationReportsOffset) {
    const std::vector<Sample> data = generate_dataset(small_scene(), 10, 2);
    auto bytes = encode_dataset(data);
    bytes.resize(bytes.size() - 7);
    try {
        (void)decode_dataset(bytes, 8.0);
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_GT(e.offset(), 12u);
        EXPECT_LE(e.offset(), bytes.size());
    }
}

TEST(DatasetFile, BadMagicAndTrailingBytes) {
    auto bytes = encode_dataset(generate_dataset(small_scene(), 1, 1));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW((void)decode_dataset(bad, 8.0), FormatError);
    bytes.push_back(0);
    EXPECT_THROW((void)decode_dataset(bytes, 8.0), FormatError);
}

TEST(DatasetFile, EmptyDatasetRoundTrips) {
    const auto bytes = encode_dataset({});
    EXPECT_EQ(bytes.size(), 12u);
    EXPECT_TRUE(decode_dataset(bytes, 8.0).empty());
}

TEST(DatasetFile, EmptyFileIsFormatError) {
    EXPECT_THROW((void)decode_dataset({}, 8.0), FormatError);
}
