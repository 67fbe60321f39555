#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "duet/dataset_tree.hpp"
#include "duet/errors.hpp"
#include "duet/hash.hpp"
#include "duet/nn.hpp"
#include "duet/synthgen.hpp"
#include "test_util.hpp"

namespace duet {
namespace {

double pelvis_gap(const SkeletonSequence& s, int t) {
    const double dx = s.at(0, t, Pelvis, 0) - s.at(1, t, Pelvis, 0);
    const double dz = s.at(0, t, Pelvis, 2) - s.at(1, t, Pelvis, 2);
    return std::hypot(dx, dz);
}

TEST(Synth, SampleShape) {
    const auto s = synth::generate_sample(ActivityLabel{3}, {LocationCode::CC, 2}, 45.0, 9);
    EXPECT_EQ(s.num_subjects(), 2);
    EXPECT_EQ(s.num_frames(), 91);
    EXPECT_EQ(s.num_joints(), 32);
    EXPECT_EQ(s.coords().size(), 2u * 91 * 32 * 3);
    for (std::size_t i = 1; i < s.timestamps().size(); ++i) EXPECT_LT(s.timestamps()[i - 1], s.timestamps()[i]);
}

TEST(Synth, SampleIsDeterministic) {
    synth::SampleOptions opt;
    opt.occluded = true;
    const auto a = synth::generate_sample(ActivityLabel{7}, {LocationCode::CL, 9}, 301.0, 42, opt);
    const auto b = synth::generate_sample(ActivityLabel{7}, {LocationCode::CL, 9}, 301.0, 42, opt);
    EXPECT_EQ(a, b);
    const auto c = synth::generate_sample(ActivityLabel{7}, {LocationCode::CL, 9}, 301.0, 43, opt);
    EXPECT_NE(a, c);
}

TEST(Synth, HuggingClosesTheGapAsTheTemplatePrescribes) {
    synth::SampleOptions opt;
    opt.noise_std = 0.0;
    for (double orientation : {0.0, 90.0, 213.0}) {
        const auto s = synth::generate_sample(ActivityLabel{11}, {LocationCode::CM, 5}, orientation, 3, opt);
        const double first = pelvis_gap(s, 0);
        const double last = pelvis_gap(s, 90);
        EXPECT_LT(last, first);
        // Analytic template ratio between the last and first frame.
        const double expected = synth::hug_distance_fraction(1.0) / synth::hug_distance_fraction(0.0);
        EXPECT_NEAR(last / first, expected, 0.05);
    }
}

TEST(Synth, SubjectsStayInsideThePlacementBox) {
    for (int label = 0; label < kNumActivities; ++label) {
        const auto s = synth::generate_sample(ActivityLabel{label}, {LocationCode::CC, 1 + label % 10},
                                              30.0 * label, 17);
        for (int m = 0; m < 2; ++m) {
            for (int t = 0; t < 91; t += 10) {
                const double depth = s.at(m, t, Pelvis, 2);
                EXPECT_GT(depth, 1000.0);
                EXPECT_LT(depth, 4000.0);
                // Inside a 6 m camera frustum: lateral offset within the depth.
                EXPECT_LT(std::abs(s.at(m, t, Pelvis, 0)), depth);
            }
        }
    }
}

TEST(Synth, DatasetCountsAndConformance) {
    synth::SynthConfig c;
    c.labels = {0, 5, 11};
    c.pairs_per_location = 2;
    c.repetitions = 3;
    c.locations = {LocationCode::CM, LocationCode::CL};
    testing::TempDir dir("synth");
    const auto container = synth::generate_dataset(c, dir.path());
    EXPECT_EQ(container.annotation.size(), c.sample_count());
    EXPECT_EQ(c.sample_count(), 3u * 2u * 3u * 2u);
    const auto report = validate_dataset_tree(dir.path());
    EXPECT_TRUE(report.ok());
    EXPECT_EQ(report.counts.at("joints"), c.sample_count());
    // The tree and the in-memory generator agree.
    EXPECT_EQ(synth::generate_container(c), container);
}

TEST(Synth, OrientationsCoverTheCircle) {
    synth::SynthConfig c;  // 40 repetitions, 9 degree steps
    for (int pair = 1; pair <= 3; ++pair) {
        std::set<long> degrees;
        for (int rep = 0; rep < c.repetitions; ++rep) {
            const double d = synth::repetition_orientation(c, {LocationCode::CM, pair}, rep);
            EXPECT_GE(d, 0.0);
            EXPECT_LT(d, 360.0);
            degrees.insert(std::lround(d));
        }
        EXPECT_EQ(degrees.size(), 40u);
        for (long d = 0; d < 360; d += 9) EXPECT_TRUE(degrees.contains(d));
    }
}

TEST(Synth, ConfigJsonRoundTripAndRejection) {
    synth::SynthConfig c;
    c.labels = {1, 2};
    c.noise_std = 3.5;
    c.locations = {LocationCode::CL};
    const auto back = synth::config_from_json(synth::config_to_json(c));
    EXPECT_EQ(synth::config_to_json(back), synth::config_to_json(c));
    EXPECT_THROW(synth::config_from_json({{"nois_std", 1.0}}), ParseError);
    EXPECT_THROW(synth::config_from_json({{"occlusion_rate", 1.5}}), ParseError);
    EXPECT_THROW(synth::config_from_json({{"repetitions", 0}}), ParseError);
}

TEST(Synth, OcclusionRateIsRespected) {
    synth::SynthConfig c;
    c.occlusion_rate = 0.3;
    int occluded = 0;
    int total = 0;
    for (int label = 0; label < 12; ++label) {
        for (int rep = 0; rep < 40; ++rep) {
            const auto n = synth::repetition_name(ActivityLabel{label}, {LocationCode::CM, 1}, rep);
            occluded += synth::is_occluded(c, n) ? 1 : 0;
            ++total;
        }
    }
    const auto [lo, hi] = testing::binomial_band(total, 0.3, 0.999);
    EXPECT_GE(static_cast<double>(occluded) / total, lo);
    EXPECT_LE(static_cast<double>(occluded) / total, hi);
}

synth::SynthConfig baseline_config(double noise) {
    synth::SynthConfig c;
    c.labels = {0, 3, 5, 8, 11};
    c.repetitions = 2;
    c.locations = {LocationCode::CM, LocationCode::CC};
    c.noise_std = noise;
    c.occlusion_rate = 0.0;
    return c;
}

TEST(Baseline, ZeroNoiseIsSeparable) {
    const auto c = synth::generate_container(baseline_config(0.0));
    EXPECT_EQ(synth::nearest_centroid_baseline(c, c.xsub_train, c.xsub_value), 1.0);
}

TEST(Baseline, DefaultNoiseBeatsTwiceChance) {
    auto cfg = baseline_config(15.0);
    cfg.occlusion_rate = 0.1;
    const auto c = synth::generate_container(cfg);
    EXPECT_GT(synth::nearest_centroid_baseline(c, c.xsub_train, c.xsub_value), 2.0 / 5.0);
}

TEST(Baseline, ShuffledLabelsFallToChance) {
    // Permute which trajectory each training name carries: labels no longer match motion.
    auto c = synth::generate_container(baseline_config(0.0));
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < c.annotation.size(); ++i) at[c.annotation[i].frame_dir] = i;
    std::vector<int> order(c.xsub_train.size());
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t rng = 77;
    nn::shuffle(order, rng);
    std::vector<KeypointArray> moved;
    for (int i : order) moved.push_back(c.annotation[at[c.xsub_train[i]]].keypoint);
    for (std::size_t i = 0; i < c.xsub_train.size(); ++i) c.annotation[at[c.xsub_train[i]]].keypoint = moved[i];
    const double acc = synth::nearest_centroid_baseline(c, c.xsub_train, c.xsub_value);
    const auto [lo, hi] = testing::binomial_band(static_cast<int>(c.xsub_value.size()), 1.0 / 5.0, 0.99);
    EXPECT_GE(acc, lo);
    EXPECT_LE(acc, hi);
}

TEST(Baseline, EmptyOrMissingClassRejected) {
    const auto c = synth::generate_container(baseline_config(0.0));
    EXPECT_THROW(synth::nearest_centroid_baseline(c, {}, c.xsub_value), ContractError);
    std::vector<std::string> train;
    for (const auto& n : c.xsub_train) {
        if (parse_sample_name(n).activity_index != 1) train.push_back(n);
    }
    EXPECT_THROW(synth::nearest_centroid_baseline(c, train, c.xsub_value), ContractError);
}

TEST(Baseline, CanonicalTrajectoryIgnoresDyadHeading) {
    // Rotating a sample about the vertical axis leaves its canonical trajectory unchanged.
    synth::SampleOptions opt;
    opt.noise_std = 0.0;
    const auto seq = reduce_joints(synth::generate_sample(ActivityLabel{4}, {LocationCode::CM, 2}, 0.0, 5, opt));
    const auto base = synth::canonical_trajectory(KeypointArray::from_sequence(seq));
    for (double deg : {37.0, 180.0, 299.0}) {
        auto k = KeypointArray::from_sequence(seq);
        const double a = deg * 3.14159265358979323846 / 180.0;
        for (int m = 0; m < 2; ++m) {
            for (int t = 0; t < k.frames; ++t) {
                for (int v = 0; v < k.joints; ++v) {
                    const double x = k.at(m, t, v, 0);
                    const double z = k.at(m, t, v, 2);
                    k.values[k.offset(m, t, v, 0)] = std::cos(a) * x - std::sin(a) * z + 250.0;
                    k.values[k.offset(m, t, v, 2)] = std::sin(a) * x + std::cos(a) * z - 80.0;
                }
            }
        }
        const auto rotated = synth::canonical_trajectory(k);
        ASSERT_EQ(rotated.size(), base.size());
        for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(rotated[i], base[i], 1e-6);
    }
}

}  // namespace
}  // namespace duet
