#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "duet/errors.hpp"
#include "duet/skeleton.hpp"
#include "duet/synthgen.hpp"
#include "test_util.hpp"

namespace duet {
namespace {

Table random_table(int rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> coord(0.0, 900.0);
    Table t(static_cast<std::size_t>(rows), std::vector<double>(kCsvColumns));
    for (int r = 0; r < rows; ++r) {
        t[r][0] = 1'000'000.0 + 33.0 * r;
        for (int c = 1; c < kCsvColumns; ++c) t[r][c] = coord(rng);
    }
    return t;
}

bool bit_equal(const Table& a, const Table& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r].size() != b[r].size()) return false;
        if (std::memcmp(a[r].data(), b[r].data(), a[r].size() * sizeof(double)) != 0) return false;
    }
    return true;
}

TEST(Skeleton, LayoutArithmetic) {
    EXPECT_EQ(kCsvColumns, 1 + 2 * (32 * 3));
    EXPECT_EQ(kCsvColumns, 193);
    EXPECT_EQ(kFramesPerSample, 91);
}

TEST(Skeleton, ParsesConformingTable) {
    const auto t = random_table(91, 1);
    std::vector<std::string> warnings;
    const auto seq = parse_skeleton_csv(t, &warnings);
    EXPECT_TRUE(warnings.empty());
    EXPECT_EQ(seq.num_subjects(), 2);
    EXPECT_EQ(seq.num_frames(), 91);
    EXPECT_EQ(seq.num_joints(), 32);
    EXPECT_EQ(seq.layout(), JointLayout::Full32);
    // Column 1 + 3v + c is subject 0; column 97 + 3v + c is subject 1.
    EXPECT_EQ(seq.at(0, 5, 7, 2), t[5][1 + 3 * 7 + 2]);
    EXPECT_EQ(seq.at(1, 90, 31, 0), t[90][97 + 3 * 31]);
    EXPECT_EQ(seq.timestamps()[3], static_cast<std::int64_t>(t[3][0]));
}

TEST(Skeleton, RejectsWrongWidth) {
    auto t = random_table(91, 2);
    for (auto& row : t) row.pop_back();
    EXPECT_THROW(parse_skeleton_csv(t), FormatError);
}

TEST(Skeleton, RejectsNonMonotoneTimestamps) {
    auto t = random_table(91, 3);
    t[40][0] = t[39][0];
    EXPECT_THROW(parse_skeleton_csv(t), FormatError);
}

TEST(Skeleton, OtherRowCountsWarn) {
    const auto t = random_table(80, 4);
    std::vector<std::string> warnings;
    const auto seq = parse_skeleton_csv(t, &warnings);
    EXPECT_EQ(seq.num_frames(), 80);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(Skeleton, TableRoundTripIsBitExact) {
    const auto t = random_table(91, 5);
    EXPECT_TRUE(bit_equal(write_skeleton_csv(parse_skeleton_csv(t)), t));
}

TEST(Skeleton, TextRoundTripIsBitExact) {
    auto t = random_table(91, 6);
    // Awkward values: subnormal, negative zero, extremes of magnitude.
    t[0][1] = 4.9406564584124654e-324;
    t[0][2] = -0.0;
    t[0][3] = 1.7976931348623157e308;
    t[0][4] = 0.1;
    const std::string text = format_csv_text(t);
    EXPECT_TRUE(bit_equal(parse_csv_text(text), t));
    EXPECT_EQ(format_csv_text(parse_csv_text(text)), text);
}

TEST(Skeleton, GeneratedSampleFileRoundTrip) {
    testing::TempDir dir("skel");
    const auto seq = synth::generate_sample(ActivityLabel{4}, {LocationCode::CL, 3}, 27.0, 11);
    write_skeleton_csv_file(dir / "a.csv", seq);
    EXPECT_EQ(read_skeleton_csv_file(dir / "a.csv"), seq);
}

TEST(Skeleton, ReduceKeepsRetainedJointsBitIdentical) {
    const auto seq = parse_skeleton_csv(random_table(91, 7));
    const auto red = reduce_joints(seq);
    EXPECT_EQ(red.num_joints(), 25);
    EXPECT_EQ(red.layout(), JointLayout::Reduced25);
    EXPECT_EQ(red.timestamps(), seq.timestamps());
    const auto& keep = retained_joint_indices();
    for (int m = 0; m < 2; ++m) {
        for (int t = 0; t < 91; ++t) {
            for (int v = 0; v < 25; ++v) {
                for (int c = 0; c < 3; ++c) {
                    const double a = red.at(m, t, v, c);
                    const double b = seq.at(m, t, keep[v], c);
                    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
                }
            }
        }
    }
}

TEST(Skeleton, RetainedIndicesAreAscendingAndDistinct) {
    const auto& keep = retained_joint_indices();
    for (std::size_t i = 1; i < keep.size(); ++i) EXPECT_LT(keep[i - 1], keep[i]);
    EXPECT_GE(keep.front(), 0);
    EXPECT_LT(keep.back(), kFullJoints);
}

TEST(Skeleton, LayoutGuards) {
    const auto red = reduce_joints(parse_skeleton_csv(random_table(91, 8)));
    EXPECT_THROW(reduce_joints(red), ContractError);
    EXPECT_THROW(write_skeleton_csv(red), ContractError);
}

TEST(Skeleton, ReducedParentsFormATree) {
    const auto& parents = reduced_joint_parents();
    int roots = 0;
    for (int v = 0; v < kReducedJoints; ++v) {
        if (parents[v] < 0) {
            ++roots;
            continue;
        }
        // Walking up always terminates at the root.
        int steps = 0;
        for (int u = v; u >= 0 && steps <= kReducedJoints; u = parents[u]) ++steps;
        EXPECT_LE(steps, kReducedJoints);
    }
    EXPECT_EQ(roots, 1);
}

}  // namespace
}  // namespace duet
