#include <gtest/gtest.h>

#include <map>

#include "duet/errors.hpp"
#include "duet/taxonomy.hpp"

namespace duet {
namespace {

using F = KinesicFunction;

TEST(Taxonomy, KnownRows) {
    EXPECT_EQ(kinesic_function_of(0), F::Emblem);
    EXPECT_EQ(kinesic_function_of(8), F::Adaptor);
    EXPECT_EQ(activity_info(ActivityLabel{0}).name, "Waving in");
    EXPECT_EQ(activity_info(ActivityLabel{8}).name, "Scratching hair");
}

TEST(Taxonomy, OutOfRangeLabelIsDomainError) {
    EXPECT_THROW(kinesic_function_of(12), DomainError);
    EXPECT_THROW(kinesic_function_of(-1), DomainError);
    EXPECT_THROW(ActivityLabel{12}, DomainError);
}

TEST(Taxonomy, InverseImages) {
    EXPECT_EQ(labels_for_function(F::AffectDisplay),
              (std::set<ActivityLabel>{ActivityLabel{9}, ActivityLabel{10}, ActivityLabel{11}}));
    EXPECT_EQ(labels_for_function(F::Adaptor), (std::set<ActivityLabel>{ActivityLabel{8}}));
}

TEST(Taxonomy, InverseImagesPartitionTheLabels) {
    std::set<int> seen;
    std::size_t total = 0;
    for (auto f : kAllFunctions) {
        for (auto l : labels_for_function(f)) {
            seen.insert(l.value());
            ++total;
        }
    }
    EXPECT_EQ(total, 12u);  // disjoint
    EXPECT_EQ(seen.size(), 12u);
    EXPECT_EQ(*seen.begin(), 0);
    EXPECT_EQ(*seen.rbegin(), 11);
}

TEST(Taxonomy, FunctionAndInverseAgree) {
    for (int l = 0; l < kNumActivities; ++l) {
        const auto f = kinesic_function_of(l);
        EXPECT_TRUE(labels_for_function(f).contains(ActivityLabel{l}));
        for (auto g : kAllFunctions) {
            if (g != f) EXPECT_FALSE(labels_for_function(g).contains(ActivityLabel{l}));
        }
    }
}

TEST(Taxonomy, FunctionMultiplicities) {
    std::map<F, int> count;
    for (const auto& row : activity_table()) ++count[row.function];
    EXPECT_EQ(count[F::Emblem], 3);
    EXPECT_EQ(count[F::Illustrator], 2);
    EXPECT_EQ(count[F::Regulator], 3);
    EXPECT_EQ(count[F::Adaptor], 1);
    EXPECT_EQ(count[F::AffectDisplay], 3);
    for (int i = 0; i < kNumActivities; ++i) EXPECT_EQ(activity_table()[i].label, i);
}

TEST(Taxonomy, DenseFunctionIndex) {
    EXPECT_EQ(function_label_index(F::Regulator, {F::Emblem, F::Regulator}), 1);
    EXPECT_EQ(function_label_index(F::Emblem, {kAllFunctions.begin(), kAllFunctions.end()}), 0);
    EXPECT_THROW(function_label_index(F::Adaptor, {F::Illustrator, F::AffectDisplay}), DomainError);
}

TEST(Taxonomy, CanonicalOrderFollowsTableRows) {
    for (std::size_t i = 0; i + 1 < kAllFunctions.size(); ++i) {
        EXPECT_LT(static_cast<int>(kAllFunctions[i]), static_cast<int>(kAllFunctions[i + 1]));
    }
    // Regulators precede the adaptor, as in the label numbering.
    EXPECT_LT(static_cast<int>(F::Regulator), static_cast<int>(F::Adaptor));
}

TEST(Taxonomy, FunctionNamesRoundTrip) {
    for (auto f : kAllFunctions) EXPECT_EQ(parse_function_name(function_name(f)), f);
    EXPECT_THROW(parse_function_name("gesture"), DomainError);
}

}  // namespace
}  // namespace duet
