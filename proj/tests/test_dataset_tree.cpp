#include <gtest/gtest.h>

#include <fstream>

#include "duet/dataset_tree.hpp"
#include "duet/errors.hpp"
#include "duet/synthgen.hpp"
#include "test_util.hpp"

namespace duet {
namespace {

namespace fs = std::filesystem;

synth::SynthConfig small_config() {
    synth::SynthConfig c;
    c.labels = {0, 11};
    c.pairs_per_location = 1;
    c.repetitions = 2;
    c.locations = {LocationCode::CM};
    c.image_placeholders = true;
    return c;
}

class TreeTest : public ::testing::Test {
protected:
    void SetUp() override { synth::generate_dataset(small_config(), dir_.path()); }

    fs::path first_sample(Modality m) const {
        const auto name = synth::repetition_name(ActivityLabel{0}, {LocationCode::CM, 1}, 0);
        return sample_dir(dir_.path(), m, name);
    }

    testing::TempDir dir_{"tree"};
};

TEST_F(TreeTest, GeneratedTreeConforms) {
    const auto report = validate_dataset_tree(dir_.path());
    EXPECT_TRUE(report.ok());
    EXPECT_TRUE(report.errors.empty());
    EXPECT_TRUE(report.warnings.empty());
    for (auto m : kAllModalities) EXPECT_EQ(report.counts.at(std::string(modality_dir(m))), 4u);
}

TEST_F(TreeTest, MissingFrameIsOneTargetedError) {
    const auto frame = first_sample(Modality::Rgb) / "45.jpeg";
    ASSERT_TRUE(fs::exists(frame));
    fs::remove(frame);
    const auto report = validate_dataset_tree(dir_.path());
    ASSERT_EQ(report.errors.size(), 1u);
    EXPECT_EQ(report.errors[0].path, frame.generic_string());
    EXPECT_EQ(report.errors[0].rule, "frame-missing");
}

TEST_F(TreeTest, StrayFileIsOneTargetedError) {
    const auto stray = first_sample(Modality::Joints) / "notes.txt";
    std::ofstream(stray) << "x";
    const auto report = validate_dataset_tree(dir_.path());
    ASSERT_EQ(report.errors.size(), 1u);
    EXPECT_EQ(report.errors[0].path, stray.generic_string());
}

TEST_F(TreeTest, TruncatedCsvIsOneTargetedError) {
    const auto name = synth::repetition_name(ActivityLabel{0}, {LocationCode::CM, 1}, 0);
    const auto csv = first_sample(Modality::Joints) / (format_sample_name(name) + ".csv");
    std::ofstream(csv, std::ios::trunc) << "1,2,3\n";
    const auto report = validate_dataset_tree(dir_.path());
    ASSERT_EQ(report.errors.size(), 1u);
    EXPECT_EQ(report.errors[0].path, csv.generic_string());
    EXPECT_EQ(report.errors[0].rule, "csv-format");
}

TEST_F(TreeTest, ListsJointSamplesInNameOrder) {
    const auto samples = list_joint_samples(dir_.path());
    ASSERT_EQ(samples.size(), 4u);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        EXPECT_LT(format_sample_name(samples[i - 1].first), format_sample_name(samples[i].first));
    }
}

TEST_F(TreeTest, ReportJsonMirrorsReport) {
    const auto report = validate_dataset_tree(dir_.path());
    const auto j = report_to_json(report);
    EXPECT_TRUE(j.at("ok").get<bool>());
    EXPECT_EQ(j.at("counts").at("joints").get<int>(), 4);
}

TEST(DatasetTree, MissingRootThrowsIo) {
    EXPECT_THROW(validate_dataset_tree("/nonexistent/duet/root"), IoError);
}

TEST(DatasetTree, EmptyRootIsAnError) {
    testing::TempDir dir("empty");
    const auto report = validate_dataset_tree(dir.path());
    EXPECT_FALSE(report.ok());
}

TEST(DatasetTree, FullProtocolCardinality) {
    synth::SynthConfig full;
    EXPECT_EQ(full.sample_count(), 14'400u);
    EXPECT_EQ(3u * 12u * 10u * 40u, 14'400u);
}

}  // namespace
}  // namespace duet
