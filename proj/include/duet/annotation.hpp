#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/sample_name.hpp"
#include "duet/skeleton.hpp"
#include "duet/taxonomy.hpp"

namespace duet {

/// Dense row-major [M][T][V][C] keypoint block as stored in the container.
struct KeypointArray {
    int subjects = kNumSubjects;
    int frames = 0;
    int joints = kReducedJoints;
    int coords = kCoords;
    std::vector<double> values;

    [[nodiscard]] std::size_t offset(int m, int t, int v, int c) const noexcept {
        return ((static_cast<std::size_t>(m) * frames + t) * joints + v) * coords + c;
    }
    [[nodiscard]] double at(int m, int t, int v, int c) const noexcept { return values[offset(m, t, v, c)]; }

    static KeypointArray from_sequence(const SkeletonSequence& seq);

    friend bool operator==(const KeypointArray&, const KeypointArray&) = default;
};

/// Dyad-centred copy: origin at the frame-0 midpoint of the two pelvises, rotated about the
/// vertical (y) axis so that subject 0's pelvis lies on -x and subject 1's on +x.
KeypointArray canonicalize_dyad(const KeypointArray& k);

/// One training record: reduced keypoints shaped [M][T][V=25][C=3].
struct SampleRecord {
    std::string frame_dir;
    ActivityLabel label;
    int total_frames = 0;
    KeypointArray keypoint;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

inline constexpr const char* kTrainSplitKey = "xsub_train";
inline constexpr const char* kValueSplitKey = "xsub_value";

struct AnnotationContainer {
    std::vector<std::string> xsub_train;
    std::vector<std::string> xsub_value;
    std::vector<SampleRecord> annotation;

    /// Index into `annotation` by frame_dir; throws ContractError if unknown.
    [[nodiscard]] const SampleRecord& record(const std::string& name) const;

    friend bool operator==(const AnnotationContainer&, const AnnotationContainer&) = default;
};

using PairKey = std::pair<LocationCode, int>;

/// Held-out rule: by subject pair (cross-subject) or by recording site (cross-location).
struct SplitRule {
    enum class Kind { CrossSubject, CrossLocation };
    Kind kind = Kind::CrossSubject;
    std::set<PairKey> test_pairs;
    LocationCode test_location = LocationCode::CC;

    /// Pairs CC..01 and CM..10 held out, as in the kinesics experiments.
    static SplitRule experiment_default();
    /// The six-pair cross-subject benchmark split.
    static SplitRule benchmark_cross_subject();
    static SplitRule cross_location(LocationCode test);
};

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

SplitResult split_cross_subject(const std::vector<std::string>& names,
                                const std::set<PairKey>& test_pairs);
SplitResult split_cross_location(const std::vector<std::string>& names, LocationCode test_location);
SplitResult apply_split(const std::vector<std::string>& names, const SplitRule& rule);

/// {"kind": "cross_subject", "test_pairs": [["CC", 1], ...]} or
/// {"kind": "cross_location", "test_location": "CC"}.
nlohmann::json split_rule_to_json(const SplitRule& rule);
/// Unknown keys, empty pair lists and bad codes are rejected with ParseError.
SplitRule split_rule_from_json(const nlohmann::json& j);

/// Labels come from each name's II field; split lists follow `rule`.
AnnotationContainer build_annotation_container(
    const std::vector<std::pair<SampleName, SkeletonSequence>>& samples, const SplitRule& rule);

/// Throws ContractError if the container breaks its invariants.
void check_container(const AnnotationContainer& c);

nlohmann::json serialize_container(const AnnotationContainer& c);
/// Throws ParseError naming the first schema violation.
AnnotationContainer deserialize_container(const nlohmann::json& doc);

/// A non-empty provenance object is stored under "provenance" and ignored on load.
void save_container(const std::filesystem::path& path, const AnnotationContainer& c,
                    const nlohmann::json& provenance = nlohmann::json::object());
AnnotationContainer load_container(const std::filesystem::path& path);

}  // namespace duet
