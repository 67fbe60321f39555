#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "duet/annotation.hpp"
#include "duet/sample_name.hpp"
#include "duet/skeleton.hpp"
#include "duet/taxonomy.hpp"

namespace duet::synth {

/// Kinematic tree over the 32-joint layout with a neutral standing pose.
/// Body frame: +x is the subject's left, +y up, +z forward; millimetres, floor at y = 0.
struct Rig {
    std::vector<std::pair<int, int>> bones;  // parent -> child
    std::vector<double> segment_lengths;     // one per bone, mm
    std::array<Eigen::Vector3d, kFullJoints> base_pose;

    static Rig standard(double scale = 1.0);
};

struct PairIdentity {
    LocationCode location = LocationCode::CM;
    int pair_index = 1;

    friend auto operator<=>(const PairIdentity&, const PairIdentity&) = default;
};

/// Optional per-sample knobs on top of the label template.
struct SampleOptions {
    double noise_std = 15.0;  // mm, per coordinate
    bool occluded = false;
    std::int64_t t_start = 0;  // timestamp of frame 0, ms
};

/// One 3-second dyadic clip (2 x 91 x 32 x 3). Pure function of its arguments.
SkeletonSequence generate_sample(ActivityLabel label, PairIdentity pair, double orientation_deg,
                                 std::uint64_t seed, const SampleOptions& options = {});

/// Inter-pelvis distance the hugging template prescribes at clip phase u in [0, 1],
/// as a fraction of the pair's resting distance.
double hug_distance_fraction(double u) noexcept;

struct SynthConfig {
    std::vector<int> labels = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    int pairs_per_location = 10;
    int repetitions = 40;
    std::vector<LocationCode> locations = {LocationCode::CM, LocationCode::CC, LocationCode::CL};
    double noise_std = 15.0;
    double rotation_step = 9.0;
    double occlusion_rate = 0.1;
    std::uint64_t seed = 7;
    /// Also write empty rgb/depth/ir frame files so the full four-modality layout exists.
    bool image_placeholders = false;

    /// Throws ContractError when a field is out of range.
    void validate() const;
    [[nodiscard]] std::size_t sample_count() const noexcept;
};

nlohmann::json config_to_json(const SynthConfig& c);
/// Unknown keys and ill-typed values are rejected with ParseError.
SynthConfig config_from_json(const nlohmann::json& j);

/// Orientation of repetition `rep` for a pair: rep * rotation_step in the pair's turning
/// direction, wrapped to [0, 360).
double repetition_orientation(const SynthConfig& c, PairIdentity pair, int rep);

/// Name of repetition `rep` in the pair's continuous recording.
SampleName repetition_name(ActivityLabel label, PairIdentity pair, int rep);

/// Was repetition `rep` of this sample drawn as occluded?
bool is_occluded(const SynthConfig& c, const SampleName& name);

struct GeneratedSample {
    SampleName name;
    SkeletonSequence sequence;  // 32-joint layout
};

/// Every sample of the configuration, in name order, without touching the filesystem.
std::vector<GeneratedSample> generate_samples(const SynthConfig& config);

/// Writes the joints tree under `root` and returns the matching annotation container.
AnnotationContainer generate_dataset(const SynthConfig& config, const std::filesystem::path& root,
                                     const SplitRule& split = SplitRule::experiment_default());

/// In-memory variant: container only.
AnnotationContainer generate_container(const SynthConfig& config,
                                       const SplitRule& split = SplitRule::experiment_default());

/// Pelvis-centred, heading-aligned, flattened trajectory used by the baseline.
std::vector<double> canonical_trajectory(const KeypointArray& k);

/// Nearest class-mean classifier over canonical trajectories; returns test accuracy.
double nearest_centroid_baseline(const AnnotationContainer& container,
                                 const std::vector<std::string>& train_names,
                                 const std::vector<std::string>& test_names);

}  // namespace duet::synth
