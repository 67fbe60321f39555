#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duet {

inline constexpr int kNumSubjects = 2;
inline constexpr int kFullJoints = 32;
inline constexpr int kReducedJoints = 25;
inline constexpr int kCoords = 3;
inline constexpr int kFramesPerSample = 91;
inline constexpr int kCsvColumns = 1 + kNumSubjects * kFullJoints * kCoords;  // 193

/// Body-tracking joint indices of the 32-joint layout.
enum Joint32 : int {
    Pelvis = 0, SpineNavel, SpineChest, Neck,
    ClavicleLeft, ShoulderLeft, ElbowLeft, WristLeft, HandLeft, HandTipLeft, ThumbLeft,
    ClavicleRight, ShoulderRight, ElbowRight, WristRight, HandRight, HandTipRight, ThumbRight,
    HipLeft, KneeLeft, AnkleLeft, FootLeft,
    HipRight, KneeRight, AnkleRight, FootRight,
    Head, Nose, EyeLeft, EarLeft, EyeRight, EarRight,
};

/// Parent of each joint in the 32-joint tree; the pelvis is its own root (-1).
const std::array<int, kFullJoints>& full_joint_parents() noexcept;
const std::array<std::string_view, kFullJoints>& full_joint_names() noexcept;

/// 32-layout indices kept by the 25-joint reduction, ascending. Drops both clavicles,
/// the nose, both eyes and both ears; what remains matches the common 25-joint body layout.
const std::array<int, kReducedJoints>& retained_joint_indices() noexcept;

/// Parent of each joint in the reduced layout (indices into the 25-joint order).
const std::array<int, kReducedJoints>& reduced_joint_parents() noexcept;

enum class JointLayout { Full32, Reduced25 };

inline constexpr int joint_count(JointLayout layout) noexcept {
    return layout == JointLayout::Full32 ? kFullJoints : kReducedJoints;
}

/// Two subjects' joint trajectories in camera-relative millimetres.
/// Storage is row-major [subject][frame][joint][xyz].
class SkeletonSequence {
public:
    SkeletonSequence() = default;
    SkeletonSequence(JointLayout layout, std::vector<std::int64_t> timestamps);
    SkeletonSequence(JointLayout layout, std::vector<std::int64_t> timestamps,
                     std::vector<double> coords);

    [[nodiscard]] JointLayout layout() const noexcept { return layout_; }
    [[nodiscard]] int num_subjects() const noexcept { return kNumSubjects; }
    [[nodiscard]] int num_frames() const noexcept { return static_cast<int>(timestamps_.size()); }
    [[nodiscard]] int num_joints() const noexcept { return joint_count(layout_); }

    [[nodiscard]] const std::vector<std::int64_t>& timestamps() const noexcept { return timestamps_; }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
    [[nodiscard]] std::span<double> coords() noexcept { return coords_; }

    [[nodiscard]] std::size_t offset(int m, int t, int v, int c = 0) const noexcept {
        return ((static_cast<std::size_t>(m) * num_frames() + t) * num_joints() + v) * kCoords + c;
    }
    [[nodiscard]] double at(int m, int t, int v, int c) const noexcept { return coords_[offset(m, t, v, c)]; }
    double& at(int m, int t, int v, int c) noexcept { return coords_[offset(m, t, v, c)]; }

    friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;

private:
    JointLayout layout_ = JointLayout::Full32;
    std::vector<std::int64_t> timestamps_;
    std::vector<double> coords_;
};

using Table = std::vector<std::vector<double>>;

/// Layout of one joints CSV: column 0 is the timestamp, then each subject's 32 joints as
/// consecutive (x, y, z) triples. Row counts other than 91 are accepted; a note is appended
/// to `warnings` when one is supplied.
SkeletonSequence parse_skeleton_csv(const Table& rows, std::vector<std::string>* warnings = nullptr);

/// Inverse of parse_skeleton_csv. Only the full 32-joint layout has a CSV form.
Table write_skeleton_csv(const SkeletonSequence& seq);

/// Comma-separated text with no header. Numbers are written in shortest round-trip form.
Table parse_csv_text(std::string_view text);
std::string format_csv_text(const Table& rows);

SkeletonSequence read_skeleton_csv_file(const std::filesystem::path& path,
                                        std::vector<std::string>* warnings = nullptr);
void write_skeleton_csv_file(const std::filesystem::path& path, const SkeletonSequence& seq);

/// Selects the 25 retained joints; coordinates are copied unchanged.
SkeletonSequence reduce_joints(const SkeletonSequence& seq);

}  // namespace duet
