#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/sample_name.hpp"
#include "duet/skeleton.hpp"

namespace duet {

enum class Modality { Rgb, Depth, Ir, Joints };

inline constexpr std::array<Modality, 4> kAllModalities = {Modality::Rgb, Modality::Depth,
                                                           Modality::Ir, Modality::Joints};

/// Directory name of a modality root: "rgb", "depth", "ir", "joints".
std::string_view modality_dir(Modality m) noexcept;

/// Extension of per-frame image files ("jpeg" or "png"); empty for joints.
std::string_view frame_extension(Modality m) noexcept;

struct ValidationEntry {
    std::string path;
    std::string rule;
    std::string message;

    friend bool operator==(const ValidationEntry&, const ValidationEntry&) = default;
};

struct ValidationReport {
    std::vector<ValidationEntry> errors;
    std::vector<ValidationEntry> warnings;
    std::map<std::string, std::size_t> counts;  // modality dir name -> sample count

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

struct TreeValidationOptions {
    int expected_frames = kFramesPerSample;
    /// Parse each joints CSV and report shape problems.
    bool check_csv_content = true;
};

/// Checks <root>/{rgb,depth,ir,joints}/<LLIISS>/<t1_t2>/ against the dataset layout.
/// Structural violations become report entries; only an unreadable root throws (IoError).
ValidationReport validate_dataset_tree(const std::filesystem::path& root,
                                       const TreeValidationOptions& options = {});

nlohmann::json report_to_json(const ValidationReport& report);

/// Directory holding one sample of one modality.
std::filesystem::path sample_dir(const std::filesystem::path& root, Modality m,
                                 const SampleName& name);

/// Writes <root>/joints/<LLIISS>/<t1_t2>/<name>.csv.
std::filesystem::path write_joints_sample(const std::filesystem::path& root, const SampleName& name,
                                          const SkeletonSequence& seq);

/// Writes empty frame files 0..frames-1 for an image modality.
void write_image_placeholders(const std::filesystem::path& root, Modality m, const SampleName& name,
                              int frames = kFramesPerSample);

/// Lists every sample in the joints modality with its CSV path, sorted by name.
std::vector<std::pair<SampleName, std::filesystem::path>> list_joint_samples(
    const std::filesystem::path& root);

}  // namespace duet
