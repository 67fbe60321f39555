#include "duet/skeleton.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "duet/errors.hpp"

namespace duet {

const std::array<int, kFullJoints>& full_joint_parents() noexcept {
    static constexpr std::array<int, kFullJoints> parents = {
        -1, Pelvis, SpineNavel, SpineChest,
        SpineChest, ClavicleLeft, ShoulderLeft, ElbowLeft, WristLeft, HandLeft, WristLeft,
        SpineChest, ClavicleRight, ShoulderRight, ElbowRight, WristRight, HandRight, WristRight,
        Pelvis, HipLeft, KneeLeft, AnkleLeft,
        Pelvis, HipRight, KneeRight, AnkleRight,
        Neck, Head, Head, Head, Head, Head,
    };
    return parents;
}

const std::array<std::string_view, kFullJoints>& full_joint_names() noexcept {
    static constexpr std::array<std::string_view, kFullJoints> names = {
        "PELVIS", "SPINE_NAVEL", "SPINE_CHEST", "NECK",
        "CLAVICLE_LEFT", "SHOULDER_LEFT", "ELBOW_LEFT", "WRIST_LEFT", "HAND_LEFT",
        "HANDTIP_LEFT", "THUMB_LEFT",
        "CLAVICLE_RIGHT", "SHOULDER_RIGHT", "ELBOW_RIGHT", "WRIST_RIGHT", "HAND_RIGHT",
        "HANDTIP_RIGHT", "THUMB_RIGHT",
        "HIP_LEFT", "KNEE_LEFT", "ANKLE_LEFT", "FOOT_LEFT",
        "HIP_RIGHT", "KNEE_RIGHT", "ANKLE_RIGHT", "FOOT_RIGHT",
        "HEAD", "NOSE", "EYE_LEFT", "EAR_LEFT", "EYE_RIGHT", "EAR_RIGHT",
    };
    return names;
}

const std::array<int, kReducedJoints>& retained_joint_indices() noexcept {
    static constexpr std::array<int, kReducedJoints> retained = {
        Pelvis, SpineNavel, SpineChest, Neck,
        ShoulderLeft, ElbowLeft, WristLeft, HandLeft, HandTipLeft, ThumbLeft,
        ShoulderRight, ElbowRight, WristRight, HandRight, HandTipRight, ThumbRight,
        HipLeft, KneeLeft, AnkleLeft, FootLeft,
        HipRight, KneeRight, AnkleRight, FootRight,
        Head,
    };
    return retained;
}

const std::array<int, kReducedJoints>& reduced_joint_parents() noexcept {
    static const std::array<int, kReducedJoints> parents = [] {
        std::array<int, kFullJoints> to_reduced{};
        to_reduced.fill(-1);
        const auto& kept = retained_joint_indices();
        for (int i = 0; i < kReducedJoints; ++i) to_reduced[kept[i]] = i;

        std::array<int, kReducedJoints> out{};
        const auto& full = full_joint_parents();
        for (int i = 0; i < kReducedJoints; ++i) {
            // Walk up past dropped joints (the clavicles) to the nearest kept ancestor.
            int p = full[kept[i]];
            while (p >= 0 && to_reduced[p] < 0) p = full[p];
            out[i] = p < 0 ? -1 : to_reduced[p];
        }
        return out;
    }();
    return parents;
}

SkeletonSequence::SkeletonSequence(JointLayout layout, std::vector<std::int64_t> timestamps)
    : layout_(layout), timestamps_(std::move(timestamps)) {
    coords_.assign(static_cast<std::size_t>(kNumSubjects) * timestamps_.size() * joint_count(layout) *
                       kCoords,
                   0.0);
}

SkeletonSequence::SkeletonSequence(JointLayout layout, std::vector<std::int64_t> timestamps,
                                   std::vector<double> coords)
    : layout_(layout), timestamps_(std::move(timestamps)), coords_(std::move(coords)) {
    const auto expected =
        static_cast<std::size_t>(kNumSubjects) * timestamps_.size() * joint_count(layout) * kCoords;
    if (coords_.size() != expected) {
        throw ContractError("skeleton coordinate buffer has " + std::to_string(coords_.size()) +
                            " values, expected " + std::to_string(expected));
    }
}

SkeletonSequence parse_skeleton_csv(const Table& rows, std::vector<std::string>* warnings) {
    if (rows.empty()) throw FormatError("skeleton csv: no rows");
    std::vector<std::int64_t> stamps;
    stamps.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != static_cast<std::size_t>(kCsvColumns)) {
            throw FormatError("skeleton csv: row " + std::to_string(r) + " has " +
                              std::to_string(rows[r].size()) + " columns, expected " +
                              std::to_string(kCsvColumns));
        }
        const double ts = rows[r][0];
        if (!std::isfinite(ts) || ts != std::trunc(ts) || std::fabs(ts) > 9.0e15) {
            throw FormatError("skeleton csv: row " + std::to_string(r) +
                              " timestamp is not an integer millisecond value");
        }
        stamps.push_back(static_cast<std::int64_t>(ts));
        if (r > 0 && stamps[r] <= stamps[r - 1]) {
            throw FormatError("skeleton csv: timestamps not strictly increasing at row " +
                              std::to_string(r));
        }
    }
    if (warnings && rows.size() != static_cast<std::size_t>(kFramesPerSample)) {
        warnings->push_back("skeleton csv: " + std::to_string(rows.size()) + " frames, expected " +
                            std::to_string(kFramesPerSample));
    }

    SkeletonSequence seq(JointLayout::Full32, std::move(stamps));
    const int frames = seq.num_frames();
    for (int t = 0; t < frames; ++t) {
        const auto& row = rows[static_cast<std::size_t>(t)];
        for (int m = 0; m < kNumSubjects; ++m) {
            for (int v = 0; v < kFullJoints; ++v) {
                for (int c = 0; c < kCoords; ++c) {
                    seq.at(m, t, v, c) = row[1 + (m * kFullJoints + v) * kCoords + c];
                }
            }
        }
    }
    return seq;
}

Table write_skeleton_csv(const SkeletonSequence& seq) {
    if (seq.layout() != JointLayout::Full32) {
        throw ContractError("write_skeleton_csv: only the 32-joint layout is serialised");
    }
    Table rows(static_cast<std::size_t>(seq.num_frames()),
               std::vector<double>(static_cast<std::size_t>(kCsvColumns)));
    for (int t = 0; t < seq.num_frames(); ++t) {
        auto& row = rows[static_cast<std::size_t>(t)];
        row[0] = static_cast<double>(seq.timestamps()[static_cast<std::size_t>(t)]);
        for (int m = 0; m < kNumSubjects; ++m) {
            for (int v = 0; v < kFullJoints; ++v) {
                for (int c = 0; c < kCoords; ++c) {
                    row[1 + (m * kFullJoints + v) * kCoords + c] = seq.at(m, t, v, c);
                }
            }
        }
    }
    return rows;
}

Table parse_csv_text(std::string_view text) {
    Table rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (text.find_first_not_of("\r\n") == std::string_view::npos) break;
            throw FormatError("csv: empty line " + std::to_string(line_no));
        }
        std::vector<double> row;
        std::size_t pos = 0;
        while (true) {
            auto comma = line.find(',', pos);
            auto cell = line.substr(pos, comma == std::string_view::npos ? line.size() - pos : comma - pos);
            while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
            while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw FormatError("csv: line " + std::to_string(line_no) + " column " +
                                  std::to_string(row.size()) + ": not a number: '" +
                                  std::string(cell) + "'");
            }
            row.push_back(value);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_csv_text(const Table& rows) {
    std::string out;
    out.reserve(rows.size() * (rows.empty() ? 0 : rows[0].size()) * 10);
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[i]);
            out.append(buf, ptr);
        }
        out += '\n';
    }
    return out;
}

SkeletonSequence read_skeleton_csv_file(const std::filesystem::path& path,
                                        std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_skeleton_csv(parse_csv_text(ss.str()), warnings);
}

void write_skeleton_csv_file(const std::filesystem::path& path, const SkeletonSequence& seq) {
    const auto text = format_csv_text(write_skeleton_csv(seq));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

SkeletonSequence reduce_joints(const SkeletonSequence& seq) {
    if (seq.layout() != JointLayout::Full32) {
        throw ContractError("reduce_joints: input is not in the 32-joint layout");
    }
    SkeletonSequence out(JointLayout::Reduced25, seq.timestamps());
    const auto& kept = retained_joint_indices();
    for (int m = 0; m < kNumSubjects; ++m) {
        for (int t = 0; t < seq.num_frames(); ++t) {
            for (int v = 0; v < kReducedJoints; ++v) {
                for (int c = 0; c < kCoords; ++c) out.at(m, t, v, c) = seq.at(m, t, kept[v], c);
            }
        }
    }
    return out;
}

}  // namespace duet
