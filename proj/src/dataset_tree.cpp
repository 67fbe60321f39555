#include "duet/dataset_tree.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "duet/errors.hpp"

namespace fs = std::filesystem;

namespace duet {

std::string_view modality_dir(Modality m) noexcept {
    switch (m) {
        case Modality::Rgb: return "rgb";
        case Modality::Depth: return "depth";
        case Modality::Ir: return "ir";
        case Modality::Joints: return "joints";
    }
    return "";
}

std::string_view frame_extension(Modality m) noexcept {
    switch (m) {
        case Modality::Rgb: return "jpeg";
        case Modality::Depth:
        case Modality::Ir: return "png";
        case Modality::Joints: return "";
    }
    return "";
}

namespace {

std::vector<fs::directory_entry> sorted_entries(const fs::path& dir) {
    std::vector<fs::directory_entry> out;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        out.push_back(*it);
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
    return out;
}

class Validator {
public:
    Validator(const fs::path& root, const TreeValidationOptions& opt) : root_(root), opt_(opt) {}

    ValidationReport run() {
        std::error_code ec;
        if (!fs::is_directory(root_, ec)) {
            throw IoError("dataset root is not a readable directory: " + root_.string());
        }
        std::set<std::string> known;
        for (auto m : kAllModalities) known.emplace(modality_dir(m));
        for (const auto& e : sorted_entries(root_)) {
            const auto name = e.path().filename().string();
            if (!known.contains(name)) warn(e.path(), "unexpected-entry", "not a modality directory");
        }

        std::map<Modality, std::set<std::string>> samples;
        bool any = false;
        for (auto m : kAllModalities) {
            const auto dir = root_ / modality_dir(m);
            if (!fs::exists(dir)) {
                warn(dir, "modality-absent", "modality directory not present");
                continue;
            }
            if (!fs::is_directory(dir)) {
                error(dir, "modality-not-dir", "modality root is not a directory");
                continue;
            }
            any = true;
            samples[m] = scan_modality(m, dir);
            report_.counts[std::string(modality_dir(m))] = samples[m].size();
        }
        if (!any) error(root_, "no-modality", "none of rgb, depth, ir, joints is present");

        // Samples present in one modality but missing in another.
        std::set<std::string> all;
        for (const auto& [m, s] : samples) all.insert(s.begin(), s.end());
        for (const auto& [m, s] : samples) {
            for (const auto& name : all) {
                if (!s.contains(name)) {
                    warn(root_ / modality_dir(m), "modality-mismatch",
                         "sample " + name + " is absent from this modality");
                }
            }
        }

        auto by_path = [](const ValidationEntry& a, const ValidationEntry& b) {
            return std::tie(a.path, a.rule, a.message) < std::tie(b.path, b.rule, b.message);
        };
        std::sort(report_.errors.begin(), report_.errors.end(), by_path);
        std::sort(report_.warnings.begin(), report_.warnings.end(), by_path);
        return std::move(report_);
    }

private:
    void error(const fs::path& p, std::string rule, std::string msg) {
        report_.errors.push_back({p.generic_string(), std::move(rule), std::move(msg)});
    }
    void warn(const fs::path& p, std::string rule, std::string msg) {
        report_.warnings.push_back({p.generic_string(), std::move(rule), std::move(msg)});
    }

    std::set<std::string> scan_modality(Modality m, const fs::path& dir) {
        std::set<std::string> found;
        for (const auto& code_entry : sorted_entries(dir)) {
            const auto code_text = code_entry.path().filename().string();
            if (!code_entry.is_directory()) {
                error(code_entry.path(), "code-not-dir", "expected an LLIISS directory");
                continue;
            }
            SampleCode code;
            try {
                code = parse_sample_code(code_text);
            } catch (const ParseError& e) {
                error(code_entry.path(), "code", e.what());
                continue;
            }
            for (const auto& win_entry : sorted_entries(code_entry.path())) {
                if (!win_entry.is_directory()) {
                    error(win_entry.path(), "window-not-dir", "expected a t1_t2 directory");
                    continue;
                }
                std::pair<std::int64_t, std::int64_t> window;
                try {
                    window = parse_time_window(win_entry.path().filename().string());
                } catch (const ParseError& e) {
                    error(win_entry.path(), "time-window", e.what());
                    continue;
                }
                const SampleName name{code.location, code.activity_index, code.pair_index,
                                      window.first, window.second};
                if (m == Modality::Joints) {
                    check_joints(win_entry.path(), name);
                } else {
                    check_frames(m, win_entry.path());
                }
                found.insert(format_sample_name(name));
            }
        }
        return found;
    }

    void check_frames(Modality m, const fs::path& dir) {
        const std::string ext = "." + std::string(frame_extension(m));
        std::set<std::string> expected;
        for (int i = 0; i < opt_.expected_frames; ++i) expected.insert(std::to_string(i) + ext);
        std::set<std::string> present;
        for (const auto& f : sorted_entries(dir)) {
            const auto fname = f.path().filename().string();
            if (!expected.contains(fname) || !f.is_regular_file()) {
                error(f.path(), "unexpected-file", "not a frame file 0.." +
                                                       std::to_string(opt_.expected_frames - 1) + ext);
                continue;
            }
            present.insert(fname);
        }
        for (const auto& want : expected) {
            if (!present.contains(want)) error(dir / want, "frame-missing", "frame file missing");
        }
    }

    void check_joints(const fs::path& dir, const SampleName& name) {
        const std::string csv = format_sample_name(name) + ".csv";
        bool have = false;
        for (const auto& f : sorted_entries(dir)) {
            if (f.path().filename() == csv && f.is_regular_file()) {
                have = true;
                continue;
            }
            error(f.path(), "unexpected-file", "joints sample holds only " + csv);
        }
        if (!have) {
            error(dir / csv, "csv-missing", "joints csv missing");
            return;
        }
        if (!opt_.check_csv_content) return;
        try {
            std::vector<std::string> notes;
            auto seq = read_skeleton_csv_file(dir / csv, &notes);
            if (seq.num_frames() != opt_.expected_frames) {
                warn(dir / csv, "frame-count",
                     std::to_string(seq.num_frames()) + " frames, expected " +
                         std::to_string(opt_.expected_frames));
            }
        } catch (const FormatError& e) {
            error(dir / csv, "csv-format", e.what());
        } catch (const IoError& e) {
            error(dir / csv, "csv-unreadable", e.what());
        }
    }

    fs::path root_;
    TreeValidationOptions opt_;
    ValidationReport report_;
};

nlohmann::json entries_json(const std::vector<ValidationEntry>& v) {
    auto arr = nlohmann::json::array();
    for (const auto& e : v) arr.push_back({{"path", e.path}, {"rule", e.rule}, {"message", e.message}});
    return arr;
}

}  // namespace

ValidationReport validate_dataset_tree(const fs::path& root, const TreeValidationOptions& options) {
    return Validator(root, options).run();
}

nlohmann::json report_to_json(const ValidationReport& report) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [k, v] : report.counts) counts[k] = v;
    return {{"ok", report.ok()},
            {"errors", entries_json(report.errors)},
            {"warnings", entries_json(report.warnings)},
            {"counts", counts}};
}

fs::path sample_dir(const fs::path& root, Modality m, const SampleName& name) {
    return root / modality_dir(m) / format_sample_code(name.code()) /
           format_time_window(name.t_start, name.t_end);
}

fs::path write_joints_sample(const fs::path& root, const SampleName& name, const SkeletonSequence& seq) {
    const auto dir = sample_dir(root, Modality::Joints, name);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const auto path = dir / (format_sample_name(name) + ".csv");
    write_skeleton_csv_file(path, seq);
    return path;
}

void write_image_placeholders(const fs::path& root, Modality m, const SampleName& name, int frames) {
    if (m == Modality::Joints) throw ContractError("joints modality has no image frames");
    const auto dir = sample_dir(root, m, name);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (int i = 0; i < frames; ++i) {
        std::ofstream out(dir / (std::to_string(i) + "." + std::string(frame_extension(m))));
        if (!out) throw IoError("cannot write frame in " + dir.string());
    }
}

std::vector<std::pair<SampleName, fs::path>> list_joint_samples(const fs::path& root) {
    std::vector<std::pair<SampleName, fs::path>> out;
    const auto dir = root / modality_dir(Modality::Joints);
    if (!fs::is_directory(dir)) throw IoError("no joints directory under " + root.string());
    for (const auto& code_entry : sorted_entries(dir)) {
        if (!code_entry.is_directory()) continue;
        for (const auto& win_entry : sorted_entries(code_entry.path())) {
            if (!win_entry.is_directory()) continue;
            try {
                auto code = parse_sample_code(code_entry.path().filename().string());
                auto [t1, t2] = parse_time_window(win_entry.path().filename().string());
                SampleName name{code.location, code.activity_index, code.pair_index, t1, t2};
                auto csv = win_entry.path() / (format_sample_name(name) + ".csv");
                if (fs::is_regular_file(csv)) out.emplace_back(name, csv);
            } catch (const ParseError&) {
                continue;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

}  // namespace duet
