#include "duet/annotation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "duet/errors.hpp"

namespace duet {

KeypointArray KeypointArray::from_sequence(const SkeletonSequence& seq) {
    KeypointArray k;
    k.subjects = seq.num_subjects();
    k.frames = seq.num_frames();
    k.joints = seq.num_joints();
    k.coords = kCoords;
    k.values.assign(seq.coords().begin(), seq.coords().end());
    return k;
}

KeypointArray canonicalize_dyad(const KeypointArray& k) {
    if (k.subjects != kNumSubjects || k.frames < 1 || k.coords != kCoords) {
        throw ContractError("canonicalize_dyad: expects two subjects and xyz coordinates");
    }
    constexpr int pelvis = 0;  // first joint in both layouts
    const double cx = 0.5 * (k.at(0, 0, pelvis, 0) + k.at(1, 0, pelvis, 0));
    const double cy = 0.5 * (k.at(0, 0, pelvis, 1) + k.at(1, 0, pelvis, 1));
    const double cz = 0.5 * (k.at(0, 0, pelvis, 2) + k.at(1, 0, pelvis, 2));
    const double alpha = std::atan2(k.at(1, 0, pelvis, 2) - k.at(0, 0, pelvis, 2),
                                    k.at(1, 0, pelvis, 0) - k.at(0, 0, pelvis, 0));
    const double ca = std::cos(alpha);
    const double sa = std::sin(alpha);
    KeypointArray out = k;
    for (std::size_t i = 0; i < k.values.size(); i += kCoords) {
        const double x = k.values[i] - cx;
        const double z = k.values[i + 2] - cz;
        out.values[i] = x * ca + z * sa;
        out.values[i + 1] = k.values[i + 1] - cy;
        out.values[i + 2] = -x * sa + z * ca;
    }
    return out;
}

const SampleRecord& AnnotationContainer::record(const std::string& name) const {
    for (const auto& r : annotation) {
        if (r.frame_dir == name) return r;
    }
    throw ContractError("sample not in annotation: " + name);
}

SplitRule SplitRule::experiment_default() {
    SplitRule r;
    r.kind = Kind::CrossSubject;
    r.test_pairs = {{LocationCode::CC, 1}, {LocationCode::CM, 10}};
    return r;
}

SplitRule SplitRule::benchmark_cross_subject() {
    SplitRule r;
    r.kind = Kind::CrossSubject;
    r.test_pairs = {{LocationCode::CC, 5}, {LocationCode::CC, 7}, {LocationCode::CL, 1},
                    {LocationCode::CL, 5}, {LocationCode::CM, 6}, {LocationCode::CM, 9}};
    return r;
}

SplitRule SplitRule::cross_location(LocationCode test) {
    SplitRule r;
    r.kind = Kind::CrossLocation;
    r.test_location = test;
    return r;
}

nlohmann::json split_rule_to_json(const SplitRule& rule) {
    if (rule.kind == SplitRule::Kind::CrossLocation) {
        return {{"kind", "cross_location"}, {"test_location", std::string(location_text(rule.test_location))}};
    }
    auto pairs = nlohmann::json::array();
    for (const auto& [loc, pair] : rule.test_pairs) pairs.push_back({std::string(location_text(loc)), pair});
    return {{"kind", "cross_subject"}, {"test_pairs", pairs}};
}

SplitRule split_rule_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("split rule: expected an object");
    for (const auto& [key, val] : j.items()) {
        if (key != "kind" && key != "test_pairs" && key != "test_location") {
            throw ParseError("split rule: unknown key \"" + key + "\"");
        }
    }
    const std::string kind = j.value("kind", std::string("cross_subject"));
    try {
        if (kind == "cross_location") {
            if (j.contains("test_pairs")) throw ParseError("split rule: test_pairs given for cross_location");
            return SplitRule::cross_location(parse_location(j.at("test_location").get<std::string>()));
        }
        if (kind != "cross_subject") throw ParseError("split rule: unknown kind \"" + kind + "\"");
        if (j.contains("test_location")) throw ParseError("split rule: test_location given for cross_subject");
        SplitRule r;
        r.kind = SplitRule::Kind::CrossSubject;
        for (const auto& p : j.at("test_pairs")) {
            if (!p.is_array() || p.size() != 2) throw ParseError("split rule: a test pair is not [code, index]");
            const int idx = p[1].get<int>();
            if (idx < kMinPairIndex || idx > kMaxPairIndex) throw ParseError("split rule: pair index outside 1..10");
            r.test_pairs.emplace(parse_location(p[0].get<std::string>()), idx);
        }
        if (r.test_pairs.empty()) throw ParseError("split rule: no test pairs");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("split rule: ") + e.what());
    }
}

SplitResult split_cross_subject(const std::vector<std::string>& names,
                                const std::set<PairKey>& test_pairs) {
    if (test_pairs.empty()) throw ContractError("split_cross_subject: no test pairs given");
    SplitResult out;
    for (const auto& n : names) {
        const auto s = parse_sample_name(n);
        (test_pairs.contains({s.location, s.pair_index}) ? out.test : out.train).push_back(n);
    }
    return out;
}

SplitResult split_cross_location(const std::vector<std::string>& names, LocationCode test_location) {
    SplitResult out;
    for (const auto& n : names) {
        (parse_sample_name(n).location == test_location ? out.test : out.train).push_back(n);
    }
    return out;
}

SplitResult apply_split(const std::vector<std::string>& names, const SplitRule& rule) {
    return rule.kind == SplitRule::Kind::CrossSubject ? split_cross_subject(names, rule.test_pairs)
                                                      : split_cross_location(names, rule.test_location);
}

AnnotationContainer build_annotation_container(
    const std::vector<std::pair<SampleName, SkeletonSequence>>& samples, const SplitRule& rule) {
    AnnotationContainer c;
    std::unordered_set<std::string> seen;
    std::vector<std::string> names;
    for (const auto& [name, seq] : samples) {
        auto text = format_sample_name(name);
        if (!seen.insert(text).second) throw ContractError("duplicate sample name: " + text);
        if (seq.layout() != JointLayout::Reduced25) {
            throw ContractError("sample " + text + " is not in the 25-joint layout");
        }
        SampleRecord r;
        r.frame_dir = text;
        r.label = activity_label_of(name);
        r.total_frames = seq.num_frames();
        r.keypoint = KeypointArray::from_sequence(seq);
        c.annotation.push_back(std::move(r));
        names.push_back(std::move(text));
    }
    auto split = apply_split(names, rule);
    c.xsub_train = std::move(split.train);
    c.xsub_value = std::move(split.test);
    return c;
}

void check_container(const AnnotationContainer& c) {
    std::unordered_map<std::string, int> uses;
    for (const auto& r : c.annotation) {
        if (!uses.emplace(r.frame_dir, 0).second) {
            throw ContractError("annotation lists " + r.frame_dir + " twice");
        }
        if (r.total_frames != r.keypoint.frames) {
            throw ContractError(r.frame_dir + ": total_frames disagrees with keypoint T");
        }
        if (activity_label_of(parse_sample_name(r.frame_dir)) != r.label) {
            throw ContractError(r.frame_dir + ": label disagrees with activity index");
        }
    }
    for (const auto* list : {&c.xsub_train, &c.xsub_value}) {
        for (const auto& n : *list) {
            auto it = uses.find(n);
            if (it == uses.end()) throw ContractError("split lists unknown sample " + n);
            if (++it->second > 1) throw ContractError("sample " + n + " appears in more than one split slot");
        }
    }
    for (const auto& [n, k] : uses) {
        if (k == 0) throw ContractError("sample " + n + " is in no split list");
    }
}

namespace {

nlohmann::json keypoints_json(const KeypointArray& k) {
    auto subjects = nlohmann::json::array();
    for (int m = 0; m < k.subjects; ++m) {
        auto frames = nlohmann::json::array();
        for (int t = 0; t < k.frames; ++t) {
            auto joints = nlohmann::json::array();
            for (int v = 0; v < k.joints; ++v) {
                auto xyz = nlohmann::json::array();
                for (int c = 0; c < k.coords; ++c) xyz.push_back(k.at(m, t, v, c));
                joints.push_back(std::move(xyz));
            }
            frames.push_back(std::move(joints));
        }
        subjects.push_back(std::move(frames));
    }
    return subjects;
}

[[noreturn]] void schema_fail(const std::string& where, const std::string& rule) {
    throw ParseError("container schema: " + where + ": " + rule);
}

const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) schema_fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_fail(where, std::string("missing key \"") + key + "\"");
    return *it;
}

std::vector<std::string> name_list(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array()) schema_fail(where, "expected an array of sample names");
    std::vector<std::string> out;
    for (const auto& e : arr) {
        if (!e.is_string()) schema_fail(where, "non-string entry");
        out.push_back(e.get<std::string>());
    }
    return out;
}

KeypointArray keypoints_from_json(const nlohmann::json& j, const std::string& where) {
    KeypointArray k;
    if (!j.is_array() || j.size() != static_cast<std::size_t>(kNumSubjects)) {
        schema_fail(where, "keypoint M dimension must be 2");
    }
    k.subjects = kNumSubjects;
    if (!j[0].is_array() || j[0].empty()) schema_fail(where, "keypoint T dimension must be positive");
    k.frames = static_cast<int>(j[0].size());
    k.joints = kReducedJoints;
    k.coords = kCoords;
    k.values.reserve(static_cast<std::size_t>(k.subjects) * k.frames * k.joints * k.coords);
    for (const auto& frames : j) {
        if (!frames.is_array() || frames.size() != static_cast<std::size_t>(k.frames)) {
            schema_fail(where, "keypoint T dimension differs between subjects");
        }
        for (const auto& joints : frames) {
            if (!joints.is_array() || joints.size() != static_cast<std::size_t>(kReducedJoints)) {
                schema_fail(where, "keypoint V dimension must be 25");
            }
            for (const auto& xyz : joints) {
                if (!xyz.is_array() || xyz.size() != static_cast<std::size_t>(kCoords)) {
                    schema_fail(where, "keypoint C dimension must be 3");
                }
                for (const auto& x : xyz) {
                    if (!x.is_number()) schema_fail(where, "keypoint value is not a number");
                    k.values.push_back(x.get<double>());
                }
            }
        }
    }
    return k;
}

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) throw ContractError("container keypoints must be finite");
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

nlohmann::json serialize_container(const AnnotationContainer& c) {
    nlohmann::json doc;
    doc["split"] = {{kTrainSplitKey, c.xsub_train}, {kValueSplitKey, c.xsub_value}};
    auto ann = nlohmann::json::array();
    for (const auto& r : c.annotation) {
        ann.push_back({{"frame_dir", r.frame_dir},
                       {"label", r.label.value()},
                       {"total_frames", r.total_frames},
                       {"keypoint", keypoints_json(r.keypoint)}});
    }
    doc["annotation"] = std::move(ann);
    return doc;
}

AnnotationContainer deserialize_container(const nlohmann::json& doc) {
    AnnotationContainer c;
    const auto& split = member(doc, "split", "document");
    c.xsub_train = name_list(member(split, kTrainSplitKey, "split"), kTrainSplitKey);
    c.xsub_value = name_list(member(split, kValueSplitKey, "split"), kValueSplitKey);
    const auto& ann = member(doc, "annotation", "document");
    if (!ann.is_array()) schema_fail("annotation", "expected an array");
    for (std::size_t i = 0; i < ann.size(); ++i) {
        const std::string where = "annotation[" + std::to_string(i) + "]";
        const auto& e = ann[i];
        SampleRecord r;
        const auto& fd = member(e, "frame_dir", where);
        if (!fd.is_string()) schema_fail(where, "frame_dir is not a string");
        r.frame_dir = fd.get<std::string>();
        SampleName name;
        try {
            name = parse_sample_name(r.frame_dir);
        } catch (const ParseError& err) {
            schema_fail(where, std::string("bad frame_dir: ") + err.what());
        }
        const auto& lab = member(e, "label", where);
        if (!lab.is_number_integer()) schema_fail(where, "label is not an integer");
        const int label = lab.get<int>();
        if (label < 0 || label >= kNumActivities) schema_fail(where, "label outside 0..11");
        r.label = ActivityLabel{label};
        if (r.label != activity_label_of(name)) schema_fail(where, "label disagrees with frame_dir");
        const auto& tf = member(e, "total_frames", where);
        if (!tf.is_number_integer()) schema_fail(where, "total_frames is not an integer");
        r.total_frames = tf.get<int>();
        r.keypoint = keypoints_from_json(member(e, "keypoint", where), where);
        if (r.total_frames != r.keypoint.frames) schema_fail(where, "total_frames disagrees with keypoint T");
        c.annotation.push_back(std::move(r));
    }
    try {
        check_container(c);
    } catch (const ContractError& err) {
        schema_fail("split", err.what());
    }
    return c;
}

void save_container(const std::filesystem::path& path, const AnnotationContainer& c,
                    const nlohmann::json& provenance) {
    // Streamed by hand: the DOM for a full dataset would dwarf the data itself.
    std::string out;
    auto names = [&](const std::vector<std::string>& v) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += nlohmann::json(v[i]).dump();
        }
        out += ']';
    };
    out += '{';
    if (!provenance.empty()) out += "\"provenance\":" + provenance.dump() + ",\n";
    out += "\"split\":{\"xsub_train\":";
    names(c.xsub_train);
    out += ",\"xsub_value\":";
    names(c.xsub_value);
    out += "},\"annotation\":[";
    for (std::size_t i = 0; i < c.annotation.size(); ++i) {
        const auto& r = c.annotation[i];
        if (i) out += ',';
        out += "\n{\"frame_dir\":" + nlohmann::json(r.frame_dir).dump() +
               ",\"label\":" + std::to_string(r.label.value()) +
               ",\"total_frames\":" + std::to_string(r.total_frames) + ",\"keypoint\":";
        const auto& k = r.keypoint;
        out += '[';
        for (int m = 0; m < k.subjects; ++m) {
            if (m) out += ',';
            out += '[';
            for (int t = 0; t < k.frames; ++t) {
                if (t) out += ',';
                out += '[';
                for (int v = 0; v < k.joints; ++v) {
                    if (v) out += ',';
                    out += '[';
                    for (int cc = 0; cc < k.coords; ++cc) {
                        if (cc) out += ',';
                        append_number(out, k.at(m, t, v, cc));
                    }
                    out += ']';
                }
                out += ']';
            }
            out += ']';
        }
        out += "]}";
    }
    out += "\n]}\n";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << out;
    if (!f) throw IoError("write failed for " + path.string());
}

AnnotationContainer load_container(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("container is not valid JSON: ") + e.what());
    }
    return deserialize_container(doc);
}

}  // namespace duet
