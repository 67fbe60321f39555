#include "duet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "duet/errors.hpp"
#include "duet/graph.hpp"
#include "duet/hash.hpp"
#include "duet/taxonomy.hpp"

namespace duet {

namespace {

constexpr const char* kResultsHeader = "experiment,num_interactions,labels,stgcn_acc,cnn_acc";

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

int parse_int(const std::string& s, const char* what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw FormatError(std::string("results: bad ") + what + " \"" + s + "\"");
    }
    if (used != s.size()) throw FormatError(std::string("results: bad ") + what + " \"" + s + "\"");
    return v;
}

double parse_accuracy(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw FormatError("results: bad accuracy \"" + s + "\"");
    }
    if (used != s.size() || !std::isfinite(v) || v < 0 || v > 100) {
        throw FormatError("results: bad accuracy \"" + s + "\"");
    }
    return v;
}

std::string format_accuracy(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using LabelIndex = std::unordered_map<std::string, int>;

LabelIndex label_index(const AnnotationContainer& c) {
    LabelIndex out;
    out.reserve(c.annotation.size());
    for (const auto& r : c.annotation) out.emplace(r.frame_dir, r.label.value());
    return out;
}

int label_of(const LabelIndex& index, const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw ContractError("sample not in annotation: " + name);
    return it->second;
}

std::vector<std::string> filter_names(const LabelIndex& index, const std::vector<std::string>& names,
                                      const std::set<int>& labels) {
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (labels.contains(label_of(index, n))) out.push_back(n);
    }
    return out;
}

std::vector<int> functions_of(const LabelIndex& index, const std::vector<std::string>& names) {
    std::vector<int> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(static_cast<int>(kinesic_function_of(label_of(index, n))));
    return out;
}

}  // namespace

void SubsetSpec::validate() const {
    if (labels.size() < 2 || labels.size() > static_cast<std::size_t>(kNumActivities)) {
        throw ContractError("subset " + std::to_string(experiment_id) + ": needs 2 to 12 labels");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= kNumActivities) {
            throw ContractError("subset " + std::to_string(experiment_id) + ": label out of range");
        }
        if (i > 0 && labels[i] <= labels[i - 1]) {
            throw ContractError("subset " + std::to_string(experiment_id) + ": labels not strictly increasing");
        }
    }
}

void SuiteManifest::validate() const {
    if (experiments.empty()) throw ContractError("manifest: no experiments");
    std::set<int> ids;
    for (const auto& e : experiments) {
        e.validate();
        if (!ids.insert(e.experiment_id).second) {
            throw ContractError("manifest: duplicate experiment id " + std::to_string(e.experiment_id));
        }
    }
}

bool operator==(const ExperimentResult& a, const ExperimentResult& b) {
    const auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return a.experiment_id == b.experiment_id && a.labels == b.labels && a.failed == b.failed &&
           same(a.stgcn_accuracy, b.stgcn_accuracy) && same(a.cnn_accuracy, b.cnn_accuracy);
}

SuiteManifest table5_manifest() {
    static const std::vector<std::vector<int>> rows = {
        {0, 1, 3, 4, 5, 8, 9, 10},
        {0, 1, 3, 6, 7, 8, 10},
        {0, 1, 3, 6, 8, 10},
        {2, 3, 4, 5, 8, 9, 10, 11},
        {0, 2, 3, 5, 7, 8, 11},
        {0, 4, 5, 6, 8, 11},
        {1, 3, 4, 6, 8, 10, 11},
        {0, 2, 3, 4, 7, 8, 11},
        {2, 3, 5, 8, 9},
        {1, 4, 5, 8, 9, 10},
        {0, 2, 3, 6, 7, 8, 10, 11},
        {2, 3, 4, 5, 6, 8, 9},
        {0, 1, 3, 6, 8, 11},
        {0, 1, 2, 3, 4, 6, 8, 9, 10, 11},
        {0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 11},
        {0, 1, 2, 3, 4, 7, 8, 9, 10, 11},
        {1, 2, 3, 5, 8, 10, 11},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
        {1, 3, 5, 8, 10},
        {1, 4, 6, 8, 10},
        {0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11},
        {0, 4, 7, 8, 9, 11},
        {0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
        {0, 1, 2, 3, 5, 7, 8, 9, 10, 11},
        {0, 1, 2, 3, 4, 5, 7, 8, 10, 11},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
        {2, 3, 4, 5, 6, 7, 8, 11},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
        {2, 3, 6, 8, 10},
    };
    SuiteManifest m;
    for (std::size_t i = 0; i < rows.size(); ++i) m.experiments.push_back({static_cast<int>(i), rows[i]});
    return m;
}

SubsetSpec sample_random_subset(std::uint64_t& rng, int experiment_id, int min_size, int max_size) {
    if (min_size < 2 || max_size > kNumActivities || min_size > max_size) {
        throw ContractError("random subset: size bounds must satisfy 2 <= min <= max <= 12");
    }
    for (;;) {
        const int span = max_size - min_size + 1;
        const int size = min_size + std::min(span - 1, static_cast<int>(nn::uniform01(rng) * span));
        std::vector<int> pool(kNumActivities);
        std::iota(pool.begin(), pool.end(), 0);
        // Partial Fisher-Yates: the first `size` slots are a uniform combination.
        for (int i = 0; i < size; ++i) {
            const int remaining = kNumActivities - i;
            const int j = i + std::min(remaining - 1, static_cast<int>(nn::uniform01(rng) * remaining));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> labels(pool.begin(), pool.begin() + size);
        std::sort(labels.begin(), labels.end());
        std::set<KinesicFunction> functions;
        for (int l : labels) functions.insert(kinesic_function_of(l));
        if (functions.size() >= 2) return {experiment_id, std::move(labels)};
    }
}

SuiteManifest random_manifest(std::uint64_t seed, int count, int min_size, int max_size) {
    if (count < 1) throw ContractError("random manifest: count < 1");
    SuiteManifest m;
    m.suite_seed = seed;
    std::uint64_t rng = splitmix64(seed ^ 0x5b5e7ULL);
    for (int i = 0; i < count; ++i) m.experiments.push_back(sample_random_subset(rng, i, min_size, max_size));
    return m;
}

namespace {

ExperimentResult run_on_split(const SubsetSpec& spec, const AnnotationContainer& container,
                              const std::vector<std::string>& all_train, const std::vector<std::string>& all_test,
                              const ExperimentConfig& config, std::uint64_t seed) {
    try {
        spec.validate();
        const std::set<int> labels(spec.labels.begin(), spec.labels.end());
        const LabelIndex index = label_index(container);
        const auto train = filter_names(index, all_train, labels);
        const auto test = filter_names(index, all_test, labels);
        std::set<int> covered;
        for (const auto& n : train) covered.insert(label_of(index, n));
        if (covered != labels) throw ContractError("training split does not cover every subset label");
        if (test.empty()) throw ContractError("no test samples for the subset");

        StgcnConfig backbone = config.backbone;
        backbone.seed = seed;
        const SkeletonGraph graph = build_graph(backbone.partition);
        const StgcnTrainResult stage1 = train_stgcn(backbone, graph, container, train, test);

        const nn::Matrix f_train = extract_features(stage1.model, container, train);
        const nn::Matrix f_test = extract_features(stage1.model, container, test);
        HeadConfig head = config.head;
        head.seed = splitmix64(seed);
        const HeadTrainResult stage2 =
            head_train(head, f_train, functions_of(index, train), f_test, functions_of(index, test));

        return {spec.experiment_id, spec.labels, 100.0 * stage1.val_accuracy, 100.0 * stage2.val_accuracy, false,
                {}};
    } catch (const std::exception& e) {
        throw ExperimentError(spec.experiment_id, e.what());
    }
}

}  // namespace

ExperimentResult run_experiment(const SubsetSpec& spec, const AnnotationContainer& container,
                                const ExperimentConfig& config, std::uint64_t seed) {
    return run_on_split(spec, container, container.xsub_train, container.xsub_value, config, seed);
}

std::vector<ExperimentResult> run_suite(const SuiteManifest& manifest, const AnnotationContainer& container,
                                        const ExperimentConfig& config, const ResultCallback& on_result) {
    manifest.validate();
    std::vector<std::string> names;
    names.reserve(container.annotation.size());
    for (const auto& r : container.annotation) names.push_back(r.frame_dir);
    const SplitResult parts = apply_split(names, manifest.split);

    std::vector<SubsetSpec> order = manifest.experiments;
    std::sort(order.begin(), order.end(),
              [](const SubsetSpec& a, const SubsetSpec& b) { return a.experiment_id < b.experiment_id; });
    std::vector<ExperimentResult> results;
    for (const auto& spec : order) {
        const std::uint64_t seed = manifest.suite_seed ^ static_cast<std::uint64_t>(spec.experiment_id);
        try {
            results.push_back(run_on_split(spec, container, parts.train, parts.test, config, seed));
        } catch (const ExperimentError& e) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            results.push_back({spec.experiment_id, spec.labels, nan, nan, true, e.what()});
        }
        if (on_result) on_result(results.back());
    }
    return results;
}

std::string results_csv(const std::vector<ExperimentResult>& results) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const auto& r : results) {
        out += std::to_string(r.experiment_id) + ',' + std::to_string(r.labels.size()) + ',';
        for (std::size_t i = 0; i < r.labels.size(); ++i) {
            if (i > 0) out += ' ';
            out += std::to_string(r.labels[i]);
        }
        out += ',' + format_accuracy(r.failed ? std::nan("") : r.stgcn_accuracy);
        out += ',' + format_accuracy(r.failed ? std::nan("") : r.cnn_accuracy);
        out += '\n';
    }
    return out;
}

std::vector<ExperimentResult> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool got = false;
    while ((got = static_cast<bool>(std::getline(in, line))) && line.starts_with('#')) {
    }
    if (!got || split_line(line, ',') != split_line(kResultsHeader, ',')) {
        throw FormatError("results: missing or wrong header");
    }
    std::vector<ExperimentResult> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line, ',');
        if (cells.size() != 5) throw FormatError("results: expected 5 cells in \"" + line + "\"");
        ExperimentResult r;
        r.experiment_id = parse_int(cells[0], "experiment id");
        const int count = parse_int(cells[1], "interaction count");
        for (const auto& tok : split_line(cells[2], ' ')) {
            if (!tok.empty()) r.labels.push_back(parse_int(tok, "label"));
        }
        if (static_cast<int>(r.labels.size()) != count) throw FormatError("results: label count disagrees");
        r.stgcn_accuracy = parse_accuracy(cells[3]);
        r.cnn_accuracy = parse_accuracy(cells[4]);
        if (std::isnan(r.stgcn_accuracy) != std::isnan(r.cnn_accuracy)) {
            throw FormatError("results: half-failed row for experiment " + cells[0]);
        }
        r.failed = std::isnan(r.stgcn_accuracy);
        out.push_back(std::move(r));
    }
    return out;
}

stats::AccuracyPairs accuracy_pairs(const std::vector<ExperimentResult>& results) {
    stats::AccuracyPairs p;
    for (const auto& r : results) {
        if (!r.failed) p.pairs.emplace_back(r.stgcn_accuracy, r.cnn_accuracy);
    }
    return p;
}

SuiteManifest manifest_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("manifest: expected an object");
    int sources = 0;
    for (const auto& [key, val] : j.items()) {
        if (key == "experiments" || key == "table5" || key == "random") ++sources;
        else if (key != "split" && key != "suite_seed") throw ParseError("manifest: unknown key " + key);
    }
    if (sources != 1) throw ParseError("manifest: give exactly one of experiments, table5, random");
    SuiteManifest m;
    try {
        if (j.contains("table5")) {
            if (!j.at("table5").get<bool>()) throw ParseError("manifest: table5 must be true");
            m = table5_manifest();
        } else if (j.contains("random")) {
            const auto& r = j.at("random");
            for (const auto& [key, val] : r.items()) {
                if (key != "seed" && key != "count" && key != "min_size" && key != "max_size") {
                    throw ParseError("manifest: unknown random key " + key);
                }
            }
            m = random_manifest(r.value("seed", std::uint64_t{1}), r.at("count").get<int>(),
                                r.value("min_size", 5), r.value("max_size", 12));
        } else {
            for (const auto& e : j.at("experiments")) {
                for (const auto& [key, val] : e.items()) {
                    if (key != "id" && key != "labels") throw ParseError("manifest: unknown experiment key " + key);
                }
                m.experiments.push_back({e.at("id").get<int>(), e.at("labels").get<std::vector<int>>()});
            }
        }
        if (j.contains("split")) m.split = split_rule_from_json(j.at("split"));
        if (j.contains("suite_seed")) m.suite_seed = j.at("suite_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    } catch (const ContractError& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    try {
        m.validate();
    } catch (const ContractError& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
}

nlohmann::json manifest_to_json(const SuiteManifest& m) {
    auto exps = nlohmann::json::array();
    for (const auto& e : m.experiments) exps.push_back({{"id", e.experiment_id}, {"labels", e.labels}});
    return {{"experiments", exps}, {"split", split_rule_to_json(m.split)}, {"suite_seed", m.suite_seed}};
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
    return {{"backbone", stgcn_config_to_json(c.backbone)}, {"head", head_config_to_json(c.head)}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("experiment config: expected an object");
    ExperimentConfig c;
    for (const auto& [key, val] : j.items()) {
        if (key == "backbone") {
            nlohmann::json b = val;
            if (b.is_object() && !b.contains("preset")) b["preset"] = "desk";
            c.backbone = stgcn_config_from_json(b);
        } else if (key == "head") {
            c.head = head_config_from_json(val);
        } else {
            throw ParseError("experiment config: unknown key " + key);
        }
    }
    return c;
}

}  // namespace duet
