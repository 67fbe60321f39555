#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <regex>
#include <set>

#include <CLI11.hpp>

#include "duet/dataset_tree.hpp"
#include "duet/errors.hpp"
#include "duet/hash.hpp"
#include "duet/head.hpp"
#include "duet/io.hpp"
#include "duet/stats.hpp"
#include "duet/stgcn.hpp"

namespace duet::cli {

namespace fs = std::filesystem;

namespace {

/// Options shared by every command; empty strings mean "not given".
struct Options {
    std::string config;
    std::string out;
    std::string root;
    std::optional<std::uint64_t> seed;
    std::string container;
    std::string checkpoint;
    std::string features;
    std::string report;
    std::string source;  // stats: "table5" or a results CSV path
};

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ContractError(std::string("missing required option ") + flag);
}

void require_input(const std::string& path, const char* flag) {
    require(path, flag);
    if (!fs::exists(path)) throw IoError(std::string(flag) + ": no such path " + path);
}

RunConfig load_config(const Options& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(o.config));
    if (o.seed) c.override_seed(*o.seed);
    return c;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// One comment line for CSV artifacts, mirroring the JSON provenance object.
std::string provenance_line(const nlohmann::json& p) {
    return "# " + p.at("tool").get<std::string>() + " " + p.at("version").get<std::string>() + " " +
           p.at("command").get<std::string>() + " config=" + p.at("config_hash").get<std::string>() +
           " seed=" + (p.at("seed").is_null() ? std::string("-") : p.at("seed").dump()) +
           " created=" + p.at("created").get<std::string>() + "\n";
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> all_names(const AnnotationContainer& c) {
    std::vector<std::string> out;
    out.reserve(c.annotation.size());
    for (const auto& r : c.annotation) out.push_back(r.frame_dir);
    return out;
}

int cmd_validate(const Options& o, std::ostream& out) {
    require(o.root, "--root");
    fs::path root = fs::path(o.root).lexically_normal();
    if (!root.has_filename()) root = root.parent_path();
    if (!fs::is_directory(root)) throw IoError("--root: no such directory " + root.string());
    const auto report = validate_dataset_tree(root);
    auto doc = report_to_json(report);
    doc["provenance"] = provenance("validate", RunConfig{}, std::nullopt);
    const fs::path dest = o.out.empty() ? fs::path(root.string() + ".validation.json") : fs::path(o.out);
    write_json_file(dest, doc);
    for (const auto& [modality, count] : report.counts) out << modality << " " << count << "\n";
    out << report.errors.size() << " errors, " << report.warnings.size() << " warnings\n";
    for (const auto& e : report.errors) out << "error " << e.path << " [" << e.rule << "] " << e.message << "\n";
    return report.ok() ? kExitOk : kExitContract;
}

int cmd_synth(const Options& o, std::ostream& out) {
    require(o.root, "--root");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    const auto container = synth::generate_dataset(c.synth, o.root, c.split);
    save_container(o.out, container, provenance("synth", c, c.synth.seed));
    out << container.annotation.size() << " samples (" << container.xsub_train.size() << " train, "
        << container.xsub_value.size() << " test)\n";
    return kExitOk;
}

int cmd_annotate(const Options& o, std::ostream& out) {
    require_input(o.root, "--root");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    std::vector<std::pair<SampleName, SkeletonSequence>> samples;
    for (const auto& [name, path] : list_joint_samples(o.root)) {
        samples.emplace_back(name, reduce_joints(read_skeleton_csv_file(path)));
    }
    const auto container = build_annotation_container(samples, c.split);
    save_container(o.out, container, provenance("annotate", c, std::nullopt));
    out << container.annotation.size() << " samples (" << container.xsub_train.size() << " train, "
        << container.xsub_value.size() << " test)\n";
    return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
    require_input(o.container, "--container");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    const auto container = load_container(o.container);
    const auto& cfg = c.stages.backbone;
    const auto result = train_stgcn(cfg, build_graph(cfg.partition), container);
    auto curve = nlohmann::json::array();
    for (const auto& e : result.curve) {
        curve.push_back({{"epoch", e.epoch},
                         {"lr", e.lr},
                         {"train_loss", e.train_loss},
                         {"train_accuracy", e.train_accuracy},
                         {"val_accuracy", e.val_accuracy}});
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %d lr %.6g loss %.6f train %.4f val %.4f\n", e.epoch, e.lr,
                      e.train_loss, e.train_accuracy, e.val_accuracy);
        out << buf;
    }
    auto prov = provenance("train", c, cfg.seed);
    prov["training"] = {{"best_epoch", result.best_epoch}, {"val_accuracy", result.val_accuracy}, {"curve", curve}};
    save_stgcn(o.out, result.model, prov);
    out << "best epoch " << result.best_epoch << " val_accuracy " << result.val_accuracy << "\n";
    return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out) {
    require_input(o.checkpoint, "--checkpoint");
    require_input(o.container, "--container");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    const auto model = load_stgcn(o.checkpoint);
    const auto container = load_container(o.container);
    const std::set<std::string> train(container.xsub_train.begin(), container.xsub_train.end());
    FeatureTable t;
    t.names = all_names(container);
    for (const auto& r : container.annotation) {
        t.activity_labels.push_back(r.label.value());
        t.is_train.push_back(train.contains(r.frame_dir));
    }
    t.features = extract_features(model, container, t.names);
    write_text_file(o.out, provenance_line(provenance("extract", c, std::nullopt)) + feature_table_csv(t));
    out << t.names.size() << " feature rows of width " << t.features.cols() << "\n";
    return kExitOk;
}

int cmd_head(const Options& o, std::ostream& out) {
    require_input(o.features, "--features");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    const auto table = parse_feature_table_csv(read_text_file(o.features));
    const auto train = table.subset(true);
    const auto test = table.subset(false);
    if (train.names.empty() || test.names.empty()) throw ContractError("head: need both train and test rows");
    const auto result = head_train(c.stages.head, train.features, train.functions(), test.features, test.functions());
    auto prov = provenance("head", c, c.stages.head.seed);
    prov["training"] = {{"best_epoch", result.best_epoch}, {"val_accuracy", result.val_accuracy}};
    save_head(o.out, result.model, prov);
    out << "best epoch " << result.best_epoch << " val_accuracy " << result.val_accuracy << "\n";
    return kExitOk;
}

int cmd_suite(const Options& o, std::ostream& out) {
    require_input(o.container, "--container");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    if (!c.suite) throw ContractError("suite: the configuration has no \"suite\" section");
    const auto container = load_container(o.container);
    const auto results = run_suite(*c.suite, container, c.stages, [&](const ExperimentResult& r) {
        char buf[160];
        if (r.failed) {
            std::snprintf(buf, sizeof buf, "experiment %d failed: %s\n", r.experiment_id, r.error.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "experiment %d stgcn %.2f cnn %.2f\n", r.experiment_id, r.stgcn_accuracy,
                          r.cnn_accuracy);
        }
        out << buf << std::flush;
    });
    const auto prov = provenance("suite", c, c.suite->suite_seed);
    write_text_file(o.out, provenance_line(prov) + results_csv(results));
    if (!o.report.empty()) {
        const auto report = stats::hypothesis_report(accuracy_pairs(results), c.alpha);
        write_json_file(o.report, {{"provenance", prov}, {"report", stats::report_json(report)}});
        out << stats::report_text(report);
    }
    return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
    require(o.source, "SOURCE");
    const RunConfig c = load_config(o);
    stats::AccuracyPairs pairs;
    if (o.source == "table5") {
        pairs = stats::table5_fixture();
    } else {
        if (!fs::exists(o.source)) throw IoError("no such results file " + o.source);
        pairs = stats::pairs_from_results_csv(read_text_file(o.source));
    }
    const auto report = stats::hypothesis_report(pairs, c.alpha);
    out << stats::report_text(report);
    if (!o.out.empty()) {
        write_json_file(o.out, {{"provenance", provenance("stats", c, std::nullopt)},
                                {"source", o.source},
                                {"report", stats::report_json(report)}});
    }
    return kExitOk;
}

int cmd_project(const Options& o, std::ostream& out, std::ostream& err) {
    require_input(o.features, "--features");
    require(o.out, "--out");
    const RunConfig c = load_config(o);
    const auto table = parse_feature_table_csv(read_text_file(o.features));
    const auto proj = project_features_2d(table.features);
    if (!proj.warning.empty()) err << "warning: " << proj.warning << "\n";
    write_text_file(o.out, provenance_line(provenance("project", c, std::nullopt)) +
                               projection_csv(table.names, proj.coords, table.activity_labels));
    out << table.names.size() << " points projected\n";
    return kExitOk;
}

}  // namespace

void RunConfig::override_seed(std::uint64_t seed) {
    synth.seed = seed;
    stages.backbone.seed = seed;
    stages.head.seed = seed;
    if (suite) suite->suite_seed = seed;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("config: expected an object");
    RunConfig c;
    c.source = j;
    nlohmann::json stages = nlohmann::json::object();
    for (const auto& [key, val] : j.items()) {
        if (key == "synth") {
            c.synth = synth::config_from_json(val);
        } else if (key == "split") {
            c.split = split_rule_from_json(val);
        } else if (key == "backbone" || key == "head") {
            stages[key] = val;
        } else if (key == "suite") {
            nlohmann::json m = val;
            if (m.is_object() && !m.contains("split") && j.contains("split")) m["split"] = j.at("split");
            c.suite = manifest_from_json(m);
        } else if (key == "alpha") {
            if (!val.is_number() || !(val.get<double>() > 0 && val.get<double>() < 1)) {
                throw ParseError("config: alpha must be a number in (0, 1)");
            }
            c.alpha = val.get<double>();
        } else {
            throw ParseError("config: unknown key \"" + key + "\"");
        }
    }
    c.stages = experiment_config_from_json(stages);
    try {
        c.stages.backbone.validate();
        c.stages.head.validate();
    } catch (const ContractError& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

nlohmann::json provenance(const std::string& command, const RunConfig& config, std::optional<std::uint64_t> seed) {
    return {{"tool", "duet"},
            {"version", kToolVersion},
            {"command", command},
            {"config_hash", hex64(fnv1a64(config.source.dump()))},
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
            {"created", utc_now()}};
}

std::string strip_timestamps(const std::string& artifact) {
    static const std::regex json_created(R"("created"\s*:\s*"[^"]*")");
    static const std::regex line_created(R"(created=\S+)");
    return std::regex_replace(std::regex_replace(artifact, json_created, "\"created\":\"-\""), line_created,
                              "created=-");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dyadic skeleton data tools and the two-stage kinesics pipeline", "duet"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "JSON run configuration");
    app.add_option("--out", o.out, "Output artifact path");
    app.add_option("--root", o.root, "Dataset tree root");
    app.add_option("--seed", o.seed, "Replaces every seed in the configuration");
    app.add_option("--container", o.container, "Annotation container JSON");
    app.add_option("--checkpoint", o.checkpoint, "Backbone checkpoint JSON");
    app.add_option("--features", o.features, "Feature table CSV");

    auto* validate = app.add_subcommand("validate", "Check a dataset tree; writes a JSON report");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic joints tree and its container");
    auto* annotate = app.add_subcommand("annotate", "Build a container from a joints tree");
    auto* train = app.add_subcommand("train", "Train the backbone on a container's split");
    auto* extract = app.add_subcommand("extract", "Write frozen backbone features for every sample");
    auto* head = app.add_subcommand("head", "Train the function head on a feature table");
    auto* suite = app.add_subcommand("suite", "Run a subset suite; writes the results table");
    suite->add_option("--report", o.report, "Also write the correlation report here");
    auto* stats_cmd = app.add_subcommand("stats", "Correlation analysis of a results table");
    stats_cmd->add_option("source", o.source, "\"table5\" or a results CSV")->required();
    auto* project = app.add_subcommand("project", "Two-dimensional projection of a feature table");

    std::vector<std::string> argv_store = {"duet"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitContract;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (synth->parsed()) return cmd_synth(o, out);
        if (annotate->parsed()) return cmd_annotate(o, out);
        if (train->parsed()) return cmd_train(o, out);
        if (extract->parsed()) return cmd_extract(o, out);
        if (head->parsed()) return cmd_head(o, out);
        if (suite->parsed()) return cmd_suite(o, out);
        if (stats_cmd->parsed()) return cmd_stats(o, out);
        if (project->parsed()) return cmd_project(o, out, err);
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitContract;
    }
    return kExitContract;
}

}  // namespace duet::cli
