// Acceptance checks. `duet_acceptance --criterion N` runs one criterion, no flag runs all; each
// prints a single PASS or FAIL line and the exit status is non-zero if any failed.
#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "duet/dataset_tree.hpp"
#include "duet/experiment.hpp"
#include "duet/graph.hpp"
#include "duet/head.hpp"
#include "duet/io.hpp"
#include "duet/nn.hpp"
#include "duet/sample_name.hpp"
#include "duet/skeleton.hpp"
#include "duet/stats.hpp"
#include "duet/stgcn.hpp"
#include "duet/synthgen.hpp"
#include "duet/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace duet;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

class Scratch {
public:
    explicit Scratch(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("duet_accept_" + tag + "_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::pair<double, double> binomial_band(int n, double p, double coverage) {
    const double tail = (1.0 - coverage) / 2.0;
    double cdf = 0.0;
    int lo = 0, hi = n;
    bool lo_set = false;
    for (int k = 0; k <= n; ++k) {
        const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                    k * std::log(p) + (n - k) * std::log1p(-p));
        const double before = cdf;
        cdf += pmf;
        if (!lo_set && cdf > tail) {
            lo = k;
            lo_set = true;
        }
        if (before < 1.0 - tail && cdf >= 1.0 - tail) hi = k;
    }
    return {static_cast<double>(lo) / n, static_cast<double>(hi) / n};
}

Outcome criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = stats::hypothesis_report(stats::table5_fixture());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool rho_ok = std::abs(r.rho - 0.91) <= 0.005;
    const bool ci_ok = std::round(r.ci_lo * 100) == 82 && std::round(r.ci_hi * 100) == 96;
    const bool t_ok = std::abs(r.t_statistic - 11.7) <= 0.1;
    const bool decision_ok = r.decision == stats::Decision::RejectH0;
    return {rho_ok && ci_ok && t_ok && decision_ok && secs < 1.0,
            "rho " + fmt("%.6f", r.rho) + " ci [" + fmt("%.4f", r.ci_lo) + ", " + fmt("%.4f", r.ci_hi) + "] t " +
                fmt("%.4f", r.t_statistic) + " p " + fmt("%.3g", r.p_one_tailed) +
                (decision_ok ? " reject_H0" : " fail_to_reject") + " in " + fmt("%.3f", secs) + " s"};
}

bool bit_equal(const Table& a, const Table& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r].size() != b[r].size()) return false;
        if (std::memcmp(a[r].data(), b[r].data(), a[r].size() * sizeof(double)) != 0) return false;
    }
    return true;
}

Outcome criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> loc(0, 2), act(1, 12), pair(1, 10);
    std::uniform_int_distribution<std::int64_t> start(0, 99'999'999), len(1, 9'999'999);
    int names_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto s = start(rng);
        const SampleName n{static_cast<LocationCode>(loc(rng)), act(rng), pair(rng), s, s + len(rng)};
        const auto text = format_sample_name(n);
        names_ok += parse_sample_name(text) == n && format_sample_name(parse_sample_name(text)) == text;
    }

    // 91 x 193 table of random finite doubles through text and back.
    std::normal_distribution<double> g(0.0, 500.0);
    Table table(kFramesPerSample, std::vector<double>(kCsvColumns));
    for (int r = 0; r < kFramesPerSample; ++r) {
        table[r][0] = r;
        for (int c = 1; c < kCsvColumns; ++c) table[r][c] = g(rng);
    }
    const bool csv_ok = bit_equal(parse_csv_text(format_csv_text(table)), table) &&
                        bit_equal(write_skeleton_csv(parse_skeleton_csv(parse_csv_text(format_csv_text(table)))), table);

    synth::SynthConfig cfg;
    cfg.labels = {0, 11};
    cfg.pairs_per_location = 1;
    cfg.repetitions = 2;
    cfg.locations = {LocationCode::CM};
    cfg.image_placeholders = true;
    const auto name = synth::repetition_name(ActivityLabel{0}, {LocationCode::CM, 1}, 0);

    Scratch clean("tree");
    synth::generate_dataset(cfg, clean.path());
    const auto base = validate_dataset_tree(clean.path());
    const bool clean_ok = base.errors.empty();

    // Each mutation on a fresh tree must produce exactly one error naming the mutated path.
    using Mutation = std::function<fs::path(const fs::path&)>;
    const std::vector<std::pair<std::string, Mutation>> mutations = {
        {"missing frame",
         [&](const fs::path& root) {
             const auto p = sample_dir(root, Modality::Rgb, name) / "45.jpeg";
             fs::remove(p);
             return p;
         }},
        {"stray file",
         [&](const fs::path& root) {
             const auto p = sample_dir(root, Modality::Joints, name) / "notes.txt";
             std::ofstream(p) << "x";
             return p;
         }},
        {"truncated csv",
         [&](const fs::path& root) {
             const auto p = sample_dir(root, Modality::Joints, name) / (format_sample_name(name) + ".csv");
             std::ofstream(p, std::ios::trunc) << "1,2,3\n";
             return p;
         }},
        {"missing depth frame",
         [&](const fs::path& root) {
             const auto p = sample_dir(root, Modality::Depth, name) / "0.png";
             fs::remove(p);
             return p;
         }},
    };
    int targeted = 0;
    std::string misses;
    for (const auto& [label, mutate] : mutations) {
        Scratch dir("mut");
        synth::generate_dataset(cfg, dir.path());
        const auto path = mutate(dir.path());
        const auto report = validate_dataset_tree(dir.path());
        if (report.errors.size() == 1 && report.errors[0].path == path.generic_string()) {
            ++targeted;
        } else {
            misses += " [" + label + ": " + std::to_string(report.errors.size()) + " errors]";
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = names_ok == 1000 && csv_ok && clean_ok && targeted == static_cast<int>(mutations.size()) &&
                    secs < 30.0;
    return {ok, std::to_string(names_ok) + "/1000 names, csv " + (csv_ok ? "bit-exact" : "MISMATCH") +
                    ", clean tree " + std::to_string(base.errors.size()) + " errors, " + std::to_string(targeted) +
                    "/" + std::to_string(mutations.size()) + " mutations targeted" + misses + " in " +
                    fmt("%.1f", secs) + " s"};
}

Outcome criterion_3() {
    synth::SynthConfig cfg;
    cfg.pairs_per_location = 1;
    cfg.repetitions = 40;
    Scratch dir("card");
    const auto container = synth::generate_dataset(cfg, dir.path());
    const auto on_disk = list_joint_samples(dir.path()).size();
    synth::SynthConfig full;
    const std::size_t arithmetic = full.sample_count();
    const bool ok = on_disk == 1440 && container.annotation.size() == 1440 && cfg.sample_count() == 1440 &&
                    arithmetic == 14'400 && arithmetic == 12u * 40u * 10u * 3u;
    return {ok, std::to_string(on_disk) + " samples on disk, " + std::to_string(container.annotation.size()) +
                    " in container, full protocol " + std::to_string(arithmetic)};
}

Outcome criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    synth::SynthConfig sc;
    sc.labels = {0, 5};
    sc.pairs_per_location = 1;
    sc.repetitions = 2;
    sc.locations = {LocationCode::CM};
    const auto c = synth::generate_container(sc);
    std::vector<KeypointArray> batch;
    for (int i = 0; i < 3; ++i) batch.push_back(c.annotation[i].keypoint);
    const auto bb = stgcn_gradient_check(StgcnConfig::tiny(), build_graph(), batch, {0, 1, 0}, 2, 1e-5, 128, 7);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    nn::Matrix x(6, 16);
    for (int j = 0; j < x.cols(); ++j)
        for (int i = 0; i < x.rows(); ++i) x(i, j) = g(rng);
    HeadConfig hc;
    hc.conv_channels = {4, 8};
    hc.dense_width = 16;
    const auto hd = head_gradient_check(hc, x, {0, 1, 2, 0, 1, 2}, 3, 1e-5, 128, 3);

    nn::Matrix logits(50, 7);
    for (int j = 0; j < logits.cols(); ++j)
        for (int i = 0; i < logits.rows(); ++i) logits(i, j) = 30.0 * g(rng);
    const auto p = nn::softmax_rows(logits);
    const double softmax_err = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();

    // The uniform matrix and the sum of the spatial slices are symmetric; the inward and outward
    // slices are each other's transpose.
    const auto uniform = normalize_adjacency(build_graph())[0];
    const auto slices = normalize_adjacency(build_graph(PartitionStrategy::Spatial));
    const nn::Matrix spatial_sum = slices[0] + slices[1] + slices[2];
    const double asym = std::max({(uniform - uniform.transpose()).cwiseAbs().maxCoeff(),
                                  (spatial_sum - spatial_sum.transpose()).cwiseAbs().maxCoeff(),
                                  (slices[1] - slices[2].transpose()).cwiseAbs().maxCoeff()});
    double radius = 0.0;
    radius = spectral_radius(uniform);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = bb.max_relative_error < 1e-4 && hd.max_relative_error < 1e-4 && softmax_err <= 1e-6 &&
                    asym <= 1e-9 && radius <= 1.0 + 1e-9 && secs < 120.0;
    return {ok, "backbone grad err " + fmt("%.2e", bb.max_relative_error) + " (" + std::to_string(bb.checked) +
                    " checked, " + std::to_string(bb.skipped_kinks) + " kinks skipped), head grad err " +
                    fmt("%.2e", hd.max_relative_error) + " (" + std::to_string(hd.checked) + " checked, " +
                    std::to_string(hd.skipped_kinks) + " kinks skipped), softmax err " + fmt("%.1e", softmax_err) +
                    ", adjacency asymmetry " + fmt("%.1e", asym) + ", spectral radius " + fmt("%.12f", radius) +
                    " in " + fmt("%.1f", secs) + " s"};
}

std::vector<int> functions_of(const AnnotationContainer& c, const std::vector<std::string>& names) {
    std::vector<int> out;
    for (const auto& n : names) out.push_back(static_cast<int>(kinesic_function_of(c.record(n).label)));
    return out;
}

Outcome criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    synth::SynthConfig sc;
    sc.labels = {0, 1, 3, 8};  // Emblem, Emblem, Illustrator, Adaptor
    sc.repetitions = 3;
    sc.locations = {LocationCode::CM, LocationCode::CC};
    sc.noise_std = 0.0;
    sc.occlusion_rate = 0.0;
    const auto c = synth::generate_container(sc);

    ExperimentConfig cfg;
    cfg.backbone.epochs = 30;
    cfg.head.epochs = 30;
    const SubsetSpec spec{0, sc.labels};
    const auto real = run_experiment(spec, c, cfg, 1);

    // Null: permute keypoints across the training records, which decouples every training label
    // from its motion. Selection uses separate held-out pairs so the test split never steers it.
    const std::set<PairKey> val_pairs = {{LocationCode::CC, 2}, {LocationCode::CM, 9}};
    std::vector<std::string> train, val;
    for (const auto& n : c.xsub_train) {
        const auto p = parse_sample_name(n);
        (val_pairs.contains({p.location, p.pair_index}) ? val : train).push_back(n);
    }
    AnnotationContainer shuffled = c;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < shuffled.annotation.size(); ++i) {
        if (std::find(c.xsub_value.begin(), c.xsub_value.end(), shuffled.annotation[i].frame_dir) ==
            c.xsub_value.end()) {
            idx.push_back(i);
        }
    }
    std::vector<std::size_t> perm = idx;
    std::mt19937_64 rng(55);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        shuffled.annotation[idx[k]].keypoint = c.annotation[perm[k]].keypoint;
        shuffled.annotation[idx[k]].total_frames = c.annotation[perm[k]].total_frames;
    }
    auto bb = cfg.backbone;
    bb.seed = 1;
    const auto null_bb = train_stgcn(bb, build_graph(bb.partition), shuffled, train, val);
    const double null_backbone = evaluate(null_bb.model, c, c.xsub_value);
    const auto ftr = extract_features(null_bb.model, shuffled, train);
    const auto fval = extract_features(null_bb.model, shuffled, val);
    const auto fte = extract_features(null_bb.model, c, c.xsub_value);
    auto hc = cfg.head;
    hc.seed = 1;
    const auto null_head = head_train(hc, ftr, functions_of(c, train), fval, functions_of(c, val));
    const auto test_functions = functions_of(c, c.xsub_value);
    const double null_cnn = head_evaluate(null_head.model, fte, test_functions);

    const int n_test = static_cast<int>(c.xsub_value.size());
    std::map<int, int> counts;
    for (int f : test_functions) ++counts[f];
    int majority = 0;
    for (const auto& [f, k] : counts) majority = std::max(majority, k);
    const double majority_share = static_cast<double>(majority) / n_test;
    const auto [blo, bhi] = binomial_band(n_test, 1.0 / static_cast<double>(sc.labels.size()), 0.99);
    const auto [hlo, hhi] = binomial_band(n_test, majority_share, 0.99);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool real_ok = real.stgcn_accuracy >= 95.0 && real.cnn_accuracy >= 90.0;
    const bool null_ok = null_backbone >= blo && null_backbone <= bhi && null_cnn >= hlo && null_cnn <= hhi;
    return {real_ok && null_ok && secs < 900.0,
            "backbone " + fmt("%.2f", real.stgcn_accuracy) + "% head " + fmt("%.2f", real.cnn_accuracy) +
                "% on " + std::to_string(n_test) + " test samples; shuffled backbone " + fmt("%.3f", null_backbone) +
                " in [" + fmt("%.3f", blo) + ", " + fmt("%.3f", bhi) + "], shuffled head " + fmt("%.3f", null_cnn) +
                " in [" + fmt("%.3f", hlo) + ", " + fmt("%.3f", hhi) + "] in " + fmt("%.0f", secs) + " s"};
}

Outcome criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto manifest = random_manifest(1, 8);
    ExperimentConfig cfg;
    cfg.backbone.epochs = 12;
    cfg.head.epochs = 30;
    std::vector<ExperimentResult> all;
    for (double noise : {0.0, 60.0, 150.0}) {
        synth::SynthConfig sc;
        sc.repetitions = 1;
        sc.noise_std = noise;
        sc.locations = {LocationCode::CM, LocationCode::CC};
        const auto c = synth::generate_container(sc);
        const auto rows = run_suite(manifest, c, cfg, [&](const ExperimentResult& r) {
            std::fprintf(stderr, "  noise %.0f experiment %d: stgcn %.2f cnn %.2f%s\n", noise, r.experiment_id,
                         r.stgcn_accuracy, r.cnn_accuracy, r.failed ? " (failed)" : "");
        });
        all.insert(all.end(), rows.begin(), rows.end());
    }
    const auto pairs = accuracy_pairs(all);
    const auto r = stats::hypothesis_report(pairs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {r.rho > 0 && r.p_one_tailed < 0.05 && secs < 7200.0,
            "rho " + fmt("%.4f", r.rho) + " t " + fmt("%.3f", r.t_statistic) + " p " + fmt("%.3g", r.p_one_tailed) +
                " over " + std::to_string(pairs.n()) + " pairs in " + fmt("%.0f", secs) + " s"};
}

Outcome criterion_7() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const int trials = 10000;
    int rejected = 0;
    for (int k = 0; k < trials; ++k) {
        stats::AccuracyPairs p;
        for (int i = 0; i < 30; ++i) p.pairs.emplace_back(g(rng), g(rng));
        rejected += stats::hypothesis_report(p).decision == stats::Decision::RejectH0;
    }
    const double rate = static_cast<double>(rejected) / trials;

    // Frozen from a 30-digit arbitrary-precision evaluation of the t tail.
    struct Row {
        double df, t, p;
    };
    const Row rows[] = {
        {5, -2, 0.94903026058507082188},     {5, 0.3, 0.38812452113163723331},
        {5, 1.7, 0.074938393424161951487},   {5, 4, 0.0051617077404157269022},
        {5, 11, 0.000054026102772491427056}, {28, -2, 0.97235738117902154618},
        {28, 0.3, 0.38319656238429034062},   {28, 1.7, 0.05010752524824497923},
        {28, 4, 0.00021010342855327889965},  {28, 11, 5.6359522469921068174e-12},
        {100, -2, 0.9758939106344331602},    {100, 0.3, 0.38239994015015174392},
        {100, 1.7, 0.046119663501509630562}, {100, 4, 0.000060761822150380838601},
        {100, 11, 3.2178247127021300618e-19},
    };
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(stats::student_t_upper(r.t, r.df) - r.p));
    return {std::abs(rate - 0.05) <= 0.015 && worst <= 1e-10,
            "null rejection rate " + fmt("%.4f", rate) + " over 10000 trials, worst t-tail error " + fmt("%.2e", worst)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = read_text_file(e.path());
    }
    return out;
}

Outcome criterion_8() {
    Scratch dir("cli");
    const auto d = dir.path();
    write_text_file(d / "cfg.json", R"({
  "synth": {"labels": [0, 1, 3, 8], "repetitions": 1, "locations": ["CM", "CC"], "noise_std": 30},
  "backbone": {"preset": "tiny", "epochs": 2},
  "head": {"epochs": 3, "conv_channels": [4, 8], "dense_width": 16},
  "suite": {"experiments": [{"id": 0, "labels": [0, 1, 3]}, {"id": 1, "labels": [1, 3, 8]},
                            {"id": 2, "labels": [0, 8]}, {"id": 3, "labels": [0, 1, 3, 8]}]}
})");
    const std::string cfg = (d / "cfg.json").string();
    const fs::path work = d / "run";
    auto at = [&](const char* name) { return (work / name).string(); };
    const std::vector<std::vector<std::string>> commands = {
        {"synth", "--config", cfg, "--seed", "3", "--root", at("tree"), "--out", at("container.json")},
        {"validate", "--root", at("tree"), "--out", at("validation.json")},
        {"annotate", "--config", cfg, "--root", at("tree"), "--out", at("annotated.json")},
        {"train", "--config", cfg, "--seed", "3", "--container", at("container.json"), "--out", at("backbone.json")},
        {"extract", "--config", cfg, "--checkpoint", at("backbone.json"), "--container", at("container.json"),
         "--out", at("features.csv")},
        {"head", "--config", cfg, "--seed", "3", "--features", at("features.csv"), "--out", at("head.json")},
        {"project", "--config", cfg, "--features", at("features.csv"), "--out", at("projection.csv")},
        {"suite", "--config", cfg, "--seed", "3", "--container", at("container.json"), "--out", at("results.csv"),
         "--report", at("report.json")},
        {"stats", "--config", cfg, at("results.csv"), "--out", at("stats.json")},
    };
    std::vector<std::map<std::string, std::string>> runs;
    std::vector<std::string> stdouts;
    for (int rep = 0; rep < 2; ++rep) {
        fs::remove_all(work);
        fs::create_directories(work);
        std::string log;
        for (const auto& args : commands) {
            std::ostringstream out, err;
            const int rc = cli::run(args, out, err);
            if (rc != cli::kExitOk) return {false, args[0] + " exited " + std::to_string(rc) + ": " + err.str()};
            log += out.str();
        }
        auto files = read_tree(work);
        for (auto& [name, text] : files) text = cli::strip_timestamps(text);
        runs.push_back(std::move(files));
        stdouts.push_back(std::move(log));
    }
    int differing = 0;
    std::string which;
    for (const auto& [name, text] : runs[0]) {
        const auto it = runs[1].find(name);
        if (it == runs[1].end() || it->second != text) {
            ++differing;
            if (which.size() < 200) which += " " + name;
        }
    }
    if (runs[0].size() != runs[1].size()) ++differing;
    const bool stdout_same = stdouts[0] == stdouts[1];
    return {differing == 0 && stdout_same,
            std::to_string(commands.size()) + " commands, " + std::to_string(runs[0].size()) + " artifacts, " +
                std::to_string(differing) + " differing" + which + (stdout_same ? "" : ", console output differs")};
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "Run one criterion (1-8); default all")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Outcome (*)()> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                  criterion_5, criterion_6, criterion_7, criterion_8};
    bool all_pass = true;
    for (int i = 1; i <= 8; ++i) {
        if (only != 0 && i != only) continue;
        Outcome o;
        try {
            o = criteria[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << i << " " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << std::endl;
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
