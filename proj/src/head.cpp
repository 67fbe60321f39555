#include "duet/head.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "duet/errors.hpp"
#include "duet/hash.hpp"
#include "duet/io.hpp"
#include "duet/taxonomy.hpp"

namespace duet {

using nn::Matrix;
using nn::Vector;

void HeadConfig::validate() const {
    if (conv_channels.size() != 2) throw ContractError("head config: exactly two convolution stages");
    for (int c : conv_channels) {
        if (c < 1) throw ContractError("head config: channel count < 1");
    }
    if (conv_kernel < 1 || conv_kernel % 2 == 0) throw ContractError("head config: conv_kernel must be odd");
    if (dense_width < 1) throw ContractError("head config: dense_width < 1");
    if (!(dropout >= 0 && dropout < 1)) throw ContractError("head config: dropout outside [0, 1)");
    if (!(lr0 > 0) || !(lr_decay > 0) || lr_step < 1) throw ContractError("head config: bad learning-rate schedule");
    if (!(momentum >= 0 && momentum < 1) || !(weight_decay >= 0)) throw ContractError("head config: bad optimiser");
    if (epochs < 1 || batch_size < 1) throw ContractError("head config: epochs and batch_size must be >= 1");
}

nlohmann::json head_config_to_json(const HeadConfig& c) {
    return {{"conv_channels", c.conv_channels},
            {"conv_kernel", c.conv_kernel},
            {"dense_width", c.dense_width},
            {"dropout", c.dropout},
            {"lr0", c.lr0},
            {"lr_decay", c.lr_decay},
            {"lr_step", c.lr_step},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"standardize", c.standardize}};
}

HeadConfig head_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("head config: expected an object");
    HeadConfig c;
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "conv_channels") c.conv_channels = val.get<std::vector<int>>();
            else if (key == "conv_kernel") c.conv_kernel = val.get<int>();
            else if (key == "dense_width") c.dense_width = val.get<int>();
            else if (key == "dropout") c.dropout = val.get<double>();
            else if (key == "lr0") c.lr0 = val.get<double>();
            else if (key == "lr_decay") c.lr_decay = val.get<double>();
            else if (key == "lr_step") c.lr_step = val.get<int>();
            else if (key == "momentum") c.momentum = val.get<double>();
            else if (key == "weight_decay") c.weight_decay = val.get<double>();
            else if (key == "epochs") c.epochs = val.get<int>();
            else if (key == "batch_size") c.batch_size = val.get<int>();
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "standardize") c.standardize = val.get<bool>();
            else throw ParseError("head config: unknown key " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("head config: ") + e.what());
    }
    return c;
}

namespace {

struct HeadPass {
    Matrix xpad;   // 1 x padded input
    Matrix h1;     // C1 x (B * D)
    Matrix h1pad;
    Matrix h2;     // C2 x (B * D), read as (C2 * D) x B when flattened
    Matrix mask;   // dense1 dropout, empty in evaluation
    Matrix a3;     // W x B after dropout and ReLU
    Matrix z4;     // W x B
};

class HeadNet {
public:
    explicit HeadNet(const HeadModel& m) : cfg_(m.config), d_(m.feature_dim), f_(m.num_functions()) {}

    /// Logits F x B. A non-null pass selects training mode (dropout) and records activations.
    Matrix logits(const nn::ParamSet& p, const Matrix& features, std::uint64_t drop_state, HeadPass* pass) const {
        if (features.cols() != d_ || features.rows() < 1) throw ContractError("head: features must be B x feature_dim");
        const int b = static_cast<int>(features.rows());
        const Matrix& mean = p.get("feat_norm.mean");
        const Matrix& stdev = p.get("feat_norm.std");
        // D x B, so that sample b occupies columns b * D .. b * D + D - 1 of the 1 x (B * D) view.
        Matrix xt = ((features.rowwise() - mean.row(0)).array().rowwise() / stdev.row(0).array()).transpose();
        const Eigen::Map<const Matrix> x(xt.data(), 1, static_cast<Eigen::Index>(b) * d_);

        const nn::TemporalConv conv{b, d_, cfg_.conv_kernel, (cfg_.conv_kernel - 1) / 2, 1};
        Matrix xpad = conv.pad_input(x);
        Matrix z1 = conv.forward(p.get("conv1.w"), xpad);
        z1.colwise() += p.get("conv1.b").col(0);
        Matrix h1 = nn::relu(z1);
        Matrix h1pad = conv.pad_input(h1);
        Matrix z2 = conv.forward(p.get("conv2.w"), h1pad);
        z2.colwise() += p.get("conv2.b").col(0);
        Matrix h2 = nn::relu(z2);
        const Eigen::Map<const Matrix> flat(h2.data(), h2.rows() * d_, b);

        Matrix z3 = p.get("dense1.w") * flat;
        z3.colwise() += p.get("dense1.b").col(0);
        Matrix mask;
        if (pass && cfg_.dropout > 0) {
            mask = nn::dropout_mask(z3.rows(), z3.cols(), 1.0 - cfg_.dropout, drop_state);
            z3.array() *= mask.array();
        }
        Matrix a3 = nn::relu(z3);
        Matrix z4 = p.get("dense2.w") * a3;
        z4.colwise() += p.get("dense2.b").col(0);
        Matrix z5 = p.get("out.w") * z4;
        z5.colwise() += p.get("out.b").col(0);
        if (pass) {
            *pass = {std::move(xpad), std::move(h1), std::move(h1pad), std::move(h2), std::move(mask),
                     std::move(a3), std::move(z4)};
        }
        return z5;
    }

    void backward(const nn::ParamSet& p, const HeadPass& pass, const Matrix& dz5, nn::Grads& g) const {
        const auto b = dz5.cols();
        const auto idx = [&](const char* n) { return p.index(n); };
        g[idx("out.w")] += dz5 * pass.z4.transpose();
        g[idx("out.b")] += dz5.rowwise().sum();
        const Matrix dz4 = p.get("out.w").transpose() * dz5;
        g[idx("dense2.w")] += dz4 * pass.a3.transpose();
        g[idx("dense2.b")] += dz4.rowwise().sum();
        Matrix dz3 = nn::relu_grad(p.get("dense2.w").transpose() * dz4, pass.a3);
        if (pass.mask.size() > 0) dz3.array() *= pass.mask.array();
        const Eigen::Map<const Matrix> flat(pass.h2.data(), pass.h2.rows() * d_, b);
        g[idx("dense1.w")] += dz3 * flat.transpose();
        g[idx("dense1.b")] += dz3.rowwise().sum();
        Matrix dflat = p.get("dense1.w").transpose() * dz3;
        const Eigen::Map<const Matrix> dh2(dflat.data(), pass.h2.rows(), b * d_);

        const nn::TemporalConv conv{static_cast<int>(b), d_, cfg_.conv_kernel, (cfg_.conv_kernel - 1) / 2, 1};
        const Matrix dz2 = nn::relu_grad(dh2, pass.h2);
        Matrix dh1;
        conv.backward(p.get("conv2.w"), pass.h1pad, dz2, g[idx("conv2.w")], &dh1);
        g[idx("conv2.b")] += dz2.rowwise().sum();
        const Matrix dz1 = nn::relu_grad(std::move(dh1), pass.h1);
        conv.backward(p.get("conv1.w"), pass.xpad, dz1, g[idx("conv1.w")], nullptr);
        g[idx("conv1.b")] += dz1.rowwise().sum();
    }

    [[nodiscard]] int functions() const { return f_; }

private:
    const HeadConfig& cfg_;
    int d_;
    int f_;
};

/// Mean cross-entropy of one training-mode batch; fills grads (zeroed here) if non-null.
double train_step(const HeadNet& net, const nn::ParamSet& p, const Matrix& features, const std::vector<int>& labels,
                  std::uint64_t drop_seed, nn::Grads* grads, Matrix* logits_out) {
    HeadPass pass;
    const Matrix z = net.logits(p, features, drop_seed, &pass);
    Matrix dlogits;
    const double loss = nn::cross_entropy(z.transpose(), labels, grads ? &dlogits : nullptr);
    if (grads) {
        *grads = p.zeros_like();
        net.backward(p, pass, dlogits.transpose(), *grads);
    }
    if (logits_out) *logits_out = z.transpose();
    return loss;
}

void fit_feature_normalization(nn::ParamSet& p, const Matrix& features) {
    const Vector mean = features.colwise().mean();
    Vector stdev = ((features.rowwise() - mean.transpose()).colwise().squaredNorm() /
                    static_cast<double>(features.rows()))
                       .cwiseSqrt()
                       .transpose();
    for (Eigen::Index i = 0; i < stdev.size(); ++i) {
        if (!(stdev[i] > 1e-8)) stdev[i] = 1.0;
    }
    p.get("feat_norm.mean") = mean.transpose();
    p.get("feat_norm.std") = stdev.transpose();
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows, std::size_t first, std::size_t last) {
    Matrix out(static_cast<Eigen::Index>(last - first), m.cols());
    for (std::size_t i = first; i < last; ++i) out.row(static_cast<Eigen::Index>(i - first)) = m.row(rows[i]);
    return out;
}

}  // namespace

HeadModel init_head(const HeadConfig& config, int feature_dim, std::vector<int> class_functions,
                    std::uint64_t seed) {
    config.validate();
    if (feature_dim < 1) throw ContractError("head: feature_dim < 1");
    if (class_functions.size() < 2 || class_functions.size() > static_cast<std::size_t>(kNumFunctions)) {
        throw ContractError("head: needs 2 to 5 output functions");
    }
    HeadModel m{config, feature_dim, std::move(class_functions), {}};
    auto& p = m.params;
    std::uint64_t state = splitmix64(seed ^ 0x4ead0001ULL);
    const int k = config.conv_kernel;
    const int c1 = config.conv_channels[0];
    const int c2 = config.conv_channels[1];
    const int w = config.dense_width;
    const int flat = c2 * feature_dim;
    p.add("feat_norm.mean", Matrix::Zero(1, feature_dim), false);
    p.add("feat_norm.std", Matrix::Ones(1, feature_dim), false);
    p.add("conv1.w", nn::uniform_init(c1, k, std::sqrt(6.0 / k), state));
    p.add("conv1.b", Matrix::Zero(c1, 1));
    p.add("conv2.w", nn::uniform_init(c2, k * c1, std::sqrt(6.0 / (k * c1)), state));
    p.add("conv2.b", Matrix::Zero(c2, 1));
    p.add("dense1.w", nn::uniform_init(w, flat, std::sqrt(6.0 / flat), state));
    p.add("dense1.b", Matrix::Zero(w, 1));
    p.add("dense2.w", nn::uniform_init(w, w, 1.0 / std::sqrt(w), state));
    p.add("dense2.b", Matrix::Zero(w, 1));
    p.add("out.w", nn::uniform_init(m.num_functions(), w, 1.0 / std::sqrt(w), state));
    p.add("out.b", Matrix::Zero(m.num_functions(), 1));
    return m;
}

Matrix head_logits(const HeadModel& model, const Matrix& features) {
    return HeadNet(model).logits(model.params, features, 0, nullptr).transpose();
}

Matrix head_forward(const HeadModel& model, const Matrix& features) {
    return nn::softmax_rows(head_logits(model, features));
}

std::vector<int> head_predict(const HeadModel& model, const Matrix& features) {
    std::vector<int> out;
    for (int d : nn::argmax_rows(head_logits(model, features))) out.push_back(model.class_functions[d]);
    return out;
}

double head_evaluate(const HeadModel& model, const Matrix& features, const std::vector<int>& functions) {
    if (features.rows() == 0) throw ContractError("head evaluate: no samples");
    if (static_cast<std::size_t>(features.rows()) != functions.size()) {
        throw ContractError("head evaluate: feature and label counts differ");
    }
    const auto pred = head_predict(model, features);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == functions[i];
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

HeadTrainResult head_train(const HeadConfig& config, const Matrix& train_features,
                           const std::vector<int>& train_functions, const Matrix& val_features,
                           const std::vector<int>& val_functions) {
    config.validate();
    if (train_features.rows() == 0 || val_features.rows() == 0) throw ContractError("head train: empty split");
    if (static_cast<std::size_t>(train_features.rows()) != train_functions.size() ||
        static_cast<std::size_t>(val_features.rows()) != val_functions.size()) {
        throw ContractError("head train: feature and label counts differ");
    }
    if (train_features.cols() != val_features.cols()) throw ContractError("head train: feature widths differ");
    const std::set<int> train_set(train_functions.begin(), train_functions.end());
    if (train_set.size() < 2) throw ContractError("head train: training labels hold a single function");
    std::set<int> distinct = train_set;
    distinct.insert(val_functions.begin(), val_functions.end());
    for (int f : distinct) {
        if (f < 0 || f >= kNumFunctions) throw DomainError("head train: function value out of range");
    }
    const std::vector<int> classes(distinct.begin(), distinct.end());
    std::map<int, int> dense;
    for (std::size_t i = 0; i < classes.size(); ++i) dense[classes[i]] = static_cast<int>(i);

    HeadTrainResult result{init_head(config, static_cast<int>(train_features.cols()), classes, config.seed), {}, 0.0,
                           0};
    HeadModel& model = result.model;
    if (config.standardize) fit_feature_normalization(model.params, train_features);
    const HeadNet net(model);
    nn::Sgd opt(model.params, {config.momentum, config.weight_decay});
    nn::ParamSet best = model.params;
    std::uint64_t state = splitmix64(config.seed ^ 0x4ead7a1ULL);
    std::vector<int> order(train_functions.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        HeadEpoch rec;
        rec.epoch = epoch;
        rec.lr = nn::step_lr(config.lr0, config.lr_decay, config.lr_step, epoch);
        std::iota(order.begin(), order.end(), 0);
        nn::shuffle(order, state);
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < order.size(); s += config.batch_size) {
            const auto e = std::min(order.size(), s + static_cast<std::size_t>(config.batch_size));
            const Matrix batch = gather_rows(train_features, order, s, e);
            std::vector<int> labels;
            for (auto i = s; i < e; ++i) labels.push_back(dense.at(train_functions[order[i]]));
            nn::Grads grads;
            const double loss = train_step(net, model.params, batch, labels, splitmix64(state + s), &grads, nullptr);
            if (!std::isfinite(loss)) {
                throw TrainingError("head: non-finite training loss at epoch " + std::to_string(epoch), epoch);
            }
            opt.step(model.params, grads, rec.lr);
            loss_sum += loss * static_cast<double>(e - s);
        }
        state = splitmix64(state);
        if (!model.params.all_finite()) {
            throw TrainingError("head: non-finite parameters after epoch " + std::to_string(epoch), epoch);
        }
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.val_accuracy = head_evaluate(model, val_features, val_functions);
        if (epoch == 0 || rec.val_accuracy > result.val_accuracy) {
            result.val_accuracy = rec.val_accuracy;
            result.best_epoch = epoch;
            best = model.params;
        }
        result.curve.push_back(rec);
    }
    model.params = std::move(best);
    return result;
}

double head_loss_and_grad(const HeadModel& model, const Matrix& features, const std::vector<int>& dense_labels,
                          std::uint64_t dropout_seed, nn::Grads* grads) {
    return train_step(HeadNet(model), model.params, features, dense_labels, dropout_seed, grads, nullptr);
}

nn::GradCheckResult head_gradient_check(const HeadConfig& config, const Matrix& features,
                                        const std::vector<int>& dense_labels, int num_functions, double epsilon,
                                        int count, std::uint64_t seed) {
    std::vector<int> classes(num_functions);
    std::iota(classes.begin(), classes.end(), 0);
    HeadModel model = init_head(config, static_cast<int>(features.cols()), classes, seed);
    if (config.standardize) fit_feature_normalization(model.params, features);
    const HeadNet net(model);
    const std::uint64_t drop_seed = splitmix64(seed + 1);
    nn::Grads grads;
    train_step(net, model.params, features, dense_labels, drop_seed, &grads, nullptr);
    auto loss = [&](const nn::ParamSet& p) {
        return train_step(net, p, features, dense_labels, drop_seed, nullptr, nullptr);
    };
    return nn::check_gradients(model.params, grads, loss, count, epsilon, seed ^ 0x4eadULL);
}

nlohmann::json head_checkpoint(const HeadModel& model) {
    return {{"format", "duet.head"},
            {"version", 1},
            {"config", head_config_to_json(model.config)},
            {"feature_dim", model.feature_dim},
            {"class_functions", model.class_functions},
            {"params", model.params.to_json()}};
}

HeadModel head_from_checkpoint(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "duet.head" || doc.at("version") != 1) {
            throw ParseError("head checkpoint: unsupported format");
        }
        const HeadConfig config = head_config_from_json(doc.at("config"));
        const int dim = doc.at("feature_dim").get<int>();
        auto functions = doc.at("class_functions").get<std::vector<int>>();
        HeadModel m;
        try {
            m = init_head(config, dim, functions, 0);
        } catch (const ContractError& e) {
            throw ParseError(std::string("head checkpoint: ") + e.what());
        }
        nn::ParamSet params = nn::ParamSet::from_json(doc.at("params"));
        if (params.size() != m.params.size()) throw ParseError("head checkpoint: parameter list mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& a = m.params.items()[i];
            const auto& b = params.items()[i];
            if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
                throw ParseError("head checkpoint: parameter " + b.name + " does not fit the config");
            }
        }
        if (!params.all_finite()) throw ParseError("head checkpoint: non-finite parameters");
        m.params = std::move(params);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("head checkpoint: ") + e.what());
    }
}

void save_head(const std::filesystem::path& path, const HeadModel& model, const nlohmann::json& provenance) {
    auto doc = head_checkpoint(model);
    if (!provenance.empty()) doc["provenance"] = provenance;
    write_text_file(path, doc.dump() + "\n");
}

HeadModel load_head(const std::filesystem::path& path) { return head_from_checkpoint(read_json_file(path)); }

Projection2d project_features_2d(const Matrix& features) {
    if (features.rows() < 2) throw ContractError("projection: needs at least two samples");
    const Matrix centered = features.rowwise() - features.colwise().mean();
    Projection2d out;
    out.coords = Matrix::Zero(features.rows(), 2);
    const double spread = centered.cwiseAbs().maxCoeff();
    if (!(spread > 0)) {
        out.warning = "projection: all feature vectors are identical; returning zeros";
        return out;
    }
    const Matrix cov = centered.transpose() * centered;
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector& values = eig.eigenvalues();  // ascending
    const Eigen::Index d = cov.rows();
    const double top = values[d - 1];
    for (int axis = 0; axis < 2 && axis < d; ++axis) {
        const Eigen::Index i = d - 1 - axis;
        if (!(values[i] > 1e-12 * top)) break;  // no variance left: keep the zero column
        Vector dir = eig.eigenvectors().col(i);
        Eigen::Index arg = 0;
        dir.cwiseAbs().maxCoeff(&arg);
        if (dir[arg] < 0) dir = -dir;
        out.coords.col(axis) = centered * dir;
    }
    return out;
}

void FeatureTable::validate() const {
    if (activity_labels.size() != names.size() || is_train.size() != names.size() ||
        static_cast<std::size_t>(features.rows()) != names.size()) {
        throw ContractError("feature table: columns differ in length");
    }
}

FeatureTable FeatureTable::subset(bool train) const {
    validate();
    FeatureTable out;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (is_train[i] != train) continue;
        out.names.push_back(names[i]);
        out.activity_labels.push_back(activity_labels[i]);
        out.is_train.push_back(train);
        rows.push_back(static_cast<Eigen::Index>(i));
    }
    out.features = features(rows, Eigen::all);
    return out;
}

std::vector<int> FeatureTable::functions() const {
    std::vector<int> out;
    out.reserve(activity_labels.size());
    for (int l : activity_labels) out.push_back(static_cast<int>(kinesic_function_of(l)));
    return out;
}

std::string feature_table_csv(const FeatureTable& t) {
    t.validate();
    std::string out = "name,split,activity_label";
    for (Eigen::Index d = 0; d < t.features.cols(); ++d) out += ",f" + std::to_string(d);
    out += '\n';
    char buf[40];
    for (std::size_t i = 0; i < t.names.size(); ++i) {
        out += t.names[i];
        out += t.is_train[i] ? ",train," : ",test,";
        out += std::to_string(t.activity_labels[i]);
        for (Eigen::Index d = 0; d < t.features.cols(); ++d) {
            std::snprintf(buf, sizeof buf, ",%.17g", t.features(static_cast<Eigen::Index>(i), d));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

FeatureTable parse_feature_table_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool got = false;
    while ((got = static_cast<bool>(std::getline(in, line))) && line.starts_with('#')) {
    }
    if (!got || !line.starts_with("name,split,activity_label")) throw FormatError("features: missing header");
    const auto commas = std::count(line.begin(), line.end(), ',');
    const Eigen::Index dim = static_cast<Eigen::Index>(commas) - 2;
    if (dim < 1) throw FormatError("features: no feature columns");
    std::string expected = "name,split,activity_label";
    for (Eigen::Index d = 0; d < dim; ++d) expected += ",f" + std::to_string(d);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw FormatError("features: columns must be f0..f{D-1} in order");
    FeatureTable t;
    std::vector<std::vector<double>> rows;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        const std::string where = "features: row " + std::to_string(row);
        if (static_cast<Eigen::Index>(cells.size()) != dim + 3) throw FormatError(where + " has the wrong width");
        if (cells[1] != "train" && cells[1] != "test") throw FormatError(where + " has a bad split");
        std::vector<double> values(static_cast<std::size_t>(dim));
        try {
            std::size_t used = 0;
            const int label = std::stoi(cells[2], &used);
            if (used != cells[2].size() || label < 0 || label >= kNumActivities) throw std::invalid_argument("label");
            t.activity_labels.push_back(label);
            for (Eigen::Index d = 0; d < dim; ++d) {
                const auto& c = cells[static_cast<std::size_t>(d) + 3];
                values[static_cast<std::size_t>(d)] = std::stod(c, &used);
                if (used != c.size()) throw std::invalid_argument("value");
            }
        } catch (const std::exception&) {
            throw FormatError(where + " has a non-numeric cell");
        }
        t.names.push_back(cells[0]);
        t.is_train.push_back(cells[1] == "train");
        rows.push_back(std::move(values));
    }
    t.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            t.features(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
        }
    }
    return t;
}

std::string projection_csv(const std::vector<std::string>& names, const Matrix& coords,
                           const std::vector<int>& activity_labels) {
    if (coords.cols() != 2 || static_cast<std::size_t>(coords.rows()) != names.size() ||
        names.size() != activity_labels.size()) {
        throw ContractError("projection csv: names, coordinates and labels differ in length");
    }
    std::string out = "name,x,y,activity_label,function\n";
    char buf[64];
    for (std::size_t i = 0; i < names.size(); ++i) {
        out += names[i];
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", coords(static_cast<Eigen::Index>(i), 0),
                      coords(static_cast<Eigen::Index>(i), 1));
        out += buf;
        out += std::to_string(activity_labels[i]);
        out += ',';
        out += function_name(kinesic_function_of(activity_labels[i]));
        out += '\n';
    }
    return out;
}

}  // namespace duet
