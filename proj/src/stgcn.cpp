#include "duet/stgcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "duet/errors.hpp"
#include "duet/hash.hpp"
#include "duet/io.hpp"

namespace duet {

using nn::Matrix;
using nn::Vector;

StgcnConfig StgcnConfig::paper() { return StgcnConfig{}; }

StgcnConfig StgcnConfig::desk() {
    StgcnConfig c;
    c.unit_channels = {8, 8, 8, 16, 16, 16, 32, 32, 32};
    c.frame_step = 2;
    c.frames = 46;
    c.dropout = 0.0;
    return c;
}

StgcnConfig StgcnConfig::tiny() {
    StgcnConfig c;
    c.unit_channels = {4, 4};
    c.unit_strides = {1, 2};
    c.frames = 12;
    c.epochs = 1;
    c.batch_size = 2;
    return c;
}

void StgcnConfig::validate() const {
    if (unit_channels.empty()) throw ContractError("stgcn config: no units");
    if (unit_channels.size() != unit_strides.size()) {
        throw ContractError("stgcn config: unit_channels and unit_strides differ in length");
    }
    for (int c : unit_channels) {
        if (c < 1) throw ContractError("stgcn config: channel count < 1");
    }
    for (int s : unit_strides) {
        if (s < 1) throw ContractError("stgcn config: stride < 1");
    }
    if (temporal_kernel < 1 || temporal_kernel % 2 == 0) throw ContractError("stgcn config: temporal_kernel must be odd");
    if (!(dropout >= 0 && dropout < 1)) throw ContractError("stgcn config: dropout outside [0, 1)");
    if (!(lr0 > 0) || !(lr_decay > 0) || lr_step < 1) throw ContractError("stgcn config: bad learning-rate schedule");
    if (!(momentum >= 0 && momentum < 1) || !(weight_decay >= 0)) throw ContractError("stgcn config: bad optimiser");
    if (epochs < 1 || batch_size < 1) throw ContractError("stgcn config: epochs and batch_size must be >= 1");
    if (frame_step < 1) throw ContractError("stgcn config: frame_step < 1");
    if (frames < temporal_kernel) throw ContractError("stgcn config: frames shorter than the temporal kernel");
    if (!(bn_momentum > 0 && bn_momentum <= 1) || !(bn_eps > 0)) throw ContractError("stgcn config: bad batch norm");
}

namespace {

std::string_view partition_text(PartitionStrategy p) {
    return p == PartitionStrategy::Uniform ? "uniform" : "spatial";
}

PartitionStrategy parse_partition(const std::string& s) {
    if (s == "uniform") return PartitionStrategy::Uniform;
    if (s == "spatial") return PartitionStrategy::Spatial;
    throw ParseError("unknown partition strategy \"" + s + "\"");
}

}  // namespace

nlohmann::json stgcn_config_to_json(const StgcnConfig& c) {
    return {{"unit_channels", c.unit_channels},
            {"unit_strides", c.unit_strides},
            {"temporal_kernel", c.temporal_kernel},
            {"dropout", c.dropout},
            {"lr0", c.lr0},
            {"lr_decay", c.lr_decay},
            {"lr_step", c.lr_step},
            {"momentum", c.momentum},
            {"weight_decay", c.weight_decay},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"frame_step", c.frame_step},
            {"frames", c.frames},
            {"canonicalize", c.canonicalize},
            {"residual", c.residual},
            {"linear", c.linear},
            {"partition", partition_text(c.partition)},
            {"bn_momentum", c.bn_momentum},
            {"bn_eps", c.bn_eps}};
}

StgcnConfig stgcn_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("stgcn config: expected an object");
    StgcnConfig c;
    if (j.contains("preset")) {
        const auto& p = j.at("preset");
        if (p == "paper") c = StgcnConfig::paper();
        else if (p == "desk") c = StgcnConfig::desk();
        else if (p == "tiny") c = StgcnConfig::tiny();
        else throw ParseError("stgcn config: unknown preset " + p.dump());
    }
    for (const auto& [key, val] : j.items()) {
        try {
            if (key == "preset") continue;
            if (key == "unit_channels") c.unit_channels = val.get<std::vector<int>>();
            else if (key == "unit_strides") c.unit_strides = val.get<std::vector<int>>();
            else if (key == "temporal_kernel") c.temporal_kernel = val.get<int>();
            else if (key == "dropout") c.dropout = val.get<double>();
            else if (key == "lr0") c.lr0 = val.get<double>();
            else if (key == "lr_decay") c.lr_decay = val.get<double>();
            else if (key == "lr_step") c.lr_step = val.get<int>();
            else if (key == "momentum") c.momentum = val.get<double>();
            else if (key == "weight_decay") c.weight_decay = val.get<double>();
            else if (key == "epochs") c.epochs = val.get<int>();
            else if (key == "batch_size") c.batch_size = val.get<int>();
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "frame_step") c.frame_step = val.get<int>();
            else if (key == "frames") c.frames = val.get<int>();
            else if (key == "canonicalize") c.canonicalize = val.get<bool>();
            else if (key == "residual") c.residual = val.get<bool>();
            else if (key == "linear") c.linear = val.get<bool>();
            else if (key == "partition") c.partition = parse_partition(val.get<std::string>());
            else if (key == "bn_momentum") c.bn_momentum = val.get<double>();
            else if (key == "bn_eps") c.bn_eps = val.get<double>();
            else throw ParseError("stgcn config: unknown key \"" + key + "\"");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("stgcn config: bad value for \"" + key + "\": " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw ParseError(e.what());
    }
    return c;
}

namespace {

enum class Residual { None, Identity, Projection };

std::string pname(int unit, const char* leaf) { return "unit" + std::to_string(unit) + "." + leaf; }

Residual residual_kind(const StgcnConfig& c, int unit, int cin) {
    if (!c.residual || unit == 0) return Residual::None;
    if (cin == c.unit_channels[unit] && c.unit_strides[unit] == 1) return Residual::Identity;
    return Residual::Projection;
}

int num_slices(PartitionStrategy p) { return p == PartitionStrategy::Uniform ? 1 : 3; }

/// Right-multiplies every C x V joint block by `a`. Column order (v, n, t) with v slowest makes
/// the whole map one (C * N * T) x V product.
Matrix aggregate(const Matrix& y, const Matrix& a) {
    const Eigen::Index v = a.rows();
    Matrix z(y.rows(), y.cols());
    Eigen::Map<Matrix>(z.data(), y.size() / v, v).noalias() = Eigen::Map<const Matrix>(y.data(), y.size() / v, v) * a;
    return z;
}

Matrix subsample_time(const Matrix& x, int groups, int t_in, int stride) {
    const int t_out = (t_in - 1) / stride + 1;
    Matrix out(x.rows(), static_cast<Eigen::Index>(groups) * t_out);
    for (int g = 0; g < groups; ++g) {
        for (int t = 0; t < t_out; ++t) out.col(static_cast<Eigen::Index>(g) * t_out + t) = x.col(static_cast<Eigen::Index>(g) * t_in + t * stride);
    }
    return out;
}

Matrix subsample_time_grad(const Matrix& d, int groups, int t_in, int stride) {
    const int t_out = (t_in - 1) / stride + 1;
    Matrix out = Matrix::Zero(d.rows(), static_cast<Eigen::Index>(groups) * t_in);
    for (int g = 0; g < groups; ++g) {
        for (int t = 0; t < t_out; ++t) out.col(static_cast<Eigen::Index>(g) * t_in + t * stride) = d.col(static_cast<Eigen::Index>(g) * t_out + t);
    }
    return out;
}

struct UnitCache {
    Matrix x;
    nn::BatchNormCache bn1, bn2, bnr;
    Matrix r1;
    Matrix r1pad;  // TemporalConv::pad_input(r1)
    Matrix drop;
    Matrix xs;
    Matrix out;
    int t_in = 0;
    int t_out = 0;
};

struct Pass {
    std::vector<UnitCache> units;
    Matrix features;  // D x B
    int batch = 0;
};

class Network {
public:
    explicit Network(const StgcnModel& m) : cfg_(m.config), slices_(normalize_adjacency(m.graph)), v_(m.graph.num_nodes) {}

    [[nodiscard]] int joints() const { return v_; }

    Matrix input(const nn::ParamSet& params, const KeypointBatch& batch) const {
        if (batch.empty()) throw ContractError("stgcn: empty batch");
        const int b = static_cast<int>(batch.size());
        const int n = b * kNumSubjects;
        const int t_len = cfg_.frames;
        const Matrix& mean = params.get("data_norm.mean");
        const Matrix& stdev = params.get("data_norm.std");
        Matrix x = Matrix::Zero(kCoords, static_cast<Eigen::Index>(v_) * n * t_len);
        for (int i = 0; i < b; ++i) {
            KeypointArray aligned;
            if (cfg_.canonicalize) aligned = canonicalize_dyad(*batch[i]);
            const KeypointArray& k = cfg_.canonicalize ? aligned : *batch[i];
            if (k.subjects != kNumSubjects || k.joints != v_ || k.coords != kCoords ||
                k.values.size() != static_cast<std::size_t>(k.subjects) * k.frames * k.joints * k.coords) {
                throw ContractError("stgcn: keypoint array shape does not match the model");
            }
            const int step = cfg_.frame_step;
            const int frames = std::min((k.frames + step - 1) / step, t_len);
            for (int m = 0; m < kNumSubjects; ++m) {
                const int nn_idx = i * kNumSubjects + m;
                for (int t = 0; t < frames; ++t) {
                    for (int v = 0; v < v_; ++v) {
                        const auto col = (static_cast<Eigen::Index>(v) * n + nn_idx) * t_len + t;
                        for (int c = 0; c < kCoords; ++c) {
                            x(c, col) = (k.at(m, t * step, v, c) - mean(v, c)) / stdev(v, c);
                        }
                    }
                }
            }
        }
        return x;
    }

    /// Runs every unit and pools. A non-null `running` selects training mode: batch
    /// statistics, dropout, and running-statistic updates written into `running`.
    Matrix features(const nn::ParamSet& params, const Matrix& x0, int batch, nn::ParamSet* running,
                    std::uint64_t drop_state, Pass* pass) const {
        const bool train = running != nullptr;
        const int n = batch * kNumSubjects;
        const int groups = v_ * n;
        const int k_t = cfg_.temporal_kernel;
        const int pad = (k_t - 1) / 2;
        const bool lin = cfg_.linear;
        if (pass) {
            pass->units.assign(cfg_.unit_channels.size(), {});
            pass->batch = batch;
        }
        Matrix x = x0;
        int t_len = cfg_.frames;
        int cin = kCoords;
        for (int u = 0; u < static_cast<int>(cfg_.unit_channels.size()); ++u) {
            const int cout = cfg_.unit_channels[u];
            const int stride = cfg_.unit_strides[u];
            UnitCache scratch;
            UnitCache& uc = pass ? pass->units[u] : scratch;
            uc.t_in = t_len;
            uc.t_out = nn::conv_out_length(t_len, k_t, pad, stride);

            Matrix g = Matrix::Zero(cout, x.cols());
            for (int k = 0; k < static_cast<int>(slices_.size()); ++k) {
                g += aggregate(params.get(pname(u, ("gcn.w" + std::to_string(k)).c_str())) * x, slices_[k]);
            }
            Matrix r1;
            if (lin) {
                r1 = std::move(g);
            } else {
                r1 = nn::relu(bn(params, running, u, "bn1", g, uc.bn1));
            }
            const nn::TemporalConv conv{groups, t_len, k_t, pad, stride};
            Matrix r1pad = conv.pad_input(r1);
            Matrix tt = conv.forward(params.get(pname(u, "tcn.w")), r1pad);
            Matrix s;
            if (lin) {
                s = std::move(tt);
            } else {
                s = bn(params, running, u, "bn2", tt, uc.bn2);
                if (train && cfg_.dropout > 0) {
                    Matrix mask = nn::dropout_mask(s.rows(), s.cols(), 1.0 - cfg_.dropout, drop_state);
                    s.array() *= mask.array();
                    if (pass) uc.drop = std::move(mask);
                }
            }
            switch (residual_kind(cfg_, u, cin)) {
                case Residual::None:
                    break;
                case Residual::Identity:
                    s += x;
                    break;
                case Residual::Projection: {
                    Matrix xs = subsample_time(x, groups, t_len, stride);
                    Matrix rz = params.get(pname(u, "res.w")) * xs;
                    s += lin ? rz : bn(params, running, u, "res_bn", rz, uc.bnr);
                    if (pass) uc.xs = std::move(xs);
                    break;
                }
            }
            Matrix out = lin ? std::move(s) : nn::relu(s);
            if (pass) {
                uc.x = std::move(x);
                uc.r1 = std::move(r1);
                uc.r1pad = std::move(r1pad);
                uc.out = out;
            }
            x = std::move(out);
            t_len = uc.t_out;
            cin = cout;
        }

        // Mean over (v, t) per channel and person; the C x N result read as (C * M) x B stacks
        // subject 0's channels above subject 1's.
        Matrix acc = Matrix::Zero(cin, n);
        for (int v = 0; v < v_; ++v) {
            for (int p = 0; p < n; ++p) {
                acc.col(p) += x.middleCols((static_cast<Eigen::Index>(v) * n + p) * t_len, t_len).rowwise().sum();
            }
        }
        acc /= static_cast<double>(v_) * t_len;
        Matrix feat = Eigen::Map<Matrix>(acc.data(), static_cast<Eigen::Index>(cin) * kNumSubjects, batch);
        if (pass) pass->features = feat;
        return feat;
    }

    static Matrix logits(const nn::ParamSet& params, const Matrix& feat) {
        Matrix z = params.get("fc.w") * feat;
        z.colwise() += params.get("fc.b").col(0);
        return z.transpose();
    }

    void backward(const nn::ParamSet& params, const Pass& pass, const Matrix& dlogits, nn::Grads& grads) const {
        const int batch = pass.batch;
        const int n = batch * kNumSubjects;
        const int groups = v_ * n;
        const int k_t = cfg_.temporal_kernel;
        const int pad = (k_t - 1) / 2;
        const bool lin = cfg_.linear;

        const Matrix dz = dlogits.transpose();  // K x B
        grads[params.index("fc.w")] += dz * pass.features.transpose();
        grads[params.index("fc.b")] += dz.rowwise().sum();
        const Matrix dfeat = params.get("fc.w").transpose() * dz;  // D x B

        const int units = static_cast<int>(cfg_.unit_channels.size());
        const int c_last = cfg_.unit_channels.back();
        const int t_last = pass.units.back().t_out;
        Matrix dacc = Eigen::Map<const Matrix>(dfeat.data(), c_last, n) / (static_cast<double>(v_) * t_last);
        Matrix dx(c_last, static_cast<Eigen::Index>(groups) * t_last);
        for (int v = 0; v < v_; ++v) {
            for (int p = 0; p < n; ++p) {
                dx.middleCols((static_cast<Eigen::Index>(v) * n + p) * t_last, t_last) =
                    dacc.col(p).replicate(1, t_last);
            }
        }

        for (int u = units - 1; u >= 0; --u) {
            const UnitCache& uc = pass.units[u];
            const int cin = u == 0 ? kCoords : cfg_.unit_channels[u - 1];
            const int stride = cfg_.unit_strides[u];
            Matrix ds = lin ? std::move(dx) : nn::relu_grad(dx, uc.out);
            Matrix dxin = Matrix::Zero(cin, static_cast<Eigen::Index>(groups) * uc.t_in);

            switch (residual_kind(cfg_, u, cin)) {
                case Residual::None:
                    break;
                case Residual::Identity:
                    dxin += ds;
                    break;
                case Residual::Projection: {
                    Matrix drz = lin ? ds : bn_backward(params, grads, u, "res_bn", ds, uc.bnr);
                    const auto& w = params.get(pname(u, "res.w"));
                    grads[params.index(pname(u, "res.w"))] += drz * uc.xs.transpose();
                    if (u > 0) dxin += subsample_time_grad(w.transpose() * drz, groups, uc.t_in, stride);
                    break;
                }
            }

            Matrix dtt;
            if (lin) {
                dtt = std::move(ds);
            } else {
                if (uc.drop.size() > 0) ds = ds.cwiseProduct(uc.drop);
                dtt = bn_backward(params, grads, u, "bn2", ds, uc.bn2);
            }
            const auto wt_idx = params.index(pname(u, "tcn.w"));
            Matrix dr1;
            const nn::TemporalConv conv{groups, uc.t_in, k_t, pad, stride};
            conv.backward(params[wt_idx], uc.r1pad, dtt, grads[wt_idx], &dr1);
            Matrix dg = lin ? std::move(dr1) : bn_backward(params, grads, u, "bn1", nn::relu_grad(dr1, uc.r1), uc.bn1);
            for (int k = 0; k < static_cast<int>(slices_.size()); ++k) {
                const auto wi = params.index(pname(u, ("gcn.w" + std::to_string(k)).c_str()));
                Matrix dy = aggregate(dg, slices_[k].transpose());
                grads[wi] += dy * uc.x.transpose();
                if (u > 0) dxin += params[wi].transpose() * dy;
            }
            dx = std::move(dxin);
        }
    }

private:
    Matrix bn(const nn::ParamSet& params, nn::ParamSet* running, int u, const char* tag, const Matrix& x,
              nn::BatchNormCache& cache) const {
        const std::string p = pname(u, tag);
        const Vector gamma = params.get(p + ".gamma").col(0);
        const Vector beta = params.get(p + ".beta").col(0);
        if (!running) {
            return nn::batchnorm_eval(x, gamma, beta, params.get(p + ".mean").col(0), params.get(p + ".var").col(0),
                                      cfg_.bn_eps);
        }
        Vector rm = params.get(p + ".mean").col(0);
        Vector rv = params.get(p + ".var").col(0);
        Matrix y = nn::batchnorm_train(x, gamma, beta, rm, rv, cfg_.bn_momentum, cfg_.bn_eps, cache);
        running->get(p + ".mean") = rm;
        running->get(p + ".var") = rv;
        return y;
    }

    static Matrix bn_backward(const nn::ParamSet& params, nn::Grads& grads, int u, const char* tag, const Matrix& dy,
                              const nn::BatchNormCache& cache) {
        const std::string p = pname(u, tag);
        Vector dgamma, dbeta;
        Matrix dx = nn::batchnorm_backward(dy, params.get(p + ".gamma").col(0), cache, dgamma, dbeta);
        grads[params.index(p + ".gamma")] += dgamma;
        grads[params.index(p + ".beta")] += dbeta;
        return dx;
    }

    StgcnConfig cfg_;
    std::vector<Matrix> slices_;
    int v_;
};

double train_step(const Network& net, nn::ParamSet& params, const KeypointBatch& batch, const std::vector<int>& labels,
                  std::uint64_t drop_seed, nn::Grads* grads, Matrix* logits_out) {
    Pass pass;
    const Matrix x0 = net.input(params, batch);
    const Matrix feat = net.features(params, x0, static_cast<int>(batch.size()), &params, drop_seed,
                                     grads ? &pass : nullptr);
    const Matrix logits = Network::logits(params, feat);
    Matrix dlogits;
    const double loss = nn::cross_entropy(logits, labels, grads ? &dlogits : nullptr);
    if (grads) {
        *grads = params.zeros_like();
        net.backward(params, pass, dlogits, *grads);
    }
    if (logits_out) *logits_out = logits;
    return loss;
}

constexpr int kEvalBatch = 32;

template <typename Fn>
Matrix batched(const StgcnModel& model, const KeypointBatch& batch, int cols, Fn&& fn) {
    Matrix out(static_cast<Eigen::Index>(batch.size()), cols);
    for (std::size_t s = 0; s < batch.size(); s += kEvalBatch) {
        const auto e = std::min(batch.size(), s + kEvalBatch);
        KeypointBatch part(batch.begin() + static_cast<std::ptrdiff_t>(s), batch.begin() + static_cast<std::ptrdiff_t>(e));
        out.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e - s)) = fn(model, part);
    }
    return out;
}

Matrix features_eval(const StgcnModel& model, const KeypointBatch& batch) {
    const Network net(model);
    const Matrix x0 = net.input(model.params, batch);
    return net.features(model.params, x0, static_cast<int>(batch.size()), nullptr, 0, nullptr).transpose();
}

Matrix logits_eval(const StgcnModel& model, const KeypointBatch& batch) {
    return Network::logits(model.params, features_eval(model, batch).transpose());
}

KeypointBatch lookup(const AnnotationContainer& container, const std::vector<std::string>& names,
                     std::vector<int>* labels = nullptr) {
    std::unordered_map<std::string, const SampleRecord*> index;
    for (const auto& r : container.annotation) index.emplace(r.frame_dir, &r);
    KeypointBatch out;
    out.reserve(names.size());
    for (const auto& n : names) {
        auto it = index.find(n);
        if (it == index.end()) throw ContractError("sample not in annotation: " + n);
        out.push_back(&it->second->keypoint);
        if (labels) labels->push_back(it->second->label.value());
    }
    return out;
}

void fit_input_normalization(nn::ParamSet& params, const KeypointBatch& samples, int joints, const StgcnConfig& cfg) {
    Matrix sum = Matrix::Zero(joints, kCoords);
    Matrix sq = Matrix::Zero(joints, kCoords);
    double count = 0;
    for (const auto* raw : samples) {
        KeypointArray aligned;
        if (cfg.canonicalize) aligned = canonicalize_dyad(*raw);
        const KeypointArray* k = cfg.canonicalize ? &aligned : raw;
        const int step = cfg.frame_step;
        const int t_max = std::min((k->frames + step - 1) / step, cfg.frames);
        for (int m = 0; m < k->subjects; ++m) {
            for (int t = 0; t < t_max; ++t) {
                for (int v = 0; v < joints; ++v) {
                    for (int c = 0; c < kCoords; ++c) {
                        const double x = k->at(m, t * step, v, c);
                        sum(v, c) += x;
                        sq(v, c) += x * x;
                    }
                }
                count += 1;
            }
        }
    }
    if (count == 0) return;
    const Matrix mean = sum / count;
    Matrix var = (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0);
    Matrix stdev = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < stdev.size(); ++i) {
        if (!(stdev.data()[i] > 1e-6)) stdev.data()[i] = 1.0;
    }
    params.get("data_norm.mean") = mean;
    params.get("data_norm.std") = stdev;
}

}  // namespace

StgcnModel init_stgcn(const StgcnConfig& config, const SkeletonGraph& graph, std::vector<int> class_labels,
                      std::uint64_t seed) {
    config.validate();
    if (config.partition != graph.strategy) throw ContractError("stgcn: config partition differs from the graph's");
    if (class_labels.size() < 1) throw ContractError("stgcn: no output classes");
    StgcnModel m{config, graph, std::move(class_labels), {}};
    auto& p = m.params;
    std::uint64_t state = splitmix64(seed ^ 0x57c9c0deULL);
    const int v = graph.num_nodes;
    p.add("data_norm.mean", Matrix::Zero(v, kCoords), false);
    p.add("data_norm.std", Matrix::Ones(v, kCoords), false);
    auto add_bn = [&](int u, const char* tag, int c) {
        const std::string n = pname(u, tag);
        p.add(n + ".gamma", Matrix::Ones(c, 1));
        p.add(n + ".beta", Matrix::Zero(c, 1));
        p.add(n + ".mean", Matrix::Zero(c, 1), false);
        p.add(n + ".var", Matrix::Ones(c, 1), false);
    };
    int cin = kCoords;
    const int k_t = config.temporal_kernel;
    for (int u = 0; u < static_cast<int>(config.unit_channels.size()); ++u) {
        const int cout = config.unit_channels[u];
        for (int k = 0; k < num_slices(config.partition); ++k) {
            p.add(pname(u, ("gcn.w" + std::to_string(k)).c_str()),
                  nn::uniform_init(cout, cin, std::sqrt(6.0 / cin), state));
        }
        if (!config.linear) add_bn(u, "bn1", cout);
        p.add(pname(u, "tcn.w"), nn::uniform_init(cout, k_t * cout, std::sqrt(6.0 / (k_t * cout)), state));
        if (!config.linear) add_bn(u, "bn2", cout);
        if (residual_kind(config, u, cin) == Residual::Projection) {
            p.add(pname(u, "res.w"), nn::uniform_init(cout, cin, std::sqrt(6.0 / cin), state));
            if (!config.linear) add_bn(u, "res_bn", cout);
        }
        cin = cout;
    }
    const int d = config.feature_dim();
    p.add("fc.w", nn::uniform_init(m.num_classes(), d, 1.0 / std::sqrt(d), state));
    p.add("fc.b", Matrix::Zero(m.num_classes(), 1));
    return m;
}

Matrix forward(const StgcnModel& model, const KeypointBatch& batch) {
    return batched(model, batch, model.num_classes(), logits_eval);
}

Matrix extract_features(const StgcnModel& model, const KeypointBatch& batch) {
    return batched(model, batch, model.config.feature_dim(), features_eval);
}

std::vector<int> predict(const StgcnModel& model, const AnnotationContainer& container,
                         const std::vector<std::string>& names) {
    if (names.empty()) return {};
    const auto dense = nn::argmax_rows(forward(model, lookup(container, names)));
    std::vector<int> out;
    out.reserve(dense.size());
    for (int d : dense) out.push_back(model.class_labels[d]);
    return out;
}

double evaluate(const StgcnModel& model, const AnnotationContainer& container, const std::vector<std::string>& names) {
    if (names.empty()) throw ContractError("evaluate: no sample names");
    std::vector<int> labels;
    (void)lookup(container, names, &labels);
    const auto pred = predict(model, container, names);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
    return static_cast<double>(correct) / static_cast<double>(names.size());
}

Matrix extract_features(const StgcnModel& model, const AnnotationContainer& container,
                        const std::vector<std::string>& names) {
    if (names.empty()) return Matrix(0, model.config.feature_dim());
    return extract_features(model, lookup(container, names));
}

double stgcn_loss_and_grad(const StgcnModel& model, const KeypointBatch& batch, const std::vector<int>& labels,
                           std::uint64_t dropout_seed, nn::Grads* grads) {
    nn::ParamSet params = model.params;
    return train_step(Network(model), params, batch, labels, dropout_seed, grads, nullptr);
}

StgcnTrainResult train_stgcn(const StgcnConfig& config, const SkeletonGraph& graph,
                             const AnnotationContainer& container) {
    return train_stgcn(config, graph, container, container.xsub_train, container.xsub_value);
}

StgcnTrainResult train_stgcn(const StgcnConfig& config, const SkeletonGraph& graph,
                             const AnnotationContainer& container, const std::vector<std::string>& train_names,
                             const std::vector<std::string>& val_names) {
    config.validate();
    if (train_names.empty() || val_names.empty()) throw ContractError("train: empty train or validation split");
    std::vector<int> train_labels, val_labels;
    const KeypointBatch train = lookup(container, train_names, &train_labels);
    (void)lookup(container, val_names, &val_labels);
    std::set<int> distinct(train_labels.begin(), train_labels.end());
    distinct.insert(val_labels.begin(), val_labels.end());
    std::vector<int> classes(distinct.begin(), distinct.end());
    std::map<int, int> dense;
    for (std::size_t i = 0; i < classes.size(); ++i) dense[classes[i]] = static_cast<int>(i);

    StgcnTrainResult result{init_stgcn(config, graph, classes, config.seed), {}, 0.0, 0};
    StgcnModel& model = result.model;
    fit_input_normalization(model.params, train, graph.num_nodes, config);
    const Network net(model);
    nn::Sgd opt(model.params, {config.momentum, config.weight_decay});
    nn::ParamSet best = model.params;
    std::uint64_t state = splitmix64(config.seed ^ 0xd20b0a7ULL);

    std::vector<int> order(train.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = nn::step_lr(config.lr0, config.lr_decay, config.lr_step, epoch);
        std::iota(order.begin(), order.end(), 0);
        nn::shuffle(order, state);
        double loss_sum = 0.0;
        int correct = 0;
        for (std::size_t s = 0; s < order.size(); s += config.batch_size) {
            const auto e = std::min(order.size(), s + static_cast<std::size_t>(config.batch_size));
            KeypointBatch batch;
            std::vector<int> labels;
            for (auto i = s; i < e; ++i) {
                batch.push_back(train[order[i]]);
                labels.push_back(dense.at(train_labels[order[i]]));
            }
            nn::Grads grads;
            Matrix logits;
            const double loss =
                train_step(net, model.params, batch, labels, splitmix64(state + s), &grads, &logits);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch), epoch);
            }
            opt.step(model.params, grads, rec.lr);
            loss_sum += loss * static_cast<double>(e - s);
            const auto pred = nn::argmax_rows(logits);
            for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
        }
        state = splitmix64(state);
        if (!model.params.all_finite()) {
            throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch), epoch);
        }
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        rec.val_accuracy = evaluate(model, container, val_names);
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

nn::GradCheckResult stgcn_gradient_check(const StgcnConfig& config, const SkeletonGraph& graph,
                                         const std::vector<KeypointArray>& batch, const std::vector<int>& labels,
                                         int num_classes, double epsilon, int count, std::uint64_t seed) {
    std::vector<int> classes(num_classes);
    std::iota(classes.begin(), classes.end(), 0);
    StgcnModel model = init_stgcn(config, graph, classes, seed);
    KeypointBatch view;
    for (const auto& k : batch) view.push_back(&k);
    fit_input_normalization(model.params, view, graph.num_nodes, config);
    const Network net(model);
    const std::uint64_t drop_seed = splitmix64(seed + 1);
    nn::Grads grads;
    nn::ParamSet work = model.params;
    train_step(net, work, view, labels, drop_seed, &grads, nullptr);
    auto loss = [&](const nn::ParamSet& p) {
        nn::ParamSet scratch = p;
        return train_step(net, scratch, view, labels, drop_seed, nullptr, nullptr);
    };
    return nn::check_gradients(model.params, grads, loss, count, epsilon, seed ^ 0x9c4eULL);
}

namespace {

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

nlohmann::json stgcn_checkpoint(const StgcnModel& model) {
    return {{"format", "duet.stgcn"},
            {"version", 1},
            {"config", stgcn_config_to_json(model.config)},
            {"graph",
             {{"nodes", model.graph.num_nodes},
              {"strategy", partition_text(model.graph.strategy)},
              {"hash", hex64(model.graph.hash())}}},
            {"class_labels", model.class_labels},
            {"params", model.params.to_json()}};
}

StgcnModel stgcn_from_checkpoint(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "duet.stgcn" || doc.at("version") != 1) {
            throw ParseError("stgcn checkpoint: unsupported format");
        }
        StgcnModel m;
        m.config = stgcn_config_from_json(doc.at("config"));
        const auto& g = doc.at("graph");
        if (g.at("nodes").get<int>() != kReducedJoints) throw ParseError("stgcn checkpoint: unexpected node count");
        m.graph = build_graph(parse_partition(g.at("strategy").get<std::string>()));
        if (g.at("hash").get<std::string>() != hex64(m.graph.hash())) {
            throw ContractError("stgcn checkpoint: graph digest mismatch");
        }
        m.class_labels = doc.at("class_labels").get<std::vector<int>>();
        m.params = nn::ParamSet::from_json(doc.at("params"));
        // Shapes must match a freshly built model exactly.
        const auto ref = init_stgcn(m.config, m.graph, m.class_labels, 0);
        if (ref.params.size() != m.params.size()) throw ParseError("stgcn checkpoint: parameter list mismatch");
        for (std::size_t i = 0; i < ref.params.size(); ++i) {
            const auto& a = ref.params.items()[i];
            const auto& b = m.params.items()[i];
            if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
                throw ParseError("stgcn checkpoint: parameter " + b.name + " does not fit the config");
            }
        }
        if (!m.params.all_finite()) throw ParseError("stgcn checkpoint: non-finite parameters");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("stgcn checkpoint: ") + e.what());
    }
}

void save_stgcn(const std::filesystem::path& path, const StgcnModel& model, const nlohmann::json& provenance) {
    auto doc = stgcn_checkpoint(model);
    if (!provenance.empty()) doc["provenance"] = provenance;
    write_text_file(path, doc.dump() + "\n");
}

StgcnModel load_stgcn(const std::filesystem::path& path) { return stgcn_from_checkpoint(read_json_file(path)); }

}  // namespace duet
