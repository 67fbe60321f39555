#include "duet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "duet/errors.hpp"
#include "duet/hash.hpp"

namespace duet::nn {

std::size_t ParamSet::add(const std::string& name, Matrix value, bool trainable) {
    if (index_.contains(name)) throw ContractError("duplicate parameter " + name);
    index_[name] = items_.size();
    items_.push_back({name, std::move(value), trainable});
    return items_.size() - 1;
}

std::size_t ParamSet::index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter " + name);
    return it->second;
}

std::size_t ParamSet::trainable_scalars() const {
    std::size_t n = 0;
    for (const auto& p : items_) {
        if (p.trainable) n += static_cast<std::size_t>(p.value.size());
    }
    return n;
}

bool ParamSet::all_finite() const {
    return std::all_of(items_.begin(), items_.end(), [](const Param& p) { return p.value.allFinite(); });
}

std::vector<Matrix> ParamSet::zeros_like() const {
    std::vector<Matrix> out;
    out.reserve(items_.size());
    for (const auto& p : items_) out.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    return out;
}

nlohmann::json ParamSet::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& p : items_) {
        std::vector<double> values(p.value.data(), p.value.data() + p.value.size());
        arr.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"trainable", p.trainable},
                       {"values", std::move(values)}});
    }
    return arr;
}

ParamSet ParamSet::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("parameters: expected an array");
    ParamSet out;
    for (const auto& e : j) {
        try {
            const auto name = e.at("name").get<std::string>();
            const auto rows = e.at("rows").get<Eigen::Index>();
            const auto cols = e.at("cols").get<Eigen::Index>();
            const auto values = e.at("values").get<std::vector<double>>();
            if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(values.size()) != rows * cols) {
                throw ParseError("parameters: " + name + ": value count does not match shape");
            }
            Matrix m = Eigen::Map<const Matrix>(values.data(), rows, cols);
            out.add(name, std::move(m), e.at("trainable").get<bool>());
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(std::string("parameters: ") + ex.what());
        } catch (const ContractError& ex) {
            throw ParseError(std::string("parameters: ") + ex.what());
        }
    }
    return out;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
    if (a.items_.size() != b.items_.size()) return false;
    for (std::size_t i = 0; i < a.items_.size(); ++i) {
        const auto& x = a.items_[i];
        const auto& y = b.items_[i];
        if (x.name != y.name || x.trainable != y.trainable || x.value.rows() != y.value.rows() ||
            x.value.cols() != y.value.cols() || x.value != y.value) {
            return false;
        }
    }
    return true;
}

double uniform01(std::uint64_t& state) noexcept {
    state = splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
}

Matrix uniform_init(int rows, int cols, double bound, std::uint64_t& state) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(state) - 1.0) * bound;
    return m;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double keep, std::uint64_t& state) {
    if (!(keep > 0.0 && keep <= 1.0)) throw ContractError("dropout: keep probability outside (0, 1]");
    const auto threshold = static_cast<std::uint64_t>(std::llround(keep * 65536.0));
    const double scale = 1.0 / keep;
    Matrix m(rows, cols);
    double* out = m.data();
    std::uint64_t bits = 0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (i % 4 == 0) bits = state = splitmix64(state);
        out[i] = (bits & 0xffffU) < threshold ? scale : 0.0;
        bits >>= 16;
    }
    return m;
}

void shuffle(std::vector<int>& v, std::uint64_t& state) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(state) * static_cast<double>(i));
        std::swap(v[i - 1], v[std::min(j, i - 1)]);
    }
}

double step_lr(double lr0, double decay, int step, int epoch) noexcept {
    return lr0 * std::pow(decay, epoch / step);
}

int conv_out_length(int length, int kernel, int pad, int stride) noexcept {
    return (length + 2 * pad - kernel) / stride + 1;
}

namespace {

/// Output positions [first, last) of a tap whose input index o * stride + k - pad is in range.
std::pair<int, int> valid_outputs(int length, int lout, int k, int pad, int stride) {
    const int shift = k - pad;
    const int first = shift >= 0 ? 0 : (-shift + stride - 1) / stride;
    const int last = std::min(lout, shift >= length ? 0 : (length - 1 - shift) / stride + 1);
    return {first, std::max(first, last)};
}

using StridedCols = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;
using MutStridedCols = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;

}  // namespace

Matrix im2col(const Matrix& x, int groups, int length, int kernel, int pad, int stride) {
    const Eigen::Index c = x.rows();
    if (x.cols() != static_cast<Eigen::Index>(groups) * length) throw ContractError("im2col: shape mismatch");
    const int lout = conv_out_length(length, kernel, pad, stride);
    Matrix cols(kernel * c, static_cast<Eigen::Index>(groups) * lout);
    std::vector<std::pair<int, int>> ranges(kernel);
    for (int k = 0; k < kernel; ++k) ranges[k] = valid_outputs(length, lout, k, pad, stride);
    for (int g = 0; g < groups; ++g) {
        const Eigen::Index out0 = static_cast<Eigen::Index>(g) * lout;
        for (int k = 0; k < kernel; ++k) {
            const auto [first, last] = ranges[k];
            auto dst = cols.block(k * c, out0, c, lout);
            if (first > 0) dst.leftCols(first).setZero();
            if (last < lout) dst.rightCols(lout - last).setZero();
            if (last > first) {
                const double* src = x.data() + (static_cast<Eigen::Index>(g) * length + first * stride + k - pad) * c;
                dst.middleCols(first, last - first) = StridedCols(src, c, last - first, Eigen::OuterStride<>(stride * c));
            }
        }
    }
    return cols;
}

Matrix col2im(const Matrix& cols, int channels, int groups, int length, int kernel, int pad, int stride) {
    const int lout = conv_out_length(length, kernel, pad, stride);
    const Eigen::Index c = channels;
    if (cols.rows() != kernel * c || cols.cols() != static_cast<Eigen::Index>(groups) * lout) {
        throw ContractError("col2im: shape mismatch");
    }
    Matrix x = Matrix::Zero(c, static_cast<Eigen::Index>(groups) * length);
    std::vector<std::pair<int, int>> ranges(kernel);
    for (int k = 0; k < kernel; ++k) ranges[k] = valid_outputs(length, lout, k, pad, stride);
    for (int g = 0; g < groups; ++g) {
        for (int k = 0; k < kernel; ++k) {
            const auto [first, last] = ranges[k];
            if (last <= first) continue;
            double* dst = x.data() + (static_cast<Eigen::Index>(g) * length + first * stride + k - pad) * c;
            MutStridedCols(dst, c, last - first, Eigen::OuterStride<>(stride * c)) +=
                cols.block(k * c, static_cast<Eigen::Index>(g) * lout + first, c, last - first);
        }
    }
    return x;
}

int TemporalConv::padded_length() const noexcept {
    const int p = length + 2 * pad;
    return (p + stride - 1) / stride * stride;
}

Matrix TemporalConv::pad_input(const Matrix& x) const {
    if (x.cols() != static_cast<Eigen::Index>(groups) * length) throw ContractError("conv: input shape mismatch");
    const Eigen::Index lp = padded_length();
    Matrix xp = Matrix::Zero(x.rows(), groups * lp + kernel);
    for (int g = 0; g < groups; ++g) xp.middleCols(g * lp + pad, length) = x.middleCols(g * length, length);
    return xp;
}

Matrix TemporalConv::forward(const Matrix& w, const Matrix& xpad) const {
    const Eigen::Index c = xpad.rows();
    const Eigen::Index span = padded_length() / stride;  // windows per group, out_length() of them valid
    const int lout = out_length();
    if (w.cols() != kernel * c) throw ContractError("conv: weight shape mismatch");
    const StridedCols win(xpad.data(), kernel * c, groups * span, Eigen::OuterStride<>(stride * c));
    const Matrix full = w * win;
    Matrix y(w.rows(), static_cast<Eigen::Index>(groups) * lout);
    for (int g = 0; g < groups; ++g) y.middleCols(g * lout, lout) = full.middleCols(g * span, lout);
    return y;
}

void TemporalConv::backward(const Matrix& w, const Matrix& xpad, const Matrix& dy, Matrix& dw, Matrix* dx) const {
    const Eigen::Index cin = xpad.rows();
    const Eigen::Index cout = w.rows();
    const Eigen::Index lp = padded_length();
    const Eigen::Index span = lp / stride;
    const int lout = out_length();
    if (dy.rows() != cout || dy.cols() != static_cast<Eigen::Index>(groups) * lout) {
        throw ContractError("conv: gradient shape mismatch");
    }
    // Output gradient on the input grid: window j of group g starts at column g * lp + j * stride.
    // The kernel - 1 leading zero columns let the input gradient read a full window everywhere.
    Matrix dyp = Matrix::Zero(cout, groups * lp + kernel - 1);
    for (int g = 0; g < groups; ++g) {
        MutStridedCols(dyp.data() + (kernel - 1 + g * lp) * cout, cout, lout, Eigen::OuterStride<>(stride * cout)) =
            dy.middleCols(g * lout, lout);
    }
    const StridedCols dy_full(dyp.data() + (kernel - 1) * cout, cout, groups * span,
                              Eigen::OuterStride<>(stride * cout));
    const StridedCols win(xpad.data(), kernel * cin, groups * span, Eigen::OuterStride<>(stride * cin));
    dw.noalias() += dy_full * win.transpose();
    if (!dx) return;
    // dxp[:, p] = sum_k W_k^T dy[:, p - k]: a stride-one correlation with the flipped kernel.
    Matrix wflip(cin, kernel * cout);
    for (int k = 0; k < kernel; ++k) {
        wflip.middleCols((kernel - 1 - k) * cout, cout) = w.middleCols(k * cin, cin).transpose();
    }
    const StridedCols dwin(dyp.data(), kernel * cout, groups * lp, Eigen::OuterStride<>(cout));
    const Matrix dxp = wflip * dwin;
    dx->resize(cin, static_cast<Eigen::Index>(groups) * length);
    for (int g = 0; g < groups; ++g) dx->middleCols(g * length, length) = dxp.middleCols(g * lp + pad, length);
}

Matrix batchnorm_train(const Matrix& x, const Vector& gamma, const Vector& beta, Vector& running_mean,
                       Vector& running_var, double momentum, double eps, BatchNormCache& cache) {
    const Eigen::Index c = x.rows();
    const double n = static_cast<double>(x.cols());
    // Two passes over columns: shifted moments, then normalise and affine in one sweep.
    const Vector shift = x.col(0);
    Vector s1 = Vector::Zero(c);
    Vector s2 = Vector::Zero(c);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto d = (x.col(j) - shift).array();
        s1.array() += d;
        s2.array() += d * d;
    }
    const Vector m1 = s1 / n;
    const Vector mean = shift + m1;
    const Vector var = (s2.array() / n - m1.array().square()).max(0.0);
    cache.inv_std = (var.array() + eps).rsqrt();
    cache.xhat.resize(c, x.cols());
    Matrix y(c, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        cache.xhat.col(j) = (x.col(j) - mean).cwiseProduct(cache.inv_std);
        y.col(j) = gamma.cwiseProduct(cache.xhat.col(j)) + beta;
    }
    const double unbiased = n > 1 ? n / (n - 1) : 1.0;
    running_mean = (1 - momentum) * running_mean + momentum * mean;
    running_var = (1 - momentum) * running_var + momentum * unbiased * var;
    return y;
}

Matrix batchnorm_eval(const Matrix& x, const Vector& gamma, const Vector& beta, const Vector& running_mean,
                      const Vector& running_var, double eps) {
    const Vector scale = gamma.array() * (running_var.array() + eps).rsqrt();
    const Vector shift = beta.array() - running_mean.array() * scale.array();
    return (scale.asDiagonal() * x).colwise() + shift;
}

Matrix batchnorm_backward(const Matrix& dy, const Vector& gamma, const BatchNormCache& cache, Vector& dgamma,
                          Vector& dbeta) {
    const Eigen::Index c = dy.rows();
    const double n = static_cast<double>(dy.cols());
    dbeta = Vector::Zero(c);
    dgamma = Vector::Zero(c);
    for (Eigen::Index j = 0; j < dy.cols(); ++j) {
        dbeta += dy.col(j);
        dgamma += dy.col(j).cwiseProduct(cache.xhat.col(j));
    }
    // dx = gamma * inv_std / n * (n dy - sum(dy) - xhat * sum(dy * xhat))
    const Vector scale = gamma.array() * cache.inv_std.array() / n;
    Matrix dx(c, dy.cols());
    for (Eigen::Index j = 0; j < dy.cols(); ++j) {
        dx.col(j) = scale.cwiseProduct(n * dy.col(j) - dbeta - dgamma.cwiseProduct(cache.xhat.col(j)));
    }
    return dx;
}

namespace {
thread_local KinkTrace* active_trace = nullptr;
}  // namespace

KinkTrace::KinkTrace() : hash_(0xcbf29ce484222325ULL), outer_(active_trace) { active_trace = this; }

KinkTrace::~KinkTrace() { active_trace = outer_; }

void KinkTrace::record(const Matrix& x) noexcept {
    const double* p = x.data();
    std::uint64_t word = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        word = (word << 1) | (p[i] > 0.0 ? 1u : 0u);
        if ((i & 63) == 63 || i + 1 == x.size()) {
            hash_ = (hash_ ^ word) * 0x100000001b3ULL;
            word = 0;
        }
    }
}

Matrix relu(const Matrix& x) {
    if (active_trace != nullptr) active_trace->record(x);
    return x.cwiseMax(0.0);
}

Matrix relu_grad(Matrix d, const Matrix& y) {
    double* pd = d.data();
    const double* py = y.data();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        pd[i] = py[i] > 0.0 ? pd[i] : 0.0;  // select, not branch: the sign pattern is unpredictable
    }
    return d;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp();
    const Vector sums = p.rowwise().sum();
    return sums.cwiseInverse().asDiagonal() * p;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* dlogits) {
    const auto b = logits.rows();
    if (static_cast<std::size_t>(b) != labels.size() || b == 0) {
        throw ContractError("cross_entropy: label count does not match batch");
    }
    const Vector max = logits.rowwise().maxCoeff();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        const int y = labels[i];
        if (y < 0 || y >= logits.cols()) throw ContractError("cross_entropy: label out of range");
        const double lse = max(i) + std::log((logits.row(i).array() - max(i)).exp().sum());
        loss += lse - logits(i, y);
    }
    if (dlogits) {
        *dlogits = softmax_rows(logits);
        for (Eigen::Index i = 0; i < b; ++i) (*dlogits)(i, labels[i]) -= 1.0;
        *dlogits /= static_cast<double>(b);
    }
    return loss / static_cast<double>(b);
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < m.cols(); ++j) {
            if (m(i, j) > m(i, best)) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

Sgd::Sgd(const ParamSet& params, SgdOptions options) : options_(options), velocity_(params.zeros_like()) {}

void Sgd::step(ParamSet& params, const Grads& grads, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params.items()[i].trainable) continue;
        velocity_[i] = options_.momentum * velocity_[i] + grads[i] + options_.weight_decay * params[i];
        params[i] -= lr * velocity_[i];
    }
}

GradCheckResult check_gradients(ParamSet& params, const Grads& analytic,
                                const std::function<double(const ParamSet&)>& loss, int count,
                                double epsilon, std::uint64_t seed, double floor) {
    std::vector<std::pair<std::size_t, Eigen::Index>> pool;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params.items()[i].trainable) continue;
        for (Eigen::Index k = 0; k < params[i].size(); ++k) pool.emplace_back(i, k);
    }
    if (pool.empty()) throw ContractError("gradient check: no trainable parameters");
    std::set<std::size_t> used;
    std::uint64_t state = seed;
    const int want = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 1)), pool.size()));

    GradCheckResult result;
    while (result.checked < want && used.size() < pool.size()) {
        const auto idx = static_cast<std::size_t>(uniform01(state) * static_cast<double>(pool.size()));
        if (!used.insert(idx).second) continue;
        const auto [pi, k] = pool[idx];
        double& w = params[pi].data()[k];
        const double saved = w;
        double up = 0.0, down = 0.0;
        std::uint64_t up_sig = 0, down_sig = 0;
        {
            KinkTrace trace;
            w = saved + epsilon;
            up = loss(params);
            up_sig = trace.signature();
        }
        {
            KinkTrace trace;
            w = saved - epsilon;
            down = loss(params);
            down_sig = trace.signature();
        }
        w = saved;
        if (up_sig != down_sig) {
            ++result.skipped_kinks;
            continue;
        }
        const double numeric = (up - down) / (2 * epsilon);
        const double a = analytic[pi].data()[k];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        if (result.checked == 0 || rel > result.max_relative_error) {
            result.max_relative_error = rel;
            result.worst_param = params.items()[pi].name;
        }
        ++result.checked;
    }
    return result;
}

}  // namespace duet::nn
