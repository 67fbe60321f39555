#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace duet::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Named parameter matrix. Buffers (trainable = false) ride along in checkpoints but
/// receive no gradient.
struct Param {
    std::string name;
    Matrix value;
    bool trainable = true;
};

class ParamSet {
public:
    /// Returns the index of the new entry; names are unique.
    std::size_t add(const std::string& name, Matrix value, bool trainable = true);

    [[nodiscard]] std::size_t index(const std::string& name) const;
    [[nodiscard]] bool contains(const std::string& name) const { return index_.contains(name); }
    Matrix& operator[](std::size_t i) { return items_[i].value; }
    const Matrix& operator[](std::size_t i) const { return items_[i].value; }
    Matrix& get(const std::string& name) { return items_[index(name)].value; }
    [[nodiscard]] const Matrix& get(const std::string& name) const { return items_[index(name)].value; }

    [[nodiscard]] const std::vector<Param>& items() const noexcept { return items_; }
    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] std::size_t trainable_scalars() const;
    [[nodiscard]] bool all_finite() const;

    /// Zero matrices shaped like every entry (buffers included, left at zero).
    [[nodiscard]] std::vector<Matrix> zeros_like() const;

    /// [{name, rows, cols, trainable, values}] with values in column-major order.
    [[nodiscard]] nlohmann::json to_json() const;
    static ParamSet from_json(const nlohmann::json& j);

    friend bool operator==(const ParamSet& a, const ParamSet& b);

private:
    std::vector<Param> items_;
    std::map<std::string, std::size_t> index_;
};

using Grads = std::vector<Matrix>;

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard library.
double uniform01(std::uint64_t& state) noexcept;

/// Fan-in scaled uniform initialisation in [-bound, bound].
Matrix uniform_init(int rows, int cols, double bound, std::uint64_t& state);

/// Inverted-dropout mask: entries are 1 / keep with probability keep, else 0. Draws four
/// 16-bit uniforms per generator step, so keep is resolved to 1/65536.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double keep, std::uint64_t& state);

/// Fisher-Yates with uniform01; deterministic across toolchains.
void shuffle(std::vector<int>& v, std::uint64_t& state);

/// Step decay: lr0 * decay^floor(epoch / step).
double step_lr(double lr0, double decay, int step, int epoch) noexcept;

// Grouped 1-D convolution support. A feature map is a C x (G * L) matrix whose column
// g * L + l holds position l of group g. im2col gathers a (K * C) x (G * Lout) matrix with
// row k * C + c; positions outside [0, L) read zero.
int conv_out_length(int length, int kernel, int pad, int stride) noexcept;
Matrix im2col(const Matrix& x, int groups, int length, int kernel, int pad, int stride);
Matrix col2im(const Matrix& cols, int channels, int groups, int length, int kernel, int pad, int stride);

/// The same convolution without materialising the im2col matrix. Each group is copied into a
/// zero-padded buffer of padded_length() columns, so that the im2col matrix is a strided view
/// with overlapping columns. Weights are Cout x (K * Cin), column k * Cin + c, as for im2col.
struct TemporalConv {
    int groups = 1;
    int length = 1;
    int kernel = 1;
    int pad = 0;
    int stride = 1;

    [[nodiscard]] int out_length() const noexcept { return conv_out_length(length, kernel, pad, stride); }
    /// length + 2 pad rounded up to a multiple of stride.
    [[nodiscard]] int padded_length() const noexcept;
    /// Cin x (groups * padded_length() + kernel) buffer consumed by forward and backward.
    [[nodiscard]] Matrix pad_input(const Matrix& x) const;
    /// Cout x (groups * out_length()).
    [[nodiscard]] Matrix forward(const Matrix& w, const Matrix& xpad) const;
    /// Accumulates the weight gradient into dw; writes the input gradient if dx is non-null.
    void backward(const Matrix& w, const Matrix& xpad, const Matrix& dy, Matrix& dw, Matrix* dx) const;
};

struct BatchNormCache {
    Matrix xhat;
    Vector inv_std;
};

/// Per-row normalisation over columns with batch statistics; updates running stats.
Matrix batchnorm_train(const Matrix& x, const Vector& gamma, const Vector& beta, Vector& running_mean,
                       Vector& running_var, double momentum, double eps, BatchNormCache& cache);
Matrix batchnorm_eval(const Matrix& x, const Vector& gamma, const Vector& beta, const Vector& running_mean,
                      const Vector& running_var, double eps);
Matrix batchnorm_backward(const Matrix& dy, const Vector& gamma, const BatchNormCache& cache, Vector& dgamma,
                          Vector& dbeta);

Matrix relu(const Matrix& x);
/// Zeroes d where the ReLU output y is not positive.
Matrix relu_grad(Matrix d, const Matrix& y);

/// Row-wise softmax of a B x K logit matrix.
Matrix softmax_rows(const Matrix& logits);

/// Mean cross-entropy of softmax(logits) against integer labels; fills dlogits if given.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* dlogits);

/// Row-wise argmax; ties go to the lowest index.
std::vector<int> argmax_rows(const Matrix& m);

struct SgdOptions {
    double momentum = 0.9;
    double weight_decay = 1e-4;
};

/// Momentum SGD with L2 decay on trainable entries: v = mu v + (g + wd w); w -= lr v.
class Sgd {
public:
    Sgd(const ParamSet& params, SgdOptions options);
    void step(ParamSet& params, const Grads& grads, double lr);

private:
    SgdOptions options_;
    std::vector<Matrix> velocity_;
};

/// While alive, folds the sign pattern of every relu() input on this thread into a signature.
/// Two evaluations with equal signatures took the same linear piece of the network.
class KinkTrace {
public:
    KinkTrace();
    ~KinkTrace();
    KinkTrace(const KinkTrace&) = delete;
    KinkTrace& operator=(const KinkTrace&) = delete;

    [[nodiscard]] std::uint64_t signature() const noexcept { return hash_; }
    void record(const Matrix& x) noexcept;

private:
    std::uint64_t hash_;
    KinkTrace* outer_;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    int checked = 0;
    int skipped_kinks = 0;  // coordinates whose +-epsilon evaluations changed a ReLU sign
    std::string worst_param;
};

/// Central differences on `count` trainable scalars drawn uniformly with `seed`. A coordinate
/// whose two evaluations differ in ReLU sign pattern straddles a kink, where the difference
/// quotient does not estimate the derivative; it is skipped and another drawn.
/// Relative error is |a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients
/// from reporting noise as error.
GradCheckResult check_gradients(ParamSet& params, const Grads& analytic,
                                const std::function<double(const ParamSet&)>& loss, int count,
                                double epsilon, std::uint64_t seed, double floor = 1e-6);

}  // namespace duet::nn
