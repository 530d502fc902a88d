#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace gcan::num {

// Dense row-major matrix of 64-bit floats. Row/column vectors are 1xN / Nx1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
    Tensor(int r, int c, std::vector<double> data);

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor full(int r, int c, double x);
    static Tensor row(std::vector<double> data);
    static Tensor col(std::vector<double> data);

    double& at(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
    int size() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    std::string shape_str() const;
};

// Deterministic RNG. Raw mt19937_64 output is shaped into doubles by hand so
// results do not depend on libstdc++'s distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }
    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // unbiased integer in [0, n)
    uint64_t below(uint64_t n);
    double normal(double mean = 0.0, double stddev = 1.0);

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m1;  // Adam first moment
    Tensor m2;  // Adam second moment
    long step = 0;

    Parameter() = default;
    Parameter(std::string n, Tensor t)
        : name(std::move(n)),
          value(std::move(t)),
          grad(value.rows, value.cols),
          m1(value.rows, value.cols),
          m2(value.rows, value.cols) {}

    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

// Glorot-style uniform init in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int rows, int cols, Rng& rng);

enum class Act { Tanh, Relu, Sigmoid };

// Reverse-mode tape. Every differentiable operation the model needs is a
// method; backward() walks the recorded nodes once, in reverse order, and
// accumulates into Parameter::grad for every leaf.
class Tape {
public:
    using Id = int;

    Id leaf(Parameter& p);
    Id constant(Tensor t);

    Id matmul(Id a, Id b);
    Id transpose(Id a);
    Id add(Id a, Id b);                 // same shape
    Id add_col_broadcast(Id m, Id bias);  // bias (d x 1) added to every column
    Id sub(Id a, Id b);
    Id hadamard(Id a, Id b);
    Id scale(Id a, double c);
    Id one_minus(Id a);                 // 1 - x, elementwise
    Id activation(Id a, Act kind);
    Id softmax_row(Id a);               // 1 x m
    Id mean_columns(Id a);              // d x n -> d x 1
    Id col(Id a, int j);                // r x c -> r x 1
    Id concat_rows(const std::vector<Id>& parts);  // 1 x k_i -> 1 x sum(k_i)
    Id concat_cols(const std::vector<Id>& parts);  // d x 1  -> d x T
    // column t = tanh(W.row(idx[t])^T + b); W is vocab x d, b is d x 1
    Id embed_tanh(const std::vector<int>& indices, Id W, Id b);
    // X is n x f, W is d x (window*f) flattened filters, b is d x 1;
    // valid 1-D convolution over rows, stride 1 -> d x (n-window+1), linear (no activation)
    Id conv1d(Id X, Id W, Id b, int window);
    Id cross_entropy(Id probs, int label);  // probs 1 x c -> 1 x 1
    Id sum(Id a);                            // -> 1 x 1

    const Tensor& value(Id id) const { return nodes_[id].val; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }

    // Seeds d(loss)/d(loss) = 1 and accumulates into every reachable
    // Parameter's grad. loss must be 1x1.
    void backward(Id loss);

private:
    enum class Op {
        Leaf, Const, MatMul, Transpose, Add, AddColB, Sub, Mul, Scale, OneMinus, Col,
        Tanh, Relu, Sigmoid, SoftmaxRow, MeanCols, ConcatRows, ConcatCols,
        EmbedTanh, Conv1d, CrossEntropy, Sum
    };
    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        int c = -1;
        std::vector<int> many;      // concat inputs
        std::vector<int> indices;   // embedding lookups
        double daux = 0.0;
        int iaux = 0;
        Parameter* param = nullptr;
        Tensor val;
        Tensor grad;
    };
    Id push(Node n);
    std::vector<Node> nodes_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// One bias-corrected Adam update; gradients are cleared afterwards.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg);

struct GradCheckEntry {
    std::string param;
    int index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    bool pass = false;
    double max_rel_error = 0.0;
    int entries_checked = 0;
    GradCheckEntry worst;
};

// loss_fn(true) must compute the loss and accumulate gradients into the given
// parameters (which arrive zeroed); loss_fn(false) only returns the loss.
// Central differences (f(t+e) - f(t-e)) / 2e on up to samples_per_tensor
// entries of every parameter. Throws if two plain evaluations disagree
// (non-deterministic forward).
GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<Parameter*>& params,
                           double step, double tolerance,
                           int samples_per_tensor, Rng& rng);

}  // namespace gcan::num
