#include "gcan/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gcan::num {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

static CMap map(const Tensor& t) { return CMap(t.v.data(), t.rows, t.cols); }
static MMap map(Tensor& t) { return MMap(t.v.data(), t.rows, t.cols); }

Tensor::Tensor(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
    if (static_cast<size_t>(r) * c != v.size()) {
        throw std::invalid_argument("Tensor: data length does not match shape " + shape_str());
    }
}

Tensor Tensor::full(int r, int c, double x) {
    Tensor t(r, c);
    std::fill(t.v.begin(), t.v.end(), x);
    return t;
}

Tensor Tensor::row(std::vector<double> data) {
    int n = static_cast<int>(data.size());
    return Tensor(1, n, std::move(data));
}

Tensor Tensor::col(std::vector<double> data) {
    int n = static_cast<int>(data.size());
    return Tensor(n, 1, std::move(data));
}

bool Tensor::all_finite() const {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal(double mean, double stddev) {
    // Marsaglia polar method on our own uniforms.
    if (have_spare_) {
        have_spare_ = false;
        return mean + stddev * spare_;
    }
    double u, w, s;
    do {
        u = uniform(-1.0, 1.0);
        w = uniform(-1.0, 1.0);
        s = u * u + w * w;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = w * f;
    have_spare_ = true;
    return mean + stddev * u * f;
}

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
    double a = std::sqrt(6.0 / (rows + cols));
    Tensor t(rows, cols);
    for (double& x : t.v) x = rng.uniform(-a, a);
    return t;
}

Tape::Id Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::leaf(Parameter& p) {
    Node n;
    n.op = Op::Leaf;
    n.param = &p;
    n.val = p.value;
    return push(std::move(n));
}

Tape::Id Tape::constant(Tensor t) {
    Node n;
    n.op = Op::Const;
    n.val = std::move(t);
    return push(std::move(n));
}

Tape::Id Tape::matmul(Id a, Id b) {
    const Tensor& A = nodes_[a].val;
    const Tensor& B = nodes_[b].val;
    if (A.cols != B.rows) {
        throw std::invalid_argument("matmul: inner dimensions mismatch " + A.shape_str() +
                                    " * " + B.shape_str());
    }
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.val = Tensor(A.rows, B.cols);
    map(n.val).noalias() = map(A) * map(B);
    return push(std::move(n));
}

Tape::Id Tape::transpose(Id a) {
    const Tensor& A = nodes_[a].val;
    Node n;
    n.op = Op::Transpose;
    n.a = a;
    n.val = Tensor(A.cols, A.rows);
    map(n.val) = map(A).transpose();
    return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
    const Tensor& A = nodes_[a].val;
    const Tensor& B = nodes_[b].val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("add: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val = A;
    for (int i = 0; i < n.val.size(); ++i) n.val.v[i] += B.v[i];
    return push(std::move(n));
}

Tape::Id Tape::add_col_broadcast(Id m, Id bias) {
    const Tensor& A = nodes_[m].val;
    const Tensor& B = nodes_[bias].val;
    if (B.cols != 1 || B.rows != A.rows) {
        throw std::invalid_argument("add_col_broadcast: bias " + B.shape_str() +
                                    " does not match matrix " + A.shape_str());
    }
    Node n;
    n.op = Op::AddColB;
    n.a = m;
    n.b = bias;
    n.val = A;
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) n.val.at(i, j) += B.v[i];
    return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
    const Tensor& A = nodes_[a].val;
    const Tensor& B = nodes_[b].val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("sub: shape mismatch " + A.shape_str() + " vs " + B.shape_str());
    }
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.val = A;
    for (int i = 0; i < n.val.size(); ++i) n.val.v[i] -= B.v[i];
    return push(std::move(n));
}

Tape::Id Tape::hadamard(Id a, Id b) {
    const Tensor& A = nodes_[a].val;
    const Tensor& B = nodes_[b].val;
    if (!A.same_shape(B)) {
        throw std::invalid_argument("hadamard: shape mismatch " + A.shape_str() + " vs " +
                                    B.shape_str());
    }
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.val = A;
    for (int i = 0; i < n.val.size(); ++i) n.val.v[i] *= B.v[i];
    return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.daux = c;
    n.val = nodes_[a].val;
    for (double& x : n.val.v) x *= c;
    return push(std::move(n));
}

Tape::Id Tape::one_minus(Id a) {
    Node n;
    n.op = Op::OneMinus;
    n.a = a;
    n.val = nodes_[a].val;
    for (double& x : n.val.v) x = 1.0 - x;
    return push(std::move(n));
}

Tape::Id Tape::activation(Id a, Act kind) {
    Node n;
    n.a = a;
    n.val = nodes_[a].val;
    switch (kind) {
        case Act::Tanh:
            n.op = Op::Tanh;
            for (double& x : n.val.v) x = std::tanh(x);
            break;
        case Act::Relu:
            n.op = Op::Relu;
            for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
            break;
        case Act::Sigmoid:
            n.op = Op::Sigmoid;
            for (double& x : n.val.v) x = 1.0 / (1.0 + std::exp(-x));
            break;
    }
    return push(std::move(n));
}

Tape::Id Tape::softmax_row(Id a) {
    const Tensor& A = nodes_[a].val;
    if (A.rows != 1) {
        throw std::invalid_argument("softmax_row: expected row vector, got " + A.shape_str());
    }
    Node n;
    n.op = Op::SoftmaxRow;
    n.a = a;
    n.val = A;
    double mx = *std::max_element(n.val.v.begin(), n.val.v.end());
    double s = 0.0;
    for (double& x : n.val.v) {
        x = std::exp(x - mx);
        s += x;
    }
    for (double& x : n.val.v) x /= s;
    return push(std::move(n));
}

Tape::Id Tape::mean_columns(Id a) {
    const Tensor& A = nodes_[a].val;
    if (A.cols < 1) throw std::invalid_argument("mean_columns: empty matrix");
    Node n;
    n.op = Op::MeanCols;
    n.a = a;
    n.val = Tensor(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += A.at(i, j);
        n.val.v[i] = s / A.cols;
    }
    return push(std::move(n));
}

Tape::Id Tape::col(Id a, int j) {
    const Tensor& A = nodes_[a].val;
    if (j < 0 || j >= A.cols) {
        throw std::out_of_range("col: index " + std::to_string(j) + " for " + A.shape_str());
    }
    Node n;
    n.op = Op::Col;
    n.a = a;
    n.iaux = j;
    n.val = Tensor(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) n.val.v[i] = A.at(i, j);
    return push(std::move(n));
}

Tape::Id Tape::concat_rows(const std::vector<Id>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty part list");
    int total = 0;
    for (Id p : parts) {
        const Tensor& t = nodes_[p].val;
        if (t.rows != 1) {
            throw std::invalid_argument("concat_rows: expected row vectors, got " + t.shape_str());
        }
        total += t.cols;
    }
    Node n;
    n.op = Op::ConcatRows;
    n.many = parts;
    n.val = Tensor(1, total);
    int off = 0;
    for (Id p : parts) {
        const Tensor& t = nodes_[p].val;
        std::copy(t.v.begin(), t.v.end(), n.val.v.begin() + off);
        off += t.cols;
    }
    return push(std::move(n));
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty part list");
    int rows = nodes_[parts[0]].val.rows;
    for (Id p : parts) {
        const Tensor& t = nodes_[p].val;
        if (t.cols != 1 || t.rows != rows) {
            throw std::invalid_argument("concat_cols: expected " + std::to_string(rows) +
                                        "x1 columns, got " + t.shape_str());
        }
    }
    Node n;
    n.op = Op::ConcatCols;
    n.many = parts;
    n.val = Tensor(rows, static_cast<int>(parts.size()));
    for (size_t j = 0; j < parts.size(); ++j) {
        const Tensor& t = nodes_[parts[j]].val;
        for (int i = 0; i < rows; ++i) n.val.at(i, static_cast<int>(j)) = t.v[i];
    }
    return push(std::move(n));
}

Tape::Id Tape::embed_tanh(const std::vector<int>& indices, Id W, Id b) {
    const Tensor& Wv = nodes_[W].val;
    const Tensor& bv = nodes_[b].val;
    int d = Wv.cols;
    if (bv.rows != d || bv.cols != 1) {
        throw std::invalid_argument("embed_tanh: bias " + bv.shape_str() + " does not match dim " +
                                    std::to_string(d));
    }
    for (int idx : indices) {
        if (idx < 0 || idx >= Wv.rows) {
            throw std::out_of_range("embed_tanh: token index " + std::to_string(idx) +
                                    " outside vocabulary of size " + std::to_string(Wv.rows));
        }
    }
    Node n;
    n.op = Op::EmbedTanh;
    n.a = W;
    n.b = b;
    n.indices = indices;
    n.val = Tensor(d, static_cast<int>(indices.size()));
    for (size_t t = 0; t < indices.size(); ++t) {
        for (int i = 0; i < d; ++i) {
            n.val.at(i, static_cast<int>(t)) = std::tanh(Wv.at(indices[t], i) + bv.v[i]);
        }
    }
    return push(std::move(n));
}

Tape::Id Tape::conv1d(Id X, Id W, Id b, int window) {
    const Tensor& Xv = nodes_[X].val;
    const Tensor& Wv = nodes_[W].val;
    const Tensor& bv = nodes_[b].val;
    int nrows = Xv.rows, f = Xv.cols, d = Wv.rows;
    if (nrows < window) {
        throw std::invalid_argument("conv1d: sequence length " + std::to_string(nrows) +
                                    " shorter than window " + std::to_string(window));
    }
    if (Wv.cols != window * f || bv.rows != d || bv.cols != 1) {
        throw std::invalid_argument("conv1d: filter " + Wv.shape_str() + " / bias " +
                                    bv.shape_str() + " inconsistent with input " + Xv.shape_str());
    }
    int T = nrows - window + 1;
    Node n;
    n.op = Op::Conv1d;
    n.a = X;
    n.b = W;
    n.c = b;
    n.iaux = window;
    n.val = Tensor(d, T);
    for (int c = 0; c < d; ++c) {
        for (int t = 0; t < T; ++t) {
            double s = bv.v[c];
            for (int r = 0; r < window; ++r)
                for (int j = 0; j < f; ++j) s += Wv.at(c, r * f + j) * Xv.at(t + r, j);
            n.val.at(c, t) = s;
        }
    }
    return push(std::move(n));
}

Tape::Id Tape::cross_entropy(Id probs, int label) {
    const Tensor& P = nodes_[probs].val;
    if (P.rows != 1 || label < 0 || label >= P.cols) {
        throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                    " invalid for probabilities " + P.shape_str());
    }
    Node n;
    n.op = Op::CrossEntropy;
    n.a = probs;
    n.iaux = label;
    double p = std::clamp(P.v[label], 1e-12, 1.0 - 1e-12);
    n.val = Tensor(1, 1);
    n.val.v[0] = -std::log(p);
    return push(std::move(n));
}

Tape::Id Tape::sum(Id a) {
    Node n;
    n.op = Op::Sum;
    n.a = a;
    n.val = Tensor(1, 1);
    double s = 0.0;
    for (double x : nodes_[a].val.v) s += x;
    n.val.v[0] = s;
    return push(std::move(n));
}

void Tape::backward(Id loss) {
    if (loss < 0 || loss >= static_cast<Id>(nodes_.size())) {
        throw std::invalid_argument("backward: invalid loss id");
    }
    Node& ln = nodes_[loss];
    if (ln.val.rows != 1 || ln.val.cols != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got " + ln.val.shape_str());
    }
    for (Id i = 0; i <= loss; ++i) {
        nodes_[i].grad = Tensor(nodes_[i].val.rows, nodes_[i].val.cols);
    }
    ln.grad.v[0] = 1.0;

    for (Id i = loss; i >= 0; --i) {
        Node& n = nodes_[i];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf: {
                Tensor& pg = n.param->grad;
                for (int k = 0; k < g.size(); ++k) pg.v[k] += g.v[k];
                break;
            }
            case Op::Const:
                break;
            case Op::MatMul: {
                Node& A = nodes_[n.a];
                Node& B = nodes_[n.b];
                map(A.grad).noalias() += map(g) * map(B.val).transpose();
                map(B.grad).noalias() += map(A.val).transpose() * map(g);
                break;
            }
            case Op::Transpose: {
                Node& A = nodes_[n.a];
                map(A.grad) += map(g).transpose();
                break;
            }
            case Op::Add: {
                for (int k = 0; k < g.size(); ++k) nodes_[n.a].grad.v[k] += g.v[k];
                for (int k = 0; k < g.size(); ++k) nodes_[n.b].grad.v[k] += g.v[k];
                break;
            }
            case Op::AddColB: {
                Node& A = nodes_[n.a];
                Node& B = nodes_[n.b];
                for (int k = 0; k < g.size(); ++k) A.grad.v[k] += g.v[k];
                for (int r = 0; r < g.rows; ++r)
                    for (int c = 0; c < g.cols; ++c) B.grad.v[r] += g.at(r, c);
                break;
            }
            case Op::Sub: {
                for (int k = 0; k < g.size(); ++k) nodes_[n.a].grad.v[k] += g.v[k];
                for (int k = 0; k < g.size(); ++k) nodes_[n.b].grad.v[k] -= g.v[k];
                break;
            }
            case Op::Mul: {
                Node& A = nodes_[n.a];
                Node& B = nodes_[n.b];
                for (int k = 0; k < g.size(); ++k) A.grad.v[k] += g.v[k] * B.val.v[k];
                for (int k = 0; k < g.size(); ++k) B.grad.v[k] += g.v[k] * A.val.v[k];
                break;
            }
            case Op::Scale: {
                for (int k = 0; k < g.size(); ++k) nodes_[n.a].grad.v[k] += n.daux * g.v[k];
                break;
            }
            case Op::OneMinus: {
                for (int k = 0; k < g.size(); ++k) nodes_[n.a].grad.v[k] -= g.v[k];
                break;
            }
            case Op::Col: {
                Node& A = nodes_[n.a];
                for (int r = 0; r < A.val.rows; ++r) A.grad.at(r, n.iaux) += g.v[r];
                break;
            }
            case Op::Tanh: {
                Node& A = nodes_[n.a];
                for (int k = 0; k < g.size(); ++k)
                    A.grad.v[k] += g.v[k] * (1.0 - n.val.v[k] * n.val.v[k]);
                break;
            }
            case Op::Relu: {
                Node& A = nodes_[n.a];
                for (int k = 0; k < g.size(); ++k)
                    A.grad.v[k] += n.val.v[k] > 0.0 ? g.v[k] : 0.0;
                break;
            }
            case Op::Sigmoid: {
                Node& A = nodes_[n.a];
                for (int k = 0; k < g.size(); ++k)
                    A.grad.v[k] += g.v[k] * n.val.v[k] * (1.0 - n.val.v[k]);
                break;
            }
            case Op::SoftmaxRow: {
                Node& A = nodes_[n.a];
                double dot = 0.0;
                for (int k = 0; k < g.size(); ++k) dot += g.v[k] * n.val.v[k];
                for (int k = 0; k < g.size(); ++k)
                    A.grad.v[k] += n.val.v[k] * (g.v[k] - dot);
                break;
            }
            case Op::MeanCols: {
                Node& A = nodes_[n.a];
                double inv = 1.0 / A.val.cols;
                for (int r = 0; r < A.val.rows; ++r)
                    for (int c = 0; c < A.val.cols; ++c) A.grad.at(r, c) += g.v[r] * inv;
                break;
            }
            case Op::ConcatRows: {
                int off = 0;
                for (Id p : n.many) {
                    Node& P = nodes_[p];
                    for (int k = 0; k < P.val.cols; ++k) P.grad.v[k] += g.v[off + k];
                    off += P.val.cols;
                }
                break;
            }
            case Op::ConcatCols: {
                for (size_t j = 0; j < n.many.size(); ++j) {
                    Node& P = nodes_[n.many[j]];
                    for (int r = 0; r < P.val.rows; ++r)
                        P.grad.v[r] += g.at(r, static_cast<int>(j));
                }
                break;
            }
            case Op::EmbedTanh: {
                Node& W = nodes_[n.a];
                Node& B = nodes_[n.b];
                int d = n.val.rows;
                for (size_t t = 0; t < n.indices.size(); ++t) {
                    int idx = n.indices[t];
                    for (int k = 0; k < d; ++k) {
                        double y = n.val.at(k, static_cast<int>(t));
                        double dpre = g.at(k, static_cast<int>(t)) * (1.0 - y * y);
                        W.grad.at(idx, k) += dpre;
                        B.grad.v[k] += dpre;
                    }
                }
                break;
            }
            case Op::Conv1d: {
                Node& X = nodes_[n.a];
                Node& W = nodes_[n.b];
                Node& B = nodes_[n.c];
                int f = X.val.cols, d = n.val.rows, T = n.val.cols, win = n.iaux;
                for (int c = 0; c < d; ++c) {
                    for (int t = 0; t < T; ++t) {
                        double gy = g.at(c, t);
                        if (gy == 0.0) continue;
                        B.grad.v[c] += gy;
                        for (int r = 0; r < win; ++r) {
                            for (int j = 0; j < f; ++j) {
                                W.grad.at(c, r * f + j) += gy * X.val.at(t + r, j);
                                X.grad.at(t + r, j) += gy * W.val.at(c, r * f + j);
                            }
                        }
                    }
                }
                break;
            }
            case Op::CrossEntropy: {
                Node& P = nodes_[n.a];
                double p = std::clamp(P.val.v[n.iaux], 1e-12, 1.0 - 1e-12);
                P.grad.v[n.iaux] += -g.v[0] / p;
                break;
            }
            case Op::Sum: {
                Node& A = nodes_[n.a];
                for (int k = 0; k < A.grad.size(); ++k) A.grad.v[k] += g.v[0];
                break;
            }
        }
    }
}

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        p->step += 1;
        double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        for (int k = 0; k < p->value.size(); ++k) {
            double g = p->grad.v[k];
            p->m1.v[k] = cfg.beta1 * p->m1.v[k] + (1.0 - cfg.beta1) * g;
            p->m2.v[k] = cfg.beta2 * p->m2.v[k] + (1.0 - cfg.beta2) * g * g;
            double mhat = p->m1.v[k] / bc1;
            double vhat = p->m2.v[k] / bc2;
            p->value.v[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
        p->zero_grad();
    }
}

GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<Parameter*>& params,
                           double step, double tolerance,
                           int samples_per_tensor, Rng& rng) {
    double l1 = loss_fn(false);
    double l2 = loss_fn(false);
    if (l1 != l2) {
        throw std::runtime_error("grad_check: forward is not deterministic (" +
                                 std::to_string(l1) + " vs " + std::to_string(l2) + ")");
    }

    for (Parameter* p : params) p->zero_grad();
    loss_fn(true);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    GradCheckReport rep;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        int sz = p->value.size();
        std::vector<int> picks;
        if (sz <= samples_per_tensor) {
            for (int k = 0; k < sz; ++k) picks.push_back(k);
        } else {
            for (int s = 0; s < samples_per_tensor; ++s)
                picks.push_back(static_cast<int>(rng.below(static_cast<uint64_t>(sz))));
        }
        for (int k : picks) {
            double orig = p->value.v[k];
            p->value.v[k] = orig + step;
            double fp = loss_fn(false);
            p->value.v[k] = orig - step;
            double fm = loss_fn(false);
            p->value.v[k] = orig;
            double numeric = (fp - fm) / (2.0 * step);
            double a = analytic[pi].v[k];
            double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            double rel = std::fabs(a - numeric) / denom;
            rep.entries_checked += 1;
            if (rel > rep.max_rel_error) {
                rep.max_rel_error = rel;
                rep.worst = {p->name, k, a, numeric, rel};
            }
        }
    }
    for (Parameter* p : params) p->zero_grad();
    rep.pass = rep.max_rel_error < tolerance;
    return rep;
}

}  // namespace gcan::num
