#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

// Two ReLU hidden layers of width twice the input size, softmax
// cross-entropy over the two classes, trained by plain minibatch gradient
// descent.
struct FnnParams {
    std::size_t input = 0;
    std::size_t hidden = 0;          // always 2 * input
    std::vector<double> w1, b1;      // input x hidden, hidden
    std::vector<double> w2, b2;      // hidden x hidden, hidden
    std::vector<double> w3, b3;      // hidden x 2, 2

    static FnnParams zeros(std::size_t input_dim) {
        FnnParams p;
        p.input = input_dim;
        p.hidden = 2 * input_dim;
        p.w1.assign(p.input * p.hidden, 0.0);
        p.b1.assign(p.hidden, 0.0);
        p.w2.assign(p.hidden * p.hidden, 0.0);
        p.b2.assign(p.hidden, 0.0);
        p.w3.assign(p.hidden * 2, 0.0);
        p.b3.assign(2, 0.0);
        return p;
    }

    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
    }

    // flat view in a fixed order, for finite-difference checks
    std::vector<double*> blocks() {
        return {w1.data(), b1.data(), w2.data(), b2.data(), w3.data(), b3.data()};
    }
    std::vector<std::size_t> block_sizes() const {
        return {w1.size(), b1.size(), w2.size(), b2.size(), w3.size(), b3.size()};
    }

    void axpy(double scale, const FnnParams& g) {
        auto add = [scale](std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
        };
        add(w1, g.w1);
        add(b1, g.b1);
        add(w2, g.w2);
        add(b2, g.b2);
        add(w3, g.w3);
        add(b3, g.b3);
    }
};

namespace detail {

// C (m x n) = A (m x k) * B (k x n), row-major
inline void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
    std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ar = a + i * k;
        double* cr = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = ar[l];
            const double* br = b + l * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

// C (k x n) += A (m x k)^T * B (m x n)
inline void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                        std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ar = a + i * k;
        const double* br = b + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = ar[l];
            if (av == 0.0) continue;
            double* cr = c + l * n;
            for (std::size_t j = 0; j < n; ++j) cr[j] += av * br[j];
        }
    }
}

inline void transpose(const double* a, double* at, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) at[j * rows + i] = a[i * cols + j];
}

struct FnnWorkspace {
    std::vector<double> z1, h1, z2, h2, logits, probs;
    std::vector<double> d1, d2, w2t;

    void resize(std::size_t batch, const FnnParams& p) {
        z1.resize(batch * p.hidden);
        h1.resize(batch * p.hidden);
        z2.resize(batch * p.hidden);
        h2.resize(batch * p.hidden);
        logits.resize(batch * 2);
        probs.resize(batch * 2);
        d1.resize(batch * p.hidden);
        d2.resize(batch * p.hidden);
        w2t.resize(p.hidden * p.hidden);
    }
};

// forward pass over a contiguous batch; keeps pre-activations for backprop
inline void fnn_forward_batch(const FnnParams& p, const double* x, std::size_t batch,
                              FnnWorkspace& ws) {
    ws.resize(batch, p);
    gemm(x, p.w1.data(), ws.z1.data(), batch, p.input, p.hidden);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j) {
            double& z = ws.z1[i * p.hidden + j];
            z += p.b1[j];
            ws.h1[i * p.hidden + j] = z > 0.0 ? z : 0.0;
        }
    gemm(ws.h1.data(), p.w2.data(), ws.z2.data(), batch, p.hidden, p.hidden);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j) {
            double& z = ws.z2[i * p.hidden + j];
            z += p.b2[j];
            ws.h2[i * p.hidden + j] = z > 0.0 ? z : 0.0;
        }
    gemm(ws.h2.data(), p.w3.data(), ws.logits.data(), batch, p.hidden, 2);
    for (std::size_t i = 0; i < batch; ++i) {
        double l0 = ws.logits[i * 2] + p.b3[0];
        double l1 = ws.logits[i * 2 + 1] + p.b3[1];
        ws.logits[i * 2] = l0;
        ws.logits[i * 2 + 1] = l1;
        const double m = std::max(l0, l1);
        const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
        ws.probs[i * 2] = e0 / (e0 + e1);
        ws.probs[i * 2 + 1] = e1 / (e0 + e1);
    }
}

}  // namespace detail

// Class distribution {P(negative), P(positive)} for a single row.
inline std::array<double, 2> fnn_forward(const FnnParams& p, std::span<const double> x) {
    if (x.size() != p.input) throw ContractError("fnn_forward: row dimension mismatch");
    static thread_local detail::FnnWorkspace ws;
    detail::fnn_forward_batch(p, x.data(), 1, ws);
    return {ws.probs[0], ws.probs[1]};
}

// Mean softmax cross-entropy over the batch.
inline double fnn_loss(const FnnParams& p, const Matrix& x, const std::vector<int>& y) {
    if (x.rows() == 0) throw DataError("fnn_loss: empty batch");
    detail::FnnWorkspace ws;
    detail::fnn_forward_batch(p, x.data(), x.rows(), ws);
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double l0 = ws.logits[i * 2], l1 = ws.logits[i * 2 + 1];
        const double m = std::max(l0, l1);
        const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
        loss += lse - (y[i] ? l1 : l0);
    }
    return loss / static_cast<double>(x.rows());
}

// Exact gradients of fnn_loss with respect to every parameter.
inline FnnParams fnn_backprop(const FnnParams& p, const Matrix& x, const std::vector<int>& y) {
    const std::size_t batch = x.rows();
    if (batch == 0) throw DataError("fnn_backprop: empty batch");
    if (x.cols() != p.input) throw ContractError("fnn_backprop: column mismatch");
    detail::FnnWorkspace ws;
    detail::fnn_forward_batch(p, x.data(), batch, ws);

    FnnParams g = FnnParams::zeros(p.input);
    const double inv_b = 1.0 / static_cast<double>(batch);

    // dlogits = (probs - onehot(y)) / batch
    std::vector<double> dlogits(batch * 2);
    for (std::size_t i = 0; i < batch; ++i) {
        dlogits[i * 2] = (ws.probs[i * 2] - (y[i] ? 0.0 : 1.0)) * inv_b;
        dlogits[i * 2 + 1] = (ws.probs[i * 2 + 1] - (y[i] ? 1.0 : 0.0)) * inv_b;
    }
    detail::gemm_tn_acc(ws.h2.data(), dlogits.data(), g.w3.data(), batch, p.hidden, 2);
    for (std::size_t i = 0; i < batch; ++i) {
        g.b3[0] += dlogits[i * 2];
        g.b3[1] += dlogits[i * 2 + 1];
    }

    // back through layer 2
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j) {
            const double dh = dlogits[i * 2] * p.w3[j * 2] + dlogits[i * 2 + 1] * p.w3[j * 2 + 1];
            ws.d2[i * p.hidden + j] = ws.z2[i * p.hidden + j] > 0.0 ? dh : 0.0;
        }
    detail::gemm_tn_acc(ws.h1.data(), ws.d2.data(), g.w2.data(), batch, p.hidden, p.hidden);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j) g.b2[j] += ws.d2[i * p.hidden + j];

    // back through layer 1
    detail::transpose(p.w2.data(), ws.w2t.data(), p.hidden, p.hidden);
    detail::gemm(ws.d2.data(), ws.w2t.data(), ws.d1.data(), batch, p.hidden, p.hidden);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j)
            if (ws.z1[i * p.hidden + j] <= 0.0) ws.d1[i * p.hidden + j] = 0.0;
    detail::gemm_tn_acc(x.data(), ws.d1.data(), g.w1.data(), batch, p.input, p.hidden);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < p.hidden; ++j) g.b1[j] += ws.d1[i * p.hidden + j];

    return g;
}

inline FnnParams fnn_init(std::size_t input_dim, std::uint64_t seed) {
    FnnParams p = FnnParams::zeros(input_dim);
    const auto fill = [&](std::vector<double>& w, std::size_t fan_in, std::uint64_t stream) {
        std::mt19937_64 rng(mix_seed(seed, stream));
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& v : w) v = dist(rng);
    };
    fill(p.w1, p.input, 1);
    fill(p.w2, p.hidden, 2);
    fill(p.w3, p.hidden, 3);
    return p;
}

class FnnModel : public Model {
public:
    explicit FnnModel(FnnParams params) : params_(std::move(params)) {}

    LearnerFamily family() const override { return LearnerFamily::deep_fnn; }

    double predict_proba(std::span<const double> row) const override {
        return fnn_forward(params_, row)[1];
    }
    std::array<double, 2> class_distribution(std::span<const double> row) const {
        return fnn_forward(params_, row);
    }

    const FnnParams& params() const { return params_; }

    void save(std::ostream& out) const override {
        out << "dims " << params_.input << " " << params_.hidden << "\n";
        detail::write_doubles(out, params_.w1);
        detail::write_doubles(out, params_.b1);
        detail::write_doubles(out, params_.w2);
        detail::write_doubles(out, params_.b2);
        detail::write_doubles(out, params_.w3);
        detail::write_doubles(out, params_.b3);
    }
    static std::unique_ptr<FnnModel> load(std::istream& in) {
        detail::expect_token(in, "dims");
        std::size_t input = 0, hidden = 0;
        in >> input >> hidden;
        if (hidden != 2 * input) throw DataError("fnn model: hidden width must be twice the input");
        FnnParams p = FnnParams::zeros(input);
        detail::read_doubles(in, p.w1);
        detail::read_doubles(in, p.b1);
        detail::read_doubles(in, p.w2);
        detail::read_doubles(in, p.b2);
        detail::read_doubles(in, p.w3);
        detail::read_doubles(in, p.b3);
        if (!in) throw DataError("truncated fnn model");
        return std::make_unique<FnnModel>(std::move(p));
    }

private:
    FnnParams params_;
};

inline std::unique_ptr<Model> train_deep_fnn(const LearnerSpec& spec, const TrainData& data) {
    require_both_classes(data.y, "deep_fnn");
    const auto& hp = spec.hyperparameters;
    const double lr = hp.at("learning_rate");
    const std::size_t batch_size = std::max<std::size_t>(1, static_cast<std::size_t>(hp.at("batch_size")));
    const std::size_t epochs = static_cast<std::size_t>(hp.at("epochs"));

    const std::size_t n = data.x.rows(), p = data.x.cols();
    FnnParams params = fnn_init(p, spec.seed);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::mt19937_64 rng(mix_seed(spec.seed, 1000 + epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t b = std::min(batch_size, n - start);
            Matrix batch(b, p);
            std::vector<int> yb(b);
            for (std::size_t k = 0; k < b; ++k) {
                const std::size_t i = order[start + k];
                std::copy_n(data.x.data() + i * p, p, batch.data() + k * p);
                yb[k] = data.y[i];
            }
            FnnParams grads = fnn_backprop(params, batch, yb);
            params.axpy(-lr, grads);
        }
    }
    return std::make_unique<FnnModel>(std::move(params));
}

}  // namespace amipred
