#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

class LogisticModel : public Model {
public:
    LogisticModel(LearnerFamily family, std::vector<double> weights, double bias)
        : family_(family), weights_(std::move(weights)), bias_(bias) {}

    LearnerFamily family() const override { return family_; }

    double predict_proba(std::span<const double> row) const override {
        if (row.size() != weights_.size())
            throw ContractError("logistic: row dimension mismatch");
        double z = bias_;
        for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * row[j];
        return sigmoid(z);
    }

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

    void save(std::ostream& out) const override {
        out << "dims " << weights_.size() << "\n";
        detail::write_doubles(out, weights_);
        out.precision(17);
        out << bias_ << "\n";
    }
    static std::unique_ptr<LogisticModel> load(std::istream& in, LearnerFamily family) {
        detail::expect_token(in, "dims");
        std::size_t p = 0;
        in >> p;
        std::vector<double> w(p);
        detail::read_doubles(in, w);
        double b = 0;
        in >> b;
        if (!in) throw DataError("truncated logistic model");
        return std::make_unique<LogisticModel>(family, std::move(w), b);
    }

private:
    LearnerFamily family_;
    std::vector<double> weights_;
    double bias_;
};

// Mean negative log-likelihood plus (ridge/2)·|w|²; the bias is not
// penalized.
inline double logistic_loss(const Matrix& x, const std::vector<int>& y,
                            std::span<const double> w, double bias, double ridge) {
    const std::size_t n = x.rows(), p = x.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * p;
        double z = bias;
        for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
        loss += log1pexp(z) - (y[i] ? z : 0.0);
    }
    loss /= static_cast<double>(n);
    double penalty = 0.0;
    for (double wj : w) penalty += wj * wj;
    return loss + 0.5 * ridge * penalty;
}

struct LogisticGradient {
    std::vector<double> weights;
    double bias = 0.0;

    double norm() const {
        double s = bias * bias;
        for (double g : weights) s += g * g;
        return std::sqrt(s);
    }
};

// Exact analytic gradient of logistic_loss.
inline LogisticGradient logistic_gradient(const Matrix& x, const std::vector<int>& y,
                                          std::span<const double> w, double bias, double ridge) {
    const std::size_t n = x.rows(), p = x.cols();
    LogisticGradient g;
    g.weights.assign(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * p;
        double z = bias;
        for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
        const double err = sigmoid(z) - static_cast<double>(y[i]);
        for (std::size_t j = 0; j < p; ++j) g.weights[j] += err * row[j];
        g.bias += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) g.weights[j] = g.weights[j] * inv_n + ridge * w[j];
    g.bias *= inv_n;
    return g;
}

// Full-batch gradient descent with backtracking halving of the step size.
inline std::unique_ptr<Model> train_logistic(const LearnerSpec& spec, const TrainData& data) {
    require_both_classes(data.y, "logistic");
    const auto& hp = spec.hyperparameters;
    const double ridge = hp.at("ridge");
    const double base_lr = hp.at("learning_rate");
    const std::size_t max_iters = static_cast<std::size_t>(hp.at("max_iterations"));
    const double tol = hp.at("tolerance");

    const std::size_t p = data.x.cols();
    std::vector<double> w(p, 0.0);
    double bias = 0.0;
    double loss = logistic_loss(data.x, data.y, w, bias, ridge);
    double lr = base_lr / 2.0;

    std::vector<double> cand(p);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        LogisticGradient g = logistic_gradient(data.x, data.y, w, bias, ridge);
        if (g.norm() < tol) break;
        double step = std::min(lr * 2.0, 1e6);
        double cand_bias = 0.0, cand_loss = 0.0;
        while (true) {
            for (std::size_t j = 0; j < p; ++j) cand[j] = w[j] - step * g.weights[j];
            cand_bias = bias - step * g.bias;
            cand_loss = logistic_loss(data.x, data.y, cand, cand_bias, ridge);
            if (cand_loss < loss || step < 1e-14) break;
            step /= 2.0;
        }
        if (cand_loss >= loss) break;  // no descent direction left at double precision
        w.swap(cand);
        bias = cand_bias;
        loss = cand_loss;
        lr = step;
    }
    return std::make_unique<LogisticModel>(LearnerFamily::logistic, std::move(w), bias);
}

// Minibatch stochastic gradient descent, shuffled each epoch from the seed.
inline std::unique_ptr<Model> train_sgd_logistic(const LearnerSpec& spec, const TrainData& data) {
    require_both_classes(data.y, "sgd_logistic");
    const auto& hp = spec.hyperparameters;
    const std::size_t batch_size = std::max<std::size_t>(1, static_cast<std::size_t>(hp.at("batch_size")));
    const double lr = hp.at("learning_rate");
    const std::size_t epochs = static_cast<std::size_t>(hp.at("epochs"));

    const std::size_t n = data.x.rows(), p = data.x.cols();
    std::vector<double> w(p, 0.0);
    double bias = 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> gw(p);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::mt19937_64 rng(mix_seed(spec.seed, epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(start + batch_size, n);
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                const double* row = data.x.data() + i * p;
                double z = bias;
                for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
                const double err = sigmoid(z) - static_cast<double>(data.y[i]);
                for (std::size_t j = 0; j < p; ++j) gw[j] += err * row[j];
                gb += err;
            }
            const double scale = lr / static_cast<double>(end - start);
            for (std::size_t j = 0; j < p; ++j) w[j] -= scale * gw[j];
            bias -= scale * gb;
        }
    }
    return std::make_unique<LogisticModel>(LearnerFamily::sgd_logistic, std::move(w), bias);
}

}  // namespace amipred
