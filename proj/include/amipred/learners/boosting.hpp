#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "amipred/learners/base.hpp"
#include "amipred/learners/stump.hpp"

namespace amipred {

// Discrete AdaBoost over decision stumps; probability is the alpha-weighted
// fraction of members voting positive.
class AdaBoostModel : public Model {
public:
    struct Member {
        StumpModel stump;
        double alpha = 0.0;
    };

    explicit AdaBoostModel(std::vector<Member> members) : members_(std::move(members)) {}

    LearnerFamily family() const override { return LearnerFamily::adaboost; }

    double predict_proba(std::span<const double> row) const override {
        double pos = 0.0, total = 0.0;
        for (const auto& m : members_) {
            total += m.alpha;
            if (m.stump.predict_proba(row) >= 0.5) pos += m.alpha;
        }
        return total > 0.0 ? pos / total : 0.5;
    }

    const std::vector<Member>& members() const { return members_; }

    void save(std::ostream& out) const override {
        out << "members " << members_.size() << "\n";
        out.precision(17);
        for (const auto& m : members_) {
            out << m.alpha << "\n";
            m.stump.save(out);
        }
    }
    static std::unique_ptr<AdaBoostModel> load(std::istream& in) {
        detail::expect_token(in, "members");
        std::size_t count = 0;
        in >> count;
        std::vector<Member> members;
        members.reserve(count);
        for (std::size_t t = 0; t < count; ++t) {
            double alpha = 0.0;
            in >> alpha;
            auto stump = StumpModel::load(in);
            members.push_back({std::move(*stump), alpha});
        }
        return std::make_unique<AdaBoostModel>(std::move(members));
    }

private:
    std::vector<Member> members_;
};

inline std::unique_ptr<Model> train_adaboost(const LearnerSpec& spec, const TrainData& data) {
    require_both_classes(data.y, "adaboost");
    const std::size_t rounds =
        std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("rounds")));
    const std::size_t n = data.x.rows();

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<AdaBoostModel::Member> members;
    std::vector<int> pred(n);
    for (std::size_t t = 0; t < rounds; ++t) {
        StumpModel stump = detail::fit_stump(data.x, data.y, w);
        double eps = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = stump.predict_proba(data.x.row(i)) >= 0.5 ? 1 : 0;
            if (pred[i] != data.y[i]) eps += w[i];
        }
        if (eps >= 0.5) break;  // weak learner no better than chance
        const double bounded = std::max(eps, 1e-10);
        const double alpha = 0.5 * std::log((1.0 - bounded) / bounded);
        members.push_back({stump, alpha});
        if (eps <= 0.0) break;  // perfect member dominates the vote

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(pred[i] == data.y[i] ? -alpha : alpha);
            total += w[i];
        }
        for (double& wi : w) wi /= total;
    }
    if (members.empty()) {
        // fall back to the unweighted stump so the model is usable
        std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
        members.push_back({detail::fit_stump(data.x, data.y, uniform), 1.0});
    }
    return std::make_unique<AdaBoostModel>(std::move(members));
}

// LogitBoost with univariate least-squares regressors, the stand-in for the
// reference tooling's Simple Logistic.
class LogitBoostModel : public Model {
public:
    struct Member {
        std::size_t feature = 0;
        double intercept = 0.0;
        double slope = 0.0;
    };

    explicit LogitBoostModel(std::vector<Member> members) : members_(std::move(members)) {}

    LearnerFamily family() const override { return LearnerFamily::logitboost_simple_logistic; }

    double predict_proba(std::span<const double> row) const override {
        double f = 0.0;
        for (const auto& m : members_) {
            if (m.feature >= row.size()) throw ContractError("logitboost: row dimension mismatch");
            f += 0.5 * (m.intercept + m.slope * row[m.feature]);
        }
        return sigmoid(2.0 * f);
    }

    const std::vector<Member>& members() const { return members_; }

    void save(std::ostream& out) const override {
        out << "members " << members_.size() << "\n";
        out.precision(17);
        for (const auto& m : members_)
            out << m.feature << " " << m.intercept << " " << m.slope << "\n";
    }
    static std::unique_ptr<LogitBoostModel> load(std::istream& in) {
        detail::expect_token(in, "members");
        std::size_t count = 0;
        in >> count;
        std::vector<Member> members(count);
        for (auto& m : members) in >> m.feature >> m.intercept >> m.slope;
        if (!in) throw DataError("truncated logitboost model");
        return std::make_unique<LogitBoostModel>(std::move(members));
    }

private:
    std::vector<Member> members_;
};

inline std::unique_ptr<Model> train_logitboost(const LearnerSpec& spec, const TrainData& data) {
    require_both_classes(data.y, "logitboost_simple_logistic");
    const std::size_t rounds =
        std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("rounds")));
    const double z_max = spec.hyperparameters.at("z_max");
    const std::size_t n = data.x.rows(), p = data.x.cols();

    std::vector<double> f(n, 0.0), prob(n, 0.5), w(n), z(n);
    std::vector<LogitBoostModel::Member> members;
    for (std::size_t t = 0; t < rounds; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
            z[i] = (static_cast<double>(data.y[i]) - prob[i]) / w[i];
            z[i] = std::clamp(z[i], -z_max, z_max);
        }
        double w_total = 0.0, wz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w_total += w[i];
            wz += w[i] * z[i];
        }
        const double z_bar = wz / w_total;

        LogitBoostModel::Member best;
        double best_sse = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p; ++j) {
            double wx = 0.0;
            for (std::size_t i = 0; i < n; ++i) wx += w[i] * data.x.at(i, j);
            const double x_bar = wx / w_total;
            double sxx = 0.0, sxz = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dx = data.x.at(i, j) - x_bar;
                sxx += w[i] * dx * dx;
                sxz += w[i] * dx * (z[i] - z_bar);
            }
            const double slope = sxx > 0.0 ? sxz / sxx : 0.0;
            const double intercept = z_bar - slope * x_bar;
            double sse = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double resid = z[i] - (intercept + slope * data.x.at(i, j));
                sse += w[i] * resid * resid;
            }
            if (sse < best_sse - 1e-15) {
                best_sse = sse;
                best = {j, intercept, slope};
            }
        }
        members.push_back(best);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += 0.5 * (best.intercept + best.slope * data.x.at(i, best.feature));
            prob[i] = sigmoid(2.0 * f[i]);
        }
    }
    return std::make_unique<LogitBoostModel>(std::move(members));
}

}  // namespace amipred
