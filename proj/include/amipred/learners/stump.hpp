#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

// Single threshold split on one feature; each side predicts its (weighted)
// majority class. Also the weak learner inside AdaBoost.
class StumpModel : public Model {
public:
    StumpModel(std::size_t feature, double threshold, double left_pos_frac, double right_pos_frac)
        : feature_(feature),
          threshold_(threshold),
          left_pos_frac_(left_pos_frac),
          right_pos_frac_(right_pos_frac) {}

    LearnerFamily family() const override { return LearnerFamily::stump; }

    double predict_proba(std::span<const double> row) const override {
        if (feature_ >= row.size()) throw ContractError("stump: row dimension mismatch");
        return row[feature_] < threshold_ ? left_pos_frac_ : right_pos_frac_;
    }

    std::size_t feature() const { return feature_; }
    double threshold() const { return threshold_; }

    void save(std::ostream& out) const override {
        out.precision(17);
        out << "split " << feature_ << " " << threshold_ << " " << left_pos_frac_ << " "
            << right_pos_frac_ << "\n";
    }
    static std::unique_ptr<StumpModel> load(std::istream& in) {
        detail::expect_token(in, "split");
        std::size_t f = 0;
        double t = 0, l = 0, r = 0;
        in >> f >> t >> l >> r;
        if (!in) throw DataError("truncated stump model");
        return std::make_unique<StumpModel>(f, t, l, r);
    }

private:
    std::size_t feature_;
    double threshold_;
    double left_pos_frac_;
    double right_pos_frac_;
};

namespace detail {

// Weighted stump fit minimizing weighted misclassification; ties broken by
// the first candidate in (feature, threshold) scan order.
inline StumpModel fit_stump(const Matrix& x, const std::vector<int>& y,
                            const std::vector<double>& weights) {
    const std::size_t n = x.rows(), p = x.cols();
    double total_pos = 0.0, total_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? total_pos : total_neg) += weights[i];
    const double total = total_pos + total_neg;

    // no-split fallback: both sides predict the global weighted majority
    double best_error = std::min(total_pos, total_neg);
    std::size_t best_feature = 0;
    double best_threshold = std::numeric_limits<double>::infinity();
    const double global_frac = total > 0.0 ? total_pos / total : 0.5;
    double best_left_frac = global_frac, best_right_frac = global_frac;

    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) order[i] = {x.at(i, j), i};
        std::sort(order.begin(), order.end());
        double left_pos = 0.0, left_neg = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t row = order[i].second;
            (y[row] ? left_pos : left_neg) += weights[row];
            if (order[i + 1].first == order[i].first) continue;
            const double right_pos = total_pos - left_pos;
            const double right_neg = total_neg - left_neg;
            // each side errs by its minority weight
            const double err = std::min(left_pos, left_neg) + std::min(right_pos, right_neg);
            if (err < best_error - 1e-15) {
                best_error = err;
                best_feature = j;
                best_threshold = (order[i].first + order[i + 1].first) / 2.0;
                const double lw = left_pos + left_neg, rw = right_pos + right_neg;
                best_left_frac = lw > 0.0 ? left_pos / lw : global_frac;
                best_right_frac = rw > 0.0 ? right_pos / rw : global_frac;
            }
        }
    }
    return StumpModel(best_feature, best_threshold, best_left_frac, best_right_frac);
}

}  // namespace detail

inline std::unique_ptr<Model> train_stump(const LearnerSpec&, const TrainData& data) {
    if (data.x.rows() == 0) throw DataError("stump: empty training set");
    std::vector<double> weights(data.x.rows(), 1.0 / static_cast<double>(data.x.rows()));
    return std::make_unique<StumpModel>(detail::fit_stump(data.x, data.y, weights));
}

}  // namespace amipred
