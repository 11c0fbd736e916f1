#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

// Holte's one-rule classifier: bucket each feature's sorted values with a
// minimum bucket size, predict the bucket majority, keep the feature with
// the lowest training error.
class OneRModel : public Model {
public:
    struct Bucket {
        double upper = std::numeric_limits<double>::infinity();  // values < upper fall here
        int prediction = 0;
        double positive_fraction = 0.0;
    };

    OneRModel(std::size_t feature, std::vector<Bucket> buckets)
        : feature_(feature), buckets_(std::move(buckets)) {}

    LearnerFamily family() const override { return LearnerFamily::oner; }

    double predict_proba(std::span<const double> row) const override {
        if (feature_ >= row.size()) throw ContractError("oner: row dimension mismatch");
        const double v = row[feature_];
        for (const auto& b : buckets_)
            if (v < b.upper) return b.positive_fraction;
        return buckets_.back().positive_fraction;
    }

    std::size_t feature() const { return feature_; }
    const std::vector<Bucket>& buckets() const { return buckets_; }

    void save(std::ostream& out) const override {
        out.precision(17);
        out << "feature " << feature_ << "\nbuckets " << buckets_.size() << "\n";
        for (const auto& b : buckets_)
            out << b.upper << " " << b.prediction << " " << b.positive_fraction << "\n";
    }
    static std::unique_ptr<OneRModel> load(std::istream& in) {
        detail::expect_token(in, "feature");
        std::size_t feature = 0;
        in >> feature;
        detail::expect_token(in, "buckets");
        std::size_t nb = 0;
        in >> nb;
        std::vector<Bucket> buckets(nb);
        for (auto& b : buckets) in >> b.upper >> b.prediction >> b.positive_fraction;
        if (!in) throw DataError("truncated oner model");
        return std::make_unique<OneRModel>(feature, std::move(buckets));
    }

private:
    std::size_t feature_;
    std::vector<Bucket> buckets_;
};

namespace detail {

struct OneRRule {
    std::vector<OneRModel::Bucket> buckets;
    long long errors = 0;
};

inline OneRRule oner_rule_for_feature(const Matrix& x, const std::vector<int>& y, std::size_t j,
                                      std::size_t min_bucket, int tie_class) {
    const std::size_t n = x.rows();
    std::vector<std::pair<double, int>> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = {x.at(i, j), y[i]};
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Buckets close at value boundaries once they hold min_bucket
    // instances; a short trailing bucket merges into its predecessor.
    struct Raw {
        long long pos = 0, neg = 0;
        double first = 0.0, last = 0.0;
    };
    std::vector<Raw> raw;
    Raw cur;
    long long in_bucket = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_bucket == 0) cur = Raw{0, 0, vals[i].first, vals[i].first};
        (vals[i].second ? cur.pos : cur.neg)++;
        cur.last = vals[i].first;
        ++in_bucket;
        const bool boundary = i + 1 == n || vals[i + 1].first != vals[i].first;
        if (boundary && in_bucket >= static_cast<long long>(min_bucket)) {
            raw.push_back(cur);
            in_bucket = 0;
        }
    }
    if (in_bucket > 0) {
        if (raw.empty()) {
            raw.push_back(cur);
        } else {
            raw.back().pos += cur.pos;
            raw.back().neg += cur.neg;
            raw.back().last = cur.last;
        }
    }

    OneRRule rule;
    for (std::size_t b = 0; b < raw.size(); ++b) {
        OneRModel::Bucket bucket;
        const long long total = raw[b].pos + raw[b].neg;
        bucket.prediction = raw[b].pos > raw[b].neg   ? 1
                            : raw[b].pos < raw[b].neg ? 0
                                                      : tie_class;
        bucket.positive_fraction = static_cast<double>(raw[b].pos) / static_cast<double>(total);
        bucket.upper = b + 1 < raw.size() ? (raw[b].last + raw[b + 1].first) / 2.0
                                          : std::numeric_limits<double>::infinity();
        rule.errors += bucket.prediction ? raw[b].neg : raw[b].pos;
        rule.buckets.push_back(bucket);
    }
    return rule;
}

}  // namespace detail

inline std::unique_ptr<Model> train_oner(const LearnerSpec& spec, const TrainData& data) {
    const std::size_t min_bucket =
        std::max<std::size_t>(1, static_cast<std::size_t>(spec.hyperparameters.at("min_bucket")));
    const std::size_t n = data.x.rows(), p = data.x.cols();
    if (n == 0 || p == 0) throw DataError("oner: empty training set");

    long long pos = 0;
    for (int v : data.y) pos += v ? 1 : 0;
    const int tie_class = 2 * pos > static_cast<long long>(n) ? 1 : 0;

    std::size_t best_feature = 0;
    detail::OneRRule best;
    best.errors = std::numeric_limits<long long>::max();
    for (std::size_t j = 0; j < p; ++j) {
        detail::OneRRule rule = detail::oner_rule_for_feature(data.x, data.y, j, min_bucket, tie_class);
        if (rule.errors < best.errors) {
            best = std::move(rule);
            best_feature = j;
        }
    }
    return std::make_unique<OneRModel>(best_feature, std::move(best.buckets));
}

}  // namespace amipred
