#pragma once

#include <vector>

#include "amipred/learners/base.hpp"

namespace amipred {

// Gaussian likelihoods for numeric columns, Laplace-plus-one Bernoulli
// counts for one-hot and binary columns; class priors unsmoothed.
class NaiveBayesModel : public Model {
public:
    struct Column {
        bool gaussian = true;
        // gaussian: per-class mean / variance; bernoulli: per-class P(x=1)
        double stat0[2] = {0.0, 0.0};  // mean or p1, indexed by class
        double stat1[2] = {1.0, 1.0};  // variance, gaussian only
    };

    NaiveBayesModel(double prior_pos, std::vector<Column> columns)
        : prior_pos_(prior_pos), columns_(std::move(columns)) {}

    LearnerFamily family() const override { return LearnerFamily::naive_bayes; }

    double predict_proba(std::span<const double> row) const override {
        if (row.size() != columns_.size())
            throw ContractError("naive_bayes: row dimension mismatch");
        if (prior_pos_ <= 0.0) return 0.0;
        if (prior_pos_ >= 1.0) return 1.0;
        double log_odds = std::log(prior_pos_) - std::log(1.0 - prior_pos_);
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            const Column& c = columns_[j];
            if (c.gaussian) {
                for (int cls = 0; cls < 2; ++cls) {
                    const double d = row[j] - c.stat0[cls];
                    const double ll = -0.5 * (std::log(2.0 * M_PI * c.stat1[cls]) + d * d / c.stat1[cls]);
                    log_odds += cls ? ll : -ll;
                }
            } else {
                const bool one = row[j] >= 0.5;
                for (int cls = 0; cls < 2; ++cls) {
                    const double ll = std::log(one ? c.stat0[cls] : 1.0 - c.stat0[cls]);
                    log_odds += cls ? ll : -ll;
                }
            }
        }
        return sigmoid(log_odds);
    }

    void save(std::ostream& out) const override {
        out.precision(17);
        out << "prior " << prior_pos_ << "\ncolumns " << columns_.size() << "\n";
        for (const auto& c : columns_)
            out << (c.gaussian ? "g " : "b ") << c.stat0[0] << " " << c.stat0[1] << " "
                << c.stat1[0] << " " << c.stat1[1] << "\n";
    }
    static std::unique_ptr<NaiveBayesModel> load(std::istream& in) {
        detail::expect_token(in, "prior");
        double prior = 0;
        in >> prior;
        detail::expect_token(in, "columns");
        std::size_t p = 0;
        in >> p;
        std::vector<Column> cols(p);
        for (auto& c : cols) {
            std::string kind;
            in >> kind >> c.stat0[0] >> c.stat0[1] >> c.stat1[0] >> c.stat1[1];
            c.gaussian = kind == "g";
        }
        if (!in) throw DataError("truncated naive_bayes model");
        return std::make_unique<NaiveBayesModel>(prior, std::move(cols));
    }

private:
    double prior_pos_;
    std::vector<Column> columns_;
};

inline std::unique_ptr<Model> train_naive_bayes(const LearnerSpec& spec, const TrainData& data) {
    const double var_floor = spec.hyperparameters.at("variance_floor");
    const std::size_t n = data.x.rows(), p = data.x.cols();
    if (n == 0) throw DataError("naive_bayes: empty training set");

    std::size_t count[2] = {0, 0};
    for (int v : data.y) ++count[v ? 1 : 0];

    std::vector<NaiveBayesModel::Column> cols(p);
    for (std::size_t j = 0; j < p; ++j) {
        NaiveBayesModel::Column& c = cols[j];
        c.gaussian = data.encoding(j) == Encoding::numeric;
        if (c.gaussian) {
            double sum[2] = {0, 0};
            for (std::size_t i = 0; i < n; ++i) sum[data.y[i] ? 1 : 0] += data.x.at(i, j);
            for (int cls = 0; cls < 2; ++cls)
                c.stat0[cls] = count[cls] ? sum[cls] / static_cast<double>(count[cls]) : 0.0;
            double ss[2] = {0, 0};
            for (std::size_t i = 0; i < n; ++i) {
                const int cls = data.y[i] ? 1 : 0;
                const double d = data.x.at(i, j) - c.stat0[cls];
                ss[cls] += d * d;
            }
            for (int cls = 0; cls < 2; ++cls) {
                const double var = count[cls] ? ss[cls] / static_cast<double>(count[cls]) : 0.0;
                c.stat1[cls] = std::max(var, var_floor);
            }
        } else {
            double ones[2] = {0, 0};
            for (std::size_t i = 0; i < n; ++i)
                if (data.x.at(i, j) >= 0.5) ones[data.y[i] ? 1 : 0] += 1.0;
            for (int cls = 0; cls < 2; ++cls)
                c.stat0[cls] = (ones[cls] + 1.0) / (static_cast<double>(count[cls]) + 2.0);
        }
    }
    const double prior_pos = static_cast<double>(count[1]) / static_cast<double>(n);
    return std::make_unique<NaiveBayesModel>(prior_pos, std::move(cols));
}

}  // namespace amipred
