#pragma once

#include <algorithm>
#include <future>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "amipred/features.hpp"
#include "amipred/learners.hpp"

namespace amipred {

struct FoldAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;  // instance index -> fold id
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_rows(std::size_t fold) const {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < assignment.size(); ++i)
            if (assignment[i] == fold) rows.push_back(i);
        return rows;
    }
    std::vector<std::size_t> train_rows(std::size_t fold) const {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < assignment.size(); ++i)
            if (assignment[i] != fold) rows.push_back(i);
        return rows;
    }
};

// Stratified assignment: within each class instances are shuffled by the
// seed and dealt round-robin, with the dealing position carried across
// classes so fold sizes stay within one of each other.
inline FoldAssignment stratified_folds(const std::vector<int>& labels, std::size_t k,
                                       std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (k < 2) throw ConfigError("stratified_folds: k must be at least 2");
    if (k > n) throw ConfigError("stratified_folds: k exceeds the instance count");
    bool pos = false, neg = false;
    for (int y : labels) (y ? pos : neg) = true;
    if (!pos || !neg) throw DataError("stratified_folds: both classes must be present");

    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.assignment.assign(n, 0);
    std::mt19937_64 rng(seed);
    std::size_t next_fold = 0;
    for (int cls : {1, 0}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if ((labels[i] != 0) == (cls != 0)) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t idx : members) {
            fa.assignment[idx] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    return fa;
}

struct Metrics {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    bool precision_degenerate = false;  // no positive predictions made
};

inline Metrics confusion_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ContractError("confusion_metrics: length mismatch");
    if (y_true.empty()) throw DataError("confusion_metrics: empty input");
    Metrics m;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i]) {
            (y_true[i] ? m.tp : m.fp)++;
        } else {
            (y_true[i] ? m.fn : m.tn)++;
        }
    }
    const double n = static_cast<double>(y_true.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    } else {
        m.precision = 0.0;
        m.precision_degenerate = true;
    }
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f_measure = m.precision + m.recall > 0.0
                      ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                      : 0.0;
    return m;
}

struct ROCPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

// One point per distinct score, swept from the highest threshold down;
// tied scores share a point. Endpoints (0,0) and (1,1) always present.
inline std::vector<ROCPoint> roc_curve(const std::vector<int>& y_true,
                                       const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw ContractError("roc_curve: length mismatch");
    long long total_pos = 0, total_neg = 0;
    for (int y : y_true) (y ? total_pos : total_neg)++;
    if (total_pos == 0 || total_neg == 0)
        throw DataError("roc_curve: both classes must be present");

    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<ROCPoint> points;
    points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (y_true[order[i]] ? tp : fp)++;
            ++i;
        }
        points.push_back({static_cast<double>(fp) / static_cast<double>(total_neg),
                          static_cast<double>(tp) / static_cast<double>(total_pos), s});
    }
    return points;
}

// Trapezoidal area under roc_curve; equals pair counting with half credit
// for ties.
inline double auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    const std::vector<ROCPoint> points = roc_curve(y_true, scores);
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    return area;
}

struct FoldMetrics {
    std::size_t fold = 0;
    Metrics metrics;
};

struct EvalReport {
    Metrics pooled;
    double auc = 0.0;
    std::vector<ROCPoint> roc;
    std::vector<FoldMetrics> per_fold;
    std::vector<double> pooled_scores;  // per instance, fold-held-out
    std::vector<int> labels;
};

namespace detail {

struct FoldResult {
    std::vector<std::size_t> rows;
    std::vector<double> scores;
    Metrics metrics;
};

inline FoldResult evaluate_fold(const LearnerSpec& spec, const FeatureMatrix& fm,
                                const FoldAssignment& folds, std::size_t fold) {
    FoldResult out;
    const std::vector<std::size_t> train_rows = folds.train_rows(fold);
    out.rows = folds.test_rows(fold);

    const bool standardize = wants_standardized_inputs(spec.family);
    const Standardizer st = Standardizer::fit(fm, train_rows, standardize);
    const Matrix train_x = st.apply(fm, train_rows);
    const Matrix test_x = st.apply(fm, out.rows);

    std::vector<int> train_y(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) train_y[i] = fm.labels[train_rows[i]];

    std::vector<Encoding> encodings;
    encodings.reserve(fm.schema.size());
    for (const auto& col : fm.schema.columns) encodings.push_back(col.encoding);

    LearnerSpec fold_spec = spec;
    fold_spec.seed = mix_seed(spec.seed, 0x0f0f0f0full + fold);
    const std::unique_ptr<Model> model = train(fold_spec, train_x, train_y, encodings);

    out.scores.resize(out.rows.size());
    std::vector<int> test_y(out.rows.size()), test_pred(out.rows.size());
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        out.scores[i] = model->predict_proba(test_x.row(i));
        test_y[i] = fm.labels[out.rows[i]];
        test_pred[i] = out.scores[i] >= 0.5 ? 1 : 0;
    }
    out.metrics = confusion_metrics(test_y, test_pred);
    return out;
}

}  // namespace detail

// Stratified k-fold cross-validation: per fold, the standardizer and
// imputer are fitted on the training rows only, the model is trained there,
// and the held-out rows are scored. Headline metrics pool the out-of-fold
// predictions; per-fold metrics are kept alongside.
inline EvalReport cross_validate(const LearnerSpec& spec, const FeatureMatrix& fm, std::size_t k,
                                 std::uint64_t seed, std::size_t workers = 1) {
    if (k < 2) throw ConfigError("cross_validate: k must be at least 2");
    const FoldAssignment folds = stratified_folds(fm.labels, k, seed);

    std::vector<detail::FoldResult> results(k);
    if (workers > 1) {
        std::vector<std::future<detail::FoldResult>> futures;
        futures.reserve(k);
        std::size_t next = 0;
        while (next < k) {
            const std::size_t batch = std::min(workers, k - next);
            for (std::size_t f = next; f < next + batch; ++f)
                futures.push_back(std::async(std::launch::async, detail::evaluate_fold,
                                             std::cref(spec), std::cref(fm), std::cref(folds), f));
            for (std::size_t f = next; f < next + batch; ++f)
                results[f] = futures[f].get();
            next += batch;
        }
    } else {
        for (std::size_t f = 0; f < k; ++f)
            results[f] = detail::evaluate_fold(spec, fm, folds, f);
    }

    EvalReport report;
    report.pooled_scores.assign(fm.rows(), 0.0);
    report.labels = fm.labels;
    std::vector<int> pooled_pred(fm.rows(), 0);
    for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t i = 0; i < results[f].rows.size(); ++i) {
            const std::size_t row = results[f].rows[i];
            report.pooled_scores[row] = results[f].scores[i];
            pooled_pred[row] = results[f].scores[i] >= 0.5 ? 1 : 0;
        }
        report.per_fold.push_back({f, results[f].metrics});
    }
    report.pooled = confusion_metrics(fm.labels, pooled_pred);
    report.auc = auc(fm.labels, report.pooled_scores);
    report.roc = roc_curve(fm.labels, report.pooled_scores);
    return report;
}

}  // namespace amipred
